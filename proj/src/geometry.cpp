#include "fpp/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fpp {

bool is_orthonormal(const Mat3& r, double tol) {
    Mat3 rtr = r.transposed() * r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double expect = i == j ? 1.0 : 0.0;
            if (std::abs(rtr(i, j) - expect) > tol) return false;
        }
    return std::abs(r.det() - 1.0) <= tol;
}

Mat3 rotation_z(double theta_degrees) {
    if (!std::isfinite(theta_degrees))
        throw std::invalid_argument("rotation_z: angle must be finite");
    double t = theta_degrees * kPi / 180.0;
    double c = std::cos(t), s = std::sin(t);
    return Mat3{{c, -s, 0, s, c, 0, 0, 0, 1}};
}

void PinholeModel::validate() const {
    if (width_px <= 0 || height_px <= 0)
        throw std::invalid_argument("PinholeModel: resolution must be positive");
    if (!(fx > 0.0) || !(fy > 0.0))
        throw std::invalid_argument("PinholeModel: focal lengths must be positive");
    if (!(cx >= 0.0 && cx < width_px) || !(cy >= 0.0 && cy < height_px))
        throw std::invalid_argument("PinholeModel: principal point outside the image");
    if (!is_orthonormal(pose.rotation))
        throw std::invalid_argument("PinholeModel: rotation is not orthonormal");
}

PinholeModel pinhole_from_physical(int width_px, int height_px, double focal_length_m,
                                   double aperture_h_m, double aperture_v_m,
                                   const RigidTransform& pose) {
    if (!(focal_length_m > 0.0) || !(aperture_h_m > 0.0) || !(aperture_v_m > 0.0))
        throw std::invalid_argument("pinhole_from_physical: optics must be positive");
    PinholeModel m;
    m.width_px = width_px;
    m.height_px = height_px;
    m.fx = focal_length_m / aperture_h_m * width_px;
    m.fy = focal_length_m / aperture_v_m * height_px;
    m.cx = (width_px - 1) / 2.0;
    m.cy = (height_px - 1) / 2.0;
    m.pose = pose;
    m.validate();
    return m;
}

Ray pixel_to_ray(const PinholeModel& model, double u, double v) {
    if (!std::isfinite(u) || !std::isfinite(v) || u < 0.0 || u >= model.width_px || v < 0.0 ||
        v >= model.height_px) {
        std::ostringstream os;
        os << "pixel_to_ray: pixel (" << u << ", " << v << ") outside " << model.width_px << "x"
           << model.height_px;
        throw std::invalid_argument(os.str());
    }
    Vec3 dir_model{(u - model.cx) / model.fx, (v - model.cy) / model.fy, 1.0};
    return Ray{model.optical_center(), normalized(model.pose.rotation * dir_model)};
}

std::optional<Pixel> try_project_point(const PinholeModel& model, const Vec3& p_world) {
    Vec3 pm = model.pose.rotation.transposed() * (p_world - model.pose.translation);
    if (!(pm.z > 0.0)) return std::nullopt;
    return Pixel{model.fx * pm.x / pm.z + model.cx, model.fy * pm.y / pm.z + model.cy};
}

Pixel project_point(const PinholeModel& model, const Vec3& p_world) {
    auto px = try_project_point(model, p_world);
    if (!px) throw std::domain_error("project_point: point behind the model");
    return *px;
}

Plane projector_column_plane(const PinholeModel& proj, double x_p) {
    if (!std::isfinite(x_p) || x_p < 0.0 || x_p >= proj.width_px)
        throw std::invalid_argument("projector_column_plane: x_p outside the pattern");
    // In the model frame every ray of column x_p has direction
    // ((x_p-cx)/fx, t, 1); (fx, 0, cx-x_p) is orthogonal to all of them.
    Vec3 n_model = normalized(Vec3{proj.fx, 0.0, proj.cx - x_p});
    Vec3 n = proj.pose.rotation * n_model;
    return Plane{n, dot(n, proj.optical_center())};
}

std::optional<Vec3> ray_plane_intersect(const Ray& r, const Plane& pl) {
    double denom = dot(pl.normal, r.direction);
    if (std::abs(denom) < 1e-12) return std::nullopt;
    double t = (pl.offset - dot(pl.normal, r.origin)) / denom;
    if (!(t > 0.0)) return std::nullopt;
    return r.origin + t * r.direction;
}

double reprojection_error(const PinholeModel& model, std::span<const Vec3> points,
                          std::span<const Pixel> observed) {
    if (points.empty() || points.size() != observed.size())
        throw std::invalid_argument("reprojection_error: need equal-length non-empty lists");
    double sq = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
        Pixel p = project_point(model, points[i]);
        double du = p.u - observed[i].u;
        double dv = p.v - observed[i].v;
        sq += du * du + dv * dv;
    }
    return std::sqrt(sq / double(points.size()));
}

namespace {

using nlohmann::json;

void require_keys(const json& j, std::initializer_list<const char*> keys, const char* what) {
    for (const char* k : keys)
        if (!j.contains(k))
            throw std::runtime_error(std::string(what) + ": missing key '" + k + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known)
            throw std::runtime_error(std::string(what) + ": unknown key '" + it.key() + "'");
    }
}

PinholeModel pinhole_from_json(const json& j) {
    require_keys(j,
                 {"width_px", "height_px", "focal_length_m", "aperture_h_m", "aperture_v_m",
                  "rotation", "translation_m"},
                 "pinhole");
    auto rot = j.at("rotation").get<std::vector<double>>();
    auto tr = j.at("translation_m").get<std::vector<double>>();
    if (rot.size() != 9) throw std::runtime_error("pinhole: rotation needs 9 numbers");
    if (tr.size() != 3) throw std::runtime_error("pinhole: translation_m needs 3 numbers");
    RigidTransform pose;
    for (int i = 0; i < 9; ++i) pose.rotation.m[i] = rot[i];
    pose.translation = {tr[0], tr[1], tr[2]};
    return pinhole_from_physical(j.at("width_px").get<int>(), j.at("height_px").get<int>(),
                                 j.at("focal_length_m").get<double>(),
                                 j.at("aperture_h_m").get<double>(),
                                 j.at("aperture_v_m").get<double>(), pose);
}

json pinhole_to_json(const PinholeModel& m, double focal_length_m, double aperture_h_m,
                     double aperture_v_m) {
    json j;
    j["width_px"] = m.width_px;
    j["height_px"] = m.height_px;
    j["focal_length_m"] = focal_length_m;
    j["aperture_h_m"] = aperture_h_m;
    j["aperture_v_m"] = aperture_v_m;
    j["rotation"] = std::vector<double>(m.pose.rotation.m, m.pose.rotation.m + 9);
    j["translation_m"] =
        std::vector<double>{m.pose.translation.x, m.pose.translation.y, m.pose.translation.z};
    return j;
}

}  // namespace

PinholeModel pinhole_from_json_text(const std::string& text) {
    return pinhole_from_json(json::parse(text));
}

Rig load_rig(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_rig: cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_rig: " + path.string() + ": " + e.what());
    }
    require_keys(j, {"camera", "projector"}, "rig");
    return Rig{pinhole_from_json(j.at("camera")), pinhole_from_json(j.at("projector"))};
}

void save_rig(const Rig& rig, const std::filesystem::path& path) {
    // Recover the physical description from pixel intrinsics; the focal is
    // reported as a unit length so aperture ratios stay exact.
    auto describe = [](const PinholeModel& m) {
        double f = 1.0;
        return pinhole_to_json(m, f, f * m.width_px / m.fx, f * m.height_px / m.fy);
    };
    json j;
    j["camera"] = describe(rig.camera);
    j["projector"] = describe(rig.projector);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_rig: cannot open " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace fpp
