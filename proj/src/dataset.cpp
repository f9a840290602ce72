#include "fpp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace fpp {

std::string split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    throw std::logic_error("split_name: unknown split");
}

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::Train;
    if (name == "val") return Split::Val;
    if (name == "test") return Split::Test;
    throw std::runtime_error("unknown split '" + name + "'");
}

void SplitPolicy::validate() const {
    if (!(train >= 0.0 && val >= 0.0 && test >= 0.0))
        throw std::invalid_argument("SplitPolicy: fractions must be non-negative");
    if (std::abs(train + val + test - 1.0) > 1e-9)
        throw std::invalid_argument("SplitPolicy: fractions must sum to 1");
}

RigidTransform viewpoint_pose(const RigidTransform& base, int i) {
    // Model-side composition: the object spins about its own vertical axis.
    return {base.rotation * rotation_z(60.0 * i), base.translation};
}

std::vector<RigidTransform> viewpoint_poses(const RigidTransform& base) {
    std::vector<RigidTransform> poses;
    poses.reserve(6);
    for (int i = 0; i < 6; ++i) poses.push_back(viewpoint_pose(base, i));
    return poses;
}

namespace {

double next_uniform(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1p-53; }

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + next_uniform(rng) * (hi - lo);
}

Mat3 rotation_y(double deg) {
    double t = deg * kPi / 180.0;
    double c = std::cos(t), s = std::sin(t);
    return Mat3{{c, 0, s, 0, 1, 0, -s, 0, c}};
}

/// Pose looking from center toward target, world +z up, model axes
/// x-right / y-down / z-forward.
RigidTransform lookat_pose(const Vec3& center, const Vec3& target) {
    Vec3 f = normalized(target - center);
    Vec3 x = normalized(cross(f, Vec3{0, 0, 1}));
    Vec3 y = cross(f, x);
    return {Mat3::from_columns(x, y, f), center};
}

}  // namespace

std::map<std::string, Split> assign_splits(const std::vector<std::string>& object_ids,
                                           const SplitPolicy& policy) {
    policy.validate();
    const size_t n = object_ids.size();
    if (n < 3) throw std::invalid_argument("assign_splits: need at least 3 objects");
    std::vector<std::string> shuffled = object_ids;
    std::mt19937_64 rng(policy.seed);
    for (size_t i = n - 1; i > 0; --i) {
        size_t j = size_t(rng() % (i + 1));  // seeded Fisher-Yates
        std::swap(shuffled[i], shuffled[j]);
    }
    size_t n_val = size_t(std::floor(policy.val * double(n)));
    size_t n_test = size_t(std::floor(policy.test * double(n)));
    size_t n_train = n - n_val - n_test;
    std::map<std::string, Split> out;
    for (size_t i = 0; i < n; ++i) {
        Split s = i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
        if (!out.emplace(shuffled[i], s).second)
            throw std::invalid_argument("assign_splits: duplicate object id '" + shuffled[i] + "'");
    }
    return out;
}

Rig make_default_rig(int camera_width_px, int camera_height_px) {
    // Camera: 0.5 m focal, 0.209995 m x 0.152908 m aperture, at the world
    // origin looking along +x. Projector: 912x1140 pattern over a
    // 0.5 m x 0.625 m footprint at a 1.8 m throw, 0.125 m to the camera's
    // left (+y) and 0.1 m below (-z), toed in to the camera axis at 1.8 m.
    Rig rig;
    rig.camera = pinhole_from_physical(camera_width_px, camera_height_px, 0.5, 0.209995,
                                       0.152908, lookat_pose({0, 0, 0}, {1, 0, 0}));
    rig.projector = pinhole_from_physical(912, 1140, 1.8, 0.5, 0.625,
                                          lookat_pose({0, 0.125, -0.1}, {1.8, 0, 0}));
    return rig;
}

Primitive make_background_wall(double distance_m) {
    if (!(distance_m > 0.0))
        throw std::invalid_argument("make_background_wall: distance must be positive");
    Primitive wall;
    wall.kind = ShapeKind::Plane;
    // Model z-axis (the plane normal) faces back toward the camera.
    wall.pose.rotation = Mat3::from_columns({0, 1, 0}, {0, 0, -1}, {-1, 0, 0});
    wall.pose.translation = {distance_m, 0, 0};
    wall.material = Material{0.8, 0.05};
    wall.is_background = true;
    return wall;
}

std::vector<SceneObject> make_object_library(int count, uint64_t seed) {
    if (count < 1) throw std::invalid_argument("make_object_library: count must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<SceneObject> objects;
    objects.reserve(size_t(count));
    for (int i = 0; i < count; ++i) {
        Primitive p;
        switch (i % 4) {
            case 0:
                p.kind = ShapeKind::Sphere;
                p.radius = uniform_in(rng, 0.035, 0.055);
                break;
            case 1:
                p.kind = ShapeKind::Box;
                p.half_extents = {uniform_in(rng, 0.03, 0.06), uniform_in(rng, 0.03, 0.06),
                                  uniform_in(rng, 0.03, 0.06)};
                break;
            case 2:
                p.kind = ShapeKind::Cylinder;
                p.radius = uniform_in(rng, 0.03, 0.05);
                p.half_height = uniform_in(rng, 0.04, 0.07);
                break;
            default: {
                p.kind = ShapeKind::Mesh;
                Vec3 axes{uniform_in(rng, 0.035, 0.06), uniform_in(rng, 0.035, 0.06),
                          uniform_in(rng, 0.035, 0.06)};
                double e1 = uniform_in(rng, 0.4, 1.6);
                double e2 = uniform_in(rng, 0.4, 1.6);
                p.mesh = std::make_shared<TriangleMesh>(make_superellipsoid(axes, e1, e2, 48, 32));
                break;
            }
        }
        p.pose.rotation = rotation_z(uniform_in(rng, 0.0, 360.0)) *
                          rotation_y(uniform_in(rng, -20.0, 20.0));
        p.pose.translation = {uniform_in(rng, 1.65, 1.9), uniform_in(rng, -0.08, 0.12),
                              uniform_in(rng, -0.08, 0.08)};
        p.material.albedo = uniform_in(rng, 0.6, 0.95);
        p.material.ambient = 0.05;
        char id[16];
        std::snprintf(id, sizeof id, "obj_%03d", i);
        objects.push_back({id, p});
    }
    return objects;
}

namespace {

using ojson = nlohmann::ordered_json;

ojson schedule_json(const PatternSchedule& s) {
    ojson j;
    j["n_phase"] = s.n_phase;
    j["period_px"] = s.period_px;
    j["n_gray_bits"] = s.n_gray_bits;
    j["include_inverse_gray"] = s.include_inverse_gray;
    j["include_white_black"] = s.include_white_black;
    return j;
}

}  // namespace

std::string manifest_to_json_text(const Manifest& m) {
    ojson j;
    j["schema_version"] = m.schema_version;
    j["schedule"] = schedule_json(m.schedule);
    ojson counts;
    counts["objects"] = m.n_objects;
    counts["viewpoints_per_object"] = m.viewpoints_per_object;
    counts["patterns_per_view"] = m.schedule.pattern_count();
    counts["fringe_files"] = m.n_objects * m.viewpoints_per_object * m.schedule.pattern_count();
    counts["gt_maps"] = m.n_objects * m.viewpoints_per_object;
    j["counts"] = counts;
    j["entries"] = ojson::array();
    for (const ManifestEntry& e : m.entries) {
        ojson ej;
        ej["object_id"] = e.object_id;
        ej["viewpoint_index"] = e.viewpoint_index;
        ej["split"] = split_name(e.split);
        ej["fringe_paths"] = e.fringe_paths;
        ej["gt_path"] = e.gt_path;
        j["entries"].push_back(ej);
    }
    return j.dump(2);
}

Manifest manifest_from_json_text(const std::string& text) {
    ojson j = ojson::parse(text);
    Manifest m;
    m.schema_version = j.at("schema_version").get<int>();
    if (m.schema_version != 1)
        throw std::runtime_error("manifest: unsupported schema_version " +
                                 std::to_string(m.schema_version));
    m.schedule = schedule_from_json_text(j.at("schedule").dump());
    m.n_objects = j.at("counts").at("objects").get<int>();
    m.viewpoints_per_object = j.at("counts").at("viewpoints_per_object").get<int>();
    std::map<std::string, std::set<int>> views;
    std::map<std::string, Split> object_split;
    for (const auto& ej : j.at("entries")) {
        ManifestEntry e;
        e.object_id = ej.at("object_id").get<std::string>();
        e.viewpoint_index = ej.at("viewpoint_index").get<int>();
        e.split = split_from_name(ej.at("split").get<std::string>());
        e.fringe_paths = ej.at("fringe_paths").get<std::vector<std::string>>();
        e.gt_path = ej.at("gt_path").get<std::string>();
        if (int(e.fringe_paths.size()) != m.schedule.pattern_count())
            throw std::runtime_error("manifest: entry '" + e.object_id +
                                     "' fringe count does not match the schedule");
        if (!views[e.object_id].insert(e.viewpoint_index).second)
            throw std::runtime_error("manifest: duplicate viewpoint for '" + e.object_id + "'");
        auto [it, fresh] = object_split.emplace(e.object_id, e.split);
        if (!fresh && it->second != e.split)
            throw std::runtime_error("manifest: object '" + e.object_id +
                                     "' straddles splits");
        m.entries.push_back(std::move(e));
    }
    for (const auto& [id, v] : views)
        if (int(v.size()) != m.viewpoints_per_object)
            throw std::runtime_error("manifest: object '" + id + "' has " +
                                     std::to_string(v.size()) + " viewpoints, expected " +
                                     std::to_string(m.viewpoints_per_object));
    return m;
}

void save_manifest(const Manifest& m, const std::filesystem::path& path) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("save_manifest: cannot open " + tmp.string());
        out << manifest_to_json_text(m) << "\n";
        if (!out) throw std::runtime_error("save_manifest: short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_manifest: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return manifest_from_json_text(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_manifest: " + path.string() + ": " + e.what());
    }
}

DatasetResult build_dataset(const std::vector<SceneObject>& objects, const Rig& rig,
                            const PatternSchedule& schedule, const SplitPolicy& split,
                            const std::filesystem::path& out_dir,
                            const RenderConfig& render_config, double background_distance_m) {
    if (objects.size() < 3)
        throw std::invalid_argument("build_dataset: need at least 3 objects for a split");
    schedule.validate(rig.projector.width_px);
    std::filesystem::create_directories(out_dir);
    auto manifest_path = out_dir / "manifest.json";
    std::filesystem::remove(manifest_path);  // never leave a stale manifest

    std::vector<std::string> ids;
    ids.reserve(objects.size());
    for (const SceneObject& o : objects) ids.push_back(o.id);
    auto splits = assign_splits(ids, split);

    save_rig(rig, out_dir / "calib.json");
    save_schedule(schedule, out_dir / "schedule.json");

    Primitive wall = make_background_wall(background_distance_m);
    Manifest manifest;
    manifest.schedule = schedule;
    manifest.n_objects = int(objects.size());

    for (const SceneObject& obj : objects) {
        std::filesystem::create_directories(out_dir / obj.id);
        for (int v = 0; v < 6; ++v) {
            Primitive posed = obj.primitive;
            posed.pose = viewpoint_pose(obj.primitive.pose, v);
            Scene scene({wall, posed});
            RenderResult rendered =
                render_sequence(scene, rig.camera, rig.projector, schedule, render_config);
            write_sequence_pgm(rendered.sequence, out_dir / obj.id, v);
            std::string gt_rel = obj.id + "/view" + std::to_string(v) + "_gt.fppd";
            write_depth(rendered.ground_truth, out_dir / gt_rel);

            ManifestEntry entry;
            entry.object_id = obj.id;
            entry.viewpoint_index = v;
            entry.split = splits.at(obj.id);
            entry.gt_path = gt_rel;
            for (size_t f = 0; f < rendered.sequence.frames.size(); ++f)
                entry.fringe_paths.push_back(obj.id + "/" + frame_filename(v, int(f)));
            manifest.entries.push_back(std::move(entry));
        }
    }
    save_manifest(manifest, manifest_path);
    return {std::move(manifest), manifest_path};
}

ImageF mask_background(const ImageF& fringe, const DepthMap& gt) {
    if (fringe.width != gt.width || fringe.height != gt.height)
        throw std::invalid_argument("mask_background: dimension mismatch");
    ImageF out = fringe;
    for (size_t i = 0; i < out.pix.size(); ++i)
        if (gt.values[i] == 0.0) out.pix[i] = 0.0;
    return out;
}

DatasetResult mask_background_dataset(const std::filesystem::path& manifest_path,
                                      const std::filesystem::path& out_dir) {
    Manifest manifest = load_manifest(manifest_path);
    auto base = manifest_path.parent_path();
    std::filesystem::create_directories(out_dir);
    std::filesystem::remove(out_dir / "manifest.json");
    for (const char* aux : {"calib.json", "schedule.json"})
        if (std::filesystem::exists(base / aux))
            std::filesystem::copy_file(base / aux, out_dir / aux,
                                       std::filesystem::copy_options::overwrite_existing);

    for (const ManifestEntry& entry : manifest.entries) {
        DepthMap gt = read_depth(base / entry.gt_path);
        std::filesystem::create_directories((out_dir / entry.gt_path).parent_path());
        write_depth(gt, out_dir / entry.gt_path);
        for (const std::string& rel : entry.fringe_paths) {
            ImageF masked = mask_background(read_pgm16(base / rel), gt);
            std::filesystem::create_directories((out_dir / rel).parent_path());
            write_pgm16(masked, out_dir / rel);
        }
    }
    save_manifest(manifest, out_dir / "manifest.json");
    return {std::move(manifest), out_dir / "manifest.json"};
}

DepthMap baseline_zero(int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("baseline_zero: bad dimensions");
    DepthMap d(width, height);
    d.norm = DepthNorm::RawMillimeters;
    return d;
}

double mean_object_depth_mm(const std::vector<DepthMap>& raw_maps) {
    double sum = 0.0;
    long n = 0;
    for (const DepthMap& m : raw_maps) {
        if (m.norm != DepthNorm::RawMillimeters)
            throw std::invalid_argument("mean_object_depth_mm: maps must be raw millimeters");
        for (double v : m.values)
            if (v > 0.0) {
                sum += v;
                ++n;
            }
    }
    if (n == 0) throw std::invalid_argument("mean_object_depth_mm: no object pixels");
    return sum / double(n);
}

DepthMap baseline_constant_mean(const DepthMap& gt_raw, double mean_depth_mm) {
    DepthMap pred(gt_raw.width, gt_raw.height);
    pred.norm = DepthNorm::RawMillimeters;
    for (size_t i = 0; i < gt_raw.values.size(); ++i)
        if (gt_raw.values[i] > 0.0) pred.values[i] = mean_depth_mm;
    return pred;
}

DepthMap baseline_plane_fit(const DepthMap& gt_raw) {
    // Least-squares depth = a*x + b*y + c over object pixels.
    double sxx = 0, sxy = 0, sx = 0, syy = 0, sy = 0, s1 = 0;
    double sxd = 0, syd = 0, sd = 0;
    for (int y = 0; y < gt_raw.height; ++y)
        for (int x = 0; x < gt_raw.width; ++x) {
            double d = gt_raw.at(x, y);
            if (d <= 0.0) continue;
            sxx += double(x) * x;
            sxy += double(x) * y;
            sx += x;
            syy += double(y) * y;
            sy += y;
            s1 += 1;
            sxd += x * d;
            syd += y * d;
            sd += d;
        }
    if (s1 < 3) throw std::invalid_argument("baseline_plane_fit: fewer than 3 object pixels");
    double a[3][4] = {{sxx, sxy, sx, sxd}, {sxy, syy, sy, syd}, {sx, sy, s1, sd}};
    for (int col = 0; col < 3; ++col) {  // Gaussian elimination with partial pivoting
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12)
            throw std::invalid_argument("baseline_plane_fit: degenerate pixel configuration");
        std::swap(a[col], a[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
        }
    }
    double pa = a[0][3] / a[0][0], pb = a[1][3] / a[1][1], pc = a[2][3] / a[2][2];
    DepthMap pred(gt_raw.width, gt_raw.height);
    pred.norm = DepthNorm::RawMillimeters;
    for (int y = 0; y < gt_raw.height; ++y)
        for (int x = 0; x < gt_raw.width; ++x)
            if (gt_raw.at(x, y) > 0.0)
                pred.at(x, y) = std::fmax(0.0, pa * x + pb * y + pc);
    return pred;
}

DepthMap baseline_classical(const FringeSequence& seq, const PinholeModel& camera,
                            const PinholeModel& projector, const ReconstructOptions& options) {
    return reconstruct_pipeline(seq, camera, projector, options);
}

}  // namespace fpp
