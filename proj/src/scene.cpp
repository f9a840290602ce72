#include "fpp/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace fpp {

namespace {

constexpr double kMinHitT = 1e-9;
constexpr double kDegenerateArea2 = 1e-24;  // squared parallelogram area

}  // namespace

void Material::validate() const {
    if (!(albedo >= 0.0 && albedo <= 1.0) || !(ambient >= 0.0 && ambient <= 1.0))
        throw std::invalid_argument("Material: albedo and ambient must lie in [0,1]");
}

std::optional<double> intersect_triangle(const Ray& ray, const Triangle& tri) {
    // Moller-Trumbore.
    Vec3 e1 = tri.b - tri.a;
    Vec3 e2 = tri.c - tri.a;
    Vec3 p = cross(ray.direction, e2);
    double det = dot(e1, p);
    if (std::abs(det) < 1e-15) return std::nullopt;
    double inv = 1.0 / det;
    Vec3 s = ray.origin - tri.a;
    double u = dot(s, p) * inv;
    if (u < 0.0 || u > 1.0) return std::nullopt;
    Vec3 q = cross(s, e1);
    double v = dot(ray.direction, q) * inv;
    if (v < 0.0 || u + v > 1.0) return std::nullopt;
    double t = dot(e2, q) * inv;
    if (t <= kMinHitT) return std::nullopt;
    return t;
}

std::optional<TriHit> intersect_triangles_exhaustive(std::span<const Triangle> tris,
                                                     const Ray& ray) {
    std::optional<TriHit> best;
    for (size_t i = 0; i < tris.size(); ++i) {
        auto t = intersect_triangle(ray, tris[i]);
        if (t && (!best || *t < best->t)) {
            Vec3 n = cross(tris[i].b - tris[i].a, tris[i].c - tris[i].a);
            best = TriHit{*t, normalized(n), int(i)};
        }
    }
    return best;
}

TriangleMesh::TriangleMesh(std::vector<Triangle> tris) {
    tris_.reserve(tris.size());
    for (const Triangle& t : tris) {
        Vec3 n = cross(t.b - t.a, t.c - t.a);
        if (dot(n, n) > kDegenerateArea2) tris_.push_back(t);
    }
    if (tris_.empty())
        throw std::invalid_argument("TriangleMesh: no non-degenerate triangles");
    std::vector<int> idx(tris_.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = int(i);
    nodes_.reserve(2 * tris_.size());
    build(idx, 0, int(idx.size()));
}

int TriangleMesh::build(std::vector<int>& idx, int begin, int end) {
    Node node;
    for (int i = begin; i < end; ++i) {
        node.box.grow(tris_[idx[i]].a);
        node.box.grow(tris_[idx[i]].b);
        node.box.grow(tris_[idx[i]].c);
    }
    int self = int(nodes_.size());
    nodes_.push_back(node);
    if (end - begin <= 4) {
        nodes_[self].first = int(order_.size());
        nodes_[self].count = end - begin;
        for (int i = begin; i < end; ++i) order_.push_back(idx[i]);
        return self;
    }
    // Median split along the widest centroid axis.
    Aabb cb;
    for (int i = begin; i < end; ++i) {
        const Triangle& t = tris_[idx[i]];
        cb.grow((t.a + t.b + t.c) / 3.0);
    }
    Vec3 ext = cb.hi - cb.lo;
    int axis = ext.x >= ext.y && ext.x >= ext.z ? 0 : (ext.y >= ext.z ? 1 : 2);
    auto centroid = [&](int ti) {
        const Triangle& t = tris_[ti];
        Vec3 c = (t.a + t.b + t.c) / 3.0;
        return axis == 0 ? c.x : axis == 1 ? c.y : c.z;
    };
    int mid = (begin + end) / 2;
    std::nth_element(idx.begin() + begin, idx.begin() + mid, idx.begin() + end,
                     [&](int a, int b) { return centroid(a) < centroid(b); });
    int l = build(idx, begin, mid);
    int r = build(idx, mid, end);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
}

namespace {

bool aabb_hit(const Aabb& b, const Vec3& o, const Vec3& d, const Vec3& inv_d, double t_max) {
    double tmin = -1e300, tmax = 1e300;
    const double lo[3] = {b.lo.x, b.lo.y, b.lo.z}, hi[3] = {b.hi.x, b.hi.y, b.hi.z};
    const double oo[3] = {o.x, o.y, o.z}, dd[3] = {d.x, d.y, d.z};
    const double ii[3] = {inv_d.x, inv_d.y, inv_d.z};
    for (int a = 0; a < 3; ++a) {
        if (dd[a] == 0.0) {
            // Parallel slab: a zero component times an infinite inverse is
            // NaN, so test containment directly.
            if (oo[a] < lo[a] || oo[a] > hi[a]) return false;
            continue;
        }
        double t0 = (lo[a] - oo[a]) * ii[a];
        double t1 = (hi[a] - oo[a]) * ii[a];
        tmin = std::fmax(tmin, std::fmin(t0, t1));
        tmax = std::fmin(tmax, std::fmax(t0, t1));
    }
    return tmax >= std::fmax(tmin, 0.0) && tmin <= t_max;
}

}  // namespace

std::optional<TriHit> TriangleMesh::intersect(const Ray& ray) const {
    Vec3 inv{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
    std::optional<TriHit> best;
    double t_max = 1e300;
    int stack[64];
    int sp = 0;
    stack[sp++] = 0;
    while (sp > 0) {
        const Node& node = nodes_[stack[--sp]];
        if (!aabb_hit(node.box, ray.origin, ray.direction, inv, t_max)) continue;
        if (node.left < 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                int ti = order_[i];
                auto t = intersect_triangle(ray, tris_[ti]);
                if (t && (!best || *t < best->t)) {
                    Vec3 n = cross(tris_[ti].b - tris_[ti].a, tris_[ti].c - tris_[ti].a);
                    best = TriHit{*t, normalized(n), ti};
                    t_max = *t;
                }
            }
        } else {
            stack[sp++] = node.left;
            stack[sp++] = node.right;
        }
    }
    return best;
}

Aabb TriangleMesh::bounds() const { return nodes_.empty() ? Aabb{} : nodes_[0].box; }

void Primitive::validate() const {
    material.validate();
    if (!is_orthonormal(pose.rotation))
        throw std::invalid_argument("Primitive: pose rotation is not orthonormal");
    switch (kind) {
        case ShapeKind::Plane:
            break;
        case ShapeKind::Sphere:
            if (!(radius > 0.0)) throw std::invalid_argument("Primitive: sphere radius <= 0");
            break;
        case ShapeKind::Box:
            if (!(half_extents.x > 0.0 && half_extents.y > 0.0 && half_extents.z > 0.0))
                throw std::invalid_argument("Primitive: box half-extents must be positive");
            break;
        case ShapeKind::Cylinder:
            if (!(radius > 0.0 && half_height > 0.0))
                throw std::invalid_argument("Primitive: cylinder dimensions must be positive");
            break;
        case ShapeKind::Mesh:
            if (!mesh) throw std::invalid_argument("Primitive: mesh not set");
            break;
    }
}

Scene::Scene(std::vector<Primitive> prims) : prims_(std::move(prims)) {
    for (size_t i = 0; i < prims_.size(); ++i) {
        prims_[i].validate();
        if (prims_[i].is_background) {
            if (background_index_ >= 0)
                throw std::invalid_argument("Scene: more than one background primitive");
            background_index_ = int(i);
        }
    }
}

namespace {

struct LocalHit {
    double t;
    Vec3 normal;  // model frame
};

std::optional<LocalHit> hit_plane(const Vec3& o, const Vec3& d) {
    if (std::abs(d.z) < 1e-15) return std::nullopt;
    double t = -o.z / d.z;
    if (t <= kMinHitT) return std::nullopt;
    return LocalHit{t, {0, 0, 1}};
}

std::optional<LocalHit> hit_sphere(const Vec3& o, const Vec3& d, double r) {
    double b = dot(o, d);
    double c = dot(o, o) - r * r;
    double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    double sq = std::sqrt(disc);
    double t = -b - sq;
    if (t <= kMinHitT) t = -b + sq;
    if (t <= kMinHitT) return std::nullopt;
    Vec3 p = o + t * d;
    return LocalHit{t, p / r};
}

std::optional<LocalHit> hit_box(const Vec3& o, const Vec3& d, const Vec3& h) {
    double tmin = -1e300, tmax = 1e300;
    int axis = -1;
    double lo[3] = {-h.x, -h.y, -h.z}, hi[3] = {h.x, h.y, h.z};
    double oo[3] = {o.x, o.y, o.z}, dd[3] = {d.x, d.y, d.z};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(dd[a]) < 1e-15) {
            if (oo[a] < lo[a] || oo[a] > hi[a]) return std::nullopt;
            continue;
        }
        double t0 = (lo[a] - oo[a]) / dd[a];
        double t1 = (hi[a] - oo[a]) / dd[a];
        if (t0 > t1) std::swap(t0, t1);
        if (t0 > tmin) {
            tmin = t0;
            axis = a;
        }
        tmax = std::fmin(tmax, t1);
        if (tmin > tmax) return std::nullopt;
    }
    double t = tmin;
    if (t <= kMinHitT) {
        // Inside the box: exit face.
        t = tmax;
        if (t <= kMinHitT) return std::nullopt;
        Vec3 p = o + t * d;
        double px[3] = {p.x / h.x, p.y / h.y, p.z / h.z};
        int a = std::abs(px[0]) > std::abs(px[1])
                    ? (std::abs(px[0]) > std::abs(px[2]) ? 0 : 2)
                    : (std::abs(px[1]) > std::abs(px[2]) ? 1 : 2);
        Vec3 n{};
        (a == 0 ? n.x : a == 1 ? n.y : n.z) = px[a] > 0 ? 1.0 : -1.0;
        return LocalHit{t, n};
    }
    Vec3 n{};
    double sign = dd[axis] > 0 ? -1.0 : 1.0;
    (axis == 0 ? n.x : axis == 1 ? n.y : n.z) = sign;
    return LocalHit{t, n};
}

std::optional<LocalHit> hit_cylinder(const Vec3& o, const Vec3& d, double r, double hh) {
    std::optional<LocalHit> best;
    auto consider = [&](double t, const Vec3& n) {
        if (t > kMinHitT && (!best || t < best->t)) best = LocalHit{t, n};
    };
    // Lateral surface.
    double a = d.x * d.x + d.y * d.y;
    if (a > 1e-18) {
        double b = o.x * d.x + o.y * d.y;
        double c = o.x * o.x + o.y * o.y - r * r;
        double disc = b * b - a * c;
        if (disc >= 0.0) {
            double sq = std::sqrt(disc);
            for (double t : {(-b - sq) / a, (-b + sq) / a}) {
                Vec3 p = o + t * d;
                if (std::abs(p.z) <= hh) consider(t, Vec3{p.x / r, p.y / r, 0.0});
            }
        }
    }
    // Caps.
    if (std::abs(d.z) > 1e-15) {
        for (double zc : {hh, -hh}) {
            double t = (zc - o.z) / d.z;
            Vec3 p = o + t * d;
            if (p.x * p.x + p.y * p.y <= r * r) consider(t, Vec3{0, 0, zc > 0 ? 1.0 : -1.0});
        }
    }
    return best;
}

}  // namespace

std::optional<Hit> intersect(const Scene& scene, const Ray& ray) {
    std::optional<Hit> best;
    const auto& prims = scene.primitives();
    for (size_t i = 0; i < prims.size(); ++i) {
        const Primitive& prim = prims[i];
        // Rigid transforms preserve the ray parameter.
        Mat3 rt = prim.pose.rotation.transposed();
        Vec3 o = rt * (ray.origin - prim.pose.translation);
        Vec3 d = rt * ray.direction;
        std::optional<LocalHit> lh;
        switch (prim.kind) {
            case ShapeKind::Plane:
                lh = hit_plane(o, d);
                break;
            case ShapeKind::Sphere:
                lh = hit_sphere(o, d, prim.radius);
                break;
            case ShapeKind::Box:
                lh = hit_box(o, d, prim.half_extents);
                break;
            case ShapeKind::Cylinder:
                lh = hit_cylinder(o, d, prim.radius, prim.half_height);
                break;
            case ShapeKind::Mesh: {
                auto th = prim.mesh->intersect(Ray{o, d});
                if (th) lh = LocalHit{th->t, th->normal};
                break;
            }
        }
        if (!lh || (best && lh->t >= best->t)) continue;
        Vec3 n = prim.pose.rotation * lh->normal;
        if (dot(n, ray.direction) > 0.0) n = -n;
        best = Hit{lh->t, ray.origin + lh->t * ray.direction, n, prim.is_background, int(i)};
    }
    return best;
}

std::vector<Triangle> load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_mesh: cannot open " + path.string());
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) {
        std::ostringstream os;
        os << "load_mesh: " << path.string() << ":" << line_no << ": " << why;
        throw std::runtime_error(os.str());
    };
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
        }
        return false;
    };
    if (!next_line()) fail("empty file");
    {
        std::istringstream hs(line);
        std::string magic;
        hs >> magic;
        if (magic != "TRI") fail("expected 'TRI' header");
    }
    if (!next_line()) fail("missing triangle count");
    long count = 0;
    {
        std::istringstream cs(line);
        if (!(cs >> count) || count < 0) fail("bad triangle count");
    }
    std::vector<Triangle> tris;
    tris.reserve(size_t(count));
    for (long i = 0; i < count; ++i) {
        if (!next_line()) fail("unexpected end of file, expected " + std::to_string(count) +
                               " triangles");
        std::istringstream ls(line);
        double c[9];
        for (int j = 0; j < 9; ++j) {
            if (!(ls >> c[j])) fail("expected 9 coordinates");
            if (!std::isfinite(c[j])) fail("non-finite coordinate");
        }
        tris.push_back({{c[0], c[1], c[2]}, {c[3], c[4], c[5]}, {c[6], c[7], c[8]}});
    }
    if (tris.empty()) fail("no triangles");
    return tris;
}

void save_mesh(std::span<const Triangle> tris, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_mesh: cannot open " + path.string());
    out << "TRI\n" << tris.size() << "\n";
    out.precision(17);
    for (const Triangle& t : tris)
        out << t.a.x << " " << t.a.y << " " << t.a.z << " " << t.b.x << " " << t.b.y << " "
            << t.b.z << " " << t.c.x << " " << t.c.y << " " << t.c.z << "\n";
}

std::vector<Triangle> make_icosphere(double radius, int subdivisions) {
    if (!(radius > 0.0) || subdivisions < 0 || subdivisions > 6)
        throw std::invalid_argument("make_icosphere: bad parameters");
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                               {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                               {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    for (Vec3& v : verts) v = normalized(v);
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
        {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            verts.push_back(normalized((verts[a] + verts[b]) / 2.0));
            int id = int(verts.size()) - 1;
            midpoint[key] = id;
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (auto& f : faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }
    std::vector<Triangle> tris;
    tris.reserve(faces.size());
    for (auto& f : faces)
        tris.push_back({verts[f[0]] * radius, verts[f[1]] * radius, verts[f[2]] * radius});
    return tris;
}

std::vector<Triangle> make_box_mesh(const Vec3& h) {
    if (!(h.x > 0 && h.y > 0 && h.z > 0))
        throw std::invalid_argument("make_box_mesh: half-extents must be positive");
    std::vector<Vec3> v;
    for (int i = 0; i < 8; ++i)
        v.push_back({i & 1 ? h.x : -h.x, i & 2 ? h.y : -h.y, i & 4 ? h.z : -h.z});
    // Two triangles per face, outward winding.
    int q[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
    std::vector<Triangle> tris;
    for (auto& f : q) {
        tris.push_back({v[f[0]], v[f[1]], v[f[2]]});
        tris.push_back({v[f[0]], v[f[2]], v[f[3]]});
    }
    return tris;
}

std::vector<Triangle> make_superellipsoid(const Vec3& semi_axes, double e1, double e2,
                                          int slices, int stacks) {
    if (!(semi_axes.x > 0 && semi_axes.y > 0 && semi_axes.z > 0) || e1 <= 0 || e2 <= 0 ||
        slices < 3 || stacks < 2)
        throw std::invalid_argument("make_superellipsoid: bad parameters");
    auto spow = [](double b, double e) {
        return b >= 0 ? std::pow(b, e) : -std::pow(-b, e);
    };
    auto point = [&](int i, int j) {
        if (j <= 0) return Vec3{0, 0, -semi_axes.z};  // exact poles so the fans share a vertex
        if (j >= stacks) return Vec3{0, 0, semi_axes.z};
        double eta = -kPi / 2.0 + kPi * double(j) / stacks;   // latitude
        double omega = -kPi + kTwoPi * double(i % slices) / slices;  // longitude
        double ce = std::cos(eta), se = std::sin(eta);
        double co = std::cos(omega), so = std::sin(omega);
        return Vec3{semi_axes.x * spow(ce, e1) * spow(co, e2),
                    semi_axes.y * spow(ce, e1) * spow(so, e2), semi_axes.z * spow(se, e1)};
    };
    std::vector<Triangle> tris;
    tris.reserve(size_t(slices) * stacks * 2);
    for (int j = 0; j < stacks; ++j)
        for (int i = 0; i < slices; ++i) {
            Vec3 p00 = point(i, j), p10 = point(i + 1, j);
            Vec3 p01 = point(i, j + 1), p11 = point(i + 1, j + 1);
            tris.push_back({p00, p10, p11});
            tris.push_back({p00, p11, p01});
        }
    return tris;
}

namespace {

using nlohmann::json;

RigidTransform pose_from_json(const json& j) {
    RigidTransform pose;
    if (j.contains("rotation")) {
        auto r = j.at("rotation").get<std::vector<double>>();
        if (r.size() != 9) throw std::runtime_error("scene: pose rotation needs 9 numbers");
        for (int i = 0; i < 9; ++i) pose.rotation.m[i] = r[i];
    }
    if (j.contains("translation_m")) {
        auto t = j.at("translation_m").get<std::vector<double>>();
        if (t.size() != 3) throw std::runtime_error("scene: pose translation_m needs 3 numbers");
        pose.translation = {t[0], t[1], t[2]};
    }
    return pose;
}

Primitive primitive_from_json(const json& j, const std::filesystem::path& base_dir) {
    Primitive p;
    std::string shape = j.at("shape").get<std::string>();
    if (shape == "plane") {
        p.kind = ShapeKind::Plane;
    } else if (shape == "sphere") {
        p.kind = ShapeKind::Sphere;
        p.radius = j.at("radius_m").get<double>();
    } else if (shape == "box") {
        p.kind = ShapeKind::Box;
        auto h = j.at("half_extents_m").get<std::vector<double>>();
        if (h.size() != 3) throw std::runtime_error("scene: half_extents_m needs 3 numbers");
        p.half_extents = {h[0], h[1], h[2]};
    } else if (shape == "cylinder") {
        p.kind = ShapeKind::Cylinder;
        p.radius = j.at("radius_m").get<double>();
        p.half_height = j.at("half_height_m").get<double>();
    } else if (shape == "mesh") {
        p.kind = ShapeKind::Mesh;
        auto rel = j.at("path").get<std::string>();
        p.mesh = std::make_shared<TriangleMesh>(load_mesh(base_dir / rel));
    } else {
        throw std::runtime_error("scene: unknown shape '" + shape + "'");
    }
    if (j.contains("pose")) p.pose = pose_from_json(j.at("pose"));
    if (j.contains("material")) {
        p.material.albedo = j.at("material").value("albedo", p.material.albedo);
        p.material.ambient = j.at("material").value("ambient", p.material.ambient);
    }
    p.is_background = j.value("is_background", false);
    return p;
}

}  // namespace

Scene load_scene_json_text(const std::string& text, const std::filesystem::path& base_dir) {
    json j = json::parse(text);
    if (!j.contains("primitives") || !j.at("primitives").is_array())
        throw std::runtime_error("scene: missing 'primitives' array");
    std::vector<Primitive> prims;
    for (const auto& pj : j.at("primitives")) prims.push_back(primitive_from_json(pj, base_dir));
    return Scene(std::move(prims));
}

Scene load_scene(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_scene: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return load_scene_json_text(text, path.parent_path());
    } catch (const json::exception& e) {
        throw std::runtime_error("load_scene: " + path.string() + ": " + e.what());
    }
}

}  // namespace fpp
