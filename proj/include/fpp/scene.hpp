#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fpp/geometry.hpp"

namespace fpp {

struct Material {
    double albedo = 0.8;
    double ambient = 0.05;

    void validate() const;  // both in [0,1]
};

struct Triangle {
    Vec3 a, b, c;
};

struct Aabb {
    Vec3 lo{1e300, 1e300, 1e300};
    Vec3 hi{-1e300, -1e300, -1e300};

    void grow(const Vec3& p) {
        lo = min(lo, p);
        hi = max(hi, p);
    }
    void grow(const Aabb& b) {
        lo = min(lo, b.lo);
        hi = max(hi, b.hi);
    }
};

struct TriHit {
    double t = 0.0;
    Vec3 normal;  // geometric, unit, not yet oriented
    int tri_index = -1;
};

/// Triangle soup with a median-split BVH (leaf size <= 4). Degenerate
/// triangles are dropped at build time; an empty or all-degenerate input
/// throws std::invalid_argument.
class TriangleMesh {
  public:
    explicit TriangleMesh(std::vector<Triangle> tris);

    std::optional<TriHit> intersect(const Ray& ray) const;
    const std::vector<Triangle>& triangles() const { return tris_; }
    Aabb bounds() const;

  private:
    struct Node {
        Aabb box;
        int left = -1, right = -1;  // internal children
        int first = 0, count = 0;   // leaf range into order_
    };

    std::vector<Triangle> tris_;
    std::vector<int> order_;
    std::vector<Node> nodes_;

    int build(std::vector<int>& idx, int begin, int end);
};

/// Brute-force nearest hit over all triangles; the reference the BVH is
/// tested against.
std::optional<TriHit> intersect_triangles_exhaustive(std::span<const Triangle> tris, const Ray& ray);

std::optional<double> intersect_triangle(const Ray& ray, const Triangle& tri);

enum class ShapeKind { Plane, Sphere, Box, Cylinder, Mesh };

struct Primitive {
    ShapeKind kind = ShapeKind::Sphere;
    double radius = 0.0;                  // sphere, cylinder
    double half_height = 0.0;             // cylinder
    Vec3 half_extents{};                  // box
    std::shared_ptr<TriangleMesh> mesh;   // mesh
    RigidTransform pose;
    Material material;
    bool is_background = false;

    void validate() const;
};

struct Hit {
    double t = 0.0;
    Vec3 point;
    Vec3 normal;  // unit, oriented toward the ray origin
    bool is_background = false;
    int prim_index = -1;
};

/// Immutable after construction. At most one background primitive; renderers
/// require exactly one (background_index() >= 0).
class Scene {
  public:
    explicit Scene(std::vector<Primitive> prims);

    const std::vector<Primitive>& primitives() const { return prims_; }
    int background_index() const { return background_index_; }

  private:
    std::vector<Primitive> prims_;
    int background_index_ = -1;
};

/// Nearest positive-t intersection across all primitives.
std::optional<Hit> intersect(const Scene& scene, const Ray& ray);

/// ASCII mesh: header "TRI", a count line, then 9 coordinates per line.
std::vector<Triangle> load_mesh(const std::filesystem::path& path);
void save_mesh(std::span<const Triangle> tris, const std::filesystem::path& path);

std::vector<Triangle> make_icosphere(double radius, int subdivisions);
std::vector<Triangle> make_box_mesh(const Vec3& half_extents);
std::vector<Triangle> make_superellipsoid(const Vec3& semi_axes, double e1, double e2,
                                          int slices, int stacks);

/// Scene description JSON (list of primitives). Mesh paths resolve relative
/// to base_dir.
Scene load_scene_json_text(const std::string& text, const std::filesystem::path& base_dir);
Scene load_scene(const std::filesystem::path& path);

}  // namespace fpp
