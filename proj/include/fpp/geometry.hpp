#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "fpp/vec.hpp"

namespace fpp {

/// Rigid pose: p_world = rotation * p_model + translation.
struct RigidTransform {
    Mat3 rotation = Mat3::identity();
    Vec3 translation{};

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 apply_dir(const Vec3& d) const { return rotation * d; }

    RigidTransform inverse() const {
        Mat3 rt = rotation.transposed();
        return {rt, -(rt * translation)};
    }

    /// a then b is compose(b, a): p -> b(a(p)).
    static RigidTransform compose(const RigidTransform& outer, const RigidTransform& inner) {
        return {outer.rotation * inner.rotation, outer.rotation * inner.translation + outer.translation};
    }
};

bool is_orthonormal(const Mat3& r, double tol = 1e-9);

/// Rotation about the +z axis by theta in degrees (right-handed).
Mat3 rotation_z(double theta_degrees);

struct Pixel {
    double u = 0.0, v = 0.0;
};

/// Pinhole camera/projector. (u, v) addresses pixel centers at integer
/// coordinates, u rightward, v downward. pose maps model frame -> world.
struct PinholeModel {
    int width_px = 0;
    int height_px = 0;
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    RigidTransform pose;

    Vec3 optical_center() const { return pose.translation; }

    /// Throws std::invalid_argument when any field invariant is violated.
    void validate() const;
};

/// Pixel intrinsics derived from physical optics: fx = focal/aperture_h * width.
PinholeModel pinhole_from_physical(int width_px, int height_px, double focal_length_m,
                                   double aperture_h_m, double aperture_v_m,
                                   const RigidTransform& pose);

struct Ray {
    Vec3 origin;
    Vec3 direction;  // unit length
};

/// Plane n . x = offset with unit normal.
struct Plane {
    Vec3 normal;
    double offset = 0.0;
};

/// World-frame ray through pixel (u, v); origin is the optical center.
/// Fractional pixels allowed; out-of-bounds -> std::invalid_argument.
Ray pixel_to_ray(const PinholeModel& model, double u, double v);

/// Forward projection of a world point. Non-positive model-frame depth
/// returns nullopt.
std::optional<Pixel> try_project_point(const PinholeModel& model, const Vec3& p_world);

/// As try_project_point, but throws std::domain_error behind the model.
Pixel project_point(const PinholeModel& model, const Vec3& p_world);

/// The world plane containing the projector optical center and every ray
/// whose pattern horizontal coordinate is x_p.
Plane projector_column_plane(const PinholeModel& proj, double x_p);

/// Intersection point with t > 0, or nullopt when parallel or behind.
std::optional<Vec3> ray_plane_intersect(const Ray& r, const Plane& pl);

/// RMS pixel distance between projected points and observations.
double reprojection_error(const PinholeModel& model, std::span<const Vec3> points,
                          std::span<const Pixel> observed);

/// Camera-projector pair as stored in a calibration JSON file.
struct Rig {
    PinholeModel camera;
    PinholeModel projector;
};

/// Parses one model from a JSON document with keys {width_px, height_px,
/// focal_length_m, aperture_h_m, aperture_v_m, rotation, translation_m}.
/// Unknown keys are rejected.
PinholeModel pinhole_from_json_text(const std::string& text);

Rig load_rig(const std::filesystem::path& path);
void save_rig(const Rig& rig, const std::filesystem::path& path);

}  // namespace fpp
