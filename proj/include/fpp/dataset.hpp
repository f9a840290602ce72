#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fpp/depth_map.hpp"
#include "fpp/geometry.hpp"
#include "fpp/image.hpp"
#include "fpp/metrics.hpp"
#include "fpp/patterns.hpp"
#include "fpp/reconstruct.hpp"
#include "fpp/render.hpp"
#include "fpp/scene.hpp"

namespace fpp {

enum class Split { Train, Val, Test };

std::string split_name(Split s);
Split split_from_name(const std::string& name);

struct SplitPolicy {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
    uint64_t seed = 0;

    void validate() const;  // fractions sum to 1
};

struct ManifestEntry {
    std::string object_id;
    int viewpoint_index = 0;
    std::vector<std::string> fringe_paths;  // relative to the manifest
    std::string gt_path;
    Split split = Split::Train;
};

struct Manifest {
    int schema_version = 1;
    PatternSchedule schedule;
    int n_objects = 0;
    int viewpoints_per_object = 6;
    std::vector<ManifestEntry> entries;
};

std::string manifest_to_json_text(const Manifest& m);
Manifest manifest_from_json_text(const std::string& text);
void save_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest load_manifest(const std::filesystem::path& path);

/// Turntable pose i = base composed with rotation_z(60*i) on the model side:
/// the object spins about its own vertical axis.
RigidTransform viewpoint_pose(const RigidTransform& base, int i);
std::vector<RigidTransform> viewpoint_poses(const RigidTransform& base);

/// Object-level split: seeded Fisher-Yates shuffle, floor-sized val/test,
/// remainder to train. Needs >= 3 objects.
std::map<std::string, Split> assign_splits(const std::vector<std::string>& object_ids,
                                           const SplitPolicy& policy);

/// One dataset object: an id plus its primitive posed in the world.
struct SceneObject {
    std::string id;
    Primitive primitive;
};

/// Table-1 rig scaled to the requested camera resolution. Camera at the
/// world origin looking along +x in a z-up world; projector offset 0.125 m
/// to the camera's left and 0.1 m below, toed in to cross the camera axis
/// at a 1.8 m throw.
Rig make_default_rig(int camera_width_px, int camera_height_px);

/// Matte background wall facing the camera at the given distance.
Primitive make_background_wall(double distance_m);

/// Deterministic procedural object library (spheres, boxes, cylinders,
/// superellipsoid meshes) sized for roughly 80 mm depth extents inside the
/// 1.5-2.1 m working range.
std::vector<SceneObject> make_object_library(int count, uint64_t seed);

struct DatasetResult {
    Manifest manifest;
    std::filesystem::path manifest_path;
};

/// Renders every object x viewpoint, writes fringe PGMs + ground-truth FPPD
/// maps + calibration + schedule + manifest under out_dir.
DatasetResult build_dataset(const std::vector<SceneObject>& objects, const Rig& rig,
                            const PatternSchedule& schedule, const SplitPolicy& split,
                            const std::filesystem::path& out_dir,
                            const RenderConfig& render_config = {},
                            double background_distance_m = 2.0);

/// Zeroes fringe intensity exactly where the ground truth is background.
ImageF mask_background(const ImageF& fringe, const DepthMap& gt);

/// Applies mask_background to a whole dataset, producing a parallel tree and
/// manifest under out_dir.
DatasetResult mask_background_dataset(const std::filesystem::path& manifest_path,
                                      const std::filesystem::path& out_dir);

DepthMap baseline_zero(int width, int height);

/// Mean object depth over the given maps (training-set statistic).
double mean_object_depth_mm(const std::vector<DepthMap>& raw_maps);

/// Constant prediction on the gt-derived object mask, 0 on background.
DepthMap baseline_constant_mean(const DepthMap& gt_raw, double mean_depth_mm);

/// Least-squares plane over object pixels; needs >= 3 of them.
DepthMap baseline_plane_fit(const DepthMap& gt_raw);

/// Classical phase-shifting reconstruction of the full sequence.
DepthMap baseline_classical(const FringeSequence& seq, const PinholeModel& camera,
                            const PinholeModel& projector,
                            const ReconstructOptions& options = {});

}  // namespace fpp
