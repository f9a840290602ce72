#pragma once

#include <filesystem>
#include <vector>

#include "fpp/depth_map.hpp"
#include "fpp/geometry.hpp"
#include "fpp/image.hpp"
#include "fpp/patterns.hpp"
#include "fpp/scene.hpp"

namespace fpp {

struct RenderConfig {
    double ambient = 0.05;      // intensity for rays that hit nothing
    int quantize_bits = 16;     // 0 (off), 8 or 16
    int samples_per_pixel = 1;  // box-filtered; depth always uses the center ray
    bool enable_shadows = false;
    int threads = 0;  // 0 = available parallelism; result independent of N

    void validate() const;
};

/// Ordered intensity stack captured for one viewpoint.
struct FringeSequence {
    int width = 0;
    int height = 0;
    std::vector<ImageF> frames;
    PatternSchedule schedule;
    std::vector<PatternId> pattern_ids;
};

struct RenderResult {
    FringeSequence sequence;
    DepthMap ground_truth;  // raw mm, 0 on background and misses
};

/// Simulated capture: per camera pixel, intersect the scene, forward-project
/// the hit into the projector and evaluate every scheduled pattern.
RenderResult render_sequence(const Scene& scene, const PinholeModel& camera,
                             const PinholeModel& projector, const PatternSchedule& schedule,
                             const RenderConfig& config = {});

struct DepthRange {
    double dmin_mm = 0.0;
    double dmax_mm = 0.0;
    bool out_of_range = false;  // set when outside [1500, 2100] mm
};

/// Min/max over non-zero pixels; all-background input throws.
DepthRange depth_range_check(const DepthMap& gt);

/// Frame filename within a view directory: view{V}_pat{NNN}.pgm.
std::string frame_filename(int view_index, int pattern_index);

/// Writes every frame as 16-bit PGM into dir using frame_filename.
void write_sequence_pgm(const FringeSequence& seq, const std::filesystem::path& dir,
                        int view_index);

/// Loads the frames written by write_sequence_pgm back into a sequence.
FringeSequence read_sequence_pgm(const std::filesystem::path& dir, int view_index,
                                 const PatternSchedule& schedule);

}  // namespace fpp
