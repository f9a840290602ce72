#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fpp/depth_map.hpp"
#include "fpp/geometry.hpp"
#include "fpp/render.hpp"

namespace fpp {

/// Per-pixel demodulation result of an N-step sequence.
struct PhaseMap {
    int width = 0;
    int height = 0;
    std::vector<double> wrapped;     // (-pi, pi]
    std::vector<double> modulation;  // I''
    std::vector<double> offset;      // I'
    std::vector<uint8_t> valid;
};

struct AbsolutePhaseMap {
    int width = 0;
    int height = 0;
    std::vector<double> phi_abs;
    std::vector<int32_t> k;  // chosen period multiplier, phi_abs = wrapped + 2*pi*k
    std::vector<uint8_t> valid;
};

struct GrayDecodeResult {
    int width = 0;
    int height = 0;
    std::vector<int32_t> k;
    std::vector<uint8_t> confident;
};

inline constexpr double kDefaultModulationThreshold = 0.02;

/// S = sum I_n sin(d_n), C = sum I_n cos(d_n); wrapped = atan2(-S, C),
/// I'' = 2/N sqrt(S^2 + C^2), I' = mean. Needs >= 3 phase frames.
PhaseMap demodulate(const FringeSequence& seq,
                    double modulation_threshold = kDefaultModulationThreshold);

/// Thresholds Gray bit planes against their inverses when available, else
/// against I'. Pixels near the threshold on the no-inverse path are flagged
/// unconfident.
GrayDecodeResult decode_gray(const FringeSequence& seq, const PhaseMap& phase,
                             double margin = 0.05);

/// Candidate-m correction around the decoded period index: picks
/// m in {k_gc-1, k_gc, k_gc+1} whose implied fringe coordinate is closest to
/// the code cell center; phi_abs = wrapped + 2*pi*m exactly.
AbsolutePhaseMap unwrap(const PhaseMap& phase, const GrayDecodeResult& gray);

/// Column-plane triangulation: x_p = phi_abs/(2*pi)*period, depth is
/// camera-frame Z in mm; invalid pixels become 0.
DepthMap triangulate(const AbsolutePhaseMap& phi, const PinholeModel& camera,
                     const PinholeModel& projector, double period_px);

struct ReconstructOptions {
    double modulation_threshold = kDefaultModulationThreshold;
    double gray_margin = 0.05;
    /// When set, reconstructed depths within background_tol_mm of this
    /// plane's depth are zeroed, mirroring the ground-truth convention.
    std::optional<Plane> background_plane;
    double background_tol_mm = 2.0;
};

/// demodulate -> decode_gray -> unwrap -> triangulate (+ optional background
/// zeroing).
DepthMap reconstruct_pipeline(const FringeSequence& seq, const PinholeModel& camera,
                              const PinholeModel& projector,
                              const ReconstructOptions& options = {});

}  // namespace fpp
