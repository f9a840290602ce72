#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fpp {

/// Capture schedule: N phase-shifted sinusoids, Gray-code bit planes with
/// optional inverses, optional white/black reference frames.
struct PatternSchedule {
    int n_phase = 18;
    double period_px = 38.0;
    int n_gray_bits = 16;
    bool include_inverse_gray = true;
    bool include_white_black = true;

    int pattern_count() const {
        return n_phase + n_gray_bits * (include_inverse_gray ? 2 : 1) +
               (include_white_black ? 2 : 0);
    }

    /// Field invariants plus the bit-coverage requirement for the given
    /// pattern width. Throws std::invalid_argument.
    void validate(int pattern_width) const;
};

/// 18 + 16 + 16 + 2 = 52 patterns per view, the count used for dataset parity.
PatternSchedule paper_parity_schedule();

struct PatternId {
    enum class Kind { Phase, Gray, GrayInverse, White, Black };
    Kind kind = Kind::Phase;
    int param = 0;  // phase step n or gray bit index
    int index = 0;  // position within the sequence
};

/// Sinusoid sample in [0,1]: 0.5 + 0.5*cos(2*pi*x_p/period + 2*pi*n/N).
double fringe_value(double x_p, int n, const PatternSchedule& schedule);

unsigned gray_encode(unsigned k);
unsigned gray_decode(unsigned g);

/// Period index of pattern coordinate x_p: cells are centered on multiples of
/// the period so code transitions coincide with fringe wrap points.
int period_index(double x_p, double period_px);

/// Bit `bit` (MSB first over n_gray_bits) of gray_encode(period_index(x_p)).
int gray_value(double x_p, int bit, const PatternSchedule& schedule);

/// Ordered sequence: phase 0..N-1, gray 0..B-1, inverse gray 0..B-1, white, black.
std::vector<PatternId> schedule_patterns(const PatternSchedule& schedule);

/// Pattern intensity at pattern coordinate x_p for any pattern kind.
double pattern_value(const PatternId& id, double x_p, const PatternSchedule& schedule);

std::string schedule_to_json_text(const PatternSchedule& schedule);
PatternSchedule schedule_from_json_text(const std::string& text);
void save_schedule(const PatternSchedule& schedule, const std::filesystem::path& path);
PatternSchedule load_schedule(const std::filesystem::path& path);

}  // namespace fpp
