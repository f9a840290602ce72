#include "fpp/patterns.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fpp/vec.hpp"

namespace fpp {

void PatternSchedule::validate(int pattern_width) const {
    if (n_phase < 3) throw std::invalid_argument("schedule: n_phase must be >= 3");
    if (!(period_px > 2.0)) throw std::invalid_argument("schedule: period_px must be > 2");
    if (n_gray_bits < 1 || n_gray_bits > 30)
        throw std::invalid_argument("schedule: n_gray_bits out of range");
    if (pattern_width <= 0) throw std::invalid_argument("schedule: pattern width must be positive");
    // Every period index reachable inside the pattern must be codeable.
    int max_k = period_index(double(pattern_width), period_px);
    if ((1u << n_gray_bits) <= unsigned(max_k))
        throw std::invalid_argument("schedule: n_gray_bits too small for pattern width");
}

PatternSchedule paper_parity_schedule() {
    return PatternSchedule{18, 38.0, 16, true, true};  // 18+16+16+2 = 52
}

double fringe_value(double x_p, int n, const PatternSchedule& schedule) {
    if (n < 0 || n >= schedule.n_phase)
        throw std::invalid_argument("fringe_value: phase step out of range");
    double phase = kTwoPi * x_p / schedule.period_px + kTwoPi * n / schedule.n_phase;
    return 0.5 + 0.5 * std::cos(phase);
}

unsigned gray_encode(unsigned k) { return k ^ (k >> 1); }

unsigned gray_decode(unsigned g) {
    unsigned k = g;
    for (unsigned shift = 1; shift < 32; shift <<= 1) k ^= k >> shift;
    return k;
}

int period_index(double x_p, double period_px) {
    // Cells centered on k*period: transitions at (k +- 1/2)*period coincide
    // with the wrap points of the wrapped phase.
    int k = int(std::floor((x_p + period_px / 2.0) / period_px));
    return k < 0 ? 0 : k;
}

int gray_value(double x_p, int bit, const PatternSchedule& schedule) {
    if (bit < 0 || bit >= schedule.n_gray_bits)
        throw std::invalid_argument("gray_value: bit out of range");
    unsigned g = gray_encode(unsigned(period_index(x_p, schedule.period_px)));
    return int((g >> (schedule.n_gray_bits - 1 - bit)) & 1u);
}

std::vector<PatternId> schedule_patterns(const PatternSchedule& schedule) {
    std::vector<PatternId> ids;
    ids.reserve(schedule.pattern_count());
    int idx = 0;
    for (int n = 0; n < schedule.n_phase; ++n)
        ids.push_back({PatternId::Kind::Phase, n, idx++});
    for (int b = 0; b < schedule.n_gray_bits; ++b)
        ids.push_back({PatternId::Kind::Gray, b, idx++});
    if (schedule.include_inverse_gray)
        for (int b = 0; b < schedule.n_gray_bits; ++b)
            ids.push_back({PatternId::Kind::GrayInverse, b, idx++});
    if (schedule.include_white_black) {
        ids.push_back({PatternId::Kind::White, 0, idx++});
        ids.push_back({PatternId::Kind::Black, 0, idx++});
    }
    return ids;
}

double pattern_value(const PatternId& id, double x_p, const PatternSchedule& schedule) {
    switch (id.kind) {
        case PatternId::Kind::Phase:
            return fringe_value(x_p, id.param, schedule);
        case PatternId::Kind::Gray:
            return double(gray_value(x_p, id.param, schedule));
        case PatternId::Kind::GrayInverse:
            return 1.0 - double(gray_value(x_p, id.param, schedule));
        case PatternId::Kind::White:
            return 1.0;
        case PatternId::Kind::Black:
            return 0.0;
    }
    throw std::logic_error("pattern_value: unknown kind");
}

namespace {
using nlohmann::json;

PatternSchedule schedule_from_json(const json& j) {
    const char* keys[] = {"n_phase", "period_px", "n_gray_bits", "include_inverse_gray",
                          "include_white_black"};
    for (const char* k : keys)
        if (!j.contains(k)) throw std::runtime_error(std::string("schedule: missing key '") + k + "'");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw std::runtime_error("schedule: unknown key '" + it.key() + "'");
    }
    PatternSchedule s;
    s.n_phase = j.at("n_phase").get<int>();
    s.period_px = j.at("period_px").get<double>();
    s.n_gray_bits = j.at("n_gray_bits").get<int>();
    s.include_inverse_gray = j.at("include_inverse_gray").get<bool>();
    s.include_white_black = j.at("include_white_black").get<bool>();
    return s;
}

json schedule_to_json(const PatternSchedule& s) {
    json j;
    j["n_phase"] = s.n_phase;
    j["period_px"] = s.period_px;
    j["n_gray_bits"] = s.n_gray_bits;
    j["include_inverse_gray"] = s.include_inverse_gray;
    j["include_white_black"] = s.include_white_black;
    return j;
}

}  // namespace

std::string schedule_to_json_text(const PatternSchedule& schedule) {
    return schedule_to_json(schedule).dump(2);
}

PatternSchedule schedule_from_json_text(const std::string& text) {
    return schedule_from_json(json::parse(text));
}

void save_schedule(const PatternSchedule& schedule, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_schedule: cannot open " + path.string());
    out << schedule_to_json_text(schedule) << "\n";
}

PatternSchedule load_schedule(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_schedule: cannot open " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return schedule_from_json_text(text);
    } catch (const json::exception& e) {
        throw std::runtime_error("load_schedule: " + path.string() + ": " + e.what());
    }
}

}  // namespace fpp
