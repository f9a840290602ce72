#include <doctest.h>

#include <cmath>
#include <random>

#include "fpp/dataset.hpp"
#include "fpp/reconstruct.hpp"
#include "fpp/render.hpp"

using namespace fpp;

namespace {

double wrap_angle(double a) {
    double w = std::remainder(a, kTwoPi);
    return w <= -kPi ? w + kTwoPi : w;
}

double angular_diff(double a, double b) { return std::abs(std::remainder(a - b, kTwoPi)); }

/// Sequence synthesized straight from the capture equation
/// I_n = offs + amp*cos(phi + 2*pi*n/N), independent of the renderer.
FringeSequence synthesize(int n_phase, int width, int height,
                          const std::vector<double>& phi, const std::vector<double>& offs,
                          const std::vector<double>& amp) {
    PatternSchedule s;
    s.n_phase = n_phase;
    s.n_gray_bits = 1;
    s.include_inverse_gray = false;
    s.include_white_black = false;
    FringeSequence seq;
    seq.width = width;
    seq.height = height;
    seq.schedule = s;
    seq.pattern_ids = schedule_patterns(s);
    for (const PatternId& id : seq.pattern_ids) {
        ImageF f(width, height);
        if (id.kind == PatternId::Kind::Phase) {
            for (size_t i = 0; i < f.size(); ++i)
                f.pix[i] = offs[i] + amp[i] * std::cos(phi[i] + kTwoPi * id.param / n_phase);
        }
        seq.frames.push_back(std::move(f));
    }
    return seq;
}

Scene sphere_scene() {
    Primitive sph;
    sph.kind = ShapeKind::Sphere;
    sph.radius = 0.1;
    sph.pose.translation = {1.9, 0, 0};
    sph.material = Material{0.8, 0.05};
    return Scene({make_background_wall(2.0), sph});
}

struct MaskedError {
    double mae = 0.0;
    double max_err = 0.0;
    long n = 0;
    double coverage = 0.0;  // valid fraction of gt-object pixels
};

/// MAE over pixels that are both ground-truth object and validly
/// reconstructed (pred > 0).
MaskedError object_error(const DepthMap& pred, const DepthMap& gt) {
    MaskedError e;
    long gt_obj = 0;
    for (size_t i = 0; i < gt.values.size(); ++i) {
        if (gt.values[i] <= 0.0) continue;
        ++gt_obj;
        if (pred.values[i] <= 0.0) continue;
        double d = std::abs(pred.values[i] - gt.values[i]);
        e.mae += d;
        e.max_err = std::fmax(e.max_err, d);
        ++e.n;
    }
    if (e.n > 0) e.mae /= double(e.n);
    if (gt_obj > 0) e.coverage = double(e.n) / double(gt_obj);
    return e;
}

}  // namespace

TEST_SUITE_BEGIN("reconstruct");

TEST_CASE("demodulation of a zero-phase synthetic stack") {
    std::vector<double> phi(16, 0.0), offs(16, 0.5), amp(16, 0.4);
    FringeSequence seq = synthesize(18, 4, 4, phi, offs, amp);
    PhaseMap pm = demodulate(seq);
    for (size_t i = 0; i < pm.wrapped.size(); ++i) {
        CHECK(std::abs(pm.wrapped[i]) < 1e-12);
        CHECK(std::abs(pm.modulation[i] - 0.4) < 1e-12);
        CHECK(std::abs(pm.offset[i] - 0.5) < 1e-12);
        CHECK(pm.valid[i] == 1);
    }
}

TEST_CASE("demodulation recovers random phase triples to 1e-10") {
    const int w = 100, h = 100;
    std::vector<double> phi(size_t(w) * h), offs(phi.size()), amp(phi.size());
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> uphi(-kPi, kPi), uoff(0.2, 0.6);
    for (size_t i = 0; i < phi.size(); ++i) {
        phi[i] = uphi(rng);
        offs[i] = uoff(rng);
        double room = std::fmin(offs[i], 1.0 - offs[i]);
        amp[i] = room * (0.2 + 0.8 * double(rng() >> 11) * 0x1p-53);
    }
    FringeSequence seq = synthesize(18, w, h, phi, offs, amp);
    PhaseMap pm = demodulate(seq);
    for (size_t i = 0; i < phi.size(); ++i) {
        CHECK(angular_diff(pm.wrapped[i], phi[i]) < 1e-10);
        CHECK(std::abs(pm.modulation[i] - amp[i]) < 1e-10);
        CHECK(std::abs(pm.offset[i] - offs[i]) < 1e-10);
    }

    // The example with a specific phase from the capture equation.
    std::vector<double> p1(1, 1.234), o1(1, 0.5), a1(1, 0.3);
    PhaseMap one = demodulate(synthesize(18, 1, 1, p1, o1, a1));
    CHECK(std::abs(one.wrapped[0] - 1.234) < 1e-10);
}

TEST_CASE("constant frames are invalid; short stacks rejected") {
    std::vector<double> phi(4, 0.0), offs(4, 0.5), amp(4, 0.0);
    FringeSequence seq = synthesize(6, 2, 2, phi, offs, amp);
    PhaseMap pm = demodulate(seq);
    for (uint8_t v : pm.valid) CHECK(v == 0);

    FringeSequence two = synthesize(6, 2, 2, phi, offs, amp);
    two.pattern_ids.clear();
    two.frames.clear();
    PatternSchedule s2;
    s2.n_phase = 3;  // schedule says 3, but provide only phase ids 0..1
    two.schedule = s2;
    two.pattern_ids = {{PatternId::Kind::Phase, 0, 0}, {PatternId::Kind::Phase, 1, 1}};
    two.frames.assign(2, ImageF(2, 2, 0.5));
    CHECK_THROWS_AS(demodulate(two), std::invalid_argument);
}

TEST_CASE("wrapped phase stays inside (-pi, pi]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uphi(-10.0, 10.0);
    std::vector<double> phi(64), offs(64, 0.5), amp(64, 0.35);
    for (auto& p : phi) p = uphi(rng);
    PhaseMap pm = demodulate(synthesize(5, 8, 8, phi, offs, amp));
    for (size_t i = 0; i < phi.size(); ++i) {
        CHECK(pm.wrapped[i] > -kPi);
        CHECK(pm.wrapped[i] <= kPi);
        CHECK(angular_diff(pm.wrapped[i], phi[i]) < 1e-9);
    }
}

TEST_CASE("gray decoding with inverse frames: dark vs bright") {
    PatternSchedule s{3, 38.0, 4, true, false};
    FringeSequence seq;
    seq.width = seq.height = 2;
    seq.schedule = s;
    seq.pattern_ids = schedule_patterns(s);
    for (const PatternId& id : seq.pattern_ids) {
        double v = 0.0;
        if (id.kind == PatternId::Kind::Phase)
            v = 0.5 + 0.4 * std::cos(kTwoPi * id.param / 3.0);
        else if (id.kind == PatternId::Kind::GrayInverse)
            v = 0.9;  // inverse bright, direct dark -> every bit reads 0
        seq.frames.push_back(ImageF(2, 2, v));
    }
    PhaseMap pm = demodulate(seq);
    GrayDecodeResult gray = decode_gray(seq, pm);
    for (int32_t k : gray.k) CHECK(k == 0);

    PatternSchedule no_gray{3, 38.0, 1, false, false};
    FringeSequence bare = seq;
    bare.schedule = no_gray;
    bare.pattern_ids = {{PatternId::Kind::Phase, 0, 0},
                        {PatternId::Kind::Phase, 1, 1},
                        {PatternId::Kind::Phase, 2, 2}};
    bare.frames.resize(3);
    CHECK_THROWS_AS(decode_gray(bare, demodulate(bare)), std::invalid_argument);
}

TEST_CASE("gray decoding without inverse frames thresholds against the offset") {
    // End to end on a rendered plane: the no-inverse path still unwraps.
    Rig rig = make_default_rig(48, 48);
    PatternSchedule s{18, 38.0, 5, false, true};
    Scene scene({make_background_wall(1.8)});
    RenderResult r = render_sequence(scene, rig.camera, rig.projector, s, {});
    PhaseMap pm = demodulate(r.sequence);
    GrayDecodeResult gray = decode_gray(r.sequence, pm);
    long confident = 0, valid = 0, exact = 0;
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) {
            size_t i = size_t(y) * 48 + x;
            if (!pm.valid[i] || !gray.confident[i]) continue;
            ++confident;
            auto hit = intersect(scene, pixel_to_ray(rig.camera, x, y));
            auto px = try_project_point(rig.projector, hit->point);
            if (!px) continue;
            ++valid;
            if (gray.k[i] == period_index(px->u, s.period_px)) ++exact;
        }
    CHECK(confident > 1000);
    CHECK(exact == valid);

    // A bit value hugging the threshold is flagged low-confidence.
    PatternSchedule tiny{3, 38.0, 1, false, false};
    FringeSequence seq;
    seq.width = seq.height = 1;
    seq.schedule = tiny;
    seq.pattern_ids = schedule_patterns(tiny);
    for (const PatternId& id : seq.pattern_ids) {
        double v = id.kind == PatternId::Kind::Phase
                       ? 0.5 + 0.4 * std::cos(kTwoPi * id.param / 3.0)
                       : 0.51;  // near the offset 0.5
        seq.frames.push_back(ImageF(1, 1, v));
    }
    PhaseMap pm1 = demodulate(seq);
    GrayDecodeResult g1 = decode_gray(seq, pm1, 0.05);
    CHECK(g1.confident[0] == 0);
    GrayDecodeResult g2 = decode_gray(seq, pm1, 0.001);
    CHECK(g2.confident[0] == 1);
}

TEST_CASE("unwrap chooses the consistent period multiplier") {
    auto one_pixel = [](double wrapped, int kgc) {
        PhaseMap pm;
        pm.width = pm.height = 1;
        pm.wrapped = {wrapped};
        pm.modulation = {0.4};
        pm.offset = {0.5};
        pm.valid = {1};
        GrayDecodeResult g;
        g.width = g.height = 1;
        g.k = {kgc};
        g.confident = {1};
        return unwrap(pm, g);
    };

    AbsolutePhaseMap zero = one_pixel(0.0, 0);
    CHECK(zero.k[0] == 0);
    CHECK(zero.phi_abs[0] == 0.0);

    // Near the wrap: the chosen multiplier keeps the implied fringe
    // coordinate within half a period of the code cell center. Brute-force
    // oracle over the candidate set.
    for (double wrapped : {kPi - 0.01, -kPi + 0.01, 0.3, -0.3}) {
        for (int kgc : {1, 5, 23}) {
            AbsolutePhaseMap a = one_pixel(wrapped, kgc);
            double best = 1e300;
            int best_m = 0;
            for (int m = kgc - 1; m <= kgc + 1; ++m) {
                double d = std::abs(wrapped / kTwoPi + m - kgc);
                if (d < best) {
                    best = d;
                    best_m = m;
                }
            }
            CHECK(a.k[0] == best_m);
            CHECK(std::abs(wrapped / kTwoPi + a.k[0] - kgc) <= 0.5 + 1e-12);
            CHECK(a.phi_abs[0] == wrapped + kTwoPi * a.k[0]);  // exact identity
        }
    }

    PhaseMap pm;
    pm.width = 2;
    pm.height = 1;
    pm.wrapped = {0, 0};
    pm.modulation = {1, 1};
    pm.offset = {1, 1};
    pm.valid = {1, 1};
    GrayDecodeResult g;
    g.width = 1;
    g.height = 1;
    g.k = {0};
    g.confident = {1};
    CHECK_THROWS_AS(unwrap(pm, g), std::invalid_argument);
}

TEST_CASE("triangulate maps all-invalid input to all-zero depth") {
    Rig rig = make_default_rig(8, 8);
    AbsolutePhaseMap phi;
    phi.width = phi.height = 8;
    phi.phi_abs.assign(64, 0.0);
    phi.k.assign(64, 0);
    phi.valid.assign(64, 0);
    DepthMap d = triangulate(phi, rig.camera, rig.projector, 38.0);
    for (double v : d.values) CHECK(v == 0.0);
}

TEST_CASE("rendered frontal plane: wrapped phase and period index match projection") {
    Rig rig = make_default_rig(64, 64);
    PatternSchedule s = paper_parity_schedule();
    RenderConfig cfg;
    cfg.quantize_bits = 0;
    Scene scene({make_background_wall(2.0)});
    // Use the wall itself as the only surface; its fringes still render.
    RenderResult r = render_sequence(scene, rig.camera, rig.projector, s, cfg);
    PhaseMap pm = demodulate(r.sequence);
    GrayDecodeResult gray = decode_gray(r.sequence, pm);

    long valid = 0, k_exact = 0, boundary = 0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            size_t i = size_t(y) * 64 + x;
            if (!pm.valid[i]) continue;
            auto hit = intersect(scene, pixel_to_ray(rig.camera, x, y));
            REQUIRE(hit.has_value());
            auto px = try_project_point(rig.projector, hit->point);
            REQUIRE(px.has_value());
            ++valid;
            // Demodulated phase equals the fringe phase of the projector
            // column coordinate (mod 2*pi).
            CHECK(angular_diff(pm.wrapped[i], kTwoPi * px->u / s.period_px) < 1e-8);
            double cell_pos = std::abs(std::remainder(px->u, s.period_px)) / s.period_px;
            bool near_transition = std::abs(cell_pos - 0.5) < 0.02;
            if (near_transition) {
                ++boundary;
                continue;
            }
            if (gray.k[i] == period_index(px->u, s.period_px)) ++k_exact;
        }
    CHECK(valid > 2000);
    CHECK(k_exact == valid - boundary);  // exact decode away from transitions
}

TEST_CASE("end-to-end: sphere on plane reconstructs to micrometers") {
    Rig rig = make_default_rig(96, 96);
    PatternSchedule s = paper_parity_schedule();
    Scene scene = sphere_scene();

    RenderConfig unq;
    unq.quantize_bits = 0;
    RenderResult clean = render_sequence(scene, rig.camera, rig.projector, s, unq);
    DepthMap rec = reconstruct_pipeline(clean.sequence, rig.camera, rig.projector);
    MaskedError e = object_error(rec, clean.ground_truth);
    CHECK(e.coverage > 0.99);
    CHECK(e.mae < 0.01);  // millimeters

    RenderResult q16 = render_sequence(scene, rig.camera, rig.projector, s, {});
    DepthMap rec16 = reconstruct_pipeline(q16.sequence, rig.camera, rig.projector);
    MaskedError e16 = object_error(rec16, q16.ground_truth);
    CHECK(e16.coverage > 0.99);
    CHECK(e16.mae < 0.5);

    RenderConfig q8;
    q8.quantize_bits = 8;
    RenderResult r8 = render_sequence(scene, rig.camera, rig.projector, s, q8);
    DepthMap rec8 = reconstruct_pipeline(r8.sequence, rig.camera, rig.projector);
    MaskedError e8 = object_error(rec8, r8.ground_truth);
    CHECK(e8.coverage > 0.99);
    CHECK(e8.mae < 2.0);
}

TEST_CASE("monotone projector coordinate along rows of a plane render") {
    Rig rig = make_default_rig(48, 48);
    PatternSchedule s = paper_parity_schedule();
    RenderConfig cfg;
    cfg.quantize_bits = 0;
    Scene scene({make_background_wall(1.8)});
    RenderResult r = render_sequence(scene, rig.camera, rig.projector, s, cfg);
    PhaseMap pm = demodulate(r.sequence);
    GrayDecodeResult gray = decode_gray(r.sequence, pm);
    AbsolutePhaseMap abs_phase = unwrap(pm, gray);
    for (int y = 0; y < 48; ++y) {
        double prev = -1e300;
        for (int x = 0; x < 48; ++x) {
            size_t i = size_t(y) * 48 + x;
            if (!abs_phase.valid[i]) continue;
            double x_p = abs_phase.phi_abs[i] / kTwoPi * s.period_px;
            CHECK(x_p > prev);
            prev = x_p;
        }
    }
}

TEST_CASE("pipeline background zeroing against a supplied plane") {
    Rig rig = make_default_rig(64, 64);
    PatternSchedule s = paper_parity_schedule();
    Scene scene = sphere_scene();
    RenderResult r = render_sequence(scene, rig.camera, rig.projector, s, {});

    ReconstructOptions opt;
    opt.background_plane = Plane{{-1, 0, 0}, -2.0};  // the wall x = 2
    DepthMap rec = reconstruct_pipeline(r.sequence, rig.camera, rig.projector, opt);

    long bg_zeroed = 0, bg_total = 0, obj_kept = 0, obj_total = 0;
    for (size_t i = 0; i < rec.values.size(); ++i) {
        if (r.ground_truth.values[i] == 0.0) {
            ++bg_total;
            if (rec.values[i] == 0.0) ++bg_zeroed;
        } else {
            ++obj_total;
            if (rec.values[i] > 0.0) ++obj_kept;
        }
    }
    CHECK(bg_total > 0);
    CHECK(obj_total > 0);
    CHECK(double(bg_zeroed) / double(bg_total) > 0.95);
    CHECK(double(obj_kept) / double(obj_total) > 0.95);
}

TEST_SUITE_END();
