#include "fpp/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "fpp/patterns.hpp"

namespace fpp {

namespace {

std::vector<int> frames_of_kind(const FringeSequence& seq, PatternId::Kind kind) {
    std::vector<int> idx;
    for (const PatternId& id : seq.pattern_ids)
        if (id.kind == kind) idx.push_back(id.index);
    return idx;
}

}  // namespace

PhaseMap demodulate(const FringeSequence& seq, double modulation_threshold) {
    auto phase_frames = frames_of_kind(seq, PatternId::Kind::Phase);
    const int n = int(phase_frames.size());
    if (n < 3) throw std::invalid_argument("demodulate: need at least 3 phase frames");

    PhaseMap pm;
    pm.width = seq.width;
    pm.height = seq.height;
    size_t npix = size_t(seq.width) * seq.height;
    pm.wrapped.assign(npix, 0.0);
    pm.modulation.assign(npix, 0.0);
    pm.offset.assign(npix, 0.0);
    pm.valid.assign(npix, 0);

    std::vector<double> sin_d(size_t(n), 0.0), cos_d(size_t(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double d = kTwoPi * i / n;
        sin_d[size_t(i)] = std::sin(d);
        cos_d[size_t(i)] = std::cos(d);
    }

    for (size_t p = 0; p < npix; ++p) {
        double s = 0.0, c = 0.0, sum = 0.0;
        for (int i = 0; i < n; ++i) {
            double v = seq.frames[size_t(phase_frames[size_t(i)])].pix[p];
            s += v * sin_d[size_t(i)];
            c += v * cos_d[size_t(i)];
            sum += v;
        }
        double phi = std::atan2(-s, c);
        if (phi <= -kPi) phi = kPi;  // keep the (-pi, pi] convention
        pm.wrapped[p] = phi;
        pm.modulation[p] = 2.0 / n * std::sqrt(s * s + c * c);
        pm.offset[p] = sum / n;
        pm.valid[p] = pm.modulation[p] >= modulation_threshold ? 1 : 0;
    }
    return pm;
}

GrayDecodeResult decode_gray(const FringeSequence& seq, const PhaseMap& phase, double margin) {
    if (phase.width != seq.width || phase.height != seq.height)
        throw std::invalid_argument("decode_gray: phase map dimensions disagree");
    auto gray_frames = frames_of_kind(seq, PatternId::Kind::Gray);
    auto inv_frames = frames_of_kind(seq, PatternId::Kind::GrayInverse);
    if (gray_frames.empty())
        throw std::invalid_argument("decode_gray: schedule has no Gray frames");
    const bool have_inverse = !inv_frames.empty();
    if (have_inverse && inv_frames.size() != gray_frames.size())
        throw std::invalid_argument("decode_gray: inverse frame count mismatch");

    const int bits = int(gray_frames.size());
    GrayDecodeResult out;
    out.width = seq.width;
    out.height = seq.height;
    size_t npix = size_t(seq.width) * seq.height;
    out.k.assign(npix, 0);
    out.confident.assign(npix, 1);

    for (size_t p = 0; p < npix; ++p) {
        unsigned g = 0;
        bool confident = true;
        for (int b = 0; b < bits; ++b) {
            double v = seq.frames[size_t(gray_frames[size_t(b)])].pix[p];
            double thresh;
            if (have_inverse) {
                thresh = (v + seq.frames[size_t(inv_frames[size_t(b)])].pix[p]) / 2.0;
            } else {
                thresh = phase.offset[p];
                if (std::abs(v - thresh) < margin) confident = false;
            }
            g = (g << 1) | (v > thresh ? 1u : 0u);
        }
        out.k[p] = int32_t(gray_decode(g));
        out.confident[p] = confident ? 1 : 0;
    }
    return out;
}

AbsolutePhaseMap unwrap(const PhaseMap& phase, const GrayDecodeResult& gray) {
    if (phase.width != gray.width || phase.height != gray.height)
        throw std::invalid_argument("unwrap: dimension mismatch");
    AbsolutePhaseMap out;
    out.width = phase.width;
    out.height = phase.height;
    size_t npix = phase.wrapped.size();
    out.phi_abs.assign(npix, 0.0);
    out.k.assign(npix, 0);
    out.valid.assign(npix, 0);

    for (size_t p = 0; p < npix; ++p) {
        if (!phase.valid[p] || !gray.confident[p]) continue;
        double phi = phase.wrapped[p];
        int kgc = gray.k[p];
        // Fringe coordinate implied by multiplier m is (phi/2pi + m)*period;
        // pick the candidate nearest the code cell center kgc*period. The
        // period cancels, so compare in units of periods.
        int best_m = kgc - 1;
        double best_d = 1e300;
        for (int m = kgc - 1; m <= kgc + 1; ++m) {
            double d = std::abs(phi / kTwoPi + m - kgc);
            if (d < best_d) {
                best_d = d;
                best_m = m;
            }
        }
        out.k[p] = best_m;
        out.phi_abs[p] = phi + kTwoPi * best_m;
        out.valid[p] = 1;
    }
    return out;
}

DepthMap triangulate(const AbsolutePhaseMap& phi, const PinholeModel& camera,
                     const PinholeModel& projector, double period_px) {
    if (phi.width != camera.width_px || phi.height != camera.height_px)
        throw std::invalid_argument("triangulate: phase map does not match the camera");
    if (!(period_px > 0.0)) throw std::invalid_argument("triangulate: period must be positive");

    DepthMap depth(phi.width, phi.height);
    depth.norm = DepthNorm::RawMillimeters;
    Mat3 cam_rt = camera.pose.rotation.transposed();

    for (int y = 0; y < phi.height; ++y) {
        for (int x = 0; x < phi.width; ++x) {
            size_t p = size_t(y) * phi.width + x;
            if (!phi.valid[p]) continue;
            double x_p = phi.phi_abs[p] / kTwoPi * period_px;
            if (!(x_p >= 0.0) || x_p >= projector.width_px) continue;
            auto point = ray_plane_intersect(pixel_to_ray(camera, double(x), double(y)),
                                             projector_column_plane(projector, x_p));
            if (!point) continue;
            double z = (cam_rt * (*point - camera.pose.translation)).z * 1000.0;
            if (z > 0.0) depth.at(x, y) = z;
        }
    }
    return depth;
}

DepthMap reconstruct_pipeline(const FringeSequence& seq, const PinholeModel& camera,
                              const PinholeModel& projector, const ReconstructOptions& options) {
    PhaseMap phase = demodulate(seq, options.modulation_threshold);
    GrayDecodeResult gray = decode_gray(seq, phase, options.gray_margin);
    AbsolutePhaseMap abs_phase = unwrap(phase, gray);
    DepthMap depth = triangulate(abs_phase, camera, projector, seq.schedule.period_px);

    if (options.background_plane) {
        // Zero pixels whose depth matches the supplied background plane,
        // mirroring the ground-truth convention.
        Mat3 cam_rt = camera.pose.rotation.transposed();
        for (int y = 0; y < depth.height; ++y)
            for (int x = 0; x < depth.width; ++x) {
                double d = depth.at(x, y);
                if (d <= 0.0) continue;
                auto bg = ray_plane_intersect(pixel_to_ray(camera, double(x), double(y)),
                                              *options.background_plane);
                if (!bg) continue;
                double bg_mm = (cam_rt * (*bg - camera.pose.translation)).z * 1000.0;
                if (std::abs(d - bg_mm) <= options.background_tol_mm) depth.at(x, y) = 0.0;
            }
    }
    return depth;
}

}  // namespace fpp
