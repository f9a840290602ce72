#include "fpp/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace fpp {

void RenderConfig::validate() const {
    if (!(ambient >= 0.0 && ambient <= 1.0))
        throw std::invalid_argument("RenderConfig: ambient must lie in [0,1]");
    if (quantize_bits != 0 && quantize_bits != 8 && quantize_bits != 16)
        throw std::invalid_argument("RenderConfig: quantize_bits must be 0, 8 or 16");
    if (samples_per_pixel < 1)
        throw std::invalid_argument("RenderConfig: samples_per_pixel must be >= 1");
    if (threads < 0) throw std::invalid_argument("RenderConfig: threads must be >= 0");
}

namespace {

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : int(hc);
}

/// Runs fn(y) for each row, partitioned across workers. Each row writes to
/// disjoint output, so the result is identical for any thread count.
template <typename Fn>
void for_each_row(int height, int threads, Fn&& fn) {
    threads = std::min(resolve_threads(threads), height);
    if (threads <= 1) {
        for (int y = 0; y < height; ++y) fn(y);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(size_t(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&fn, w, threads, height]() {
            for (int y = w; y < height; y += threads) fn(y);
        });
    }
    for (auto& t : pool) t.join();
}

double quantize(double v, int bits) {
    if (bits == 0) return v;
    double levels = double((1u << bits) - 1);
    return std::round(v * levels) / levels;
}

// Unchecked pixel_to_ray: supersample positions of border pixels reach up to
// half a pixel outside the nominal [0, width) range.
Ray sample_ray(const PinholeModel& model, double u, double v) {
    Vec3 dir_model{(u - model.cx) / model.fx, (v - model.cy) / model.fy, 1.0};
    return Ray{model.optical_center(), normalized(model.pose.rotation * dir_model)};
}

}  // namespace

RenderResult render_sequence(const Scene& scene, const PinholeModel& camera,
                             const PinholeModel& projector, const PatternSchedule& schedule,
                             const RenderConfig& config) {
    config.validate();
    camera.validate();
    projector.validate();
    schedule.validate(projector.width_px);
    if (scene.background_index() < 0)
        throw std::invalid_argument("render_sequence: scene has no background primitive");

    const int w = camera.width_px, h = camera.height_px;
    auto ids = schedule_patterns(schedule);
    const int n_frames = int(ids.size());

    RenderResult result;
    result.sequence.width = w;
    result.sequence.height = h;
    result.sequence.schedule = schedule;
    result.sequence.pattern_ids = ids;
    result.sequence.frames.assign(size_t(n_frames), ImageF(w, h));
    result.ground_truth = DepthMap(w, h);
    result.ground_truth.norm = DepthNorm::RawMillimeters;

    // Sub-pixel sample offsets for the box filter; sample 0 is the center ray
    // used for ground-truth depth.
    const int spp = config.samples_per_pixel;
    std::vector<std::pair<double, double>> offsets;
    if (spp == 1) {
        offsets.emplace_back(0.0, 0.0);
    } else {
        int g = int(std::ceil(std::sqrt(double(spp))));
        for (int s = 0; s < spp; ++s) {
            int ix = s % g, iy = s / g;
            offsets.emplace_back((ix + 0.5) / g - 0.5, (iy + 0.5) / g - 0.5);
        }
    }

    const Vec3 proj_center = projector.optical_center();

    auto shade = [&](const Ray& ray, std::span<double> out) {
        auto hit = intersect(scene, ray);
        if (!hit) {
            for (int f = 0; f < n_frames; ++f) out[f] = config.ambient;
            return;
        }
        const Material& mat = scene.primitives()[size_t(hit->prim_index)].material;
        auto px = try_project_point(projector, hit->point);
        bool lit = px && px->u >= 0.0 && px->u < projector.width_px && px->v >= 0.0 &&
                   px->v < projector.height_px;
        double lambert = 0.0;
        if (lit) {
            Vec3 to_proj = proj_center - hit->point;
            lambert = std::fmax(0.0, dot(hit->normal, normalized(to_proj)));
            if (lambert > 0.0 && config.enable_shadows) {
                double dist = norm(to_proj);
                Ray shadow{hit->point + 1e-6 * hit->normal, to_proj / dist};
                auto block = intersect(scene, shadow);
                if (block && block->t < dist - 1e-6) lambert = 0.0;
            }
        }
        if (!lit || lambert <= 0.0) {
            for (int f = 0; f < n_frames; ++f) out[f] = std::clamp(mat.ambient, 0.0, 1.0);
            return;
        }
        double gain = mat.albedo * lambert;
        for (int f = 0; f < n_frames; ++f) {
            double v = mat.ambient + gain * pattern_value(ids[size_t(f)], px->u, schedule);
            out[f] = std::clamp(v, 0.0, 1.0);
        }
    };

    for_each_row(h, config.threads, [&](int y) {
        std::vector<double> accum(size_t(n_frames), 0.0);
        std::vector<double> sample(size_t(n_frames), 0.0);
        for (int x = 0; x < w; ++x) {
            std::fill(accum.begin(), accum.end(), 0.0);
            for (auto [du, dv] : offsets) {
                shade(sample_ray(camera, x + du, y + dv), sample);
                for (int f = 0; f < n_frames; ++f) accum[size_t(f)] += sample[size_t(f)];
            }
            for (int f = 0; f < n_frames; ++f)
                result.sequence.frames[size_t(f)].at(x, y) =
                    quantize(accum[size_t(f)] / offsets.size(), config.quantize_bits);

            // Ground truth from the center ray: camera-frame Z in mm,
            // background and misses are exact 0.
            Ray center = sample_ray(camera, double(x), double(y));
            auto hit = intersect(scene, center);
            double depth = 0.0;
            if (hit && !hit->is_background) {
                Vec3 pc = camera.pose.rotation.transposed() * (hit->point - camera.pose.translation);
                depth = pc.z * 1000.0;
            }
            result.ground_truth.at(x, y) = depth;
        }
    });
    return result;
}

DepthRange depth_range_check(const DepthMap& gt) {
    DepthRange r{1e300, -1e300, false};
    bool any = false;
    for (double v : gt.values) {
        if (v > 0.0) {
            any = true;
            r.dmin_mm = std::fmin(r.dmin_mm, v);
            r.dmax_mm = std::fmax(r.dmax_mm, v);
        }
    }
    if (!any) throw std::invalid_argument("depth_range_check: all-background map");
    r.out_of_range = r.dmin_mm < 1500.0 || r.dmax_mm > 2100.0;
    return r;
}

std::string frame_filename(int view_index, int pattern_index) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "view%d_pat%03d.pgm", view_index, pattern_index);
    return buf;
}

void write_sequence_pgm(const FringeSequence& seq, const std::filesystem::path& dir,
                        int view_index) {
    std::filesystem::create_directories(dir);
    for (size_t f = 0; f < seq.frames.size(); ++f)
        write_pgm16(seq.frames[f], dir / frame_filename(view_index, int(f)));
}

FringeSequence read_sequence_pgm(const std::filesystem::path& dir, int view_index,
                                 const PatternSchedule& schedule) {
    FringeSequence seq;
    seq.schedule = schedule;
    seq.pattern_ids = schedule_patterns(schedule);
    for (size_t f = 0; f < seq.pattern_ids.size(); ++f) {
        ImageF img = read_pgm16(dir / frame_filename(view_index, int(f)));
        if (f == 0) {
            seq.width = img.width;
            seq.height = img.height;
        } else if (img.width != seq.width || img.height != seq.height) {
            throw std::runtime_error("read_sequence_pgm: frame dimensions disagree in " +
                                     dir.string());
        }
        seq.frames.push_back(std::move(img));
    }
    return seq;
}

}  // namespace fpp
