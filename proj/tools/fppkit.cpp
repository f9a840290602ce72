// fppkit: virtual fringe projection profilometry pipeline.
//
// Subcommands compose the library stages through plain files (PGM fringe
// frames, FPPD depth maps, JSON manifests, CSV reports) so any stage can be
// swapped for an external predictor. Logging goes to stderr, data to files
// or stdout. Exit codes: 0 success, 2 validation error, 1 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fpp/dataset.hpp"
#include "fpp/losses.hpp"

namespace fs = std::filesystem;
using namespace fpp;

namespace {

constexpr const char* kVersion = "fppkit 0.1.0";

bool g_json_errors = false;

int fail(int code, const std::string& message) {
    if (g_json_errors)
        std::cerr << "{\"error\":\"" << message << "\",\"exit\":" << code << "}\n";
    else
        std::cerr << "fppkit: error: " << message << "\n";
    return code;
}

/// Writes through a temp file and renames, so failures leave no partial output.
template <typename Fn>
void atomic_output(const fs::path& path, Fn&& write_fn) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    write_fn(tmp);
    fs::rename(tmp, path);
}

void write_text(const fs::path& path, const std::string& text) {
    atomic_output(path, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << text;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    });
}

struct GenerateArgs {
    int objects = 5;
    std::string out_dir;
    uint64_t seed = 0;
    bool paper_parity = false;
    std::optional<int> phase_steps;
    std::optional<double> period_px;
    std::optional<int> gray_bits;
    bool no_inverse_gray = false;
    bool no_white_black = false;
    int width = 480, height = 480;
    int quantize = 16;
    int threads = 0;
    double background_m = 2.0;
};

int cmd_generate(const GenerateArgs& a) {
    PatternSchedule schedule = paper_parity_schedule();
    if (a.phase_steps) schedule.n_phase = *a.phase_steps;
    if (a.period_px) schedule.period_px = *a.period_px;
    if (a.gray_bits) schedule.n_gray_bits = *a.gray_bits;
    if (a.no_inverse_gray) schedule.include_inverse_gray = false;
    if (a.no_white_black) schedule.include_white_black = false;
    if (a.paper_parity) schedule = paper_parity_schedule();

    Rig rig = make_default_rig(a.width, a.height);
    schedule.validate(rig.projector.width_px);

    RenderConfig render;
    render.quantize_bits = a.quantize;
    render.threads = a.threads;

    SplitPolicy split;
    split.seed = a.seed;

    auto objects = make_object_library(a.objects, a.seed);
    DatasetResult res =
        build_dataset(objects, rig, schedule, split, a.out_dir, render, a.background_m);
    std::cerr << "generate: " << res.manifest.entries.size() << " views, "
              << res.manifest.entries.size() * size_t(schedule.pattern_count())
              << " fringe files under " << a.out_dir << "\n";
    return 0;
}

struct ReconstructArgs {
    std::string frames_dir;
    std::string calib;
    std::string out;
    int view = 0;
    std::string schedule_path;
    double modulation_threshold = kDefaultModulationThreshold;
    std::optional<double> background_distance_m;
    double background_tol_mm = 2.0;
    std::string dump_phase_dir;
};

PatternSchedule resolve_schedule(const ReconstructArgs& a) {
    if (!a.schedule_path.empty()) return load_schedule(a.schedule_path);
    for (fs::path candidate : {fs::path(a.frames_dir) / "schedule.json",
                               fs::path(a.frames_dir).parent_path() / "schedule.json"})
        if (fs::exists(candidate)) return load_schedule(candidate);
    throw std::invalid_argument(
        "no schedule.json next to the frames; pass one with --schedule");
}

int cmd_reconstruct(const ReconstructArgs& a) {
    Rig rig = load_rig(a.calib);
    PatternSchedule schedule = resolve_schedule(a);
    FringeSequence seq = read_sequence_pgm(a.frames_dir, a.view, schedule);
    if (seq.width != rig.camera.width_px || seq.height != rig.camera.height_px)
        throw std::invalid_argument("frames do not match the calibrated camera resolution");

    ReconstructOptions options;
    options.modulation_threshold = a.modulation_threshold;
    options.background_tol_mm = a.background_tol_mm;
    if (a.background_distance_m) {
        Vec3 fwd = rig.camera.pose.rotation * Vec3{0, 0, 1};
        Vec3 p0 = rig.camera.optical_center() + *a.background_distance_m * fwd;
        options.background_plane = Plane{-fwd, dot(-fwd, p0)};
    }

    if (!a.dump_phase_dir.empty()) {
        PhaseMap pm = demodulate(seq, options.modulation_threshold);
        GrayDecodeResult gray = decode_gray(seq, pm, options.gray_margin);
        AbsolutePhaseMap abs_phase = unwrap(pm, gray);
        fs::create_directories(a.dump_phase_dir);
        auto dump = [&](const std::vector<double>& vals, DepthNorm tag, const char* name) {
            DepthMap m(seq.width, seq.height);
            m.values = vals;
            m.norm = tag;
            atomic_output(fs::path(a.dump_phase_dir) / name,
                          [&](const fs::path& tmp) { write_depth(m, tmp); });
        };
        dump(pm.wrapped, DepthNorm::PhaseRadians, "wrapped.fppd");
        dump(pm.modulation, DepthNorm::RawMillimeters, "modulation.fppd");
        dump(pm.offset, DepthNorm::RawMillimeters, "offset.fppd");
        dump(abs_phase.phi_abs, DepthNorm::PhaseRadians, "phi_abs.fppd");
    }

    DepthMap depth = reconstruct_pipeline(seq, rig.camera, rig.projector, options);
    atomic_output(a.out, [&](const fs::path& tmp) { write_depth(depth, tmp); });
    std::cerr << "reconstruct: wrote " << a.out << "\n";
    return 0;
}

struct EvaluateArgs {
    std::string pred, gt, sample_id;
    std::string manifest, pred_dir;
    std::string out;
    std::string format = "csv";
};

int cmd_evaluate(const EvaluateArgs& a) {
    char delim = a.format == "tsv" ? '\t' : ',';
    std::vector<MetricsReport> reports;
    if (!a.manifest.empty()) {
        if (a.pred_dir.empty())
            throw std::invalid_argument("--manifest requires --pred-dir");
        Manifest m = load_manifest(a.manifest);
        fs::path base = fs::path(a.manifest).parent_path();
        for (const ManifestEntry& e : m.entries) {
            DepthMap gt = read_depth(base / e.gt_path);
            DepthMap pred = read_depth(fs::path(a.pred_dir) / e.gt_path);
            std::string id = e.object_id + "_view" + std::to_string(e.viewpoint_index);
            reports.push_back(evaluate_pair(pred, gt, id));
        }
    } else {
        if (a.pred.empty() || a.gt.empty())
            throw std::invalid_argument("need --pred and --gt, or --manifest and --pred-dir");
        DepthMap pred = read_depth(a.pred);
        DepthMap gt = read_depth(a.gt);
        std::string id = a.sample_id.empty() ? fs::path(a.pred).stem().string() : a.sample_id;
        reports.push_back(evaluate_pair(pred, gt, id));
    }
    std::ostringstream os;
    os << metrics_csv_header(delim) << "\n";
    for (const MetricsReport& r : reports) os << metrics_csv_row(r, delim) << "\n";
    if (a.out.empty())
        std::cout << os.str();
    else
        write_text(a.out, os.str());
    return 0;
}

struct LossArgs {
    std::string family = "rmse";
    double alpha = 0.7;
    double epsilon = 1e-8;
    std::string pred, gt;
    std::string sweep;
    std::string out;
};

int cmd_loss(const LossArgs& a) {
    DepthMap pred = read_depth(a.pred);
    DepthMap gt = read_depth(a.gt);
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("loss: dimension mismatch between --pred and --gt");
    if (pred.norm != gt.norm)
        throw std::invalid_argument(
            "loss: --pred and --gt are in different normalization spaces");
    LossFamily family = loss_family_from_name(a.family);
    std::ostringstream os;
    if (!a.sweep.empty()) {
        std::vector<double> alphas;
        std::stringstream ss(a.sweep);
        std::string tok;
        while (std::getline(ss, tok, ',')) alphas.push_back(std::stod(tok));
        os << "alpha,value\n";
        for (const AlphaSweepRow& row :
             alpha_sweep(family, alphas, pred.values, gt.values, a.epsilon)) {
            os.precision(12);
            os << row.alpha << "," << row.value << "\n";
        }
    } else {
        LossSpec spec{family, a.alpha, a.epsilon};
        os.precision(12);
        os << loss(spec, pred.values, gt.values) << "\n";
    }
    if (a.out.empty())
        std::cout << os.str();
    else
        write_text(a.out, os.str());
    return 0;
}

int cmd_mask_background(const std::string& manifest, const std::string& out_dir) {
    DatasetResult res = mask_background_dataset(manifest, out_dir);
    std::cerr << "mask-background: " << res.manifest.entries.size() << " views masked into "
              << out_dir << "\n";
    return 0;
}

int cmd_normalize(const std::string& in, const std::string& mode, const std::string& out) {
    DepthMap d = read_depth(in);
    DepthMap result;
    if (mode == "raw")
        result = denormalize(d);
    else if (mode == "global")
        result = normalize_global(d);
    else if (mode == "individual")
        result = normalize_individual(d);
    else
        throw std::invalid_argument("normalize: unknown mode '" + mode + "'");
    atomic_output(out, [&](const fs::path& tmp) { write_depth(result, tmp); });
    return 0;
}

int cmd_viz(const std::string& in, const std::string& out) {
    DepthMap d = read_depth(in);
    auto samples = to_viz_u16(d);
    atomic_output(out, [&](const fs::path& tmp) {
        write_pgm16_raw(samples, d.width, d.height, tmp);
    });
    return 0;
}

int cmd_report(const std::string& in, const std::string& out, const std::string& format,
               bool pooled) {
    char delim = format == "tsv" ? '\t' : ',';
    std::ifstream src(in);
    if (!src) throw std::runtime_error("report: cannot open " + in);
    std::string line;
    std::vector<MetricsReport> reports;
    bool first = true;
    while (std::getline(src, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;  // header
            continue;
        }
        reports.push_back(metrics_from_csv_row(line, delim));
    }
    std::string text = summary_csv(aggregate(reports), delim);
    if (pooled) text += pooled_csv_row(aggregate_pooled(reports), delim);
    if (out.empty())
        std::cout << text;
    else
        write_text(out, text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"virtual fringe projection profilometry toolkit"};
    app.set_version_flag("--version", kVersion);
    app.add_flag("--json-errors", g_json_errors, "emit errors as JSON on stderr");
    app.require_subcommand(0, 1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "render a synthetic dataset");
    g->add_option("--objects", gen.objects, "number of procedural objects")->required();
    g->add_option("--out", gen.out_dir, "output directory")->required();
    g->add_option("--seed", gen.seed, "RNG seed for objects and split");
    g->add_flag("--paper-parity", gen.paper_parity, "18+16+16+2 = 52 patterns per view");
    g->add_option("--phase-steps", gen.phase_steps, "phase-shift count (default 18)");
    g->add_option("--period-px", gen.period_px, "fringe period in pattern pixels (default 38)");
    g->add_option("--gray-bits", gen.gray_bits, "Gray-code bit count (default 16)");
    g->add_flag("--no-inverse-gray", gen.no_inverse_gray, "omit inverse Gray frames");
    g->add_flag("--no-white-black", gen.no_white_black, "omit white/black references");
    g->add_option("--width", gen.width, "camera width in pixels");
    g->add_option("--height", gen.height, "camera height in pixels");
    g->add_option("--quantize", gen.quantize, "intensity quantization bits: 0, 8 or 16")
        ->check(CLI::IsMember({0, 8, 16}));
    g->add_option("--threads", gen.threads, "worker cap, 0 = available parallelism");
    g->add_option("--background-m", gen.background_m, "background wall distance in meters");

    ReconstructArgs rec;
    auto* r = app.add_subcommand("reconstruct", "classical phase-shifting reconstruction");
    r->add_option("--frames", rec.frames_dir, "directory with view PGM frames")->required();
    r->add_option("--calib", rec.calib, "calibration JSON")->required();
    r->add_option("--out", rec.out, "output FPPD depth map")->required();
    r->add_option("--view", rec.view, "viewpoint index within the frames directory");
    r->add_option("--schedule", rec.schedule_path, "pattern schedule JSON");
    r->add_option("--modulation-threshold", rec.modulation_threshold,
                  "minimum modulation for a valid pixel");
    r->add_option("--background-distance-m", rec.background_distance_m,
                  "zero depths matching a frontal wall at this distance");
    r->add_option("--background-tol-mm", rec.background_tol_mm, "background zeroing band");
    r->add_option("--dump-phase", rec.dump_phase_dir, "dump intermediate phase maps here");

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "six-metric depth evaluation");
    e->add_option("--pred", ev.pred, "predicted FPPD depth map");
    e->add_option("--gt", ev.gt, "ground-truth FPPD depth map");
    e->add_option("--sample-id", ev.sample_id, "row label for the single-pair form");
    e->add_option("--manifest", ev.manifest, "dataset manifest JSON");
    e->add_option("--pred-dir", ev.pred_dir,
                  "prediction tree mirroring the manifest's gt paths");
    e->add_option("--out", ev.out, "write CSV here instead of stdout");
    e->add_option("--format", ev.format, "csv or tsv")->check(CLI::IsMember({"csv", "tsv"}));

    LossArgs lo;
    auto* l = app.add_subcommand("loss", "training-space loss evaluation");
    l->add_option("--family", lo.family,
                  "rmse | l1 | masked_rmse | masked_l1 | hybrid_rmse | hybrid_l1");
    l->add_option("--alpha", lo.alpha, "hybrid weighting");
    l->add_option("--epsilon", lo.epsilon, "RMSE stabilizer");
    l->add_option("--pred", lo.pred, "predicted FPPD map")->required();
    l->add_option("--gt", lo.gt, "ground-truth FPPD map")->required();
    l->add_option("--sweep", lo.sweep, "comma-separated alphas, emits CSV");
    l->add_option("--out", lo.out, "write output here instead of stdout");

    std::string mb_manifest, mb_out;
    auto* mb = app.add_subcommand("mask-background",
                                  "zero fringe intensity where ground truth is background");
    mb->add_option("--manifest", mb_manifest, "source manifest")->required();
    mb->add_option("--out", mb_out, "output dataset directory")->required();

    std::string nm_in, nm_mode, nm_out;
    auto* nm = app.add_subcommand("normalize", "convert between depth normalizations");
    nm->add_option("--in", nm_in, "input FPPD map")->required();
    nm->add_option("--mode", nm_mode, "raw | global | individual")->required();
    nm->add_option("--out", nm_out, "output FPPD map")->required();

    std::string vz_in, vz_out;
    auto* vz = app.add_subcommand("viz", "min-max uint16 visualization export");
    vz->add_option("--in", vz_in, "input FPPD map")->required();
    vz->add_option("--out", vz_out, "output 16-bit PGM")->required();

    std::string rp_in, rp_out, rp_format = "csv";
    bool rp_pooled = false;
    auto* rp = app.add_subcommand("report", "aggregate a per-sample metrics CSV");
    rp->add_option("--in", rp_in, "per-sample CSV from evaluate")->required();
    rp->add_option("--out", rp_out, "write summary here instead of stdout");
    rp->add_option("--format", rp_format, "csv or tsv")->check(CLI::IsMember({"csv", "tsv"}));
    rp->add_flag("--pooled", rp_pooled, "append a pixel-pooled row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& ex) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::cout << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& ex) {
        std::cerr << ex.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (app.got_subcommand(g)) return cmd_generate(gen);
        if (app.got_subcommand(r)) return cmd_reconstruct(rec);
        if (app.got_subcommand(e)) return cmd_evaluate(ev);
        if (app.got_subcommand(l)) return cmd_loss(lo);
        if (app.got_subcommand(mb)) return cmd_mask_background(mb_manifest, mb_out);
        if (app.got_subcommand(nm)) return cmd_normalize(nm_in, nm_mode, nm_out);
        if (app.got_subcommand(vz)) return cmd_viz(vz_in, vz_out);
        if (app.got_subcommand(rp)) return cmd_report(rp_in, rp_out, rp_format, rp_pooled);
        std::cout << app.help();
        return 2;
    } catch (const std::invalid_argument& ex) {
        return fail(2, ex.what());
    } catch (const std::logic_error& ex) {
        return fail(2, ex.what());
    } catch (const std::exception& ex) {
        return fail(1, ex.what());
    }
}
