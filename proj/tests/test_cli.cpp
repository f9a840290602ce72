// End-to-end checks of the fppkit binary: exit codes, byte determinism, and
// equality between CLI-produced artifacts and direct library calls.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fpp/dataset.hpp"

using namespace fpp;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

fs::path work_dir() {
    auto d = fs::temp_directory_path() / "fpp_cli_tests";
    fs::create_directories(d);
    return d;
}

RunResult run(const std::string& args) {
    auto out_path = work_dir() / "stdout.txt";
    auto err_path = work_dir() / "stderr.txt";
    std::string cmd = std::string(FPPKIT_BIN) + " " + args + " >" + out_path.string() + " 2>" +
                      err_path.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream o(out_path), e(err_path);
    r.out.assign(std::istreambuf_iterator<char>(o), std::istreambuf_iterator<char>());
    r.err.assign(std::istreambuf_iterator<char>(e), std::istreambuf_iterator<char>());
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

const std::string kTinyGen =
    "--objects 3 --seed 9 --width 24 --height 24 --phase-steps 3 --gray-bits 5 "
    "--no-inverse-gray --no-white-black";

}  // namespace

TEST_CASE("version and usage") {
    RunResult v = run("--version");
    CHECK(v.exit_code == 0);
    CHECK(v.out.find("fppkit") != std::string::npos);

    RunResult bad = run("--definitely-not-a-flag");
    CHECK(bad.exit_code == 2);
    CHECK(bad.err.find("Usage") != std::string::npos);

    RunResult badsub = run("evaluate --nope");
    CHECK(badsub.exit_code == 2);
}

TEST_CASE("evaluate of a perfect prediction emits a zero row") {
    auto dir = work_dir() / "eval";
    fs::create_directories(dir);
    DepthMap gt(4, 4, 0.0);
    gt.at(1, 1) = 1800.0;
    gt.at(2, 2) = 1900.0;
    write_depth(gt, dir / "gt.fppd");
    write_depth(gt, dir / "pred.fppd");

    RunResult r = run("evaluate --pred " + (dir / "pred.fppd").string() + " --gt " +
                      (dir / "gt.fppd").string() + " --sample-id perfect");
    CHECK(r.exit_code == 0);
    std::istringstream is(r.out);
    std::string header, row;
    std::getline(is, header);
    std::getline(is, row);
    CHECK(header.find("sample_id") == 0);
    CHECK(row.find("perfect,0,0,0,0,0,0,2,14") == 0);

    RunResult missing = run("evaluate --pred /nonexistent.fppd --gt " +
                            (dir / "gt.fppd").string());
    CHECK(missing.exit_code == 1);
}

TEST_CASE("loss command prints the scalar and sweeps emit CSV") {
    auto dir = work_dir() / "loss";
    fs::create_directories(dir);
    DepthMap gt(2, 2, 0.0);
    gt.values = {0.0, 1.0, 1.0, 0.0};
    DepthMap pred(2, 2, 0.0);
    pred.values = {0.5, 1.0, 0.0, 0.5};
    write_depth(gt, dir / "gt.fppd");
    write_depth(pred, dir / "pred.fppd");

    RunResult r = run("loss --family hybrid_l1 --alpha 0.7 --pred " +
                      (dir / "pred.fppd").string() + " --gt " + (dir / "gt.fppd").string());
    CHECK(r.exit_code == 0);
    CHECK(std::stod(r.out) == doctest::Approx(0.5).epsilon(1e-9));

    RunResult sweep = run("loss --family hybrid_l1 --sweep 0.5,0.7,0.9 --pred " +
                          (dir / "pred.fppd").string() + " --gt " + (dir / "gt.fppd").string());
    CHECK(sweep.exit_code == 0);
    CHECK(sweep.out.find("alpha,value") == 0);
    int lines = 0;
    for (char c : sweep.out)
        if (c == '\n') ++lines;
    CHECK(lines == 4);

    RunResult badfam = run("loss --family huber --pred " + (dir / "pred.fppd").string() +
                           " --gt " + (dir / "gt.fppd").string());
    CHECK(badfam.exit_code == 2);
}

TEST_CASE("generate is byte-deterministic and matches the library") {
    auto out1 = work_dir() / "gen1";
    auto out2 = work_dir() / "gen2";
    fs::remove_all(out1);
    fs::remove_all(out2);

    RunResult a = run("generate " + kTinyGen + " --out " + out1.string());
    REQUIRE(a.exit_code == 0);
    RunResult b = run("generate " + kTinyGen + " --out " + out2.string());
    REQUIRE(b.exit_code == 0);
    CHECK(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"));
    CHECK(slurp(out1 / "obj_000/view0_pat000.pgm") == slurp(out2 / "obj_000/view0_pat000.pgm"));
    CHECK(slurp(out1 / "obj_002/view5_gt.fppd") == slurp(out2 / "obj_002/view5_gt.fppd"));

    // CLI artifacts equal in-process composition with the same configuration.
    auto lib_dir = work_dir() / "gen_lib";
    fs::remove_all(lib_dir);
    PatternSchedule schedule = paper_parity_schedule();
    schedule.n_phase = 3;
    schedule.n_gray_bits = 5;
    schedule.include_inverse_gray = false;
    schedule.include_white_black = false;
    SplitPolicy split;
    split.seed = 9;
    build_dataset(make_object_library(3, 9), make_default_rig(24, 24), schedule, split, lib_dir);
    CHECK(slurp(out1 / "manifest.json") == slurp(lib_dir / "manifest.json"));
    CHECK(slurp(out1 / "obj_001/view2_pat001.pgm") == slurp(lib_dir / "obj_001/view2_pat001.pgm"));
    CHECK(slurp(out1 / "obj_001/view2_gt.fppd") == slurp(lib_dir / "obj_001/view2_gt.fppd"));
}

TEST_CASE("reconstruct pipeline through files") {
    auto out = work_dir() / "gen_rec";
    fs::remove_all(out);
    // 18-step + Gray at small resolution for a quick solve.
    RunResult g = run("generate --objects 3 --seed 4 --width 48 --height 48 --out " +
                      out.string());
    REQUIRE(g.exit_code == 0);

    auto depth_path = work_dir() / "rec.fppd";
    RunResult r = run("reconstruct --frames " + (out / "obj_000").string() + " --calib " +
                      (out / "calib.json").string() + " --view 0 --out " + depth_path.string() +
                      " --dump-phase " + (work_dir() / "phase").string());
    REQUIRE(r.exit_code == 0);

    DepthMap rec = read_depth(depth_path);
    DepthMap gt = read_depth(out / "obj_000/view0_gt.fppd");
    double mae = 0.0;
    long n = 0;
    for (size_t i = 0; i < rec.values.size(); ++i) {
        if (gt.values[i] <= 0.0 || rec.values[i] <= 0.0) continue;
        mae += std::abs(rec.values[i] - gt.values[i]);
        ++n;
    }
    REQUIRE(n > 20);
    CHECK(mae / double(n) < 0.5);
    CHECK(fs::exists(work_dir() / "phase" / "wrapped.fppd"));
    CHECK(read_depth(work_dir() / "phase" / "wrapped.fppd").norm == DepthNorm::PhaseRadians);

    // Reruns are byte-deterministic.
    auto depth2 = work_dir() / "rec2.fppd";
    run("reconstruct --frames " + (out / "obj_000").string() + " --calib " +
        (out / "calib.json").string() + " --view 0 --out " + depth2.string());
    CHECK(slurp(depth_path) == slurp(depth2));
}

TEST_CASE("mask-background produces an evaluable parallel dataset") {
    auto src = work_dir() / "mask_src";
    fs::remove_all(src);
    REQUIRE(run("generate " + kTinyGen + " --out " + src.string()).exit_code == 0);

    auto dst = work_dir() / "mask_dst";
    fs::remove_all(dst);
    RunResult m = run("mask-background --manifest " + (src / "manifest.json").string() +
                      " --out " + dst.string());
    REQUIRE(m.exit_code == 0);
    CHECK(fs::exists(dst / "manifest.json"));

    // The masked tree doubles as a perfect prediction directory: gt files
    // mirror the manifest's gt paths.
    RunResult ev = run("evaluate --manifest " + (dst / "manifest.json").string() +
                       " --pred-dir " + dst.string());
    CHECK(ev.exit_code == 0);
    int rows = 0;
    std::istringstream is(ev.out);
    std::string line;
    while (std::getline(is, line)) {
        if (rows > 0) CHECK(line.find(",0,0,") != std::string::npos);
        ++rows;
    }
    CHECK(rows == 1 + 18);  // header + 3 objects x 6 views
}

TEST_CASE("normalize, viz and report commands") {
    auto dir = work_dir() / "nvr";
    fs::create_directories(dir);
    DepthMap raw(3, 1, 0.0);
    raw.values = {0.0, 1561.0, 2026.0};
    write_depth(raw, dir / "raw.fppd");

    REQUIRE(run("normalize --in " + (dir / "raw.fppd").string() + " --mode individual --out " +
                (dir / "ind.fppd").string())
                .exit_code == 0);
    DepthMap ind = read_depth(dir / "ind.fppd");
    CHECK(ind.norm == DepthNorm::IndividualUnit);
    CHECK(ind.dmin_mm == 1561.0);
    CHECK(ind.values[2] == 1.0);

    REQUIRE(run("normalize --in " + (dir / "ind.fppd").string() + " --mode raw --out " +
                (dir / "back.fppd").string())
                .exit_code == 0);
    CHECK(std::abs(read_depth(dir / "back.fppd").values[2] - 2026.0) < 1e-3);

    REQUIRE(run("viz --in " + (dir / "raw.fppd").string() + " --out " +
                (dir / "viz.pgm").string())
                .exit_code == 0);
    ImageF viz = read_pgm16(dir / "viz.pgm");
    CHECK(viz.pix[0] == 0.0);
    CHECK(viz.pix[2] == 1.0);

    // evaluate -> report round trip through CSV files.
    write_depth(raw, dir / "pred.fppd");
    REQUIRE(run("evaluate --pred " + (dir / "pred.fppd").string() + " --gt " +
                (dir / "raw.fppd").string() + " --out " + (dir / "rows.csv").string())
                .exit_code == 0);
    RunResult rep = run("report --in " + (dir / "rows.csv").string());
    CHECK(rep.exit_code == 0);
    CHECK(rep.out.find("stat") == 0);
    CHECK(rep.out.find("mean,0,0,0,0,0,0,1") != std::string::npos);

    RunResult pooled = run("report --pooled --in " + (dir / "rows.csv").string());
    CHECK(pooled.exit_code == 0);
    CHECK(pooled.out.find("pooled,0,0,0,0,0,0,1") != std::string::npos);

    RunResult json_err = run("--json-errors normalize --in /missing.fppd --mode raw --out x");
    CHECK(json_err.exit_code == 1);
    CHECK(json_err.err.find("{\"error\":") == 0);
}
