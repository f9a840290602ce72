#include "fpp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fpp {

namespace {

DepthMap to_raw_mm(const DepthMap& pred, const DepthMap& gt_raw) {
    switch (pred.norm) {
        case DepthNorm::RawMillimeters:
            return pred;
        case DepthNorm::GlobalMeters:
            return denormalize(pred);
        case DepthNorm::IndividualUnit: {
            // Denormalization parameters always come from the ground truth.
            DepthMap tmp = pred;
            double dmin = 1e300, dmax = -1e300;
            if (gt_raw.dmin_mm > 0.0 || gt_raw.dmax_mm > 0.0) {
                dmin = gt_raw.dmin_mm;
                dmax = gt_raw.dmax_mm;
            } else {
                for (double v : gt_raw.values)
                    if (v > 0.0) {
                        dmin = std::fmin(dmin, v);
                        dmax = std::fmax(dmax, v);
                    }
            }
            if (dmax < dmin)
                throw std::logic_error(
                    "evaluate_pair: no normalization parameters for an individual-unit "
                    "prediction (all-background ground truth)");
            tmp.dmin_mm = dmin;
            tmp.dmax_mm = dmax;
            return denormalize(tmp);
        }
        case DepthNorm::PhaseRadians:
            throw std::logic_error("evaluate_pair: phase dumps cannot be evaluated");
    }
    throw std::logic_error("evaluate_pair: unknown normalization");
}

}  // namespace

MetricsReport evaluate_pair(const DepthMap& pred, const DepthMap& gt,
                            const std::string& sample_id) {
    if (pred.width != gt.width || pred.height != gt.height)
        throw std::invalid_argument("evaluate_pair: dimension mismatch");
    if (pred.values.empty()) throw std::invalid_argument("evaluate_pair: empty maps");

    DepthMap gt_store = gt;  // keep individual params for the prediction
    DepthMap gt_raw = denormalize(gt);
    if (gt.norm == DepthNorm::IndividualUnit) {
        gt_raw.dmin_mm = gt.dmin_mm;
        gt_raw.dmax_mm = gt.dmax_mm;
    }
    DepthMap pred_raw = to_raw_mm(pred, gt_raw);

    double abs_obj = 0.0, sq_obj = 0.0, abs_bg = 0.0, sq_bg = 0.0;
    long n_obj = 0, n_bg = 0;
    for (size_t i = 0; i < gt_raw.values.size(); ++i) {
        double err = pred_raw.values[i] - gt_raw.values[i];
        if (gt_raw.values[i] > 0.0) {
            abs_obj += std::abs(err);
            sq_obj += err * err;
            ++n_obj;
        } else {
            abs_bg += std::abs(err);
            sq_bg += err * err;
            ++n_bg;
        }
    }

    MetricsReport r;
    r.sample_id = sample_id;
    r.n_object = n_obj;
    r.n_bg = n_bg;
    long n_all = n_obj + n_bg;
    r.overall = RegionStats{(abs_obj + abs_bg) / double(n_all),
                            std::sqrt((sq_obj + sq_bg) / double(n_all))};
    if (n_obj > 0)
        r.object = RegionStats{abs_obj / double(n_obj), std::sqrt(sq_obj / double(n_obj))};
    if (n_bg > 0) r.background = RegionStats{abs_bg / double(n_bg), std::sqrt(sq_bg / double(n_bg))};
    return r;
}

namespace {

struct Accum {
    double sum = 0.0, sq = 0.0;
    double lo = 1e300, hi = -1e300;
    long n = 0;

    void add(double v) {
        sum += v;
        sq += v * v;
        lo = std::fmin(lo, v);
        hi = std::fmax(hi, v);
        ++n;
    }
    AggregateStat stat() const {
        if (n == 0) return {};
        double mean = sum / double(n);
        double var = std::fmax(0.0, sq / double(n) - mean * mean);
        return {mean, std::sqrt(var), lo, hi, n};
    }
};

}  // namespace

AggregateSummary aggregate(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
    Accum mo, ro, mj, rj, mb, rb;
    for (const MetricsReport& r : reports) {
        if (r.overall) {
            mo.add(r.overall->mae);
            ro.add(r.overall->rmse);
        }
        if (r.object) {
            mj.add(r.object->mae);
            rj.add(r.object->rmse);
        }
        if (r.background) {
            mb.add(r.background->mae);
            rb.add(r.background->rmse);
        }
    }
    AggregateSummary s;
    s.mae_overall = mo.stat();
    s.rmse_overall = ro.stat();
    s.mae_object = mj.stat();
    s.rmse_object = rj.stat();
    s.mae_bg = mb.stat();
    s.rmse_bg = rb.stat();
    s.n_samples = long(reports.size());
    return s;
}

PooledSummary aggregate_pooled(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) throw std::invalid_argument("aggregate_pooled: no reports");
    double abs_obj = 0.0, sq_obj = 0.0, abs_bg = 0.0, sq_bg = 0.0;
    long n_obj = 0, n_bg = 0;
    for (const MetricsReport& r : reports) {
        if (r.object) {
            abs_obj += double(r.n_object) * r.object->mae;
            sq_obj += double(r.n_object) * r.object->rmse * r.object->rmse;
            n_obj += r.n_object;
        }
        if (r.background) {
            abs_bg += double(r.n_bg) * r.background->mae;
            sq_bg += double(r.n_bg) * r.background->rmse * r.background->rmse;
            n_bg += r.n_bg;
        }
    }
    PooledSummary s;
    s.n_object = n_obj;
    s.n_bg = n_bg;
    s.n_samples = long(reports.size());
    long n_all = n_obj + n_bg;
    if (n_all > 0)
        s.overall = RegionStats{(abs_obj + abs_bg) / double(n_all),
                                std::sqrt((sq_obj + sq_bg) / double(n_all))};
    if (n_obj > 0)
        s.object = RegionStats{abs_obj / double(n_obj), std::sqrt(sq_obj / double(n_obj))};
    if (n_bg > 0)
        s.background = RegionStats{abs_bg / double(n_bg), std::sqrt(sq_bg / double(n_bg))};
    return s;
}

DecompositionResidual decomposition_check(const MetricsReport& report) {
    DecompositionResidual res;
    if (!report.object || !report.background || !report.overall) {
        res.skipped = true;
        return res;
    }
    double n_o = double(report.n_object), n_b = double(report.n_bg);
    double n = n_o + n_b;
    double mae_recon = (n_o * report.object->mae + n_b * report.background->mae) / n;
    double rmse_sq_recon =
        (n_o * report.object->rmse * report.object->rmse +
         n_b * report.background->rmse * report.background->rmse) /
        n;
    double rmse_sq = report.overall->rmse * report.overall->rmse;
    auto rel = [](double a, double b) {
        double denom = std::fmax(std::fmax(std::abs(a), std::abs(b)), 1e-300);
        return std::abs(a - b) / denom;
    };
    res.mae_rel = rel(mae_recon, report.overall->mae);
    res.rmse_sq_rel = rel(rmse_sq_recon, rmse_sq);
    return res;
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string region_fields(const std::optional<RegionStats>& r, char d) {
    if (!r) return std::string(1, d);
    return fmt(r->mae) + d + fmt(r->rmse);
}

}  // namespace

std::string metrics_csv_header(char d) {
    std::string s = "sample_id";
    for (const char* c : {"mae_overall", "rmse_overall", "mae_object", "rmse_object", "mae_bg",
                          "rmse_bg", "n_object", "n_bg"})
        s += d + std::string(c);
    return s;
}

std::string metrics_csv_row(const MetricsReport& r, char d) {
    std::string s = r.sample_id;
    s += d;
    s += region_fields(r.overall, d);
    s += d;
    s += region_fields(r.object, d);
    s += d;
    s += region_fields(r.background, d);
    s += d;
    s += std::to_string(r.n_object);
    s += d;
    s += std::to_string(r.n_bg);
    return s;
}

MetricsReport metrics_from_csv_row(const std::string& line, char d) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : line) {
        if (c == d) {
            f.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    f.push_back(cur);
    if (f.size() != 9) throw std::runtime_error("metrics CSV row: expected 9 fields");
    MetricsReport r;
    r.sample_id = f[0];
    auto region = [&](size_t i) -> std::optional<RegionStats> {
        if (f[i].empty() && f[i + 1].empty()) return std::nullopt;
        return RegionStats{std::stod(f[i]), std::stod(f[i + 1])};
    };
    r.overall = region(1);
    r.object = region(3);
    r.background = region(5);
    r.n_object = std::stol(f[7]);
    r.n_bg = std::stol(f[8]);
    return r;
}

std::string summary_csv(const AggregateSummary& s, char d) {
    std::ostringstream os;
    os << "stat" << d << "mae_overall" << d << "rmse_overall" << d << "mae_object" << d
       << "rmse_object" << d << "mae_bg" << d << "rmse_bg" << d << "n_samples\n";
    auto row = [&](const char* name, auto get) {
        os << name;
        for (const AggregateStat* st :
             {&s.mae_overall, &s.rmse_overall, &s.mae_object, &s.rmse_object, &s.mae_bg, &s.rmse_bg})
            os << d << (st->count > 0 ? fmt(get(*st)) : std::string());
        os << d << s.n_samples << "\n";
    };
    row("mean", [](const AggregateStat& st) { return st.mean; });
    row("std", [](const AggregateStat& st) { return st.stddev; });
    row("min", [](const AggregateStat& st) { return st.min; });
    row("max", [](const AggregateStat& st) { return st.max; });
    return os.str();
}

std::string pooled_csv_row(const PooledSummary& s, char d) {
    std::string row = "pooled";
    row += d;
    row += region_fields(s.overall, d);
    row += d;
    row += region_fields(s.object, d);
    row += d;
    row += region_fields(s.background, d);
    row += d;
    row += std::to_string(s.n_samples);
    row += "\n";
    return row;
}

}  // namespace fpp
