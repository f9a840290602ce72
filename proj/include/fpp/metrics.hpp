#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fpp/depth_map.hpp"

namespace fpp {

struct RegionStats {
    double mae = 0.0;   // mm
    double rmse = 0.0;  // mm
};

/// The six-number evaluation of one prediction/ground-truth pair. A region
/// with zero pixels is absent (nullopt), never reported as 0.
struct MetricsReport {
    std::string sample_id;
    std::optional<RegionStats> overall;
    std::optional<RegionStats> object;      // gt > 0
    std::optional<RegionStats> background;  // gt == 0
    long n_object = 0;
    long n_bg = 0;
};

/// Denormalizes both maps to raw mm (IndividualUnit predictions use the
/// ground truth's parameters) and computes MAE/RMSE per region.
MetricsReport evaluate_pair(const DepthMap& pred, const DepthMap& gt,
                            const std::string& sample_id = "");

struct AggregateStat {
    double mean = 0.0;
    double stddev = 0.0;  // population
    double min = 0.0;
    double max = 0.0;
    long count = 0;  // samples where the region was present
};

struct AggregateSummary {
    AggregateStat mae_overall, rmse_overall;
    AggregateStat mae_object, rmse_object;
    AggregateStat mae_bg, rmse_bg;
    long n_samples = 0;
};

/// Unweighted per-sample aggregation; absent regions are skipped and counted.
AggregateSummary aggregate(const std::vector<MetricsReport>& reports);

/// Pixel-pooled alternative: regions are merged across samples weighted by
/// their pixel counts, exactly reproducing one evaluation over the
/// concatenated pixels.
struct PooledSummary {
    std::optional<RegionStats> overall, object, background;
    long n_object = 0;
    long n_bg = 0;
    long n_samples = 0;
};

PooledSummary aggregate_pooled(const std::vector<MetricsReport>& reports);

struct DecompositionResidual {
    bool skipped = false;  // a region was absent
    double mae_rel = 0.0;
    double rmse_sq_rel = 0.0;
};

/// Relative residuals of the exact region-weighted identities
/// mae_overall = (n_o*mae_o + n_b*mae_b)/(n_o+n_b) and the squared-RMSE analogue.
DecompositionResidual decomposition_check(const MetricsReport& report);

/// CSV row format: sample_id,mae_overall,rmse_overall,mae_object,rmse_object,
/// mae_bg,rmse_bg,n_object,n_bg. Absent regions serialize as empty fields.
std::string metrics_csv_header(char delim = ',');
std::string metrics_csv_row(const MetricsReport& r, char delim = ',');
MetricsReport metrics_from_csv_row(const std::string& line, char delim = ',');

std::string summary_csv(const AggregateSummary& s, char delim = ',');
std::string pooled_csv_row(const PooledSummary& s, char delim = ',');

}  // namespace fpp
