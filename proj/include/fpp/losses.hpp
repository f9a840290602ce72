#pragma once

#include <string>
#include <vector>

namespace fpp {

enum class LossFamily { Rmse, L1, MaskedRmse, MaskedL1, HybridRmse, HybridL1 };

struct LossSpec {
    LossFamily family = LossFamily::Rmse;
    double alpha = 0.0;      // hybrids only, in [0,1]
    double epsilon = 1e-8;   // added under RMSE-family square roots

    void validate() const;
};

LossFamily loss_family_from_name(const std::string& name);
std::string loss_family_name(LossFamily family);

/// Evaluates the loss over matching grids in whatever value space the caller
/// supplies. The mask is gt > 0; masked/hybrid families require a non-empty
/// mask.
double loss(const LossSpec& spec, const std::vector<double>& pred,
            const std::vector<double>& gt);

struct AlphaSweepRow {
    double alpha = 0.0;
    double value = 0.0;
};

/// Hybrid-family loss at each alpha for one pred/gt pair.
std::vector<AlphaSweepRow> alpha_sweep(LossFamily family, const std::vector<double>& alphas,
                                       const std::vector<double>& pred,
                                       const std::vector<double>& gt, double epsilon = 1e-8);

}  // namespace fpp
