#include "fpp/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace fpp {

void LossSpec::validate() const {
    bool hybrid = family == LossFamily::HybridRmse || family == LossFamily::HybridL1;
    if (hybrid && !(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("LossSpec: alpha must lie in [0,1]");
    if (!(epsilon > 0.0)) throw std::invalid_argument("LossSpec: epsilon must be positive");
}

LossFamily loss_family_from_name(const std::string& name) {
    if (name == "rmse") return LossFamily::Rmse;
    if (name == "l1") return LossFamily::L1;
    if (name == "masked_rmse") return LossFamily::MaskedRmse;
    if (name == "masked_l1") return LossFamily::MaskedL1;
    if (name == "hybrid_rmse") return LossFamily::HybridRmse;
    if (name == "hybrid_l1") return LossFamily::HybridL1;
    throw std::invalid_argument("unknown loss family '" + name + "'");
}

std::string loss_family_name(LossFamily family) {
    switch (family) {
        case LossFamily::Rmse: return "rmse";
        case LossFamily::L1: return "l1";
        case LossFamily::MaskedRmse: return "masked_rmse";
        case LossFamily::MaskedL1: return "masked_l1";
        case LossFamily::HybridRmse: return "hybrid_rmse";
        case LossFamily::HybridL1: return "hybrid_l1";
    }
    throw std::logic_error("unknown loss family");
}

namespace {

struct Sums {
    double abs_all = 0.0, sq_all = 0.0;
    double abs_obj = 0.0, sq_obj = 0.0;
    long n_all = 0, n_obj = 0;
};

Sums accumulate(const std::vector<double>& pred, const std::vector<double>& gt) {
    Sums s;
    s.n_all = long(gt.size());
    for (size_t i = 0; i < gt.size(); ++i) {
        double e = pred[i] - gt[i];
        s.abs_all += std::abs(e);
        s.sq_all += e * e;
        if (gt[i] > 0.0) {
            s.abs_obj += std::abs(e);
            s.sq_obj += e * e;
            ++s.n_obj;
        }
    }
    return s;
}

double eval(const LossSpec& spec, const Sums& s) {
    auto need_mask = [&]() {
        if (s.n_obj == 0)
            throw std::invalid_argument("loss: masked loss over an empty mask (gt has no "
                                        "object pixels)");
    };
    switch (spec.family) {
        case LossFamily::Rmse:
            return std::sqrt(s.sq_all / double(s.n_all) + spec.epsilon);
        case LossFamily::L1:
            return s.abs_all / double(s.n_all);
        case LossFamily::MaskedRmse:
            need_mask();
            return std::sqrt(s.sq_obj / double(s.n_obj) + spec.epsilon);
        case LossFamily::MaskedL1:
            need_mask();
            return s.abs_obj / double(s.n_obj);
        case LossFamily::HybridRmse: {
            need_mask();
            double masked = std::sqrt(s.sq_obj / double(s.n_obj) + spec.epsilon);
            double global = std::sqrt(s.sq_all / double(s.n_all) + spec.epsilon);
            return spec.alpha * masked + (1.0 - spec.alpha) * global;
        }
        case LossFamily::HybridL1: {
            need_mask();
            double masked = s.abs_obj / double(s.n_obj);
            double global = s.abs_all / double(s.n_all);
            return spec.alpha * masked + (1.0 - spec.alpha) * global;
        }
    }
    throw std::logic_error("loss: unknown family");
}

}  // namespace

double loss(const LossSpec& spec, const std::vector<double>& pred, const std::vector<double>& gt) {
    spec.validate();
    if (pred.size() != gt.size() || gt.empty())
        throw std::invalid_argument("loss: pred and gt must be non-empty and equal-sized");
    return eval(spec, accumulate(pred, gt));
}

std::vector<AlphaSweepRow> alpha_sweep(LossFamily family, const std::vector<double>& alphas,
                                       const std::vector<double>& pred,
                                       const std::vector<double>& gt, double epsilon) {
    if (family != LossFamily::HybridRmse && family != LossFamily::HybridL1)
        throw std::invalid_argument("alpha_sweep: family must be a hybrid loss");
    if (pred.size() != gt.size() || gt.empty())
        throw std::invalid_argument("alpha_sweep: pred and gt must be non-empty and equal-sized");
    Sums s = accumulate(pred, gt);
    std::vector<AlphaSweepRow> rows;
    rows.reserve(alphas.size());
    for (double a : alphas) {
        LossSpec spec{family, a, epsilon};
        spec.validate();
        rows.push_back({a, eval(spec, s)});
    }
    return rows;
}

}  // namespace fpp
