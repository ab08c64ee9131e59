#include "seeto/ensemble.hpp"

#include <cmath>

#include "seeto/error.hpp"

namespace seeto {

double beta(double c, std::uint64_t fe) {
    if (!(c > 0.0)) throw UsageError("beta: c must be > 0");
    return 1.0 - std::exp(-c * static_cast<double>(fe));
}

EnsembleSurrogate::EnsembleSurrogate(std::vector<Source> sources, std::shared_ptr<const GpModel> local,
                                     double beta)
    : sources_(std::move(sources)), local_(std::move(local)), beta_(beta) {
    if (sources_.empty() && !local_) throw UsageError("EnsembleSurrogate: no models");
    if (!(beta_ >= 0.0 && beta_ <= 1.0)) throw UsageError("EnsembleSurrogate: beta outside [0,1]");
    if (!sources_.empty()) {
        double total = 0.0;
        for (const auto& s : sources_) {
            if (!s.model || !s.model->trained()) throw UsageError("EnsembleSurrogate: untrained source model");
            if (!(s.weight >= 0.0)) throw UsageError("EnsembleSurrogate: negative source weight");
            total += s.weight;
        }
        if (std::abs(total - 1.0) > 1e-12) throw UsageError("EnsembleSurrogate: source weights must sum to 1");
    }
    if (local_ && !local_->trained()) throw UsageError("EnsembleSurrogate: untrained local model");
    if (!local_) beta_ = 0.0;
    if (sources_.empty()) beta_ = 1.0;
}

EnsembleSurrogate EnsembleSurrogate::at(std::vector<Source> sources, std::shared_ptr<const GpModel> local,
                                        double c, std::uint64_t fe) {
    return EnsembleSurrogate(std::move(sources), std::move(local), seeto::beta(c, fe));
}

Prediction EnsembleSurrogate::predict(std::span<const double> x) const {
    if (beta_ == 1.0) return local_->predict(x);
    if (beta_ == 0.0 && sources_.size() == 1) return sources_.front().model->predict(x);

    Prediction out;
    std::vector<double> var;
    auto accumulate = [&](const Prediction& p, double w) {
        if (out.mean.empty()) {
            out.mean.assign(p.mean.size(), 0.0);
            var.assign(p.mean.size(), 0.0);
        }
        if (p.mean.size() != out.mean.size()) throw UsageError("EnsembleSurrogate: objective count mismatch");
        for (std::size_t k = 0; k < p.mean.size(); ++k) {
            out.mean[k] += w * p.mean[k];
            var[k] += w * p.std[k] * p.std[k];
        }
    };
    for (const auto& s : sources_) accumulate(s.model->predict(x), (1.0 - beta_) * s.weight);
    if (local_ && beta_ > 0.0) accumulate(local_->predict(x), beta_);
    out.std.resize(var.size());
    for (std::size_t k = 0; k < var.size(); ++k) out.std[k] = std::sqrt(std::max(0.0, var[k]));
    return out;
}

ObjectiveVector EnsembleSurrogate::predict_mean(std::span<const double> x) const {
    if (beta_ == 1.0) return local_->predict_mean(x);
    if (beta_ == 0.0 && sources_.size() == 1) return sources_.front().model->predict_mean(x);

    ObjectiveVector mean;
    auto accumulate = [&](const ObjectiveVector& m, double w) {
        if (mean.empty()) mean.assign(m.size(), 0.0);
        if (m.size() != mean.size()) throw UsageError("EnsembleSurrogate: objective count mismatch");
        for (std::size_t k = 0; k < m.size(); ++k) mean[k] += w * m[k];
    };
    for (const auto& s : sources_) accumulate(s.model->predict_mean(x), (1.0 - beta_) * s.weight);
    if (local_ && beta_ > 0.0) accumulate(local_->predict_mean(x), beta_);
    return mean;
}

double choose_c(const SimilarityReport& report, double tau, double c_high, double c_low, CRule rule) {
    if (!(tau > 0.0 && tau < 1.0)) throw UsageError("choose_c: tau must lie in (0,1)");
    if (!(c_high > 0.0) || !(c_low > 0.0)) throw UsageError("choose_c: c values must be > 0");
    const double score = rule == CRule::MaxWeight ? report.max_weight() : report.max_similarity();
    return score >= tau ? c_high : c_low;
}

}  // namespace seeto
