#pragma once

#include <memory>
#include <span>
#include <vector>

#include "seeto/embedder.hpp"
#include "seeto/gp.hpp"

namespace seeto {

// Dynamic local-model weight 1 - exp(-c * fe). Throws UsageError unless c > 0.
[[nodiscard]] double beta(double c, std::uint64_t fe);

// Similarity-weighted mixture of source GPs blended with a local GP:
//   mean = (1 - beta) * sum_i w_i * mean_i + beta * mean_loc
//   var  = (1 - beta) * sum_i w_i * var_i  + beta * var_loc
// Without a local model beta is forced to 0; without sources it is forced to 1.
class EnsembleSurrogate {
public:
    struct Source {
        std::shared_ptr<const GpModel> model;
        double weight = 0.0;
    };

    EnsembleSurrogate(std::vector<Source> sources, std::shared_ptr<const GpModel> local, double beta);

    // beta taken from the decay schedule at `fe` true evaluations.
    static EnsembleSurrogate at(std::vector<Source> sources, std::shared_ptr<const GpModel> local, double c,
                                std::uint64_t fe);

    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] const std::vector<Source>& sources() const noexcept { return sources_; }
    [[nodiscard]] const std::shared_ptr<const GpModel>& local() const noexcept { return local_; }

    [[nodiscard]] Prediction predict(std::span<const double> x) const;
    [[nodiscard]] ObjectiveVector predict_mean(std::span<const double> x) const;

private:
    std::vector<Source> sources_;
    std::shared_ptr<const GpModel> local_;
    double beta_ = 0.0;
};

// How choose_c reads the tau threshold.
enum class CRule {
    MaxWeight,      // largest softmax weight >= tau
    MaxSimilarity,  // largest raw source similarity >= tau
};

// c_high when a high-similarity source exists, c_low otherwise.
[[nodiscard]] double choose_c(const SimilarityReport& report, double tau, double c_high, double c_low,
                              CRule rule = CRule::MaxWeight);

}  // namespace seeto
