#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "seeto/types.hpp"

namespace seeto {

// Posterior mean and standard deviation per objective, in target units.
struct Prediction {
    ObjectiveVector mean;
    std::vector<double> std;
};

// Squared-exponential kernel parameters of one objective's GP. All values are
// on standardized targets.
struct GpHyperparameters {
    double length_scale = 1.0;
    double signal_variance = 1.0;
    double noise_variance = 1e-8;

    bool operator==(const GpHyperparameters&) const = default;
};

// Affine target standardization: z = (y - mean) / scale.
struct TargetNormalization {
    double mean = 0.0;
    double scale = 1.0;

    bool operator==(const TargetNormalization&) const = default;
};

struct GpOptions {
    double noise_floor = 1e-8;
    int n_starts = 8;
    std::uint64_t seed = 0x5EE70;
    double length_scale_min = 1e-2;
    double length_scale_max = 10.0;
    double signal_variance_min = 1e-2;
    double signal_variance_max = 10.0;
    int max_evaluations_per_start = 80;
    int cholesky_retries = 3;
};

// Per-objective record of the hyperparameter search.
struct GpFitLog {
    std::vector<double> start_log_likelihoods;
    double final_log_likelihood = 0.0;
};

// One independent isotropic squared-exponential GP per objective, sharing the
// same training inputs. Training data is kept in canonical (lexicographic)
// order so predictions do not depend on the order the caller supplied.
class GpModel {
public:
    GpModel() = default;

    // Rebuilds the posterior from stored data and fixed hyperparameters.
    // Throws NumericalError if the kernel matrix cannot be factorized.
    static GpModel from_parameters(std::vector<DecisionVector> inputs,
                                   std::vector<std::vector<double>> targets,
                                   std::vector<GpHyperparameters> hyper,
                                   std::vector<TargetNormalization> normalization);

    [[nodiscard]] bool trained() const noexcept { return !objectives_.empty(); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t objective_count() const noexcept { return objectives_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return inputs_.size(); }

    [[nodiscard]] const std::vector<DecisionVector>& inputs() const noexcept { return inputs_; }
    // targets()[k][i] is objective k of input i, in original units.
    [[nodiscard]] const std::vector<std::vector<double>>& targets() const noexcept { return targets_; }
    [[nodiscard]] std::vector<GpHyperparameters> hyperparameters() const;
    [[nodiscard]] std::vector<TargetNormalization> normalization() const;
    [[nodiscard]] const std::vector<GpFitLog>& fit_log() const noexcept { return fit_log_; }

    // Throws UsageError when untrained or x has the wrong dimension.
    [[nodiscard]] Prediction predict(std::span<const double> x) const;
    [[nodiscard]] std::vector<Prediction> predict_batch(std::span<const DecisionVector> xs) const;

    // Posterior mean only; same arithmetic as predict().
    [[nodiscard]] ObjectiveVector predict_mean(std::span<const double> x) const;

    // Log marginal likelihood of objective k's standardized targets under h.
    // Returns -infinity when the kernel matrix is not positive definite.
    [[nodiscard]] double log_marginal_likelihood(std::size_t k, const GpHyperparameters& h) const;

private:
    struct Objective {
        GpHyperparameters hyper;
        TargetNormalization norm;
        Eigen::VectorXd z;      // standardized targets
        Eigen::MatrixXd chol;   // lower Cholesky factor of K + noise I
        Eigen::VectorXd alpha;  // (K + noise I)^{-1} z
    };

    friend GpModel train_gp(std::span<const EvaluatedSolution>, const GpOptions&);

    void set_data(std::vector<DecisionVector> inputs, std::vector<std::vector<double>> targets);
    [[nodiscard]] double sq_dist(std::span<const double> x, std::size_t i) const;
    [[nodiscard]] bool factorize(Objective& obj) const;
    void check_query(std::span<const double> x) const;

    std::size_t dim_ = 0;
    std::vector<DecisionVector> inputs_;
    std::vector<std::vector<double>> targets_;
    Eigen::MatrixXd pair_sq_dist_;
    std::vector<Objective> objectives_;
    std::vector<GpFitLog> fit_log_;
};

// Fits one GP per objective by multi-start bounded Nelder-Mead on the log
// marginal likelihood over (length scale, signal variance); the noise stays at
// the floor unless Cholesky fails, in which case it grows tenfold per retry.
// Throws InsufficientDataError with fewer than two distinct decisions.
[[nodiscard]] GpModel train_gp(std::span<const EvaluatedSolution> data, const GpOptions& options = {});

}  // namespace seeto
