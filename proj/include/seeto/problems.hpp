#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "seeto/embedder.hpp"
#include "seeto/types.hpp"

namespace seeto {

// A costly black-box multi-objective function over a box. Evaluation must be
// pure; every call to evaluate() counts as one true function evaluation.
class ExpensiveProblem {
public:
    ExpensiveProblem() = default;
    ExpensiveProblem(const ExpensiveProblem& other) : evaluations_(other.evaluations()) {}
    ExpensiveProblem& operator=(const ExpensiveProblem& other) {
        evaluations_.store(other.evaluations());
        return *this;
    }
    virtual ~ExpensiveProblem() = default;

    [[nodiscard]] virtual const TaskId& id() const = 0;
    [[nodiscard]] virtual const Bounds& bounds() const = 0;
    [[nodiscard]] virtual std::size_t objective_count() const = 0;
    [[nodiscard]] std::size_t dim() const { return bounds().dim(); }

    // theta in raw (unnormalized) units; throws UsageError outside bounds.
    [[nodiscard]] ObjectiveVector evaluate(std::span<const double> theta) const {
        evaluations_.fetch_add(1, std::memory_order_relaxed);
        return do_evaluate(theta);
    }
    [[nodiscard]] std::uint64_t evaluations() const { return evaluations_.load(std::memory_order_relaxed); }

protected:
    [[nodiscard]] virtual ObjectiveVector do_evaluate(std::span<const double> theta) const = 0;

private:
    mutable std::atomic<std::uint64_t> evaluations_{0};
};

// The five calibrated microphysics parameters and their ranges:
// cssca, porsl, pfac, ice_stokes_fac, dimax.
[[nodiscard]] Bounds default_calibration_bounds();

// Two root-mean-square distances in normalized parameter space to a pair of
// state-dependent targets a and a + delta * e1. The Pareto set is the segment
// between them, the front is {(t, delta - t) : t in [0, delta]}.
class SyntheticTask final : public ExpensiveProblem {
public:
    SyntheticTask(TaskId id, TaskState state, std::vector<double> shift, double delta, Bounds bounds);

    [[nodiscard]] const TaskId& id() const override { return id_; }
    [[nodiscard]] const Bounds& bounds() const override { return bounds_; }
    [[nodiscard]] std::size_t objective_count() const override { return 2; }

    [[nodiscard]] const TaskState& state() const noexcept { return state_; }
    [[nodiscard]] const std::vector<double>& shift() const noexcept { return shift_; }
    [[nodiscard]] double delta() const noexcept { return delta_; }

    // Objectives at a normalized point u in [0,1]^d.
    [[nodiscard]] ObjectiveVector evaluate_normalized(std::span<const double> u) const;

    // Artificial per-evaluation latency, for exercising parallel batches.
    void set_delay(std::chrono::microseconds delay) { delay_ = delay; }

    // Recommended HV reference point (delta + 0.1, delta + 0.1).
    [[nodiscard]] ObjectiveVector reference_point() const { return {delta_ + 0.1, delta_ + 0.1}; }

private:
    [[nodiscard]] ObjectiveVector do_evaluate(std::span<const double> theta) const override;

    TaskId id_;
    TaskState state_;
    std::vector<double> shift_;
    double delta_;
    Bounds bounds_;
    std::chrono::microseconds delay_{0};
};

// Exact hypervolume of the front {(t, delta - t)} against ref, which must
// exceed (delta, delta) componentwise.
[[nodiscard]] double analytic_hv(double delta, std::span<const double> ref);
[[nodiscard]] double analytic_hv(const SyntheticTask& task, std::span<const double> ref);

// Linear state -> optimum coupling shared by every task:
//   a(s) = clip(A * mean_frame(s) + b, 0.1, 0.9)
struct ShiftMap {
    Eigen::MatrixXd gain;    // d x (flattened frame size)
    Eigen::VectorXd offset;  // d

    [[nodiscard]] std::vector<double> operator()(const TaskState& s) const;
};

inline constexpr std::uint64_t kShiftMapSeed = 0x5EE70A;

// Gaussian gain matrix with entries N(0, (scale^2 / input_dim)), offset 0.5.
[[nodiscard]] ShiftMap make_shift_map(std::size_t dim, std::size_t input_dim, double scale,
                                      std::uint64_t seed = kShiftMapSeed);

struct TaskFamilyParams {
    std::size_t n_source = 20;
    std::size_t n_target = 10;
    std::size_t outlier_targets = 3;
    double cluster_spread = 1.0;     // std of each cluster-mode coefficient
    std::size_t cluster_modes = 8;   // dimension of the within-cluster variation
    double target_jitter = 0.25;     // in-cluster target offset from its parent source, in spreads
    double outlier_distance = 8.0;   // distance of the outlier center, in state units
    double pixel_noise = 0.05;       // isotropic per-task noise, in spreads
    double frame_noise = 0.05;       // per-frame temporal noise, in spreads
    std::size_t channels = 1;
    std::size_t height = 4;
    std::size_t width = 4;
    std::size_t frames = 4;
    double delta = 0.3;
    double shift_scale = 0.14;
    std::uint64_t seed = 1;
};

struct TaskFamily {
    TaskFamilyParams params;
    std::vector<SyntheticTask> sources;
    std::vector<SyntheticTask> targets;  // in-cluster targets first, then outliers
    std::vector<std::size_t> parent;     // parent source of each in-cluster target

    [[nodiscard]] bool is_outlier(std::size_t target_index) const {
        return target_index + params.outlier_targets >= targets.size();
    }
};

// Sources vary around a seeded cluster center inside a `cluster_modes`
// dimensional subspace of state space. Each in-cluster target perturbs a
// randomly chosen source; outlier targets are drawn around a center displaced
// orthogonally to that subspace.
[[nodiscard]] TaskFamily make_task_family(const TaskFamilyParams& params);

}  // namespace seeto
