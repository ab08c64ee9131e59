#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seeto {

// Coordinates of a candidate parameter configuration. Inside the optimizer
// these are always normalized to [0,1]^d; raw values only exist at the
// problem evaluation boundary.
using DecisionVector = std::vector<double>;

// Objective values, all minimized.
using ObjectiveVector = std::vector<double>;

using TaskId = std::string;

// A decision with its true (never surrogate) objective values.
struct EvaluatedSolution {
    DecisionVector decision;
    ObjectiveVector objectives;
    std::uint64_t eval_index = 0;  // cumulative FE count at which it was evaluated
    TaskId task_id;

    bool operator==(const EvaluatedSolution&) const = default;
};

// Box constraints. lower[i] < upper[i] for every coordinate.
class Bounds {
public:
    Bounds() = default;
    Bounds(std::vector<double> lower, std::vector<double> upper);

    // Unit hypercube [0,1]^d.
    static Bounds unit(std::size_t dim);

    [[nodiscard]] std::size_t dim() const noexcept { return lower_.size(); }
    [[nodiscard]] const std::vector<double>& lower() const noexcept { return lower_; }
    [[nodiscard]] const std::vector<double>& upper() const noexcept { return upper_; }
    [[nodiscard]] bool contains(std::span<const double> x) const;

    bool operator==(const Bounds&) const = default;

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
};

// Pareto dominance for minimization: a <= b everywhere and a < b somewhere.
// Throws UsageError on length mismatch.
[[nodiscard]] bool dominates(std::span<const double> a, std::span<const double> b);

// Affine map of an in-bounds vector onto [0,1]^d. Throws UsageError when x
// lies outside b or the dimensions differ.
[[nodiscard]] DecisionVector normalize_decision(std::span<const double> x, const Bounds& b);

// Inverse of normalize_decision. Throws UsageError unless u is in [0,1]^d.
[[nodiscard]] DecisionVector denormalize_decision(std::span<const double> u, const Bounds& b);

// Clamp every coordinate into [0,1].
void clip_unit(DecisionVector& u);

}  // namespace seeto
