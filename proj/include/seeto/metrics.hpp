#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seeto/types.hpp"

namespace seeto {

// Exact 2-objective hypervolume of `front` against `ref` (minimization).
// Points that do not strictly dominate ref contribute nothing.
[[nodiscard]] double hypervolume_2d(std::span<const ObjectiveVector> front, std::span<const double> ref);

// Monte Carlo estimate over the box [ideal, ref]. Used for m >= 3.
struct HvEstimate {
    double value = 0.0;
    double std_error = 0.0;
};
[[nodiscard]] HvEstimate hypervolume_monte_carlo(std::span<const ObjectiveVector> front, std::span<const double> ref,
                                                 std::uint64_t samples, std::uint64_t seed);

// Exact for m = 2, Monte Carlo (10^6 samples, fixed seed) otherwise.
[[nodiscard]] double hypervolume(std::span<const ObjectiveVector> front, std::span<const double> ref);

// 100 * (hv_algo - hv_ref_algo) / hv_ref_algo. Throws UndefinedMetricError
// unless hv_ref_algo > 0.
[[nodiscard]] double delta_hv_percent(double hv_algo, double hv_ref_algo);

// Extra evaluations, relative to base_fe, that a run needed to reach a target
// HV. When the run never gets there, `reached` is false and `percent` holds
// the lower bound 100 * (fe_max - base_fe) / base_fe.
struct AdditionalFe {
    bool reached = false;
    double percent = 0.0;
    std::optional<std::uint64_t> fe;

    // "30.00%" or ">200%".
    [[nodiscard]] std::string to_string() const;
};

// `incumbent_hv[i]` is the incumbent HV after evaluation i + 1.
[[nodiscard]] AdditionalFe additional_fe_percent(std::span<const double> incumbent_hv, double hv_target,
                                                 std::uint64_t base_fe, std::uint64_t fe_max);

}  // namespace seeto
