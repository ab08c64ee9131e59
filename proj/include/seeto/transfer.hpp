#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <vector>

#include "seeto/archive.hpp"
#include "seeto/embedder.hpp"
#include "seeto/types.hpp"

namespace seeto {

// Indices of each non-dominated level, best level first. Every index appears
// in exactly one level; levels keep input order.
using Fronts = std::vector<std::vector<std::size_t>>;

[[nodiscard]] Fronts nondominated_sort(std::span<const ObjectiveVector> objectives);
[[nodiscard]] Fronts nondominated_sort(std::span<const EvaluatedSolution> pop);

// Crowding distance of each member of `front` (indices into `objectives`),
// aligned with `front`. Boundary members and fronts of size <= 2 get +inf;
// gaps are divided by each objective's range over the front. A repeat of an
// earlier objective vector in the front gets 0 and is ignored when spacing.
[[nodiscard]] std::vector<double> crowding_distance(std::span<const ObjectiveVector> objectives,
                                                    std::span<const std::size_t> front);
[[nodiscard]] std::vector<double> crowding_distance(std::span<const EvaluatedSolution> front);

// The `count` members of `front` with the largest crowding distance, in that
// order. Ties: smaller first objective, then earlier position in `front`.
[[nodiscard]] std::vector<std::size_t> crowding_truncate(std::span<const ObjectiveVector> objectives,
                                                         std::span<const std::size_t> front,
                                                         std::size_t count);

// Elite decisions of a source dataset: whole levels while they fit, the
// level that does not fit truncated by crowding distance.
[[nodiscard]] std::vector<DecisionVector> extract_elites(std::span<const EvaluatedSolution> dataset,
                                                         std::size_t count);

struct InjectionPlan {
    std::map<TaskId, std::size_t> per_source_counts;  // floor(w_i * total_elite)
    std::size_t total_elite = 0;                      // floor(rho * n_p)
    std::size_t random_fill = 0;                      // n_p - injected
};

[[nodiscard]] InjectionPlan plan_injection(const SimilarityReport& report, std::size_t n_p, double rho);

// Stratified sample of n points in [0,1]^d.
[[nodiscard]] std::vector<DecisionVector> latin_hypercube(std::size_t n, std::size_t dim, std::mt19937_64& rng);

struct InitialPopulation {
    std::vector<DecisionVector> members;  // normalized to the target bounds
    std::size_t injected = 0;             // the first `injected` members came from sources
    InjectionPlan plan;
};

// Warm-start population: elites from each selected source (re-expressed in
// target bounds, clipped), then a Latin-hypercube fill up to n_p.
[[nodiscard]] InitialPopulation build_initial_population(const SimilarityReport& report,
                                                         const SourceArchive& archive,
                                                         const Bounds& target_bounds, std::size_t n_p,
                                                         double rho, std::uint64_t rng_seed);

}  // namespace seeto
