#include "seeto/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "seeto/error.hpp"

namespace seeto {

namespace {

std::vector<ObjectiveVector> objectives_of(std::span<const EvaluatedSolution> pop) {
    std::vector<ObjectiveVector> out;
    out.reserve(pop.size());
    for (const auto& s : pop) out.push_back(s.objectives);
    return out;
}

}  // namespace

Fronts nondominated_sort(std::span<const ObjectiveVector> objectives) {
    const std::size_t n = objectives.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dom_count(n, 0);
    Fronts fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(objectives[i], objectives[j])) {
                dominated[i].push_back(j);
                ++dom_count[j];
            } else if (dominates(objectives[j], objectives[i])) {
                dominated[j].push_back(i);
                ++dom_count[i];
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (dom_count[i] == 0) current.push_back(i);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            for (std::size_t j : dominated[i]) {
                if (--dom_count[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

Fronts nondominated_sort(std::span<const EvaluatedSolution> pop) {
    const auto objs = objectives_of(pop);
    return nondominated_sort(objs);
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> objectives,
                                      std::span<const std::size_t> front) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    // Repeated objective vectors keep distance 0; only first occurrences are spaced.
    std::vector<std::size_t> uniq;
    for (std::size_t j = 0; j < n; ++j) {
        const bool repeat = std::any_of(uniq.begin(), uniq.end(),
                                        [&](std::size_t u) { return objectives[front[u]] == objectives[front[j]]; });
        if (!repeat) uniq.push_back(j);
    }
    const std::size_t nu = uniq.size();
    if (nu <= 2) {
        for (std::size_t u : uniq) dist[u] = inf;
        return dist;
    }
    const std::size_t m = objectives[front[0]].size();
    std::vector<std::size_t> order(nu);
    for (std::size_t k = 0; k < m; ++k) {
        std::copy(uniq.begin(), uniq.end(), order.begin());
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return objectives[front[a]][k] < objectives[front[b]][k];
        });
        const double lo = objectives[front[order.front()]][k];
        const double hi = objectives[front[order.back()]][k];
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        const double range = hi - lo;
        if (!(range > 0.0)) continue;
        for (std::size_t r = 1; r + 1 < nu; ++r) {
            const double gap = objectives[front[order[r + 1]]][k] - objectives[front[order[r - 1]]][k];
            dist[order[r]] += gap / range;
        }
    }
    return dist;
}

std::vector<double> crowding_distance(std::span<const EvaluatedSolution> front) {
    const auto objs = objectives_of(front);
    std::vector<std::size_t> idx(objs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return crowding_distance(objs, idx);
}

std::vector<std::size_t> crowding_truncate(std::span<const ObjectiveVector> objectives,
                                           std::span<const std::size_t> front, std::size_t count) {
    const auto dist = crowding_distance(objectives, front);
    std::vector<std::size_t> pos(front.size());
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] > dist[b];
        return objectives[front[a]][0] < objectives[front[b]][0];
    });
    pos.resize(std::min(count, pos.size()));
    std::vector<std::size_t> out;
    out.reserve(pos.size());
    for (std::size_t p : pos) out.push_back(front[p]);
    return out;
}

std::vector<DecisionVector> extract_elites(std::span<const EvaluatedSolution> dataset, std::size_t count) {
    std::vector<DecisionVector> out;
    if (count == 0) return out;
    if (count >= dataset.size()) {
        for (const auto& s : dataset) out.push_back(s.decision);
        return out;
    }
    const auto objs = objectives_of(dataset);
    const Fronts fronts = nondominated_sort(objs);
    std::size_t remaining = count;
    for (const auto& front : fronts) {
        if (front.size() <= remaining) {
            for (std::size_t i : front) out.push_back(dataset[i].decision);
            remaining -= front.size();
        } else {
            for (std::size_t i : crowding_truncate(objs, front, remaining)) out.push_back(dataset[i].decision);
            remaining = 0;
        }
        if (remaining == 0) break;
    }
    return out;
}

InjectionPlan plan_injection(const SimilarityReport& report, std::size_t n_p, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw UsageError("plan_injection: rho must lie in [0,1]");
    if (n_p < 1) throw UsageError("plan_injection: population size must be >= 1");
    InjectionPlan plan;
    // The epsilon absorbs representation error in products such as 0.3 * 20.
    plan.total_elite = static_cast<std::size_t>(std::floor(rho * static_cast<double>(n_p) + 1e-9));
    std::size_t planned = 0;
    for (std::size_t i = 0; i < report.selected.size(); ++i) {
        const auto n_i =
            static_cast<std::size_t>(std::floor(report.weights[i] * static_cast<double>(plan.total_elite) + 1e-9));
        plan.per_source_counts[report.selected[i]] = n_i;
        planned += n_i;
    }
    plan.random_fill = n_p - std::min(planned, n_p);
    return plan;
}

std::vector<DecisionVector> latin_hypercube(std::size_t n, std::size_t dim, std::mt19937_64& rng) {
    std::vector<DecisionVector> pts(n, DecisionVector(dim, 0.0));
    if (n == 0) return pts;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < dim; ++k) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            pts[i][k] = (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(n);
        }
    }
    return pts;
}

InitialPopulation build_initial_population(const SimilarityReport& report, const SourceArchive& archive,
                                           const Bounds& target_bounds, std::size_t n_p, double rho,
                                           std::uint64_t rng_seed) {
    InitialPopulation pop;
    const std::size_t dim = target_bounds.dim();
    if (!archive.empty() && !report.selected.empty()) {
        pop.plan = plan_injection(report, n_p, rho);
        for (const auto& id : report.selected) {
            const TaskRecord* rec = archive.find(id);
            if (!rec) throw UsageError("build_initial_population: selected source '" + id + "' not in archive");
            const std::size_t n_i = pop.plan.per_source_counts.at(id);
            for (auto& u : extract_elites(rec->dataset, n_i)) {
                if (rec->bounds.dim() != dim) {
                    throw UsageError("build_initial_population: source '" + id + "' has a different dimension");
                }
                if (!(rec->bounds == target_bounds)) {
                    auto raw = denormalize_decision(u, rec->bounds);
                    for (std::size_t k = 0; k < dim; ++k) {
                        raw[k] = std::clamp(raw[k], target_bounds.lower()[k], target_bounds.upper()[k]);
                    }
                    u = normalize_decision(raw, target_bounds);
                }
                pop.members.push_back(std::move(u));
            }
        }
    } else {
        if (!(rho >= 0.0 && rho <= 1.0)) throw UsageError("build_initial_population: rho must lie in [0,1]");
        if (n_p < 1) throw UsageError("build_initial_population: population size must be >= 1");
    }
    if (pop.members.size() > n_p) pop.members.resize(n_p);
    pop.injected = pop.members.size();
    pop.plan.random_fill = n_p - pop.injected;

    std::mt19937_64 rng(rng_seed);
    for (auto& u : latin_hypercube(pop.plan.random_fill, dim, rng)) pop.members.push_back(std::move(u));
    return pop;
}

}  // namespace seeto
