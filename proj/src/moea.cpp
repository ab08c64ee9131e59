#include "seeto/moea.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seeto/error.hpp"
#include "seeto/transfer.hpp"

namespace seeto {

namespace {

std::vector<ObjectiveVector> objectives_of(const Population& pop) {
    std::vector<ObjectiveVector> out;
    out.reserve(pop.size());
    for (const auto& ind : pop) out.push_back(ind.objectives);
    return out;
}

}  // namespace

std::pair<DecisionVector, DecisionVector> sbx_crossover(const DecisionVector& p1, const DecisionVector& p2,
                                                        double eta_c, double p_c, std::mt19937_64& rng) {
    if (p1.size() != p2.size()) throw UsageError("sbx_crossover: parent dimensions differ");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DecisionVector c1 = p1, c2 = p2;
    if (unif(rng) > p_c) return {c1, c2};

    for (std::size_t i = 0; i < p1.size(); ++i) {
        if (unif(rng) > 0.5 || std::abs(p1[i] - p2[i]) <= 1e-14) continue;
        const double y1 = std::min(p1[i], p2[i]);
        const double y2 = std::max(p1[i], p2[i]);
        const double diff = y2 - y1;
        const double r = unif(rng);

        auto spread = [&](double boundary_gap) {
            const double b = 1.0 + 2.0 * boundary_gap / diff;
            const double alpha = 2.0 - std::pow(b, -(eta_c + 1.0));
            return r <= 1.0 / alpha ? std::pow(r * alpha, 1.0 / (eta_c + 1.0))
                                    : std::pow(1.0 / (2.0 - r * alpha), 1.0 / (eta_c + 1.0));
        };
        double lo = 0.5 * ((y1 + y2) - spread(y1 - 0.0) * diff);
        double hi = 0.5 * ((y1 + y2) + spread(1.0 - y2) * diff);
        lo = std::clamp(lo, 0.0, 1.0);
        hi = std::clamp(hi, 0.0, 1.0);
        if (unif(rng) <= 0.5) std::swap(lo, hi);
        c1[i] = lo;
        c2[i] = hi;
    }
    return {c1, c2};
}

DecisionVector polynomial_mutation(const DecisionVector& x, double eta_m, double p_m, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    DecisionVector y = x;
    const double power = 1.0 / (eta_m + 1.0);
    for (double& v : y) {
        if (unif(rng) >= p_m) continue;
        const double d1 = v;        // distance to lower bound 0
        const double d2 = 1.0 - v;  // distance to upper bound 1
        const double r = unif(rng);
        double dq = 0.0;
        if (r < 0.5) {
            const double val = 2.0 * r + (1.0 - 2.0 * r) * std::pow(1.0 - d1, eta_m + 1.0);
            dq = std::pow(val, power) - 1.0;
        } else {
            const double val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(1.0 - d2, eta_m + 1.0);
            dq = 1.0 - std::pow(val, power);
        }
        v = std::clamp(v + dq, 0.0, 1.0);
    }
    return y;
}

Population evolve_generation(const Population& pop, const EnsembleSurrogate& surrogate,
                             const VariationParams& params, std::mt19937_64& rng) {
    const std::size_t n = pop.size();
    if (n == 0) throw UsageError("evolve_generation: empty population");
    const std::size_t dim = pop.front().decision.size();

    const auto objs = objectives_of(pop);
    const Fronts fronts = nondominated_sort(objs);
    std::vector<std::size_t> rank(n);
    std::vector<double> crowd(n);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        const auto cd = crowding_distance(objs, fronts[r]);
        for (std::size_t j = 0; j < fronts[r].size(); ++j) {
            rank[fronts[r][j]] = r;
            crowd[fronts[r][j]] = cd[j];
        }
    }

    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    auto tournament = [&]() {
        const std::size_t a = pick(rng);
        const std::size_t b = pick(rng);
        if (rank[a] != rank[b]) return rank[a] < rank[b] ? a : b;
        if (crowd[a] != crowd[b]) return crowd[a] > crowd[b] ? a : b;
        return std::min(a, b);
    };

    const double p_m = params.mutation_prob > 0.0 ? params.mutation_prob : 1.0 / static_cast<double>(dim);
    Population offspring;
    offspring.reserve(n);
    while (offspring.size() < n) {
        const auto& p1 = pop[tournament()].decision;
        const auto& p2 = pop[tournament()].decision;
        auto [c1, c2] = sbx_crossover(p1, p2, params.crossover_eta, params.crossover_prob, rng);
        for (auto* child : {&c1, &c2}) {
            if (offspring.size() == n) break;
            Individual ind;
            ind.decision = polynomial_mutation(*child, params.mutation_eta, p_m, rng);
            offspring.push_back(std::move(ind));
        }
    }
    for (auto& ind : offspring) {
        ind.objectives = surrogate.predict_mean(ind.decision);
        ind.fidelity = Fidelity::Surrogate;
    }
    return offspring;
}

Population environmental_selection(const Population& merged, std::size_t n_p) {
    if (merged.size() < n_p) throw UsageError("environmental_selection: fewer members than n_p");
    const auto objs = objectives_of(merged);
    const Fronts fronts = nondominated_sort(objs);
    Population out;
    out.reserve(n_p);
    for (const auto& level : fronts) {
        if (out.size() + level.size() <= n_p) {
            for (std::size_t i : level) out.push_back(merged[i]);
            if (out.size() == n_p) break;
            continue;
        }
        // True-fidelity members first, so a surrogate copy of a true point is the repeat.
        std::vector<std::size_t> front = level;
        std::stable_partition(front.begin(), front.end(),
                              [&](std::size_t i) { return merged[i].fidelity == Fidelity::True; });
        const auto cd = crowding_distance(objs, front);
        std::vector<std::size_t> pos(front.size());
        std::iota(pos.begin(), pos.end(), std::size_t{0});
        std::stable_sort(pos.begin(), pos.end(), [&](std::size_t a, std::size_t b) {
            if (cd[a] != cd[b]) return cd[a] > cd[b];
            const bool ta = merged[front[a]].fidelity == Fidelity::True;
            const bool tb = merged[front[b]].fidelity == Fidelity::True;
            if (ta != tb) return ta;
            return objs[front[a]][0] < objs[front[b]][0];
        });
        for (std::size_t p = 0; out.size() < n_p; ++p) out.push_back(merged[front[pos[p]]]);
        break;
    }
    return out;
}

}  // namespace seeto
