#pragma once

#include <random>
#include <utility>
#include <vector>

#include "seeto/ensemble.hpp"
#include "seeto/types.hpp"

namespace seeto {

enum class Fidelity { Surrogate, True };

struct Individual {
    DecisionVector decision;   // normalized
    ObjectiveVector objectives;
    Fidelity fidelity = Fidelity::Surrogate;
};

using Population = std::vector<Individual>;

struct VariationParams {
    double crossover_prob = 0.9;
    double crossover_eta = 20.0;
    double mutation_prob = 0.0;  // <= 0 means 1/d
    double mutation_eta = 20.0;
};

// Simulated binary crossover on [0,1]^d; children are clipped to the box.
[[nodiscard]] std::pair<DecisionVector, DecisionVector> sbx_crossover(const DecisionVector& p1,
                                                                      const DecisionVector& p2, double eta_c,
                                                                      double p_c, std::mt19937_64& rng);

// Bounded polynomial mutation on [0,1]^d.
[[nodiscard]] DecisionVector polynomial_mutation(const DecisionVector& x, double eta_m, double p_m,
                                                 std::mt19937_64& rng);

// Binary-tournament mating (rank, then crowding), SBX and polynomial mutation;
// returns pop.size() offspring scored by the surrogate mean.
[[nodiscard]] Population evolve_generation(const Population& pop, const EnsembleSurrogate& surrogate,
                                           const VariationParams& params, std::mt19937_64& rng);

// NSGA-II survival: whole fronts while they fit, the last one truncated by
// crowding distance. On equal crowding a true-fidelity member is kept first.
[[nodiscard]] Population environmental_selection(const Population& merged, std::size_t n_p);

}  // namespace seeto
