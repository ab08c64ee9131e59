#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "seeto/archive.hpp"
#include "seeto/embedder.hpp"
#include "seeto/ensemble.hpp"
#include "seeto/gp.hpp"
#include "seeto/moea.hpp"
#include "seeto/problems.hpp"
#include "seeto/types.hpp"

namespace seeto {

enum class Mode {
    Seeto,
    Baseline,
    AblationSolutionOnly,  // elite injection, local surrogate only
    AblationModelOnly,     // source ensemble, random initial population
};

[[nodiscard]] std::string to_string(Mode mode);
// Accepts "seeto", "baseline", "seeto-ablation-solution-only", "seeto-ablation-model-only".
[[nodiscard]] Mode mode_from_string(const std::string& name);

struct OptimizerConfig {
    std::size_t n_p = 100;
    std::uint64_t fe_max = 60;
    std::size_t gamma = 5;
    double temperature = 0.065;
    double rho = 0.2;
    double tau = 0.7;
    double c_high = 0.038;
    double c_low = 0.017;
    CRule c_rule = CRule::MaxWeight;
    std::optional<double> c_override;  // bypasses the tau rule when set
    std::size_t batch_size = 5;
    std::size_t inner_generations = 20;
    double kappa = 1.0;
    std::size_t init_design = 20;  // baseline only
    std::size_t latent_dim = kDefaultLatentDim;
    std::uint64_t seed = 1;
    VariationParams variation;
    GpOptions gp;

    // Throws UsageError naming the offending field.
    void validate() const;
};

struct TrajectoryRecord {
    std::uint64_t fe = 0;
    DecisionVector decision;  // normalized
    DecisionVector raw;       // in problem units
    ObjectiveVector objectives;
    double incumbent_hv = 0.0;
    bool exploration_fallback = false;  // batch was padded with random points
};

struct RunTrajectory {
    TaskId task_id;
    Mode mode = Mode::Seeto;
    std::uint64_t seed = 0;
    ObjectiveVector reference;
    std::vector<TrajectoryRecord> records;
    std::vector<EvaluatedSolution> dataset;     // every true evaluation, normalized decisions
    std::vector<EvaluatedSolution> pareto_set;  // non-dominated subset of dataset
    std::optional<SimilarityReport> similarity;
    std::optional<double> c;
    std::size_t injected = 0;
    std::shared_ptr<const GpModel> final_model;
    bool completed = false;
    std::string error;  // set when the run aborted

    // Incumbent HV after `fe` evaluations; 0 before the first, the final value past the end.
    [[nodiscard]] double hv_at(std::uint64_t fe) const;
    [[nodiscard]] std::vector<double> hv_curve() const;
    [[nodiscard]] double final_hv() const { return records.empty() ? 0.0 : records.back().incumbent_hv; }
};

// Called after every evaluated batch with the trajectory so far.
using BatchCallback = std::function<void(const RunTrajectory&)>;

struct AcquisitionBatch {
    std::vector<DecisionVector> decisions;
    bool fallback = false;
};

// Lower confidence bounds mean - kappa * std per objective; candidates are
// taken front by front of the LCB non-dominated sort, by descending crowding
// within a front, skipping anything within 1e-9 of an evaluated or already
// chosen decision. A short batch is padded with Latin-hypercube points.
[[nodiscard]] AcquisitionBatch select_acquisition_batch(const Population& candidates,
                                                        const EnsembleSurrogate& surrogate,
                                                        std::span<const EvaluatedSolution> evaluated, std::size_t q,
                                                        double kappa, std::mt19937_64& rng);

// Similarity of the target state to every archived task, top-gamma softmax.
// Fits the archive embedder first if it has none. Requires a non-empty archive.
[[nodiscard]] SimilarityReport measure_similarity(SourceArchive& archive, const TaskState& target_state,
                                                  const OptimizerConfig& cfg);

// Refits the archive embedder on every archived state.
void refresh_embedder(SourceArchive& archive, const OptimizerConfig& cfg);

// The archived form of a finished run.
[[nodiscard]] TaskRecord make_task_record(const ExpensiveProblem& problem, const TaskState& state,
                                          const RunTrajectory& traj);

// Transfer-enabled run in any non-baseline mode. A completed run is appended
// to the archive, whose embedder is then refitted.
[[nodiscard]] RunTrajectory run_seeto(const ExpensiveProblem& target, const TaskState& target_state,
                                      SourceArchive& archive, const OptimizerConfig& cfg,
                                      std::span<const double> hv_reference, Mode mode = Mode::Seeto,
                                      const BatchCallback& on_batch = {});

// Same loop without transfer: cfg.init_design LHS points are evaluated first,
// then the local GP alone drives the search.
[[nodiscard]] RunTrajectory run_baseline(const ExpensiveProblem& target, const OptimizerConfig& cfg,
                                         std::span<const double> hv_reference, const BatchCallback& on_batch = {});

}  // namespace seeto
