#include "seeto/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "seeto/error.hpp"
#include "seeto/metrics.hpp"
#include "seeto/transfer.hpp"

namespace seeto {

namespace {

constexpr double kDuplicateTolerance = 1e-9;

bool near(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s) <= kDuplicateTolerance;
}

bool is_duplicate(std::span<const double> x, std::span<const EvaluatedSolution> evaluated,
                  std::span<const DecisionVector> chosen) {
    for (const auto& e : evaluated) {
        if (near(x, e.decision)) return true;
    }
    for (const auto& c : chosen) {
        if (near(x, c)) return true;
    }
    return false;
}

// Candidate indices front by front, most isolated first within a front.
std::vector<std::size_t> preference_order(std::span<const ObjectiveVector> objs) {
    std::vector<std::size_t> order;
    for (const auto& front : nondominated_sort(objs)) {
        for (std::size_t i : crowding_truncate(objs, front, front.size())) order.push_back(i);
    }
    return order;
}

void pad_with_lhs(std::vector<DecisionVector>& batch, std::size_t q, std::size_t dim,
                  std::span<const EvaluatedSolution> evaluated, std::mt19937_64& rng) {
    while (batch.size() < q) {
        for (auto& u : latin_hypercube(q - batch.size(), dim, rng)) {
            if (!is_duplicate(u, evaluated, batch)) batch.push_back(std::move(u));
        }
    }
}

std::vector<ObjectiveVector> objectives_of(std::span<const EvaluatedSolution> data) {
    std::vector<ObjectiveVector> out;
    out.reserve(data.size());
    for (const auto& s : data) out.push_back(s.objectives);
    return out;
}

std::shared_ptr<const GpModel> try_train(std::span<const EvaluatedSolution> data, const GpOptions& opt) {
    if (data.size() < 2) return nullptr;
    try {
        return std::make_shared<const GpModel>(train_gp(data, opt));
    } catch (const InsufficientDataError&) {
        return nullptr;
    }
}

// Source objectives of the injected elites, aligned with the injected members
// of build_initial_population.
std::vector<ObjectiveVector> injected_source_objectives(const SimilarityReport& report, const SourceArchive& archive,
                                                        const InjectionPlan& plan, std::size_t injected) {
    std::vector<ObjectiveVector> out;
    for (const auto& id : report.selected) {
        const TaskRecord* rec = archive.find(id);
        for (const auto& u : extract_elites(rec->dataset, plan.per_source_counts.at(id))) {
            for (const auto& s : rec->dataset) {
                if (s.decision == u) {
                    out.push_back(s.objectives);
                    break;
                }
            }
        }
    }
    out.resize(std::min(out.size(), injected));
    return out;
}

struct LoopInputs {
    Mode mode;
    std::vector<EnsembleSurrogate::Source> sources;
    double c = 1.0;
    Population population;
    std::size_t injected = 0;
    std::vector<ObjectiveVector> injected_objectives;
};

class Runner {
public:
    Runner(const ExpensiveProblem& problem, const OptimizerConfig& cfg, std::span<const double> ref,
           RunTrajectory& traj, const BatchCallback& on_batch)
        : problem_(problem), cfg_(cfg), ref_(ref.begin(), ref.end()), traj_(traj), on_batch_(on_batch),
          rng_(cfg.seed) {}

    std::mt19937_64& rng() { return rng_; }

    // Evaluates a batch truly and logs it; returns the true-fidelity members.
    Population evaluate(const std::vector<DecisionVector>& batch, bool fallback) {
        Population out;
        for (const auto& u : batch) {
            if (traj_.records.size() >= cfg_.fe_max) break;
            TrajectoryRecord rec;
            rec.decision = u;
            rec.raw = denormalize_decision(u, problem_.bounds());
            rec.objectives = problem_.evaluate(rec.raw);
            rec.fe = traj_.records.size() + 1;
            rec.exploration_fallback = fallback;
            traj_.dataset.push_back({u, rec.objectives, rec.fe, problem_.id()});
            const auto objs = objectives_of(traj_.dataset);
            rec.incumbent_hv = hypervolume(objs, ref_);
            traj_.records.push_back(rec);
            out.push_back({u, rec.objectives, Fidelity::True});
        }
        return out;
    }

    void notify() {
        if (on_batch_) on_batch_(traj_);
    }

    void loop(LoopInputs in) {
        const std::size_t dim = problem_.dim();
        Population pop = std::move(in.population);
        while (traj_.records.size() < cfg_.fe_max) {
            const std::uint64_t fe = traj_.records.size();
            const std::size_t q = std::min<std::uint64_t>(cfg_.batch_size, cfg_.fe_max - fe);
            auto local = try_train(traj_.dataset, cfg_.gp);
            if (local) traj_.final_model = local;

            Population work = pop;
            AcquisitionBatch acq;
            if (local || !in.sources.empty()) {
                const auto surrogate = EnsembleSurrogate::at(in.sources, local, in.c, fe);
                for (auto& ind : work) {
                    if (ind.fidelity == Fidelity::Surrogate) ind.objectives = surrogate.predict_mean(ind.decision);
                }
                for (std::size_t g = 0; g < cfg_.inner_generations; ++g) {
                    Population merged = work;
                    auto offspring = evolve_generation(work, surrogate, cfg_.variation, rng_);
                    merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                                  std::make_move_iterator(offspring.end()));
                    work = environmental_selection(merged, cfg_.n_p);
                }
                Population candidates;
                for (const auto& ind : work) {
                    if (ind.fidelity == Fidelity::Surrogate) candidates.push_back(ind);
                }
                acq = select_acquisition_batch(candidates, surrogate, traj_.dataset, q, cfg_.kappa, rng_);
            } else {
                // No model of any kind yet: injected elites by source rank, else a space-filling design.
                std::vector<std::size_t> order = preference_order(in.injected_objectives);
                for (std::size_t i : order) {
                    if (acq.decisions.size() == q) break;
                    const auto& u = work[i].decision;
                    if (!is_duplicate(u, traj_.dataset, acq.decisions)) acq.decisions.push_back(u);
                }
                pad_with_lhs(acq.decisions, q, dim, traj_.dataset, rng_);
            }

            Population fresh = evaluate(acq.decisions, acq.fallback);
            if (local || !in.sources.empty()) {
                work.insert(work.end(), fresh.begin(), fresh.end());
                pop = environmental_selection(work, cfg_.n_p);
            } else {
                work.resize(cfg_.n_p - std::min(cfg_.n_p, fresh.size()));
                work.insert(work.end(), fresh.begin(), fresh.end());
                pop = std::move(work);
            }
            notify();
        }
    }

    void finish() {
        if (auto model = try_train(traj_.dataset, cfg_.gp)) traj_.final_model = model;
        const auto objs = objectives_of(traj_.dataset);
        const auto fronts = nondominated_sort(objs);
        if (!fronts.empty()) {
            for (std::size_t i : fronts.front()) traj_.pareto_set.push_back(traj_.dataset[i]);
        }
        traj_.completed = true;
    }

private:
    const ExpensiveProblem& problem_;
    const OptimizerConfig& cfg_;
    ObjectiveVector ref_;
    RunTrajectory& traj_;
    const BatchCallback& on_batch_;
    std::mt19937_64 rng_;
};

RunTrajectory start_trajectory(const ExpensiveProblem& problem, const OptimizerConfig& cfg,
                               std::span<const double> ref, Mode mode) {
    cfg.validate();
    if (ref.size() != problem.objective_count()) throw UsageError("optimizer: reference point has the wrong length");
    RunTrajectory traj;
    traj.task_id = problem.id();
    traj.mode = mode;
    traj.seed = cfg.seed;
    traj.reference.assign(ref.begin(), ref.end());
    return traj;
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::Seeto: return "seeto";
        case Mode::Baseline: return "baseline";
        case Mode::AblationSolutionOnly: return "seeto-ablation-solution-only";
        case Mode::AblationModelOnly: return "seeto-ablation-model-only";
    }
    return "unknown";
}

Mode mode_from_string(const std::string& name) {
    for (Mode m : {Mode::Seeto, Mode::Baseline, Mode::AblationSolutionOnly, Mode::AblationModelOnly}) {
        if (to_string(m) == name) return m;
    }
    throw UsageError("unknown mode '" + name + "'");
}

void OptimizerConfig::validate() const {
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok) throw UsageError(std::string("OptimizerConfig.") + field + ": " + what);
    };
    require(n_p >= 1, "n_p", "must be >= 1");
    require(fe_max >= 1, "fe_max", "must be >= 1");
    require(gamma >= 1, "gamma", "must be >= 1");
    require(temperature > 0.0, "temperature", "must be > 0");
    require(rho >= 0.0 && rho <= 1.0, "rho", "must lie in [0,1]");
    require(tau > 0.0 && tau < 1.0, "tau", "must lie in (0,1)");
    require(c_high > 0.0, "c_high", "must be > 0");
    require(c_low > 0.0, "c_low", "must be > 0");
    require(!c_override || *c_override > 0.0, "c", "must be > 0");
    require(batch_size >= 1 && batch_size <= n_p, "batch_size", "must lie in [1, n_p]");
    require(kappa >= 0.0, "kappa", "must be >= 0");
    require(init_design >= 1 && init_design <= fe_max && init_design <= n_p, "init_design",
            "must lie in [1, min(fe_max, n_p)]");
    require(latent_dim >= 1, "latent_dim", "must be >= 1");
}

double RunTrajectory::hv_at(std::uint64_t fe) const {
    if (fe == 0 || records.empty()) return 0.0;
    return records[std::min<std::uint64_t>(fe, records.size()) - 1].incumbent_hv;
}

std::vector<double> RunTrajectory::hv_curve() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.incumbent_hv);
    return out;
}

AcquisitionBatch select_acquisition_batch(const Population& candidates, const EnsembleSurrogate& surrogate,
                                          std::span<const EvaluatedSolution> evaluated, std::size_t q, double kappa,
                                          std::mt19937_64& rng) {
    if (q < 1) throw UsageError("select_acquisition_batch: q must be >= 1");
    AcquisitionBatch out;
    std::vector<ObjectiveVector> lcb;
    lcb.reserve(candidates.size());
    for (const auto& c : candidates) {
        const auto p = surrogate.predict(c.decision);
        ObjectiveVector s(p.mean.size());
        for (std::size_t k = 0; k < s.size(); ++k) s[k] = p.mean[k] - kappa * p.std[k];
        lcb.push_back(std::move(s));
    }
    for (std::size_t i : preference_order(lcb)) {
        if (out.decisions.size() == q) break;
        const auto& u = candidates[i].decision;
        if (!is_duplicate(u, evaluated, out.decisions)) out.decisions.push_back(u);
    }
    if (out.decisions.size() < q) {
        std::size_t dim = 0;
        if (!candidates.empty()) {
            dim = candidates.front().decision.size();
        } else if (!evaluated.empty()) {
            dim = evaluated.front().decision.size();
        } else {
            throw UsageError("select_acquisition_batch: cannot infer the dimension");
        }
        out.fallback = true;
        pad_with_lhs(out.decisions, q, dim, evaluated, rng);
    }
    return out;
}

void refresh_embedder(SourceArchive& archive, const OptimizerConfig& cfg) {
    if (archive.empty()) {
        archive.embedder.reset();
        return;
    }
    std::vector<TaskState> states;
    for (const auto& r : archive.records) states.push_back(r.state);
    const std::size_t q = std::min(cfg.latent_dim, states.front().frame_size());
    archive.embedder = fit_embedder(states, q, cfg.seed);
}

SimilarityReport measure_similarity(SourceArchive& archive, const TaskState& target_state,
                                    const OptimizerConfig& cfg) {
    if (archive.empty()) throw UsageError("measure_similarity: empty archive");
    if (!archive.embedder) refresh_embedder(archive, cfg);
    const auto target = embed(*archive.embedder, target_state, "target");
    std::vector<std::pair<TaskId, double>> sims;
    for (const auto& r : archive.records) {
        sims.emplace_back(r.id, task_similarity(target, embed(*archive.embedder, r.state, r.id)));
    }
    return select_and_weight(sims, cfg.gamma, cfg.temperature);
}

TaskRecord make_task_record(const ExpensiveProblem& problem, const TaskState& state, const RunTrajectory& traj) {
    TaskRecord rec;
    rec.id = problem.id();
    rec.state = state;
    rec.bounds = problem.bounds();
    rec.dataset = traj.dataset;
    rec.model = traj.final_model;
    rec.metadata = {{"mode", to_string(traj.mode)}, {"seed", std::to_string(traj.seed)},
                    {"evaluations", std::to_string(traj.records.size())}};
    return rec;
}

RunTrajectory run_seeto(const ExpensiveProblem& target, const TaskState& target_state, SourceArchive& archive,
                        const OptimizerConfig& cfg, std::span<const double> hv_reference, Mode mode,
                        const BatchCallback& on_batch) {
    if (mode == Mode::Baseline) throw UsageError("run_seeto: use run_baseline for the baseline mode");
    RunTrajectory traj = start_trajectory(target, cfg, hv_reference, mode);
    const bool inject = mode != Mode::AblationModelOnly;
    const bool model_transfer = mode != Mode::AblationSolutionOnly;

    LoopInputs in;
    in.mode = mode;
    SimilarityReport report;
    if (!archive.empty()) {
        report = measure_similarity(archive, target_state, cfg);
        traj.similarity = report;
        in.c = cfg.c_override ? *cfg.c_override : choose_c(report, cfg.tau, cfg.c_high, cfg.c_low, cfg.c_rule);
        traj.c = in.c;
        if (model_transfer) {
            for (std::size_t i = 0; i < report.selected.size(); ++i) {
                const TaskRecord* rec = archive.find(report.selected[i]);
                if (!rec->model) throw UsageError("run_seeto: source '" + rec->id + "' has no surrogate");
                in.sources.push_back({rec->model, report.weights[i]});
            }
        }
    }

    const InitialPopulation init = build_initial_population(report, archive, target.bounds(), cfg.n_p,
                                                            inject ? cfg.rho : 0.0, cfg.seed ^ 0x9E3779B97F4A7C15ULL);
    for (const auto& u : init.members) in.population.push_back({u, {}, Fidelity::Surrogate});
    in.injected = init.injected;
    traj.injected = init.injected;
    if (init.injected > 0) in.injected_objectives = injected_source_objectives(report, archive, init.plan, init.injected);

    Runner runner(target, cfg, hv_reference, traj, on_batch);
    try {
        runner.loop(std::move(in));
        runner.finish();
    } catch (const std::exception& e) {
        traj.error = e.what();
        return traj;
    }
    archive.append(make_task_record(target, target_state, traj));
    refresh_embedder(archive, cfg);
    return traj;
}

RunTrajectory run_baseline(const ExpensiveProblem& target, const OptimizerConfig& cfg,
                           std::span<const double> hv_reference, const BatchCallback& on_batch) {
    RunTrajectory traj = start_trajectory(target, cfg, hv_reference, Mode::Baseline);
    Runner runner(target, cfg, hv_reference, traj, on_batch);
    try {
        const std::size_t dim = target.dim();
        auto design = latin_hypercube(cfg.init_design, dim, runner.rng());
        LoopInputs in;
        in.mode = Mode::Baseline;
        in.population = runner.evaluate(design, false);
        runner.notify();
        for (auto& u : latin_hypercube(cfg.n_p - in.population.size(), dim, runner.rng())) {
            in.population.push_back({std::move(u), {}, Fidelity::Surrogate});
        }
        runner.loop(std::move(in));
        runner.finish();
    } catch (const std::exception& e) {
        traj.error = e.what();
    }
    return traj;
}

}  // namespace seeto
