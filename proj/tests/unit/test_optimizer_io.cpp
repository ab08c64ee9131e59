#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <numeric>
#include <random>

#include "doctest.h"
#include "seeto/archive.hpp"
#include "seeto/error.hpp"
#include "seeto/experiment.hpp"
#include "seeto/metrics.hpp"
#include "seeto/optimizer.hpp"
#include "seeto/transfer.hpp"

using namespace seeto;
namespace fs = std::filesystem;

namespace {

OptimizerConfig small_optimizer() {
    OptimizerConfig c;
    c.n_p = 20;
    c.fe_max = 20;
    c.init_design = 10;
    c.inner_generations = 5;
    c.gp.n_starts = 2;
    c.gp.max_evaluations_per_start = 40;
    return c;
}

TaskFamilyParams small_family() {
    TaskFamilyParams p;
    p.n_source = 3;
    p.n_target = 2;
    p.outlier_targets = 1;
    return p;
}

std::vector<double> ref_of(const SyntheticTask& t) { return t.reference_point(); }

SourceArchive solved_sources(const TaskFamily& fam, const OptimizerConfig& cfg) {
    SourceArchive archive;
    for (std::size_t i = 0; i < fam.sources.size(); ++i) {
        auto c = cfg;
        c.seed = 100 + i;
        const auto& src = fam.sources[i];
        const auto traj = run_baseline(src, c, ref_of(src));
        REQUIRE(traj.completed);
        archive.append(make_task_record(src, src.state(), traj));
    }
    refresh_embedder(archive, cfg);
    return archive;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("seeto-unit-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("mode names round trip") {
    for (auto m : {Mode::Seeto, Mode::Baseline, Mode::AblationSolutionOnly, Mode::AblationModelOnly}) {
        CHECK(mode_from_string(to_string(m)) == m);
    }
    CHECK(to_string(Mode::AblationModelOnly) == "seeto-ablation-model-only");
    CHECK_THROWS_AS((void)mode_from_string("nsga"), UsageError);
}

TEST_CASE("optimizer config validation names the field") {
    auto c = small_optimizer();
    CHECK_NOTHROW(c.validate());
    c.rho = 1.5;
    try {
        c.validate();
        FAIL("expected a UsageError");
    } catch (const UsageError& e) {
        CHECK(std::string(e.what()).find("OptimizerConfig.rho") != std::string::npos);
    }
}

TEST_CASE("acquisition with kappa 0 follows predicted-mean dominance") {
    std::vector<EvaluatedSolution> data;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 15; ++i) {
        DecisionVector x{u(rng), u(rng)};
        data.push_back({x, {x[0] + 0.1 * x[1], 1.0 - x[0] + 0.3 * x[1] * x[1]}, std::uint64_t(i + 1), "t"});
    }
    const EnsembleSurrogate s({}, std::make_shared<const GpModel>(train_gp(data)), 1.0);
    Population cands(60);
    for (auto& c : cands) c.decision = {u(rng), u(rng)};

    // Oracle: peel mean-dominance fronts, order each by crowding (ties:
    // smaller f1, then position) and take the first q.
    std::vector<ObjectiveVector> means;
    for (const auto& c : cands) means.push_back(s.predict_mean(c.decision));
    std::vector<std::size_t> order;
    std::vector<bool> taken(means.size(), false);
    while (order.size() < means.size()) {
        std::vector<std::size_t> front;
        for (std::size_t i = 0; i < means.size(); ++i) {
            if (taken[i]) continue;
            bool dom = false;
            for (std::size_t j = 0; j < means.size() && !dom; ++j) dom = !taken[j] && dominates(means[j], means[i]);
            if (!dom) front.push_back(i);
        }
        std::vector<double> cd(front.size(), 0.0);
        if (front.size() <= 2) {
            std::fill(cd.begin(), cd.end(), std::numeric_limits<double>::infinity());
        } else {
            for (std::size_t k = 0; k < 2; ++k) {
                std::vector<std::size_t> o(front.size());
                std::iota(o.begin(), o.end(), 0);
                std::stable_sort(o.begin(), o.end(), [&](auto a, auto b) { return means[front[a]][k] < means[front[b]][k]; });
                const double range = means[front[o.back()]][k] - means[front[o.front()]][k];
                cd[o.front()] = cd[o.back()] = std::numeric_limits<double>::infinity();
                for (std::size_t r = 1; r + 1 < o.size(); ++r) {
                    cd[o[r]] += (means[front[o[r + 1]]][k] - means[front[o[r - 1]]][k]) / range;
                }
            }
        }
        std::vector<std::size_t> pos(front.size());
        std::iota(pos.begin(), pos.end(), 0);
        std::stable_sort(pos.begin(), pos.end(), [&](auto a, auto b) {
            if (cd[a] != cd[b]) return cd[a] > cd[b];
            return means[front[a]][0] < means[front[b]][0];
        });
        for (auto p : pos) order.push_back(front[p]);
        for (auto i : front) taken[i] = true;
    }

    const auto batch = select_acquisition_batch(cands, s, data, 5, 0.0, rng);
    CHECK_FALSE(batch.fallback);
    REQUIRE(batch.decisions.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(batch.decisions[i] == cands[order[i]].decision);

    // q = 1 with one clearly best candidate.
    Population best{{{0.5, 0.5}, {}, Fidelity::Surrogate}, {{0.9, 0.9}, {}, Fidelity::Surrogate}};
    const auto lin = [&] {
        std::vector<EvaluatedSolution> d;
        for (int i = 0; i < 10; ++i) {
            const double a = i / 9.0;
            d.push_back({{a, 1 - a}, {a + (1 - a), a + (1 - a)}, std::uint64_t(i + 1), "t"});
        }
        d.push_back({{0.5, 0.5}, {0.0, 0.0}, 11, "t"});
        return d;
    }();
    const EnsembleSurrogate ls({}, std::make_shared<const GpModel>(train_gp(lin)), 1.0);
    const std::vector<EvaluatedSolution> none;
    CHECK(select_acquisition_batch(best, ls, none, 1, 0.0, rng).decisions.front() == DecisionVector{0.5, 0.5});
}

TEST_CASE("acquisition skips evaluated points and pads with random ones") {
    std::vector<EvaluatedSolution> data{{{0.1, 0.1}, {0.0, 1.0}, 1, "t"}, {{0.9, 0.9}, {1.0, 0.0}, 2, "t"},
                                        {{0.5, 0.2}, {0.5, 0.5}, 3, "t"}};
    const EnsembleSurrogate s({}, std::make_shared<const GpModel>(train_gp(data)), 1.0);
    Population cands;
    for (const auto& d : data) cands.push_back({d.decision, {}, Fidelity::Surrogate});
    cands.push_back({{0.3, 0.7}, {}, Fidelity::Surrogate});
    std::mt19937_64 rng(1);
    const auto batch = select_acquisition_batch(cands, s, data, 4, 1.0, rng);
    CHECK(batch.fallback);
    REQUIRE(batch.decisions.size() == 4);
    CHECK(batch.decisions.front() == DecisionVector{0.3, 0.7});
    for (const auto& x : batch.decisions) {
        for (const auto& d : data) CHECK(x != d.decision);
    }
}

TEST_CASE("baseline run contract") {
    const auto fam = make_task_family(small_family());
    const auto cfg = small_optimizer();
    const auto& t = fam.targets[0];
    const auto a = run_baseline(t, cfg, ref_of(t));
    const auto b = run_baseline(t, cfg, ref_of(t));
    REQUIRE(a.completed);
    REQUIRE(a.records.size() == 20);
    CHECK(a.dataset.size() == 20);
    CHECK(trajectory_csv(a) == trajectory_csv(b));
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].fe == i + 1);
        if (i > 0) CHECK(a.records[i].incumbent_hv >= a.records[i - 1].incumbent_hv);
        const auto f = t.evaluate_normalized(a.records[i].decision);
        CHECK(f[0] == doctest::Approx(a.records[i].objectives[0]).epsilon(1e-12));
        CHECK(f[1] == doctest::Approx(a.records[i].objectives[1]).epsilon(1e-12));
    }
    // The first init_design records are a Latin hypercube: one point per stratum.
    for (std::size_t k = 0; k < 5; ++k) {
        std::vector<int> cells;
        for (std::size_t i = 0; i < 10; ++i) cells.push_back(static_cast<int>(a.records[i].decision[k] * 10));
        std::sort(cells.begin(), cells.end());
        CHECK(std::unique(cells.begin(), cells.end()) == cells.end());
    }
    std::vector<ObjectiveVector> ps;
    for (const auto& s : a.pareto_set) ps.push_back(s.objectives);
    CHECK(a.final_hv() == doctest::Approx(hypervolume_2d(ps, ref_of(t))).epsilon(1e-12));
    CHECK(a.hv_at(0) == 0.0);
    CHECK(a.hv_at(500) == a.final_hv());
}

TEST_CASE("seeto run contract") {
    const auto fam = make_task_family(small_family());
    const auto cfg = small_optimizer();
    auto archive = solved_sources(fam, cfg);
    const auto& t = fam.targets[0];

    auto copy = archive;
    const auto a = run_seeto(t, t.state(), copy, cfg, ref_of(t));
    REQUIRE(a.completed);
    CHECK(copy.size() == archive.size() + 1);
    CHECK(copy.records.back().id == t.id());
    CHECK(a.records.size() == cfg.fe_max);
    CHECK(t.evaluations() >= cfg.fe_max);
    REQUIRE(a.c.has_value());
    REQUIRE(a.similarity.has_value());
    std::size_t planned = 0;
    for (const auto& [id, n] : plan_injection(*a.similarity, cfg.n_p, cfg.rho).per_source_counts) planned += n;
    CHECK(a.injected == planned);
    CHECK(planned <= 4);
    for (std::size_t i = 1; i < a.records.size(); ++i) CHECK(a.records[i].incumbent_hv >= a.records[i - 1].incumbent_hv);

    auto copy2 = archive;
    const auto b = run_seeto(t, t.state(), copy2, cfg, ref_of(t));
    CHECK(trajectory_csv(a) == trajectory_csv(b));
    CHECK(archive_to_string(copy) == archive_to_string(copy2));

    auto empty = SourceArchive{};
    const auto cold = run_seeto(t, t.state(), empty, cfg, ref_of(t));
    CHECK(cold.completed);
    CHECK_FALSE(cold.c.has_value());
    CHECK(empty.size() == 1);

    auto c3 = archive;
    auto model_only = run_seeto(t, t.state(), c3, cfg, ref_of(t), Mode::AblationModelOnly);
    CHECK(model_only.injected == 0);
    CHECK_THROWS_AS((void)run_seeto(t, t.state(), c3, cfg, ref_of(t), Mode::Baseline), UsageError);
}

TEST_CASE("archive round trip and errors") {
    const auto fam = make_task_family(small_family());
    const auto cfg = small_optimizer();
    const auto archive = solved_sources(fam, cfg);

    const auto text = archive_to_string(archive);
    const auto loaded = archive_from_string(text);
    CHECK(archive_to_string(loaded) == text);
    REQUIRE(loaded.size() == archive.size());
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t r = 0; r < archive.size(); ++r) {
        CHECK(loaded.records[r].dataset == archive.records[r].dataset);
        CHECK(loaded.records[r].state == archive.records[r].state);
        for (int i = 0; i < 10; ++i) {
            DecisionVector x(5);
            for (auto& v : x) v = u(rng);
            const auto p = archive.records[r].model->predict(x), q = loaded.records[r].model->predict(x);
            for (std::size_t k = 0; k < 2; ++k) {
                CHECK(std::abs(p.mean[k] - q.mean[k]) <= 1e-12);
                CHECK(std::abs(p.std[k] - q.std[k]) <= 1e-12);
            }
        }
    }

    CHECK(archive_to_string(archive_from_string(archive_to_string(SourceArchive{}))) ==
          archive_to_string(SourceArchive{}));

    auto bumped = text;
    bumped.replace(bumped.find("\"format_version\": 1"), 19, "\"format_version\": 7");
    CHECK_THROWS_AS((void)archive_from_string(bumped), MigrationError);

    auto corrupt = text;
    const auto at = corrupt.find("source-2");
    corrupt.replace(at, 8, "source-9");
    CHECK_THROWS_AS((void)archive_from_string(corrupt), ChecksumError);

    try {
        (void)archive_from_string("{\n  \"format_version\": 1,\n  \"records\": [,]\n}\n");
        FAIL("expected a ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }

    const auto dir = scratch("archive");
    save_archive(archive, dir / "a.json");
    CHECK(archive_to_string(load_archive(dir / "a.json")) == text);
    CHECK_THROWS_AS((void)load_archive(dir / "missing.json"), Error);

    auto dup = archive;
    CHECK_THROWS_AS(dup.append(archive.records.front()), UsageError);
}

TEST_CASE("experiment config parsing") {
    const auto cfg = parse_experiment_config(R"({
        "family": {"n_source": 4, "delta": 0.25},
        "optimizer": {"fe_max": 40, "c_rule": "max-similarity", "c": 0.02},
        "modes": ["seeto", "seeto-ablation-model-only"],
        "seeds": [3, 4],
        "targets": [1, 2],
        "hv_marks": [10, 40],
        "base_fe": 10,
        "output_dir": "out"
    })");
    CHECK(cfg.family.n_source == 4);
    CHECK(cfg.family.delta == 0.25);
    CHECK(cfg.optimizer.fe_max == 40);
    CHECK(cfg.optimizer.c_rule == CRule::MaxSimilarity);
    CHECK(cfg.optimizer.c_override == 0.02);
    CHECK(cfg.modes == std::vector<Mode>{Mode::Seeto, Mode::AblationModelOnly});
    CHECK(cfg.targets == std::vector<std::size_t>{0, 1});
    CHECK(cfg.output_dir == "out");

    const auto defaults = parse_experiment_config("{}");
    CHECK(defaults.seeds.size() == 10);
    CHECK(defaults.optimizer.n_p == 100);
    CHECK(defaults.hv_marks == std::vector<std::uint64_t>{20, 40, 60});

    auto path_of = [](const std::string& text) {
        try {
            (void)parse_experiment_config(text);
        } catch (const ConfigError& e) {
            return e.path();
        }
        return std::string("<none>");
    };
    CHECK(path_of(R"({"family": {"delta": 0.9}})") == "family.delta");
    CHECK(path_of(R"({"family": {"bogus": 1}})") == "family.bogus");
    CHECK(path_of(R"({"optimizer": {"n_p": "many"}})") == "optimizer.n_p");
    CHECK(path_of(R"({"seeds": [1, -2]})") == "seeds[1]");
    CHECK(path_of(R"({"modes": ["seeto", "nsga"]})") == "modes[1]");
    CHECK(path_of(R"({"targets": [0]})") == "targets[0]");
    CHECK(path_of(R"({"targets": [11]})") == "targets[0]");
    CHECK(path_of(R"({"hv_marks": [70]})") == "hv_marks[0]");
    CHECK(path_of(R"({"extra": true})") == "extra");
    CHECK_THROWS_AS((void)parse_experiment_config("{ not json"), ConfigError);
}

TEST_CASE("output directory override") {
    const auto dir = scratch("config");
    write_text_file(dir / "c.json", R"({"output_dir": "from-file"})");
    ::unsetenv(kOutputDirEnv);
    CHECK(load_experiment_config(dir / "c.json").output_dir == "from-file");
    ::setenv(kOutputDirEnv, "from-env", 1);
    CHECK(load_experiment_config(dir / "c.json").output_dir == "from-env");
    ::unsetenv(kOutputDirEnv);
}

TEST_CASE("task state json round trip") {
    TaskState s;
    s.channels = 2;
    s.height = 1;
    s.width = 2;
    s.frames = {{0.1, 1.0 / 3.0, -2.5, 1e-300}};
    CHECK(task_state_from_json(task_state_to_json(s)) == s);
    CHECK_THROWS((void)task_state_from_json(R"({"channels":1,"height":2,"width":2,"frames":[[1,2,3]]})"));
}

TEST_CASE("summary statistics") {
    RunTrajectory a, b, base;
    a.task_id = b.task_id = base.task_id = "target-1";
    a.seed = 1;
    b.seed = 2;
    base.mode = Mode::Baseline;
    for (std::uint64_t fe = 1; fe <= 4; ++fe) {
        a.records.push_back({fe, {}, {}, {}, 0.1 * double(fe), false});
        b.records.push_back({fe, {}, {}, {}, 0.2 * double(fe), false});
        base.records.push_back({fe, {}, {}, {}, 0.05 * double(fe), false});
    }
    a.completed = b.completed = base.completed = true;
    const auto rows = summarize({a, b, base}, {2, 4}, 2, 4);
    REQUIRE(rows.size() == 2);
    const auto& s = rows[0].mode == Mode::Seeto ? rows[0] : rows[1];
    const auto& bl = rows[0].mode == Mode::Seeto ? rows[1] : rows[0];
    CHECK(s.runs == 2);
    CHECK(s.hv_mean[0] == doctest::Approx(0.3));
    CHECK(s.hv_std[0] == doctest::Approx(std::sqrt(0.02)));
    CHECK(*s.delta_hv_percent == doctest::Approx(0.0));
    // Baseline mean curve 0.05, 0.10, 0.15, 0.20 never reaches seeto's 0.3.
    CHECK(*bl.delta_hv_percent == doctest::Approx(-100.0 * 2.0 / 3.0));
    CHECK(bl.additional_fe->to_string() == ">100%");
    const auto csv = summary_csv(rows, {2, 4});
    CHECK(csv.rfind("task_id,mode,runs,failures,c,hv2_mean,hv2_std,hv4_mean,hv4_std,delta_hv_percent,add_fe_percent\n", 0) == 0);
}

TEST_CASE("run_sequence writes reproducible outputs") {
    ExperimentConfig cfg;
    cfg.family = small_family();
    cfg.optimizer = small_optimizer();
    cfg.seeds = {1};
    cfg.targets = {0};
    cfg.hv_marks = {10, 20};
    cfg.base_fe = 10;
    const auto first = scratch("seq-a");
    cfg.output_dir = first;
    const auto ra = run_sequence(cfg);
    CHECK(ra.failures == 0);
    CHECK(ra.runs.size() == 2);
    cfg.output_dir = scratch("seq-b");
    (void)run_sequence(cfg);
    for (const auto* f : {"archive.json", "summary.csv"}) {
        CHECK(read_text_file(first / f) == read_text_file(cfg.output_dir / f));
    }
    const auto traj = read_text_file(cfg.output_dir / "trajectories" / "target-1_seeto_seed1.csv");
    CHECK(std::count(traj.begin(), traj.end(), '\n') == 21);
    CHECK(traj.rfind("task_id,mode,seed,fe,x1,x2,x3,x4,x5,f1,f2,incumbent_hv,fallback\n", 0) == 0);
    CHECK_FALSE(fs::exists(cfg.output_dir / "errors.txt"));
}
