#include "seeto/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "seeto/error.hpp"
#include "seeto/metrics.hpp"

namespace seeto {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(path.empty() ? "$" : path, "expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown field");
    }
}

template <class T>
void read_unsigned(const json& j, const std::string& path, const std::string& key, T& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        throw ConfigError(join(path, key), "expected a non-negative integer");
    }
    out = static_cast<T>(v.get<std::uint64_t>());
}

void read_double(const json& j, const std::string& path, const std::string& key, double& out) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(join(path, key), "must be finite");
}

void require(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

TaskFamilyParams parse_family(const json& j, const std::string& path) {
    check_keys(j, path,
               {"n_source", "n_target", "outlier_targets", "cluster_spread", "cluster_modes", "target_jitter",
                "outlier_distance", "pixel_noise", "frame_noise", "channels", "height", "width", "frames", "delta",
                "shift_scale", "seed"});
    TaskFamilyParams p;
    read_unsigned(j, path, "n_source", p.n_source);
    read_unsigned(j, path, "n_target", p.n_target);
    read_unsigned(j, path, "outlier_targets", p.outlier_targets);
    read_double(j, path, "cluster_spread", p.cluster_spread);
    read_unsigned(j, path, "cluster_modes", p.cluster_modes);
    read_double(j, path, "target_jitter", p.target_jitter);
    read_double(j, path, "outlier_distance", p.outlier_distance);
    read_double(j, path, "pixel_noise", p.pixel_noise);
    read_double(j, path, "frame_noise", p.frame_noise);
    read_unsigned(j, path, "channels", p.channels);
    read_unsigned(j, path, "height", p.height);
    read_unsigned(j, path, "width", p.width);
    read_unsigned(j, path, "frames", p.frames);
    read_double(j, path, "delta", p.delta);
    read_double(j, path, "shift_scale", p.shift_scale);
    read_unsigned(j, path, "seed", p.seed);

    require(p.n_source >= 1, join(path, "n_source"), "must be >= 1");
    require(p.outlier_targets <= p.n_target, join(path, "outlier_targets"), "must not exceed n_target");
    require(p.cluster_spread >= 0.0, join(path, "cluster_spread"), "must be >= 0");
    require(p.cluster_modes >= 1, join(path, "cluster_modes"), "must be >= 1");
    require(p.target_jitter >= 0.0, join(path, "target_jitter"), "must be >= 0");
    require(p.pixel_noise >= 0.0, join(path, "pixel_noise"), "must be >= 0");
    require(p.frame_noise >= 0.0, join(path, "frame_noise"), "must be >= 0");
    require(p.channels * p.height * p.width >= 2, join(path, "channels"), "state grid needs at least 2 cells");
    require(p.frames >= 1, join(path, "frames"), "must be >= 1");
    require(p.delta >= 0.0 && p.delta <= 0.5, join(path, "delta"), "must lie in [0, 0.5]");
    require(p.shift_scale >= 0.0, join(path, "shift_scale"), "must be >= 0");
    return p;
}

OptimizerConfig parse_optimizer(const json& j, const std::string& path) {
    check_keys(j, path,
               {"n_p", "fe_max", "gamma", "temperature", "rho", "tau", "c_high", "c_low", "c_rule", "c",
                "batch_size", "inner_generations", "kappa", "init_design", "latent_dim", "crossover_prob",
                "crossover_eta", "mutation_prob", "mutation_eta", "gp_starts"});
    OptimizerConfig c;
    read_unsigned(j, path, "n_p", c.n_p);
    read_unsigned(j, path, "fe_max", c.fe_max);
    read_unsigned(j, path, "gamma", c.gamma);
    read_double(j, path, "temperature", c.temperature);
    read_double(j, path, "rho", c.rho);
    read_double(j, path, "tau", c.tau);
    read_double(j, path, "c_high", c.c_high);
    read_double(j, path, "c_low", c.c_low);
    if (j.contains("c_rule")) {
        const auto& v = j.at("c_rule");
        if (v == "max-weight") {
            c.c_rule = CRule::MaxWeight;
        } else if (v == "max-similarity") {
            c.c_rule = CRule::MaxSimilarity;
        } else {
            throw ConfigError(join(path, "c_rule"), "expected \"max-weight\" or \"max-similarity\"");
        }
    }
    if (j.contains("c")) {
        double v = 0.0;
        read_double(j, path, "c", v);
        c.c_override = v;
    }
    read_unsigned(j, path, "batch_size", c.batch_size);
    read_unsigned(j, path, "inner_generations", c.inner_generations);
    read_double(j, path, "kappa", c.kappa);
    read_unsigned(j, path, "init_design", c.init_design);
    read_unsigned(j, path, "latent_dim", c.latent_dim);
    read_double(j, path, "crossover_prob", c.variation.crossover_prob);
    read_double(j, path, "crossover_eta", c.variation.crossover_eta);
    read_double(j, path, "mutation_prob", c.variation.mutation_prob);
    read_double(j, path, "mutation_eta", c.variation.mutation_eta);
    read_unsigned(j, path, "gp_starts", c.gp.n_starts);
    require(c.gp.n_starts >= 1, join(path, "gp_starts"), "must be >= 1");
    require(c.variation.crossover_prob >= 0.0 && c.variation.crossover_prob <= 1.0, join(path, "crossover_prob"),
            "must lie in [0,1]");
    require(c.variation.mutation_prob <= 1.0, join(path, "mutation_prob"), "must be <= 1");
    require(c.variation.crossover_eta > 0.0, join(path, "crossover_eta"), "must be > 0");
    require(c.variation.mutation_eta > 0.0, join(path, "mutation_eta"), "must be > 0");
    try {
        c.validate();
    } catch (const UsageError& e) {
        // "OptimizerConfig.<field>: <reason>"
        const std::string msg = e.what();
        const auto dot = msg.find('.');
        const auto colon = msg.find(':');
        if (dot != std::string::npos && colon != std::string::npos && dot < colon) {
            throw ConfigError(join(path, msg.substr(dot + 1, colon - dot - 1)), msg.substr(colon + 2));
        }
        throw ConfigError(path, msg);
    }
    return c;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("malformed JSON: ") + e.what());
    }
    check_keys(root, "", {"family", "optimizer", "modes", "seeds", "targets", "source_seed", "hv_marks", "base_fe",
                          "output_dir"});
    ExperimentConfig cfg;
    if (root.contains("family")) cfg.family = parse_family(root.at("family"), "family");
    if (root.contains("optimizer")) cfg.optimizer = parse_optimizer(root.at("optimizer"), "optimizer");

    auto read_list = [&](const std::string& key, auto& out, auto convert) {
        if (!root.contains(key)) return;
        const auto& v = root.at(key);
        if (!v.is_array()) throw ConfigError(key, "expected an array");
        out.clear();
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(convert(v[i], key + "[" + std::to_string(i) + "]"));
    };
    auto as_u64 = [](const json& v, const std::string& path) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ConfigError(path, "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    };
    read_list("modes", cfg.modes, [](const json& v, const std::string& path) {
        if (!v.is_string()) throw ConfigError(path, "expected a mode name");
        try {
            return mode_from_string(v.get<std::string>());
        } catch (const UsageError& e) {
            throw ConfigError(path, e.what());
        }
    });
    read_list("seeds", cfg.seeds, as_u64);
    // Target numbers are 1-based in the file, like the task ids.
    read_list("targets", cfg.targets, [&](const json& v, const std::string& path) {
        const auto k = as_u64(v, path);
        if (k == 0) throw ConfigError(path, "target numbers start at 1");
        return static_cast<std::size_t>(k - 1);
    });
    read_list("hv_marks", cfg.hv_marks, as_u64);
    read_unsigned(root, "", "source_seed", cfg.source_seed);
    read_unsigned(root, "", "base_fe", cfg.base_fe);
    if (root.contains("output_dir")) {
        if (!root.at("output_dir").is_string()) throw ConfigError("output_dir", "expected a string");
        cfg.output_dir = root.at("output_dir").get<std::string>();
    }

    require(!cfg.modes.empty(), "modes", "at least one mode required");
    require(std::set<Mode>(cfg.modes.begin(), cfg.modes.end()).size() == cfg.modes.size(), "modes",
            "modes must be distinct");
    require(!cfg.seeds.empty(), "seeds", "at least one seed required");
    for (std::size_t i = 0; i < cfg.targets.size(); ++i) {
        require(cfg.targets[i] < cfg.family.n_target, "targets[" + std::to_string(i) + "]",
                "exceeds family.n_target");
    }
    for (std::size_t i = 0; i < cfg.hv_marks.size(); ++i) {
        require(cfg.hv_marks[i] >= 1 && cfg.hv_marks[i] <= cfg.optimizer.fe_max,
                "hv_marks[" + std::to_string(i) + "]", "must lie in [1, optimizer.fe_max]");
    }
    require(cfg.base_fe >= 1 && cfg.base_fe <= cfg.optimizer.fe_max, "base_fe", "must lie in [1, optimizer.fe_max]");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw ConfigError("$", e.what());
    }
    ExperimentConfig cfg = parse_experiment_config(text);
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) cfg.output_dir = dir;
    return cfg;
}

SourceArchive build_source_archive(const TaskFamily& family, const ExperimentConfig& cfg) {
    SourceArchive archive;
    for (std::size_t i = 0; i < family.sources.size(); ++i) {
        const auto& task = family.sources[i];
        OptimizerConfig oc = cfg.optimizer;
        oc.seed = cfg.source_seed + i;
        const auto ref = task.reference_point();
        const RunTrajectory traj = run_baseline(task, oc, ref);
        if (!traj.completed) throw Error("source task " + task.id() + " failed: " + traj.error);
        archive.append(make_task_record(task, task.state(), traj));
    }
    refresh_embedder(archive, cfg.optimizer);
    return archive;
}

RunTrajectory run_single(const ExperimentConfig& cfg, std::size_t target_index, Mode mode, std::uint64_t seed,
                         const SourceArchive& sources) {
    const TaskFamily family = make_task_family(cfg.family);
    if (target_index >= family.targets.size()) throw UsageError("run_single: target index out of range");
    const auto& task = family.targets[target_index];
    OptimizerConfig oc = cfg.optimizer;
    oc.seed = seed;
    const auto ref = task.reference_point();
    if (mode == Mode::Baseline) return run_baseline(task, oc, ref);
    SourceArchive archive = sources;
    return run_seeto(task, task.state(), archive, oc, ref, mode);
}

std::vector<SummaryRow> summarize(const std::vector<RunTrajectory>& runs, const std::vector<std::uint64_t>& hv_marks,
                                  std::uint64_t base_fe, std::uint64_t fe_max) {
    std::vector<SummaryRow> rows;
    std::vector<std::vector<const RunTrajectory*>> members;
    for (const auto& r : runs) {
        std::size_t k = 0;
        while (k < rows.size() && !(rows[k].task_id == r.task_id && rows[k].mode == r.mode)) ++k;
        if (k == rows.size()) {
            rows.push_back({});
            rows.back().task_id = r.task_id;
            rows.back().mode = r.mode;
            members.emplace_back();
        }
        ++rows[k].runs;
        if (!r.completed) {
            ++rows[k].failures;
            continue;
        }
        if (!rows[k].c && r.c) rows[k].c = r.c;
        members[k].push_back(&r);
    }

    std::vector<std::vector<double>> mean_curves(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (std::uint64_t mark : hv_marks) {
            std::vector<double> v;
            for (const auto* r : members[k]) v.push_back(r->hv_at(mark));
            rows[k].hv_mean.push_back(mean_of(v));
            rows[k].hv_std.push_back(sample_std(v));
        }
        if (members[k].empty()) continue;
        for (std::uint64_t fe = 1; fe <= fe_max; ++fe) {
            std::vector<double> v;
            for (const auto* r : members[k]) v.push_back(r->hv_at(fe));
            mean_curves[k].push_back(mean_of(v));
        }
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (members[k].empty()) continue;
        for (std::size_t s = 0; s < rows.size(); ++s) {
            if (rows[s].task_id != rows[k].task_id || rows[s].mode != Mode::Seeto || members[s].empty()) continue;
            const double target = mean_curves[s][base_fe - 1];
            if (target > 0.0) rows[k].delta_hv_percent = delta_hv_percent(mean_curves[k][base_fe - 1], target);
            rows[k].additional_fe = additional_fe_percent(mean_curves[k], target, base_fe, fe_max);
        }
    }
    return rows;
}

std::string trajectory_file_name(const RunTrajectory& traj) {
    return traj.task_id + "_" + to_string(traj.mode) + "_seed" + std::to_string(traj.seed) + ".csv";
}

std::string trajectory_csv(const RunTrajectory& traj) {
    std::ostringstream out;
    const std::size_t d = traj.records.empty() ? 0 : traj.records.front().raw.size();
    const std::size_t m = traj.records.empty() ? traj.reference.size() : traj.records.front().objectives.size();
    out << "task_id,mode,seed,fe";
    for (std::size_t i = 0; i < d; ++i) out << ",x" << i + 1;
    for (std::size_t k = 0; k < m; ++k) out << ",f" << k + 1;
    out << ",incumbent_hv,fallback\n";
    for (const auto& r : traj.records) {
        out << traj.task_id << ',' << to_string(traj.mode) << ',' << traj.seed << ',' << r.fe;
        for (double x : r.raw) out << ',' << fmt(x);
        for (double f : r.objectives) out << ',' << fmt(f);
        out << ',' << fmt(r.incumbent_hv) << ',' << (r.exploration_fallback ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows, const std::vector<std::uint64_t>& hv_marks) {
    std::ostringstream out;
    out << "task_id,mode,runs,failures,c";
    for (auto mark : hv_marks) out << ",hv" << mark << "_mean,hv" << mark << "_std";
    out << ",delta_hv_percent,add_fe_percent\n";
    for (const auto& r : rows) {
        out << r.task_id << ',' << to_string(r.mode) << ',' << r.runs << ',' << r.failures << ','
            << (r.c ? fmt(*r.c) : "");
        for (std::size_t i = 0; i < hv_marks.size(); ++i) out << ',' << fmt(r.hv_mean[i]) << ',' << fmt(r.hv_std[i]);
        out << ',' << (r.delta_hv_percent ? fmt(*r.delta_hv_percent) : "") << ','
            << (r.additional_fe ? r.additional_fe->to_string() : "") << '\n';
    }
    return out.str();
}

ExperimentResult run_sequence(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    const TaskFamily family = make_task_family(cfg.family);
    const fs::path traj_dir = cfg.output_dir / "trajectories";
    fs::create_directories(traj_dir);

    const SourceArchive sources = build_source_archive(family, cfg);
    save_archive(sources, cfg.output_dir / "archive.json");

    std::vector<std::size_t> targets = cfg.targets;
    if (targets.empty()) {
        for (std::size_t i = 0; i < family.targets.size(); ++i) targets.push_back(i);
    }

    ExperimentResult result;
    std::string errors;
    for (std::size_t t : targets) {
        const auto& task = family.targets[t];
        const auto ref = task.reference_point();
        for (Mode mode : cfg.modes) {
            for (std::uint64_t seed : cfg.seeds) {
                OptimizerConfig oc = cfg.optimizer;
                oc.seed = seed;
                auto persist = [&](const RunTrajectory& tr) {
                    write_text_file(traj_dir / trajectory_file_name(tr), trajectory_csv(tr));
                };
                RunTrajectory tr;
                if (mode == Mode::Baseline) {
                    tr = run_baseline(task, oc, ref, persist);
                } else {
                    SourceArchive archive = sources;
                    tr = run_seeto(task, task.state(), archive, oc, ref, mode, persist);
                }
                persist(tr);
                if (!tr.completed) {
                    ++result.failures;
                    errors += task.id() + "," + to_string(mode) + "," + std::to_string(seed) + "," + tr.error + "\n";
                }
                result.runs.push_back(std::move(tr));
            }
        }
    }
    result.summary = summarize(result.runs, cfg.hv_marks, cfg.base_fe, cfg.optimizer.fe_max);
    write_text_file(cfg.output_dir / "summary.csv", summary_csv(result.summary, cfg.hv_marks));
    if (!errors.empty()) write_text_file(cfg.output_dir / "errors.txt", errors);
    return result;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string task_state_to_json(const TaskState& s) {
    const json j = {{"channels", s.channels}, {"height", s.height}, {"width", s.width}, {"frames", s.frames}};
    return j.dump(1) + "\n";
}

TaskState task_state_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        TaskState s;
        s.channels = j.at("channels").get<std::size_t>();
        s.height = j.at("height").get<std::size_t>();
        s.width = j.at("width").get<std::size_t>();
        s.frames = j.at("frames").get<std::vector<std::vector<double>>>();
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ParseError(std::string("task state: ") + e.what(), 0);
    }
}

}  // namespace seeto
