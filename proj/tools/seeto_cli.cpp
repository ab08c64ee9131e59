// seeto: command-line front end for sequential transfer optimization runs.
//
//   seeto run-sequence --config cfg.json [--out DIR]
//   seeto run-single --config cfg.json --target K --mode seeto --seed 3 [--archive A] [--out DIR]
//   seeto hv FRONT_FILE --ref 2,2
//   seeto archive-inspect ARCHIVE
//   seeto embed-similarity ARCHIVE (--state STATE.json | --config cfg.json --target K)
//
// Exit status: 0 success, 1 run error, 2 configuration or usage error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "seeto/archive.hpp"
#include "seeto/error.hpp"
#include "seeto/experiment.hpp"
#include "seeto/metrics.hpp"
#include "seeto/transfer.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kRunError = 1;
constexpr int kConfigError = 2;

std::vector<seeto::ObjectiveVector> parse_front(const std::string& text, std::size_t m) {
    std::vector<seeto::ObjectiveVector> front;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        for (char& ch : line) {
            if (ch == ',' || ch == ';' || ch == '\t' || ch == '\r') ch = ' ';
        }
        std::istringstream fields(line);
        seeto::ObjectiveVector p;
        std::string tok;
        while (fields >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(v)) {
                throw seeto::ParseError("front file: '" + tok + "' is not a finite number", lineno);
            }
            p.push_back(v);
        }
        if (p.empty()) continue;
        if (p.size() != m) {
            throw seeto::ParseError("front file: expected " + std::to_string(m) + " values, found " +
                                        std::to_string(p.size()),
                                    lineno);
        }
        front.push_back(std::move(p));
    }
    return front;
}

void print_report(const seeto::SimilarityReport& report, const seeto::OptimizerConfig& oc) {
    std::printf("source,similarity\n");
    for (const auto& [id, sim] : report.per_source) std::printf("%s,%.12f\n", id.c_str(), sim);
    std::printf("\nselected,weight\n");
    for (std::size_t i = 0; i < report.selected.size(); ++i) {
        std::printf("%s,%.12f\n", report.selected[i].c_str(), report.weights[i]);
    }
    std::printf("\nmax_weight,%.12f\nmax_similarity,%.12f\nc,%g\n", report.max_weight(), report.max_similarity(),
                seeto::choose_c(report, oc.tau, oc.c_high, oc.c_low, oc.c_rule));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sequential evolutionary transfer optimization with ensemble surrogates"};
    app.require_subcommand(1);

    std::string config_path, out_dir, mode_name = "seeto", archive_path, front_path, state_path;
    std::uint64_t seed = 1;
    std::size_t target = 1;
    std::vector<double> ref;

    auto* seq = app.add_subcommand("run-sequence", "solve the source tasks, then every target in every mode and seed");
    seq->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    seq->add_option("--out", out_dir, "output directory (overrides config and SEETO_OUTPUT_DIR)");

    auto* single = app.add_subcommand("run-single", "one target task, one mode, one seed");
    single->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    single->add_option("--target", target, "target task number, 1-based")->check(CLI::PositiveNumber);
    single->add_option("--mode", mode_name, "seeto | baseline | seeto-ablation-solution-only | seeto-ablation-model-only");
    single->add_option("--seed", seed, "run seed");
    single->add_option("--archive", archive_path, "reuse a saved source archive instead of solving the sources")
        ->check(CLI::ExistingFile);
    single->add_option("--out", out_dir, "output directory");

    auto* hv = app.add_subcommand("hv", "exact 2-objective hypervolume of a front file");
    hv->add_option("front", front_path, "one point per line, values separated by spaces or commas")
        ->required()
        ->check(CLI::ExistingFile);
    hv->add_option("--ref", ref, "reference point, e.g. 2,2")->required()->delimiter(',')->expected(2);

    auto* inspect = app.add_subcommand("archive-inspect", "summarize a saved source archive");
    inspect->add_option("archive", archive_path, "archive file")->required()->check(CLI::ExistingFile);

    auto* sim = app.add_subcommand("embed-similarity", "similarity report of a target state against an archive");
    sim->add_option("archive", archive_path, "archive file")->required()->check(CLI::ExistingFile);
    sim->add_option("--state", state_path, "target state (JSON)")->check(CLI::ExistingFile);
    sim->add_option("--config", config_path, "experiment config that generates the target")->check(CLI::ExistingFile);
    sim->add_option("--target", target, "target task number, 1-based")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfigError;
    }

    try {
        if (*seq) {
            auto cfg = seeto::load_experiment_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            const auto result = seeto::run_sequence(cfg);
            std::cout << seeto::summary_csv(result.summary, cfg.hv_marks);
            if (result.failures > 0) {
                std::cerr << result.failures << " run(s) failed; see " << (cfg.output_dir / "errors.txt").string()
                          << "\n";
                return kRunError;
            }
            return kOk;
        }

        if (*single) {
            auto cfg = seeto::load_experiment_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            const auto mode = seeto::mode_from_string(mode_name);
            if (target > cfg.family.n_target) throw seeto::UsageError("--target exceeds the family size");
            seeto::SourceArchive sources;
            if (mode != seeto::Mode::Baseline) {
                sources = archive_path.empty()
                              ? seeto::build_source_archive(seeto::make_task_family(cfg.family), cfg)
                              : seeto::load_archive(archive_path);
            }
            const auto traj = seeto::run_single(cfg, target - 1, mode, seed, sources);
            std::filesystem::create_directories(cfg.output_dir / "trajectories");
            const auto file = cfg.output_dir / "trajectories" / seeto::trajectory_file_name(traj);
            seeto::write_text_file(file, seeto::trajectory_csv(traj));
            std::printf("trajectory,%s\nevaluations,%zu\nfinal_hv,%.12f\n", file.string().c_str(),
                        traj.records.size(), traj.final_hv());
            if (traj.c) std::printf("c,%g\n", *traj.c);
            if (!traj.completed) {
                std::cerr << "run aborted: " << traj.error << "\n";
                return kRunError;
            }
            return kOk;
        }

        if (*hv) {
            const auto front = parse_front(seeto::read_text_file(front_path), ref.size());
            std::printf("%.12f\n", seeto::hypervolume_2d(front, ref));
            return kOk;
        }

        if (*inspect) {
            const auto archive = seeto::load_archive(archive_path);
            std::printf("format_version,%d\nrecords,%zu\n", archive.format_version, archive.size());
            if (archive.embedder) {
                std::printf("embedder,latent_dim=%zu,input_dim=%zu,degenerate=%d\n", archive.embedder->latent_dim(),
                            archive.embedder->input_dim(), archive.embedder->degenerate() ? 1 : 0);
            }
            std::printf("\nid,evaluations,frames,non_dominated,length_scales\n");
            for (const auto& r : archive.records) {
                std::vector<seeto::ObjectiveVector> objs;
                for (const auto& s : r.dataset) objs.push_back(s.objectives);
                const auto fronts = seeto::nondominated_sort(objs);
                std::string scales;
                if (r.model) {
                    for (const auto& h : r.model->hyperparameters()) {
                        char buf[32];
                        std::snprintf(buf, sizeof buf, "%s%.4g", scales.empty() ? "" : ";", h.length_scale);
                        scales += buf;
                    }
                }
                std::printf("%s,%zu,%zu,%zu,%s\n", r.id.c_str(), r.dataset.size(), r.state.length(),
                            fronts.empty() ? std::size_t{0} : fronts.front().size(), scales.c_str());
            }
            return kOk;
        }

        if (*sim) {
            auto archive = seeto::load_archive(archive_path);
            seeto::ExperimentConfig cfg;
            seeto::TaskState state;
            if (!config_path.empty()) cfg = seeto::load_experiment_config(config_path);
            if (!state_path.empty()) {
                state = seeto::task_state_from_json(seeto::read_text_file(state_path));
            } else if (!config_path.empty()) {
                const auto family = seeto::make_task_family(cfg.family);
                if (target > family.targets.size()) throw seeto::UsageError("--target exceeds the family size");
                state = family.targets[target - 1].state();
            } else {
                throw seeto::UsageError("embed-similarity needs --state or --config");
            }
            print_report(seeto::measure_similarity(archive, state, cfg.optimizer), cfg.optimizer);
            return kOk;
        }
    } catch (const seeto::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const seeto::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRunError;
    }
    return kOk;
}
