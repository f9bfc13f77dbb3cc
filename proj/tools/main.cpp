#include "slalom/pipeline.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <string>

using namespace slalom;

namespace {

struct CommonArgs {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path,
                    "TOML experiment config; defaults apply when omitted")
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "Master seed")
        ->capture_default_str();
    cmd->add_option("--out", args.out_dir, "Output directory")
        ->capture_default_str();
}

ExperimentConfig load_config(const CommonArgs& args) {
    if (args.config_path.empty())
        return ExperimentConfig::from_table(toml::Table::parse_string(""));
    return ExperimentConfig::from_file(args.config_path);
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_ =
        std::chrono::steady_clock::now();
};

std::string fmt_metrics(const EvalMetrics& m) {
    std::string s = "mse=" + std::to_string(m.mse);
    s += m.r2 ? " r2=" + std::to_string(*m.r2) : " r2=n/a";
    s += " n=" + std::to_string(m.n);
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Slalom steering pilot: demonstrations, training and "
                 "closed-loop evaluation"};
    app.require_subcommand(1);

    CommonArgs collect_args, train_args, eval_args, run_args, plot_args;

    CLI::App* collect = app.add_subcommand(
        "collect", "Drive expert demonstrations; write traces and dataset");
    add_common(collect, collect_args);

    CLI::App* train_cmd = app.add_subcommand(
        "train", "Train the steering regressor on a collected dataset");
    add_common(train_cmd, train_args);

    CLI::App* eval_cmd = app.add_subcommand(
        "eval-offline", "Score the trained model on both dataset splits");
    add_common(eval_cmd, eval_args);

    int trials_override = 0;
    std::string profile_override;
    bool compare_expert = false;
    CLI::App* run_cmd = app.add_subcommand(
        "run-closedloop", "Drive the trained model through slalom trials");
    add_common(run_cmd, run_args);
    run_cmd->add_option("--trials", trials_override,
                        "Override the number of trials");
    run_cmd->add_option("--profile", profile_override,
                        "Speed profile: random or fixed:<kmh>");
    run_cmd->add_flag("--compare-expert", compare_expert,
                      "Also drive a noise-free expert for comparison");

    CLI::App* plot_cmd = app.add_subcommand(
        "plot", "Render SVG figures for existing artifacts");
    add_common(plot_cmd, plot_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (collect->parsed()) {
            ExperimentConfig cfg;
            try {
                cfg = load_config(collect_args);
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            Stopwatch sw;
            const CollectSummary s =
                run_collect(cfg, collect_args.seed, collect_args.out_dir);
            std::cout << "collect: " << s.kept << " runs kept ("
                      << s.rejected << " rejected), " << s.train_samples
                      << " train / " << s.test_samples << " test samples in "
                      << sw.seconds() << " s\n";
            return 0;
        }

        if (train_cmd->parsed()) {
            ExperimentConfig cfg;
            try {
                cfg = load_config(train_args);
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            Stopwatch sw;
            const TrainSummary s =
                run_train(cfg, train_args.seed, train_args.out_dir);
            std::cout << "train: " << s.report.epochs << " epochs in "
                      << sw.seconds() << " s\n"
                      << "  train " << fmt_metrics(s.report.final_train)
                      << "\n  test  " << fmt_metrics(s.report.final_val)
                      << "\n  model " << s.model_path.string() << "\n";
            return 0;
        }

        if (eval_cmd->parsed()) {
            ExperimentConfig cfg;
            try {
                cfg = load_config(eval_args);
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            const SplitMetrics m = run_eval_offline(cfg, eval_args.out_dir);
            std::cout << "eval-offline:\n  train " << fmt_metrics(m.train)
                      << "\n  test  " << fmt_metrics(m.test) << "\n";
            return 0;
        }

        if (run_cmd->parsed()) {
            ExperimentConfig cfg;
            try {
                cfg = load_config(run_args);
                if (trials_override > 0) cfg.eval.trials = trials_override;
                if (!profile_override.empty())
                    cfg.eval.speed = SpeedProfileSpec::parse(profile_override);
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            Stopwatch sw;
            const ClosedLoopSummary s = run_closedloop_trials(
                cfg, run_args.seed, run_args.out_dir, compare_expert);
            std::cout << "run-closedloop: " << s.completed << "/"
                      << s.trials.size() << " trials completed, "
                      << s.collisions << " with collisions, in "
                      << sw.seconds() << " s\n";
            if (compare_expert)
                std::cout << "  smoothness: pilot within expert peak on "
                          << s.windows_not_exceeding << "/" << s.windows
                          << " lane changes\n";
            const bool ok =
                s.collisions == 0 &&
                s.completed == static_cast<int>(s.trials.size());
            return ok ? 0 : 1;
        }

        if (plot_cmd->parsed()) {
            ExperimentConfig cfg;
            try {
                cfg = load_config(plot_args);
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return 2;
            }
            const auto files = run_plots(cfg, plot_args.out_dir);
            std::cout << "plot: wrote " << files.size() << " figures\n";
            for (const auto& f : files) std::cout << "  " << f.string() << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
