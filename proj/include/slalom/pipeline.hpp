#pragma once

#include "slalom/config.hpp"
#include "slalom/nn.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace slalom {

/// Output layout under one --out directory:
///   traces/run_%05d.csv        demonstrations (collect)
///   dataset/{train,test}.csv   strided feature/target samples (collect)
///   dataset/manifest.json      split bookkeeping (collect)
///   model.json                 trained weights + normalization (train)
///   fit_report.json            loss curves and final metrics (train)
///   eval_report.json           offline MSE/R2 per split (eval-offline)
///   trials/trial_%02d[_expert].csv   closed-loop telemetry (run-closedloop)
///   closedloop_report.json     per-trial and aggregate results
///   plots/*.svg                figures (plot)

struct CollectSummary {
    int kept = 0;
    int rejected = 0;
    std::vector<std::uint64_t> train_runs;
    std::vector<std::uint64_t> test_runs;
    std::size_t train_samples = 0;
    std::size_t test_samples = 0;
};

/// Simulates expert demonstrations, writes traces and the split dataset.
/// Throws if the expert fails (collides / stalls) on more than
/// collect.max_reject_fraction of its attempts.
CollectSummary run_collect(const ExperimentConfig& config, std::uint64_t seed,
                           const std::filesystem::path& out_dir);

struct TrainSummary {
    FitReport report;
    std::filesystem::path model_path;
};

/// Trains on dataset/train.csv, watching dataset/test.csv for the plateau
/// schedule; writes model.json and fit_report.json.
TrainSummary run_train(const ExperimentConfig& config, std::uint64_t seed,
                       const std::filesystem::path& out_dir);

struct SplitMetrics {
    EvalMetrics train;
    EvalMetrics test;
};

/// Scores model.json on both dataset splits; writes eval_report.json.
SplitMetrics run_eval_offline(const ExperimentConfig& config,
                              const std::filesystem::path& out_dir);

struct TrialResult {
    int index = 0;
    std::uint64_t seed = 0;
    std::string speed_profile;
    bool completed = false;
    bool collided = false;
    bool diverged = false;
    double duration_s = 0.0;
    double peak_wheel = 0.0;     // rad, max |wheel angle|
    double mean_abs_wheel = 0.0; // rad
    // Filled when the matching expert reference was driven.
    bool compared = false;
    double expert_peak_wheel = 0.0;
    int windows = 0;                // lane changes both cars traversed
    int windows_not_exceeding = 0;  // pilot peak <= expert peak
};

struct ClosedLoopSummary {
    std::vector<TrialResult> trials;
    int completed = 0;
    int collisions = 0;
    int windows = 0;
    int windows_not_exceeding = 0;
};

/// Drives model.json through eval.trials closed-loop runs (optionally with a
/// noise-free expert reference on the same speed profile); writes the trial
/// traces and closedloop_report.json.
ClosedLoopSummary run_closedloop_trials(const ExperimentConfig& config,
                                        std::uint64_t seed,
                                        const std::filesystem::path& out_dir,
                                        bool compare_expert);

/// Renders SVGs for whatever artifacts exist in out_dir; returns the files
/// written. Throws if there is nothing at all to plot.
std::vector<std::filesystem::path>
run_plots(const ExperimentConfig& config, const std::filesystem::path& out_dir);

} // namespace slalom
