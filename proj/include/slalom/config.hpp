#pragma once

#include "slalom/controller.hpp"
#include "slalom/expert.hpp"
#include "slalom/nn.hpp"
#include "slalom/sim.hpp"
#include "slalom/toml.hpp"

#include <string>

namespace slalom {

/// "fixed:<kmh>" or "random" (levels drawn per run/trial).
struct SpeedProfileSpec {
    bool fixed = false;
    double fixed_kmh = 40.0;
    double random_lo_kmh = 15.0;
    double random_hi_kmh = 60.0;

    static SpeedProfileSpec parse(const std::string& text);
    SpeedProfile make(std::uint64_t seed) const;
    std::string describe() const;
};

struct SimSettings {
    double rate_hz = 30.0;
    int substeps = 4;
    double max_time = 60.0;

    double dt() const { return 1.0 / rate_hz; }
};

struct CollectSettings {
    int n_runs = 573;
    int n_train = 500;
    Lane start_lane = Lane::Right;
    SpeedProfileSpec speed;
    int frame_stride = 10;          // trace frames per dataset sample
    double max_reject_fraction = 0.05;
};

struct EvalSettings {
    int trials = 17;
    SpeedProfileSpec speed;
};

/// Whole-experiment configuration, loadable from a TOML file. Every field
/// has a sensible default, so an empty document is a valid experiment.
struct ExperimentConfig {
    CourseConfig course;
    VehicleParams vehicle;
    PdGains gains;
    ReferencePathConfig path; // start_lane mirrored from collect
    SimSettings sim;
    CollectSettings collect;
    TrainConfig train;
    EvalSettings eval;

    static ExperimentConfig from_file(const std::string& path);
    static ExperimentConfig from_table(const toml::Table& table);

    void validate() const;
    ClosedLoopConfig closed_loop() const;
};

} // namespace slalom
