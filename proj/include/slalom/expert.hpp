#pragma once

#include "slalom/controller.hpp"
#include "slalom/sim.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace slalom {

/// Lateral reference y(x) for a course: lane-center plateaus joined by
/// quintic smoothstep blends (6t^5 - 15t^4 + 10t^3), so the reference is C2
/// and starts/ends each lane change with zero slope and curvature.
class ReferencePath {
public:
    struct Blend {
        double x0 = 0.0, x1 = 0.0; // blend span, x0 < x1
        double y0 = 0.0, y1 = 0.0; // lane centers being joined
    };

    ReferencePath(double y_start, std::vector<Blend> blends);

    double y(double x) const;
    const std::vector<Blend>& blends() const { return blends_; }

private:
    double y_start_;
    std::vector<Blend> blends_; // sorted, non-overlapping
};

struct ReferencePathConfig {
    Lane start_lane = Lane::Right; // lane the car launches from
    double clearance = 4.0;  // m settled-before/after-cones margin per side
    // Share of each free span used for the lane change. Wide blends keep
    // the steering ramps gentle, which a regressor imitates much more
    // faithfully than short sharp swerves.
    double blend_fraction = 0.9;
    double min_blend = 5.0;  // m; shorter available spans are an error
};

/// Derives the slalom reference: the car holds the free lane (opposite the
/// cones) alongside each set and swaps lanes in the space between sets.
/// Throws if any free span is too short to fit a blend.
ReferencePath build_reference_path(const Course& course,
                                   const ReferencePathConfig& config = {});

/// Commanded speed over time: a base level with up to a few ramped steps.
class SpeedProfile {
public:
    static SpeedProfile fixed(double kmh);
    /// 0-2 extra levels at random times, all in [lo, hi] km/h, joined by
    /// ramps of ramp_s seconds. Deterministic in the seed.
    static SpeedProfile random_steps(std::uint64_t seed, double lo_kmh = 15.0,
                                     double hi_kmh = 60.0,
                                     double ramp_s = 1.5);

    double value(double t) const;

private:
    struct Node {
        double t = 0.0;
        double kmh = 0.0;
    };
    std::vector<Node> nodes_; // piecewise linear between nodes
};

/// One synthetic driver: pure pursuit on the reference path. The command is
/// deliberately memoryless — a function of the vehicle state alone — so
/// that a regressor trained on (state features, command) pairs reproduces
/// the demonstrated behaviour when it closes the loop itself. Smoothing is
/// left to the physical steering column and its torque controller.
///
/// During demonstration runs an Ornstein-Uhlenbeck exploration noise is
/// added to the command that is *actuated*, while the clean command is the
/// one *recorded*: the corpus then covers a tube of off-path states, each
/// labelled with the corrective steering that leads back to the path.
struct ExpertParams {
    double lookahead_gain = 0.6; // s of travel converted to metres
    double lookahead_min = 4.0;  // m
    double lookahead_max = 12.0; // m
    double noise_sigma = 0.15;   // rad at the wheel, exploration (actuation only)
    double noise_tau = 0.6;      // s, exploration correlation time
    std::uint64_t noise_seed = 0;

    void validate() const;
};

/// Four mildly different driving styles; index is taken mod 4.
ExpertParams expert_preset(int index);

class ExpertDriver {
public:
    ExpertDriver(const ReferencePath& path, const VehicleParams& vehicle,
                 const ExpertParams& params);

    /// Steering-wheel angle command in radians; a pure function of the
    /// instantaneous state (no exploration noise).
    double command(const VehicleState& state) const;
    double operator()(const VehicleState& state, double /*t*/) const {
        return command(state);
    }

private:
    const ReferencePath* path_;
    VehicleParams vehicle_;
    ExpertParams params_;
};

/// A demonstration: the closed-loop trace plus the expert's wheel command
/// for every row (the regression target), index-aligned with trace.rows.
struct DemoRun {
    RunTrace trace;
    std::vector<double> commands;
};

/// Launch-state perturbation applied to one demonstration. Small offsets
/// widen the tube of visited states so the recorded corpus contains the
/// corrective manoeuvres a trained imitator needs when it drifts.
struct LaunchJitter {
    double y_offset = 0.0;       // m, added to the start-lane centre
    double heading_offset = 0.0; // rad, added to the straight-ahead heading

    /// Uniform draws in [-0.35, 0.35] m and [-0.025, 0.025] rad.
    static LaunchJitter draw(std::uint64_t seed);
};

DemoRun simulate_expert_run(const Course& course, const ReferencePath& path,
                            const ExpertParams& expert,
                            const SpeedProfile& speed, Lane start_lane,
                            const ClosedLoopConfig& config,
                            std::uint64_t run_id,
                            const LaunchJitter& jitter = {});

/// splitmix64 of master ^ f(index): decorrelated per-run seeds from one
/// master seed.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

} // namespace slalom
