#pragma once

#include "slalom/nn.hpp"
#include "slalom/sim.hpp"

#include <functional>
#include <optional>

namespace slalom {

/// Speed-scheduled PD gains for the steering column. The base gains are
/// scaled by a multiplier interpolated linearly between the two schedule
/// knots and held flat outside them, so tracking stays tight as the same
/// lane change compresses into less time at higher speed.
struct PdGains {
    double p = 20.0;             // N m per rad of angle error
    double d = 1.5;              // N m per rad/s of wheel rate
    double torque_max = 15.0;    // N m, symmetric clamp
    double gain_low = 1.0;       // multiplier at speed_low_kmh
    double gain_high = 1.6;      // multiplier at speed_high_kmh
    double speed_low_kmh = 15.0;
    double speed_high_kmh = 60.0;

    void validate() const;
};

double speed_gain_multiplier(double speed_kmh, const PdGains& gains);

/// Restoring torque: tau = -m(v) * (p * (theta - desired) + d * theta_dot),
/// clamped to +-torque_max.
double pd_torque(const VehicleState& state, double desired_angle,
                 const PdGains& gains);

struct ClosedLoopConfig {
    double dt = 1.0 / 30.0;
    int substeps = 4;
    double max_time = 60.0; // give up (completed = false) past this
    PdGains gains;
    VehicleParams vehicle;
};

/// Steering-wheel angle setpoint in radians for the step starting at t.
/// Stateful functors are fine; this is called exactly once per trace row,
/// in row order.
using SteerCommandFn = std::function<double(const VehicleState&, double t)>;
using SpeedCommandFn = std::function<double(double t)>;

struct ClosedLoopResult {
    RunTrace trace;
    bool diverged = false; // plant rejected the state or the car left the road
};

/// Runs command -> PD -> plant at dt until the rear axle crosses x_finish.
/// Collisions are recorded on the trace but do not stop the run: cones are
/// soft pylons and a full trace is worth having for inspection.
ClosedLoopResult run_closed_loop(const Course& course, VehicleState initial,
                                 const SteerCommandFn& steer,
                                 const SpeedCommandFn& speed,
                                 const ClosedLoopConfig& config);

/// Steering-command source backed by the trained regressor. Keeps the
/// previous vehicle state so the rate features see the same backward
/// differences the dataset was built from.
class CnnPilot {
public:
    CnnPilot(const CnnModel& model, const Course& course, double dt);

    double operator()(const VehicleState& state, double t);
    void reset();

private:
    const CnnModel* model_;
    const Course* course_;
    double dt_;
    std::optional<VehicleState> prev_;
};

} // namespace slalom
