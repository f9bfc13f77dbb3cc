#include "slalom/controller.hpp"

#include "slalom/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slalom {

void PdGains::validate() const {
    if (!(p > 0.0) || !(d >= 0.0))
        throw std::invalid_argument("PdGains: p must be > 0 and d >= 0");
    if (!(torque_max > 0.0))
        throw std::invalid_argument("PdGains: torque_max must be > 0");
    if (!(speed_high_kmh > speed_low_kmh))
        throw std::invalid_argument(
            "PdGains: schedule knots must satisfy speed_low < speed_high");
    if (!(gain_low > 0.0) || !(gain_high > 0.0))
        throw std::invalid_argument("PdGains: multipliers must be > 0");
}

double speed_gain_multiplier(double speed_kmh, const PdGains& gains) {
    const double s = std::clamp(speed_kmh, gains.speed_low_kmh,
                                gains.speed_high_kmh);
    const double t = (s - gains.speed_low_kmh) /
                     (gains.speed_high_kmh - gains.speed_low_kmh);
    return gains.gain_low + t * (gains.gain_high - gains.gain_low);
}

double pd_torque(const VehicleState& state, double desired_angle,
                 const PdGains& gains) {
    const double m = speed_gain_multiplier(mps_to_kmh(state.speed), gains);
    const double raw = -m * (gains.p * (state.wheel_angle - desired_angle) +
                             gains.d * state.wheel_rate);
    return std::clamp(raw, -gains.torque_max, gains.torque_max);
}

ClosedLoopResult run_closed_loop(const Course& course, VehicleState initial,
                                 const SteerCommandFn& steer,
                                 const SpeedCommandFn& speed,
                                 const ClosedLoopConfig& config) {
    config.vehicle.validate();
    config.gains.validate();
    if (!(config.dt > 0.0))
        throw std::invalid_argument("run_closed_loop: dt must be > 0");

    ClosedLoopResult result;
    RunTrace& trace = result.trace;
    trace.dt = config.dt;
    const int max_steps =
        static_cast<int>(std::ceil(config.max_time / config.dt));
    trace.rows.reserve(static_cast<std::size_t>(max_steps) + 1);

    VehicleState state = initial;
    for (int i = 0; i <= max_steps; ++i) {
        const double t = i * config.dt;
        const double desired =
            std::clamp(steer(state, t), -config.vehicle.wheel_angle_max,
                       config.vehicle.wheel_angle_max);
        const double torque = pd_torque(state, desired, config.gains);
        const CollisionReport col =
            check_collision(state, config.vehicle, course);

        trace.rows.push_back({t, state, torque, col.collision});
        trace.collided = trace.collided || col.collision;

        if (state.x >= course.x_finish) {
            trace.completed = true;
            break;
        }

        VehicleState next;
        try {
            next = step(state, {torque, speed(t)}, config.vehicle, config.dt,
                        config.substeps);
        } catch (const std::exception&) {
            result.diverged = true;
            break;
        }
        // Way off the road sideways or driving backwards out of the course:
        // the run is lost, stop burning steps on it.
        if (std::abs(next.y) > 50.0 || next.x < -100.0) {
            result.diverged = true;
            break;
        }
        state = next;
    }
    return result;
}

CnnPilot::CnnPilot(const CnnModel& model, const Course& course, double dt)
    : model_(&model), course_(&course), dt_(dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("CnnPilot: dt must be > 0");
    model.validate_shapes();
}

double CnnPilot::operator()(const VehicleState& state, double /*t*/) {
    const FeatureFrame frame = extract_frame(state, prev_, *course_, dt_);
    prev_ = state;
    return predict_wheel_angle(*model_, frame.as_array());
}

void CnnPilot::reset() { prev_.reset(); }

} // namespace slalom
