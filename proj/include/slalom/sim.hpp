#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace slalom {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = kPi / 2.0;

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }
inline double mps_to_kmh(double mps) { return mps * 3.6; }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

/// Vehicle pose and steering-column state. (x, y) locate the rear axle,
/// x down the road, y lateral (positive = driver's left when driving
/// down-road). heading is measured from the y-axis, so driving straight
/// down-road means heading = pi/2; stored wrapped to (-pi, pi].
/// wheel_angle is the steering-wheel angle, left positive.
struct VehicleState {
    double x = 0.0;           // m
    double y = 0.0;           // m
    double heading = kHalfPi; // rad from y-axis
    double speed = 0.0;       // m/s, >= 0
    double wheel_angle = 0.0; // rad
    double wheel_rate = 0.0;  // rad/s
};

struct VehicleParams {
    double wheelbase = 2.7;        // m
    double steering_ratio = 16.0;  // wheel angle / tire angle
    double column_inertia = 0.05;  // kg m^2
    double column_damping = 0.3;   // N m s / rad
    double body_length = 4.5;      // m
    double body_width = 1.8;       // m
    double wheel_angle_max = 2.5 * kPi; // rad, physical stop
    double speed_tau = 0.5;        // s, first-order speed lag

    void validate() const;
};

enum class Lane { Left, Right };

const char* lane_name(Lane lane);
Lane lane_from_name(const std::string& name);

/// A contiguous row of cones occupying one lane. Cones sit at the lane's
/// center y, at x_start, x_start + spacing, ... up to x_end.
struct ConeSet {
    double x_start = 0.0;
    double x_end = 0.0;
    Lane lane = Lane::Right;
    double cone_spacing = 4.0;
    double cone_radius = 0.15;
};

struct Cone {
    double x = 0.0;
    double y = 0.0;
    double radius = 0.15;
    int set_index = -1;
};

struct Course {
    std::vector<ConeSet> cone_sets;
    double lane_width = 3.5;
    double x_finish = 0.0;

    double lane_center(Lane lane) const {
        return lane == Lane::Left ? lane_width / 2.0 : -lane_width / 2.0;
    }
    /// Materialized cone positions in course order.
    std::vector<Cone> cones() const;
};

/// Generator-style course description; build_course validates and expands it.
struct CourseConfig {
    double lane_width = 3.5;
    double cone_spacing = 4.0;
    double cone_radius = 0.15;
    // Explicit sets, used when non-empty. Otherwise n_sets are generated:
    // each set_length long, separated by gap, first set at first_set_x,
    // lanes alternating starting from first_lane.
    struct SetSpec {
        double x_start = 0.0;
        double x_end = 0.0;
        Lane lane = Lane::Right;
    };
    std::vector<SetSpec> sets;
    int n_sets = 3;
    double set_length = 20.0;
    double gap = 30.0;
    double first_set_x = 30.0;
    Lane first_lane = Lane::Right;
    double finish_margin = 30.0; // x_finish = last set end + finish_margin
};

Course build_course(const CourseConfig& cfg);

/// Per-step command: steering-column torque plus the externally commanded
/// speed. The speed command is never produced by the learned system.
struct StepInput {
    double torque = 0.0;          // N m on the steering column
    double speed_command = 0.0;   // km/h
};

/// Advances the plant by dt using >= `substeps` RK4 substeps.
/// Column: J*dd(theta) = tau - b*d(theta), clamped at +-wheel_angle_max with
/// the rate zeroed at the stop. Tire angle = wheel_angle / steering_ratio.
/// Pose: kinematic bicycle at the rear axle. Speed relaxes toward the
/// command with time constant speed_tau.
VehicleState step(const VehicleState& state, const StepInput& input,
                  const VehicleParams& params, double dt, int substeps = 4);

struct CollisionReport {
    bool collision = false;
    Cone cone; // offending cone when collision is true
};

/// True iff some cone center lies within cone_radius of the car's oriented
/// body rectangle (rear overhang (body_length - wheelbase)/2 behind the
/// rear axle, laterally centered). Boundary contact counts as collision.
CollisionReport check_collision(const VehicleState& state,
                                const VehicleParams& params,
                                const Course& course);

/// One row of closed-loop (or demonstration) telemetry.
struct TraceRow {
    double t = 0.0;
    VehicleState state;
    double torque = 0.0;
    bool collision = false;
};

struct RunTrace {
    std::uint64_t run_id = 0;
    double dt = 1.0 / 30.0;
    std::vector<TraceRow> rows;
    bool collided = false;
    bool completed = false;
};

} // namespace slalom
