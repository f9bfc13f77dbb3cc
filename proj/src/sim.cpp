#include "slalom/sim.hpp"

#include <algorithm>
#include <cmath>

namespace slalom {

double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

void VehicleParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("VehicleParams: ") + name +
                                        " must be strictly positive");
    };
    positive(wheelbase, "wheelbase");
    positive(steering_ratio, "steering_ratio");
    positive(column_inertia, "column_inertia");
    positive(column_damping, "column_damping");
    positive(body_length, "body_length");
    positive(body_width, "body_width");
    positive(wheel_angle_max, "wheel_angle_max");
    positive(speed_tau, "speed_tau");
}

const char* lane_name(Lane lane) {
    return lane == Lane::Left ? "left" : "right";
}

Lane lane_from_name(const std::string& name) {
    if (name == "left") return Lane::Left;
    if (name == "right") return Lane::Right;
    throw std::invalid_argument("unknown lane name: " + name);
}

std::vector<Cone> Course::cones() const {
    std::vector<Cone> out;
    for (std::size_t i = 0; i < cone_sets.size(); ++i) {
        const ConeSet& s = cone_sets[i];
        const double y = lane_center(s.lane);
        for (double x = s.x_start; x <= s.x_end + 1e-9; x += s.cone_spacing)
            out.push_back(Cone{x, y, s.cone_radius, static_cast<int>(i)});
    }
    return out;
}

Course build_course(const CourseConfig& cfg) {
    if (!(cfg.lane_width > 0.0))
        throw std::invalid_argument("course: lane_width must be positive");

    Course course;
    course.lane_width = cfg.lane_width;

    std::vector<CourseConfig::SetSpec> specs = cfg.sets;
    if (specs.empty()) {
        if (cfg.n_sets < 1)
            throw std::invalid_argument("course: need at least one cone set");
        Lane lane = cfg.first_lane;
        double x = cfg.first_set_x;
        for (int i = 0; i < cfg.n_sets; ++i) {
            specs.push_back({x, x + cfg.set_length, lane});
            x += cfg.set_length + cfg.gap;
            lane = lane == Lane::Right ? Lane::Left : Lane::Right;
        }
    }
    if (specs.empty())
        throw std::invalid_argument("course: need at least one cone set");

    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& s = specs[i];
        if (!(s.x_end > s.x_start))
            throw std::invalid_argument("course: cone set x_end must exceed x_start");
        if (i > 0) {
            if (!(s.x_start > specs[i - 1].x_end))
                throw std::invalid_argument(
                    "course: cone-set x-spans must be disjoint and increasing");
            if (s.lane == specs[i - 1].lane)
                throw std::invalid_argument(
                    "course: consecutive cone sets must alternate lanes");
        }
        ConeSet set;
        set.x_start = s.x_start;
        set.x_end = s.x_end;
        set.lane = s.lane;
        set.cone_spacing = cfg.cone_spacing;
        set.cone_radius = cfg.cone_radius;
        if (!(set.cone_spacing > 0.0))
            throw std::invalid_argument("course: cone_spacing must be positive");
        course.cone_sets.push_back(set);
    }
    course.x_finish = specs.back().x_end + cfg.finish_margin;
    return course;
}

namespace {

struct PlantDeriv {
    double dx, dy, dheading, dspeed, dwheel, dwheel_rate;
};

PlantDeriv derivatives(const VehicleState& s, double torque,
                       double speed_target_mps, const VehicleParams& p) {
    PlantDeriv d;
    const double psi = s.heading - kHalfPi; // deviation from straight ahead
    d.dx = s.speed * std::cos(psi);
    d.dy = -s.speed * std::sin(psi);
    const double tire = s.wheel_angle / p.steering_ratio;
    d.dheading = -s.speed * std::tan(tire) / p.wheelbase;
    d.dspeed = (speed_target_mps - s.speed) / p.speed_tau;
    d.dwheel = s.wheel_rate;
    d.dwheel_rate =
        (torque - p.column_damping * s.wheel_rate) / p.column_inertia;
    return d;
}

VehicleState advanced(const VehicleState& s, const PlantDeriv& d, double h) {
    VehicleState out = s;
    out.x = s.x + h * d.dx;
    out.y = s.y + h * d.dy;
    out.heading = s.heading + h * d.dheading;
    out.speed = s.speed + h * d.dspeed;
    out.wheel_angle = s.wheel_angle + h * d.dwheel;
    out.wheel_rate = s.wheel_rate + h * d.dwheel_rate;
    return out;
}

bool all_finite(const VehicleState& s) {
    return std::isfinite(s.x) && std::isfinite(s.y) &&
           std::isfinite(s.heading) && std::isfinite(s.speed) &&
           std::isfinite(s.wheel_angle) && std::isfinite(s.wheel_rate);
}

} // namespace

VehicleState step(const VehicleState& state, const StepInput& input,
                  const VehicleParams& params, double dt, int substeps) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("step: dt must be positive and finite");
    if (!all_finite(state))
        throw std::invalid_argument("step: non-finite vehicle state");
    if (!std::isfinite(input.torque) || !std::isfinite(input.speed_command))
        throw std::invalid_argument("step: non-finite step input");
    params.validate();
    if (substeps < 1) substeps = 1;

    const double speed_target = kmh_to_mps(input.speed_command);
    const double h = dt / substeps;

    VehicleState s = state;
    for (int i = 0; i < substeps; ++i) {
        const PlantDeriv k1 = derivatives(s, input.torque, speed_target, params);
        const PlantDeriv k2 =
            derivatives(advanced(s, k1, h / 2.0), input.torque, speed_target, params);
        const PlantDeriv k3 =
            derivatives(advanced(s, k2, h / 2.0), input.torque, speed_target, params);
        const PlantDeriv k4 =
            derivatives(advanced(s, k3, h), input.torque, speed_target, params);

        auto rk4 = [](double a, double b, double c, double d) {
            return (a + 2.0 * b + 2.0 * c + d) / 6.0;
        };
        PlantDeriv comb;
        comb.dx = rk4(k1.dx, k2.dx, k3.dx, k4.dx);
        comb.dy = rk4(k1.dy, k2.dy, k3.dy, k4.dy);
        comb.dheading = rk4(k1.dheading, k2.dheading, k3.dheading, k4.dheading);
        comb.dspeed = rk4(k1.dspeed, k2.dspeed, k3.dspeed, k4.dspeed);
        comb.dwheel = rk4(k1.dwheel, k2.dwheel, k3.dwheel, k4.dwheel);
        comb.dwheel_rate =
            rk4(k1.dwheel_rate, k2.dwheel_rate, k3.dwheel_rate, k4.dwheel_rate);
        VehicleState n = advanced(s, comb, h);

        // Physical stops.
        if (n.wheel_angle > params.wheel_angle_max) {
            n.wheel_angle = params.wheel_angle_max;
            n.wheel_rate = 0.0;
        } else if (n.wheel_angle < -params.wheel_angle_max) {
            n.wheel_angle = -params.wheel_angle_max;
            n.wheel_rate = 0.0;
        }
        if (n.speed < 0.0) n.speed = 0.0;
        s = n;
    }
    s.heading = wrap_angle(s.heading);
    if (!all_finite(s))
        throw std::runtime_error("step: integration produced non-finite state");
    return s;
}

CollisionReport check_collision(const VehicleState& state,
                                const VehicleParams& params,
                                const Course& course) {
    const double psi = state.heading - kHalfPi;
    const double fx = std::cos(psi);   // forward unit vector
    const double fy = -std::sin(psi);
    const double lx = -fy;             // left unit vector
    const double ly = fx;

    const double rear_overhang = (params.body_length - params.wheelbase) / 2.0;
    const double u_lo = -rear_overhang;
    const double u_hi = params.body_length - rear_overhang;
    const double half_w = params.body_width / 2.0;

    CollisionReport report;
    for (const Cone& cone : course.cones()) {
        const double rx = cone.x - state.x;
        const double ry = cone.y - state.y;
        const double u = rx * fx + ry * fy; // longitudinal, body frame
        const double v = rx * lx + ry * ly; // lateral, body frame
        const double du = std::max({u_lo - u, 0.0, u - u_hi});
        const double dv = std::max(std::abs(v) - half_w, 0.0);
        const double dist = std::hypot(du, dv);
        if (dist <= cone.radius) {
            report.collision = true;
            report.cone = cone;
            return report;
        }
    }
    return report;
}

} // namespace slalom
