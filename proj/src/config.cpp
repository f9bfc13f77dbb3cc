#include "slalom/config.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <stdexcept>

namespace slalom {

namespace {

const std::set<std::string> kKnownKeys = {
    "course.lane_width", "course.cone_spacing", "course.cone_radius",
    "course.n_sets", "course.set_length", "course.gap", "course.first_set_x",
    "course.first_lane", "course.finish_margin",
    "vehicle.wheelbase", "vehicle.steering_ratio", "vehicle.column_inertia",
    "vehicle.column_damping", "vehicle.body_length", "vehicle.body_width",
    "vehicle.wheel_angle_max", "vehicle.speed_tau",
    "controller.p", "controller.d", "controller.torque_max",
    "controller.gain_low", "controller.gain_high", "controller.speed_low_kmh",
    "controller.speed_high_kmh",
    "path.clearance", "path.blend_fraction", "path.min_blend",
    "sim.rate_hz", "sim.substeps", "sim.max_time",
    "collect.n_runs", "collect.n_train", "collect.start_lane",
    "collect.speed_profile", "collect.frame_stride",
    "collect.max_reject_fraction",
    "train.epochs", "train.batch_size", "train.lr0", "train.lr_factor",
    "train.plateau_patience", "train.lr_floor",
    "eval.trials", "eval.speed_profile",
};

int get_count(const toml::Table& t, const std::string& key, int def) {
    const std::int64_t v = t.get_integer_or(key, def);
    if (v < 0 || v > 1'000'000'000)
        throw std::runtime_error("key '" + key + "': out of range");
    return static_cast<int>(v);
}

} // namespace

SpeedProfileSpec SpeedProfileSpec::parse(const std::string& text) {
    SpeedProfileSpec spec;
    if (text == "random") return spec;
    const std::string prefix = "fixed:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string num = text.substr(prefix.size());
        double kmh = 0.0;
        const auto [p, ec] =
            std::from_chars(num.data(), num.data() + num.size(), kmh);
        if (ec == std::errc() && p == num.data() + num.size() && kmh > 0.0) {
            spec.fixed = true;
            spec.fixed_kmh = kmh;
            return spec;
        }
    }
    throw std::runtime_error("bad speed profile '" + text +
                             "' (use \"random\" or \"fixed:<kmh>\")");
}

SpeedProfile SpeedProfileSpec::make(std::uint64_t seed) const {
    if (fixed) return SpeedProfile::fixed(fixed_kmh);
    return SpeedProfile::random_steps(seed, random_lo_kmh, random_hi_kmh);
}

std::string SpeedProfileSpec::describe() const {
    if (fixed) {
        std::string s = "fixed:" + std::to_string(fixed_kmh);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }
    return "random";
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    return from_table(toml::Table::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_table(const toml::Table& t) {
    for (const std::string& key : t.keys())
        if (!kKnownKeys.count(key))
            throw std::runtime_error("unknown config key '" + key + "'");

    ExperimentConfig c;

    c.course.lane_width = t.get_number_or("course.lane_width", c.course.lane_width);
    c.course.cone_spacing =
        t.get_number_or("course.cone_spacing", c.course.cone_spacing);
    c.course.cone_radius =
        t.get_number_or("course.cone_radius", c.course.cone_radius);
    c.course.n_sets = get_count(t, "course.n_sets", c.course.n_sets);
    c.course.set_length =
        t.get_number_or("course.set_length", c.course.set_length);
    c.course.gap = t.get_number_or("course.gap", c.course.gap);
    c.course.first_set_x =
        t.get_number_or("course.first_set_x", c.course.first_set_x);
    if (t.has("course.first_lane"))
        c.course.first_lane = lane_from_name(t.get_string("course.first_lane"));
    c.course.finish_margin =
        t.get_number_or("course.finish_margin", c.course.finish_margin);

    c.vehicle.wheelbase = t.get_number_or("vehicle.wheelbase", c.vehicle.wheelbase);
    c.vehicle.steering_ratio =
        t.get_number_or("vehicle.steering_ratio", c.vehicle.steering_ratio);
    c.vehicle.column_inertia =
        t.get_number_or("vehicle.column_inertia", c.vehicle.column_inertia);
    c.vehicle.column_damping =
        t.get_number_or("vehicle.column_damping", c.vehicle.column_damping);
    c.vehicle.body_length =
        t.get_number_or("vehicle.body_length", c.vehicle.body_length);
    c.vehicle.body_width =
        t.get_number_or("vehicle.body_width", c.vehicle.body_width);
    c.vehicle.wheel_angle_max =
        t.get_number_or("vehicle.wheel_angle_max", c.vehicle.wheel_angle_max);
    c.vehicle.speed_tau = t.get_number_or("vehicle.speed_tau", c.vehicle.speed_tau);

    c.gains.p = t.get_number_or("controller.p", c.gains.p);
    c.gains.d = t.get_number_or("controller.d", c.gains.d);
    c.gains.torque_max =
        t.get_number_or("controller.torque_max", c.gains.torque_max);
    c.gains.gain_low = t.get_number_or("controller.gain_low", c.gains.gain_low);
    c.gains.gain_high =
        t.get_number_or("controller.gain_high", c.gains.gain_high);
    c.gains.speed_low_kmh =
        t.get_number_or("controller.speed_low_kmh", c.gains.speed_low_kmh);
    c.gains.speed_high_kmh =
        t.get_number_or("controller.speed_high_kmh", c.gains.speed_high_kmh);

    c.path.clearance = t.get_number_or("path.clearance", c.path.clearance);
    c.path.blend_fraction =
        t.get_number_or("path.blend_fraction", c.path.blend_fraction);
    c.path.min_blend = t.get_number_or("path.min_blend", c.path.min_blend);

    c.sim.rate_hz = t.get_number_or("sim.rate_hz", c.sim.rate_hz);
    c.sim.substeps = get_count(t, "sim.substeps", c.sim.substeps);
    c.sim.max_time = t.get_number_or("sim.max_time", c.sim.max_time);

    c.collect.n_runs = get_count(t, "collect.n_runs", c.collect.n_runs);
    c.collect.n_train = get_count(t, "collect.n_train", c.collect.n_train);
    if (t.has("collect.start_lane"))
        c.collect.start_lane =
            lane_from_name(t.get_string("collect.start_lane"));
    c.collect.speed = SpeedProfileSpec::parse(
        t.get_string_or("collect.speed_profile", "random"));
    c.collect.frame_stride =
        get_count(t, "collect.frame_stride", c.collect.frame_stride);
    c.collect.max_reject_fraction = t.get_number_or(
        "collect.max_reject_fraction", c.collect.max_reject_fraction);

    c.train.epochs = get_count(t, "train.epochs", c.train.epochs);
    c.train.batch_size = get_count(t, "train.batch_size", c.train.batch_size);
    c.train.lr0 = t.get_number_or("train.lr0", c.train.lr0);
    c.train.lr_factor = t.get_number_or("train.lr_factor", c.train.lr_factor);
    c.train.plateau_patience =
        get_count(t, "train.plateau_patience", c.train.plateau_patience);
    c.train.lr_floor = t.get_number_or("train.lr_floor", c.train.lr_floor);
    c.train.target_scale = c.vehicle.wheel_angle_max;

    c.eval.trials = get_count(t, "eval.trials", c.eval.trials);
    c.eval.speed =
        SpeedProfileSpec::parse(t.get_string_or("eval.speed_profile", "random"));

    c.path.start_lane = c.collect.start_lane;
    c.validate();
    return c;
}

void ExperimentConfig::validate() const {
    vehicle.validate();
    gains.validate();
    train.validate();
    if (!(sim.rate_hz > 0.0))
        throw std::runtime_error("config: sim.rate_hz must be > 0");
    if (sim.substeps < 1)
        throw std::runtime_error("config: sim.substeps must be >= 1");
    if (!(sim.max_time > 0.0))
        throw std::runtime_error("config: sim.max_time must be > 0");
    if (collect.n_runs < 2)
        throw std::runtime_error("config: collect.n_runs must be >= 2");
    if (collect.n_train < 1 || collect.n_train >= collect.n_runs)
        throw std::runtime_error(
            "config: collect.n_train must leave at least one test run");
    if (collect.frame_stride < 1)
        throw std::runtime_error("config: collect.frame_stride must be >= 1");
    if (!(collect.max_reject_fraction >= 0.0 &&
          collect.max_reject_fraction <= 1.0))
        throw std::runtime_error(
            "config: collect.max_reject_fraction must be in [0, 1]");
    if (eval.trials < 1)
        throw std::runtime_error("config: eval.trials must be >= 1");
}

ClosedLoopConfig ExperimentConfig::closed_loop() const {
    ClosedLoopConfig cfg;
    cfg.dt = sim.dt();
    cfg.substeps = sim.substeps;
    cfg.max_time = sim.max_time;
    cfg.gains = gains;
    cfg.vehicle = vehicle;
    return cfg;
}

} // namespace slalom
