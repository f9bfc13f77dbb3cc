#include "slalom/expert.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace slalom {

namespace {

double smoothstep5(double t) {
    t = std::clamp(t, 0.0, 1.0);
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

Lane opposite(Lane lane) {
    return lane == Lane::Left ? Lane::Right : Lane::Left;
}

} // namespace

ReferencePath::ReferencePath(double y_start, std::vector<Blend> blends)
    : y_start_(y_start), blends_(std::move(blends)) {
    for (std::size_t i = 0; i < blends_.size(); ++i) {
        if (!(blends_[i].x0 < blends_[i].x1))
            throw std::invalid_argument("ReferencePath: empty blend span");
        if (i > 0 && !(blends_[i - 1].x1 <= blends_[i].x0))
            throw std::invalid_argument("ReferencePath: overlapping blends");
    }
}

double ReferencePath::y(double x) const {
    double level = y_start_;
    for (const Blend& b : blends_) {
        if (x < b.x0) return level;
        if (x <= b.x1)
            return b.y0 + (b.y1 - b.y0) * smoothstep5((x - b.x0) / (b.x1 - b.x0));
        level = b.y1;
    }
    return level;
}

ReferencePath build_reference_path(const Course& course,
                                   const ReferencePathConfig& config) {
    if (course.cone_sets.empty())
        throw std::invalid_argument("build_reference_path: no cone sets");
    if (!(config.blend_fraction > 0.0 && config.blend_fraction <= 1.0))
        throw std::invalid_argument(
            "build_reference_path: blend_fraction must be in (0, 1]");

    // Free-lane plateau for each set, then a blend wherever the lane the car
    // should hold changes across the span between plateaus.
    std::vector<ReferencePath::Blend> blends;
    double level = course.lane_center(config.start_lane);
    double level_from_x = 0.0; // plateau start of `level`

    for (const ConeSet& set : course.cone_sets) {
        const double target = course.lane_center(opposite(set.lane));
        if (target != level) {
            const double lo = level_from_x + (level_from_x > 0.0 ? config.clearance : 0.0);
            const double hi = set.x_start - config.clearance;
            const double avail = hi - lo;
            if (!(avail >= config.min_blend))
                throw std::invalid_argument(
                    "build_reference_path: only " + std::to_string(avail) +
                    " m available before the set at x=" +
                    std::to_string(set.x_start) + ", need >= " +
                    std::to_string(config.min_blend));
            const double len = std::max(config.blend_fraction * avail,
                                        config.min_blend);
            const double mid = 0.5 * (lo + hi);
            blends.push_back(
                {mid - len / 2.0, mid + len / 2.0, level, target});
            level = target;
        }
        level_from_x = set.x_end;
    }
    return ReferencePath(course.lane_center(config.start_lane),
                         std::move(blends));
}

SpeedProfile SpeedProfile::fixed(double kmh) {
    if (!(kmh > 0.0))
        throw std::invalid_argument("SpeedProfile: speed must be > 0");
    SpeedProfile p;
    p.nodes_.push_back({0.0, kmh});
    return p;
}

SpeedProfile SpeedProfile::random_steps(std::uint64_t seed, double lo_kmh,
                                        double hi_kmh, double ramp_s) {
    if (!(hi_kmh > lo_kmh) || !(lo_kmh > 0.0))
        throw std::invalid_argument("SpeedProfile: bad speed range");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> level(lo_kmh, hi_kmh);
    std::uniform_int_distribution<int> count(0, 2);
    std::uniform_real_distribution<double> when(3.0, 14.0);

    SpeedProfile p;
    p.nodes_.push_back({0.0, level(rng)});
    const int extra = count(rng);
    std::vector<double> times;
    for (int i = 0; i < extra; ++i) times.push_back(when(rng));
    std::sort(times.begin(), times.end());
    for (double t : times) {
        // Hold until t, then ramp to the next level over ramp_s seconds.
        const double prev = p.nodes_.back().kmh;
        p.nodes_.push_back({t, prev});
        p.nodes_.push_back({t + ramp_s, level(rng)});
    }
    return p;
}

double SpeedProfile::value(double t) const {
    if (t <= nodes_.front().t) return nodes_.front().kmh;
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (t <= nodes_[i].t) {
            const Node& a = nodes_[i - 1];
            const Node& b = nodes_[i];
            const double u = (t - a.t) / (b.t - a.t);
            return a.kmh + u * (b.kmh - a.kmh);
        }
    }
    return nodes_.back().kmh;
}

void ExpertParams::validate() const {
    if (!(lookahead_gain > 0.0) || !(lookahead_min > 0.0) ||
        !(lookahead_max >= lookahead_min))
        throw std::invalid_argument("ExpertParams: bad lookahead settings");
    if (!(noise_sigma >= 0.0))
        throw std::invalid_argument("ExpertParams: noise_sigma must be >= 0");
    if (!(noise_tau > 0.0))
        throw std::invalid_argument("ExpertParams: noise_tau must be > 0");
}

// Four driving styles with mild, style-specific exploration noise. The
// noise widens the tube of visited states so the cloned policy also sees
// labels slightly off the nominal line; too much of it blurs the command
// onsets and the clone turns in late, so the sigmas stay small.
ExpertParams expert_preset(int index) {
    ExpertParams p;
    switch (((index % 4) + 4) % 4) {
    case 0: // steady reference driver
        p.lookahead_min = 8.0;
        break;
    case 1: // anticipates further ahead, explores gently
        p.lookahead_gain = 0.75;
        p.lookahead_min = 8.0;
        p.lookahead_max = 14.0;
        p.noise_sigma = 0.10;
        p.noise_tau = 0.8;
        break;
    case 2: // tighter line, explores harder
        p.lookahead_gain = 0.5;
        p.lookahead_min = 6.5;
        p.noise_sigma = 0.20;
        p.noise_tau = 0.5;
        break;
    case 3: // relaxed pace keeper
        p.lookahead_gain = 0.65;
        p.lookahead_min = 8.0;
        p.noise_sigma = 0.12;
        break;
    }
    return p;
}

ExpertDriver::ExpertDriver(const ReferencePath& path,
                           const VehicleParams& vehicle,
                           const ExpertParams& params)
    : path_(&path), vehicle_(vehicle), params_(params) {
    params.validate();
    vehicle.validate();
}

double ExpertDriver::command(const VehicleState& state) const {
    const double ld =
        std::clamp(params_.lookahead_gain * state.speed, params_.lookahead_min,
                   params_.lookahead_max);
    const double xt = state.x + ld;
    const double yt = path_->y(xt);

    // Body frame: psi is the yaw away from straight down-road; forward is
    // (cos psi, -sin psi) and the left axis (sin psi, cos psi).
    const double psi = state.heading - kHalfPi;
    const double dx = xt - state.x;
    const double dy = yt - state.y;
    const double forward = dx * std::cos(psi) - dy * std::sin(psi);
    const double left = dx * std::sin(psi) + dy * std::cos(psi);
    const double alpha = std::atan2(left, forward);
    const double dist = std::hypot(dx, dy);

    // Pure pursuit arc through the lookahead point, converted to a
    // steering-wheel angle.
    const double tire =
        std::atan2(2.0 * vehicle_.wheelbase * std::sin(alpha), dist);
    const double raw = std::clamp(tire * vehicle_.steering_ratio,
                                  -vehicle_.wheel_angle_max,
                                  vehicle_.wheel_angle_max);

    return raw;
}

LaunchJitter LaunchJitter::draw(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> y_off(-0.35, 0.35);
    std::uniform_real_distribution<double> h_off(-0.025, 0.025);
    LaunchJitter j;
    j.y_offset = y_off(rng);
    j.heading_offset = h_off(rng);
    return j;
}

DemoRun simulate_expert_run(const Course& course, const ReferencePath& path,
                            const ExpertParams& expert,
                            const SpeedProfile& speed, Lane start_lane,
                            const ClosedLoopConfig& config,
                            std::uint64_t run_id,
                            const LaunchJitter& jitter) {
    ExpertDriver driver(path, config.vehicle, expert);

    // Exploration noise (exact OU discretization, stationary std
    // noise_sigma) perturbs what the column is asked to do; the recorded
    // command stays the clean, corrective one.
    std::mt19937_64 noise_rng(expert.noise_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double decay = std::exp(-config.dt / expert.noise_tau);
    const double kick = expert.noise_sigma * std::sqrt(1.0 - decay * decay);
    double ou = 0.0;

    DemoRun demo;
    auto steer = [&](const VehicleState& s, double) {
        const double cmd = driver.command(s);
        demo.commands.push_back(cmd);
        ou = decay * ou + kick * gauss(noise_rng);
        return cmd + ou;
    };
    auto speed_fn = [&](double t) { return speed.value(t); };

    VehicleState init;
    init.y = course.lane_center(start_lane) + jitter.y_offset;
    init.heading = kHalfPi + jitter.heading_offset;
    init.speed = kmh_to_mps(speed.value(0.0));

    ClosedLoopResult res = run_closed_loop(course, init, steer, speed_fn, config);
    demo.trace = std::move(res.trace);
    demo.trace.run_id = run_id;
    if (res.diverged) demo.trace.completed = false;
    return demo;
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace slalom
