#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slalom/expert.hpp"

#include <cmath>
#include <cstring>

using namespace slalom;

namespace {

// Numerical derivatives of the reference, used as the smoothness oracle.
double d1(const ReferencePath& p, double x, double h = 1e-4) {
    return (p.y(x + h) - p.y(x - h)) / (2.0 * h);
}
double d2(const ReferencePath& p, double x, double h = 1e-4) {
    return (p.y(x + h) - 2.0 * p.y(x) + p.y(x - h)) / (h * h);
}

bool bits_equal(double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

// Member-wise bit equality (whole-struct memcmp would read padding bytes).
bool bitwise_equal(const RunTrace& a, const RunTrace& b) {
    if (a.rows.size() != b.rows.size()) return false;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const TraceRow& ra = a.rows[i];
        const TraceRow& rb = b.rows[i];
        if (!bits_equal(ra.t, rb.t) || !bits_equal(ra.torque, rb.torque) ||
            ra.collision != rb.collision)
            return false;
        const VehicleState& sa = ra.state;
        const VehicleState& sb = rb.state;
        if (!bits_equal(sa.x, sb.x) || !bits_equal(sa.y, sb.y) ||
            !bits_equal(sa.heading, sb.heading) ||
            !bits_equal(sa.speed, sb.speed) ||
            !bits_equal(sa.wheel_angle, sb.wheel_angle) ||
            !bits_equal(sa.wheel_rate, sb.wheel_rate))
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("reference path holds the free lane beside every set") {
    Course course = build_course(CourseConfig{}); // R, L, R cones
    ReferencePath path = build_reference_path(course);

    // Launch lane (right) before the first blend.
    CHECK(path.y(0.0) == course.lane_center(Lane::Right));
    // Alongside set 1 (cones right) the car is fully in the left lane.
    for (double x = 30.0; x <= 50.0; x += 2.5)
        CHECK(path.y(x) == course.lane_center(Lane::Left));
    // Set 2 has cones left.
    for (double x = 80.0; x <= 100.0; x += 2.5)
        CHECK(path.y(x) == course.lane_center(Lane::Right));
    // Set 3 cones right again, and the lane is held to the finish.
    for (double x = 130.0; x <= course.x_finish; x += 5.0)
        CHECK(path.y(x) == course.lane_center(Lane::Left));
}

TEST_CASE("reference path respects the clearance margin") {
    Course course = build_course(CourseConfig{});
    ReferencePathConfig cfg;
    ReferencePath path = build_reference_path(course, cfg);
    for (const ConeSet& set : course.cone_sets) {
        const Lane free = set.lane == Lane::Left ? Lane::Right : Lane::Left;
        CHECK(path.y(set.x_start - cfg.clearance) ==
              course.lane_center(free));
        CHECK(path.y(set.x_end + cfg.clearance) == course.lane_center(free));
    }
}

TEST_CASE("blends are quintic smoothsteps") {
    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    REQUIRE(path.blends().size() == 3);

    for (const auto& b : path.blends()) {
        const double mid = 0.5 * (b.x0 + b.x1);
        const double len = b.x1 - b.x0;

        SUBCASE("midpoint crosses halfway") {}
        CHECK(path.y(mid) == doctest::Approx(0.5 * (b.y0 + b.y1)));

        // Slope and curvature vanish at both ends (C2 joins with the
        // plateaus), and the peak slope matches 15/8 * dy / L.
        CHECK(std::abs(d1(path, b.x0)) < 1e-6);
        CHECK(std::abs(d1(path, b.x1)) < 1e-6);
        CHECK(std::abs(d2(path, b.x0)) < 1e-4);
        CHECK(std::abs(d2(path, b.x1)) < 1e-4);
        CHECK(d1(path, mid) ==
              doctest::Approx(1.875 * (b.y1 - b.y0) / len).epsilon(1e-6));
    }
}

TEST_CASE("second derivative is continuous across the whole course") {
    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    // Scan at fine pitch: adjacent numerical second derivatives never jump.
    const double dx = 0.05;
    double prev = d2(path, 0.0);
    for (double x = dx; x <= course.x_finish; x += dx) {
        const double cur = d2(path, x);
        CHECK(std::abs(cur - prev) < 0.02); // rad out of ~0.06 peak
        prev = cur;
    }
}

TEST_CASE("lane changes are monotone between the lanes") {
    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    for (const auto& b : path.blends()) {
        const double sign = b.y1 > b.y0 ? 1.0 : -1.0;
        double prev = path.y(b.x0);
        for (double x = b.x0 + 0.01; x <= b.x1; x += 0.01) {
            const double cur = path.y(x);
            CHECK(sign * (cur - prev) >= 0.0);
            prev = cur;
        }
    }
}

TEST_CASE("a gap too short for a blend is rejected") {
    CourseConfig cc;
    cc.gap = 9.0; // clearance eats 8 of it
    Course course = build_course(cc);
    CHECK_THROWS_AS(build_reference_path(course), std::invalid_argument);
}

TEST_CASE("start lane already clear of the first set needs no first blend") {
    Course course = build_course(CourseConfig{}); // first cones on the right
    ReferencePathConfig cfg;
    cfg.start_lane = Lane::Left;
    ReferencePath path = build_reference_path(course, cfg);
    CHECK(path.blends().size() == 2);
    CHECK(path.y(0.0) == course.lane_center(Lane::Left));
    CHECK(path.y(35.0) == course.lane_center(Lane::Left));
}

TEST_CASE("speed profiles") {
    SUBCASE("fixed holds its value") {
        SpeedProfile p = SpeedProfile::fixed(40.0);
        CHECK(p.value(0.0) == 40.0);
        CHECK(p.value(7.3) == 40.0);
        CHECK(p.value(100.0) == 40.0);
    }

    SUBCASE("random stays in range and is deterministic") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            SpeedProfile p = SpeedProfile::random_steps(seed);
            SpeedProfile q = SpeedProfile::random_steps(seed);
            for (double t = 0.0; t <= 25.0; t += 0.1) {
                CHECK(p.value(t) >= 15.0);
                CHECK(p.value(t) <= 60.0);
                CHECK(p.value(t) == q.value(t));
            }
        }
    }

    SUBCASE("seeds differ") {
        SpeedProfile p = SpeedProfile::random_steps(1);
        SpeedProfile q = SpeedProfile::random_steps(2);
        bool any_diff = false;
        for (double t = 0.0; t <= 25.0; t += 0.5)
            any_diff = any_diff || p.value(t) != q.value(t);
        CHECK(any_diff);
    }

    SUBCASE("bad ranges are rejected") {
        CHECK_THROWS_AS(SpeedProfile::fixed(0.0), std::invalid_argument);
        CHECK_THROWS_AS(SpeedProfile::random_steps(1, 50.0, 40.0),
                        std::invalid_argument);
    }
}

TEST_CASE("pure pursuit steers toward the reference") {
    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    VehicleParams vp;
    ExpertParams ep;
    ep.noise_sigma = 0.0;

    SUBCASE("target to the left gives a left command") {
        ExpertDriver driver(path, vp, ep);
        VehicleState s; // right lane at x=10; reference heads left ahead
        s.y = course.lane_center(Lane::Right);
        s.x = 10.0;
        s.speed = kmh_to_mps(40.0);
        CHECK(driver.command(s) > 0.0);
    }

    SUBCASE("mirrored geometry gives the mirrored command") {
        CourseConfig cc;
        cc.first_lane = Lane::Left;
        Course mirror = build_course(cc);
        ReferencePathConfig pc;
        pc.start_lane = Lane::Left;
        ReferencePath mpath = build_reference_path(mirror, pc);
        ExpertDriver driver(path, vp, ep);
        ExpertDriver mdriver(mpath, vp, ep);
        VehicleState s;
        s.y = course.lane_center(Lane::Right);
        s.x = 10.0;
        s.speed = kmh_to_mps(40.0);
        VehicleState ms = s;
        ms.y = -s.y;
        CHECK(mdriver.command(ms) == doctest::Approx(-driver.command(s)));
    }

    SUBCASE("on the reference going straight the command is zero") {
        ExpertDriver driver(path, vp, ep);
        VehicleState s; // settled stretch alongside set 1
        s.x = 38.0;
        s.y = course.lane_center(Lane::Left);
        s.speed = kmh_to_mps(20.0); // short lookahead stays on the plateau
        CHECK(std::abs(driver.command(s)) < 1e-9);
    }

    SUBCASE("the command depends on the state alone") {
        // An imitator sees only the instantaneous state, so the
        // demonstrated command must not carry hidden history.
        ExpertDriver driver(path, vp, ep);
        VehicleState mid;
        mid.x = 10.0;
        mid.y = course.lane_center(Lane::Right);
        mid.speed = kmh_to_mps(40.0);
        const double fresh = driver.command(mid);

        ExpertDriver warmed(path, vp, ep);
        VehicleState far = mid;
        far.x = 60.0;
        far.y = course.lane_center(Lane::Left);
        for (int i = 0; i < 30; ++i) warmed.command(far);
        CHECK(warmed.command(mid) == doctest::Approx(fresh).epsilon(1e-12));
    }
}

TEST_CASE("expert demonstration completes the default course") {
    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    ClosedLoopConfig cfg;
    ExpertParams ep = expert_preset(0);
    ep.noise_seed = 99;

    DemoRun demo =
        simulate_expert_run(course, path, ep, SpeedProfile::fixed(40.0),
                            Lane::Right, cfg, 7);
    CHECK(demo.trace.run_id == 7);
    CHECK(demo.trace.completed);
    CHECK_FALSE(demo.trace.collided);
    CHECK(demo.commands.size() == demo.trace.rows.size());

    SUBCASE("tracks the reference tightly after the launch transient") {
        double worst = 0.0;
        for (const TraceRow& row : demo.trace.rows)
            if (row.state.x > 20.0 && row.state.x < course.x_finish)
                worst = std::max(worst,
                                 std::abs(row.state.y - path.y(row.state.x)));
        CHECK(worst < 0.6);
    }

    SUBCASE("wheel usage looks like a slalom, not a spin") {
        double peak = 0.0;
        for (const TraceRow& row : demo.trace.rows)
            peak = std::max(peak, std::abs(row.state.wheel_angle));
        CHECK(peak > 0.5);  // it really turned
        CHECK(peak < 5.0);  // and never wound toward the stop
    }
}

TEST_CASE("all four presets clear the course across the speed range") {
    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    ClosedLoopConfig cfg;
    for (int preset = 0; preset < 4; ++preset) {
        for (double kmh : {15.0, 40.0, 60.0}) {
            ExpertParams ep = expert_preset(preset);
            ep.noise_seed = mix_seed(5, preset * 10 + static_cast<int>(kmh));
            DemoRun demo = simulate_expert_run(course, path, ep,
                                               SpeedProfile::fixed(kmh),
                                               Lane::Right, cfg, 0);
            CAPTURE(preset);
            CAPTURE(kmh);
            CHECK(demo.trace.completed);
            CHECK_FALSE(demo.trace.collided);
        }
    }
}

TEST_CASE("demonstrations are bitwise deterministic") {
    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    ClosedLoopConfig cfg;
    ExpertParams ep = expert_preset(2);
    ep.noise_seed = 1234;
    SpeedProfile sp = SpeedProfile::random_steps(42);

    DemoRun a = simulate_expert_run(course, path, ep, sp, Lane::Right, cfg, 1);
    DemoRun b = simulate_expert_run(course, path, ep, sp, Lane::Right, cfg, 1);
    CHECK(bitwise_equal(a.trace, b.trace));
    CHECK(a.commands == b.commands);
}

TEST_CASE("noise seeds decorrelate runs") {
    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    ClosedLoopConfig cfg;
    ExpertParams ep = expert_preset(0);
    ep.noise_seed = 1;
    DemoRun a = simulate_expert_run(course, path, ep,
                                    SpeedProfile::fixed(40.0), Lane::Right,
                                    cfg, 1);
    ep.noise_seed = 2;
    DemoRun b = simulate_expert_run(course, path, ep,
                                    SpeedProfile::fixed(40.0), Lane::Right,
                                    cfg, 1);
    CHECK(a.commands != b.commands);
}

TEST_CASE("launch jitter stays bounded and is recovered from") {
    for (std::uint64_t s = 0; s < 200; ++s) {
        const LaunchJitter j = LaunchJitter::draw(s);
        CHECK(std::abs(j.y_offset) <= 0.35);
        CHECK(std::abs(j.heading_offset) <= 0.025);
    }
    CHECK(LaunchJitter::draw(3).y_offset != LaunchJitter::draw(4).y_offset);

    Course course = build_course(CourseConfig{});
    ReferencePath path = build_reference_path(course);
    ClosedLoopConfig cfg;
    ExpertParams ep = expert_preset(0);
    ep.noise_seed = 77;
    LaunchJitter worst;
    worst.y_offset = 0.35;
    worst.heading_offset = -0.025;
    DemoRun demo = simulate_expert_run(course, path, ep,
                                       SpeedProfile::fixed(40.0), Lane::Right,
                                       cfg, 0, worst);
    CHECK(demo.trace.completed);
    CHECK_FALSE(demo.trace.collided);
}

TEST_CASE("mix_seed spreads indices") {
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
    // No collisions across a modest index range.
    std::vector<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 2000; ++i) seen.push_back(mix_seed(7, i));
    std::sort(seen.begin(), seen.end());
    CHECK(std::adjacent_find(seen.begin(), seen.end()) == seen.end());
}
