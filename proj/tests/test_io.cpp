#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "slalom/config.hpp"
#include "slalom/csv.hpp"
#include "slalom/svg.hpp"
#include "slalom/toml.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

using namespace slalom;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("toml scalars, tables and comments") {
    const auto t = toml::Table::parse_string(R"(
# experiment
title = "slalom run" # inline comment
count = 42
ratio = 0.5
flag = true
neg = -1e-5

[train]
epochs = 18
lr = 0.001

[train.nested]
deep = "yes"
)");
    CHECK(t.get_string("title") == "slalom run");
    CHECK(t.get_integer("count") == 42);
    CHECK(t.get_number("ratio") == 0.5);
    CHECK(t.get_boolean("flag") == true);
    CHECK(t.get_number("neg") == -1e-5);
    CHECK(t.get_integer("train.epochs") == 18);
    CHECK(t.get_number("train.lr") == 0.001);
    CHECK(t.get_string("train.nested.deep") == "yes");

    SUBCASE("integers also read as numbers") {
        CHECK(t.get_number("count") == 42.0);
    }
    SUBCASE("defaults fill in missing keys") {
        CHECK(t.get_number_or("train.momentum", 0.9) == 0.9);
        CHECK(t.get_string_or("name", "x") == "x");
        CHECK(t.get_integer_or("count", 7) == 42);
    }
    SUBCASE("missing keys are named in the error") {
        try {
            t.get_number("nope.missing");
            FAIL("expected an error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("nope.missing") !=
                  std::string::npos);
        }
    }
    SUBCASE("type mismatches are named too") {
        try {
            t.get_integer("ratio");
            FAIL("expected an error");
        } catch (const std::runtime_error& e) {
            const std::string msg = e.what();
            CHECK(msg.find("ratio") != std::string::npos);
            CHECK(msg.find("integer") != std::string::npos);
        }
    }
}

TEST_CASE("toml strings and escapes") {
    const auto t = toml::Table::parse_string(R"(
a = "with \"quotes\" and \\ backslash"
b = "tab\there"
hash = "a # not a comment"
)");
    CHECK(t.get_string("a") == "with \"quotes\" and \\ backslash");
    CHECK(t.get_string("b") == "tab\there");
    CHECK(t.get_string("hash") == "a # not a comment");
}

TEST_CASE("toml arrays") {
    const auto t = toml::Table::parse_string(R"(
plain = [1, 2, 3]
floats = [0.5, 2, -1.5]
trailing = [1, 2,]
names = ["a", "b,c"]
multi = [
  10,   # first
  20,
  30,
]
nested = [[1, 2], [3]]
)");
    CHECK(t.get_number_array("plain") == std::vector<double>{1, 2, 3});
    CHECK(t.get_number_array("floats") == std::vector<double>{0.5, 2, -1.5});
    CHECK(t.get_number_array("trailing") == std::vector<double>{1, 2});
    CHECK(t.get_string_array("names") == std::vector<std::string>{"a", "b,c"});
    CHECK(t.get_number_array("multi") == std::vector<double>{10, 20, 30});
    const auto& nested = toml::Table::parse_string("x = [[1, 2], [3]]");
    CHECK(nested.has("x"));
}

TEST_CASE("toml parse errors carry file and line") {
    auto expect_error = [](const std::string& text, const std::string& what) {
        try {
            toml::Table::parse_string(text, "conf.toml");
            FAIL_CHECK("expected parse error for: " << text);
        } catch (const std::runtime_error& e) {
            const std::string msg = e.what();
            CAPTURE(msg);
            CHECK(msg.find("conf.toml:") != std::string::npos);
            CHECK(msg.find(what) != std::string::npos);
        }
    };
    expect_error("a = ", "missing value");
    expect_error("a = nonsense", "cannot parse");
    expect_error("a = \"open", "unterminated");
    expect_error("a = 1\na = 2", "duplicate");
    expect_error("[[points]]\nx = 1", "not supported");
    expect_error("a b = 1", "bad key");
    expect_error("just text", "expected 'key = value'");
    expect_error("a = [1, 2", "unterminated multi-line array");

    SUBCASE("line numbers point at the offending line") {
        try {
            toml::Table::parse_string("ok = 1\nbad = ?\n", "c.toml");
            FAIL("expected error");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("c.toml:2") != std::string::npos);
        }
    }
}

TEST_CASE("missing config file is reported") {
    CHECK_THROWS_WITH_AS(toml::Table::parse_file("/no/such/file.toml"),
                         doctest::Contains("/no/such/file.toml"),
                         std::runtime_error);
}

TEST_CASE("experiment config defaults equal an empty document") {
    const ExperimentConfig c =
        ExperimentConfig::from_table(toml::Table::parse_string(""));
    CHECK(c.course.n_sets == 3);
    CHECK(c.course.gap == 30.0);
    CHECK(c.vehicle.wheelbase == 2.7);
    CHECK(c.vehicle.wheel_angle_max == 2.5 * kPi);
    CHECK(c.gains.p == 20.0);
    CHECK(c.sim.rate_hz == 30.0);
    CHECK(c.sim.dt() == 1.0 / 30.0);
    CHECK(c.collect.n_runs == 573);
    CHECK(c.collect.n_train == 500);
    CHECK(c.collect.frame_stride == 10);
    CHECK(c.train.epochs == 18);
    CHECK(c.train.batch_size == 4);
    CHECK(c.eval.trials == 17);
    CHECK(c.train.target_scale == c.vehicle.wheel_angle_max);
    CHECK_FALSE(c.collect.speed.fixed);
}

TEST_CASE("experiment config applies overrides") {
    const ExperimentConfig c =
        ExperimentConfig::from_table(toml::Table::parse_string(R"(
[course]
n_sets = 4
first_lane = "left"

[vehicle]
wheelbase = 3.1

[controller]
p = 25.0

[collect]
n_runs = 40
n_train = 30
speed_profile = "fixed:45"
frame_stride = 3

[train]
epochs = 2

[eval]
trials = 5
speed_profile = "fixed:40"
)"));
    CHECK(c.course.n_sets == 4);
    CHECK(c.course.first_lane == Lane::Left);
    CHECK(c.vehicle.wheelbase == 3.1);
    CHECK(c.gains.p == 25.0);
    CHECK(c.collect.n_runs == 40);
    CHECK(c.collect.speed.fixed);
    CHECK(c.collect.speed.fixed_kmh == 45.0);
    CHECK(c.collect.frame_stride == 3);
    CHECK(c.train.epochs == 2);
    CHECK(c.eval.trials == 5);
    CHECK(c.eval.speed.describe() == "fixed:40");
}

TEST_CASE("experiment config rejects unknown and invalid settings") {
    CHECK_THROWS_WITH_AS(
        ExperimentConfig::from_table(toml::Table::parse_string("typo = 1")),
        doctest::Contains("typo"), std::runtime_error);
    CHECK_THROWS_AS(ExperimentConfig::from_table(toml::Table::parse_string(
                        "[collect]\nn_runs = 10\nn_train = 10")),
                    std::runtime_error);
    CHECK_THROWS_AS(ExperimentConfig::from_table(toml::Table::parse_string(
                        "[collect]\nspeed_profile = \"warp\"")),
                    std::runtime_error);
    CHECK_THROWS_AS(ExperimentConfig::from_table(
                        toml::Table::parse_string("[sim]\nrate_hz = 0")),
                    std::runtime_error);
    CHECK_THROWS_AS(ExperimentConfig::from_table(toml::Table::parse_string(
                        "[vehicle]\nwheelbase = -1.0")),
                    std::invalid_argument);
}

TEST_CASE("speed profile specs") {
    CHECK_FALSE(SpeedProfileSpec::parse("random").fixed);
    CHECK(SpeedProfileSpec::parse("fixed:40").fixed_kmh == 40.0);
    CHECK(SpeedProfileSpec::parse("fixed:52.5").fixed_kmh == 52.5);
    CHECK(SpeedProfileSpec::parse("fixed:40").describe() == "fixed:40");
    CHECK(SpeedProfileSpec::parse("random").describe() == "random");
    CHECK_THROWS_AS(SpeedProfileSpec::parse("fixed:"), std::runtime_error);
    CHECK_THROWS_AS(SpeedProfileSpec::parse("fixed:-3"), std::runtime_error);
    CHECK_THROWS_AS(SpeedProfileSpec::parse("slow"), std::runtime_error);

    SUBCASE("fixed spec makes a constant profile") {
        const SpeedProfile p = SpeedProfileSpec::parse("fixed:33").make(9);
        CHECK(p.value(0.0) == 33.0);
        CHECK(p.value(12.0) == 33.0);
    }
}

TEST_CASE("format_double round-trips exactly") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ud(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        const double v = ud(rng);
        CHECK(std::stod(format_double(v)) == v);
    }
    for (double v : {0.0, 1.0 / 3.0, kPi, 2.5 * kPi, 1e-300, -7.25,
                     3.0000000000000004}) {
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.25) == "0.25");
    CHECK(format_double(10.0) == "10");
}

TEST_CASE("trace csv round-trips every field bit for bit") {
    RunTrace trace;
    trace.dt = 1.0 / 30.0;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        TraceRow row;
        row.t = i * trace.dt;
        row.state.x = nd(rng) * 10.0;
        row.state.y = nd(rng);
        row.state.heading = kHalfPi + nd(rng) * 0.1;
        row.state.speed = std::abs(nd(rng)) + 1.0;
        row.state.wheel_angle = nd(rng);
        row.state.wheel_rate = nd(rng);
        row.torque = nd(rng);
        row.collision = i % 37 == 0;
        trace.rows.push_back(row);
    }
    trace.collided = true;

    const std::string path = "io_trace_roundtrip.csv";
    write_trace_csv(trace, path);
    const RunTrace back = read_trace_csv(path);

    REQUIRE(back.rows.size() == trace.rows.size());
    for (std::size_t i = 0; i < trace.rows.size(); ++i) {
        const TraceRow& a = trace.rows[i];
        const TraceRow& b = back.rows[i];
        CHECK(a.t == b.t);
        CHECK(a.state.x == b.state.x);
        CHECK(a.state.y == b.state.y);
        CHECK(a.state.heading == b.state.heading);
        // Speed crosses the km/h boundary twice; exact only if the pair of
        // conversions cancels, so allow one ulp-scale wobble.
        CHECK(b.state.speed ==
              doctest::Approx(a.state.speed).epsilon(1e-14));
        CHECK(a.state.wheel_angle == b.state.wheel_angle);
        CHECK(a.state.wheel_rate == b.state.wheel_rate);
        CHECK(a.torque == b.torque);
        CHECK(a.collision == b.collision);
    }
    CHECK(back.collided);
    CHECK(back.dt == doctest::Approx(trace.dt));

    SUBCASE("writing the same trace twice is byte-identical") {
        const std::string again = "io_trace_roundtrip2.csv";
        write_trace_csv(trace, again);
        CHECK(slurp(path) == slurp(again));
        std::remove(again.c_str());
    }
    std::remove(path.c_str());
}

TEST_CASE("trace csv rejects malformed input") {
    const std::string path = "io_trace_bad.csv";
    auto write_text = [&](const std::string& text) {
        std::ofstream out(path, std::ios::binary);
        out << text;
    };

    SUBCASE("wrong header") {
        write_text("a,b,c\n");
        CHECK_THROWS_WITH_AS(read_trace_csv(path),
                             doctest::Contains("header"), std::runtime_error);
    }
    SUBCASE("wrong field count names the row") {
        write_text(std::string(kTraceHeader) + "\n1,2,3\n");
        CHECK_THROWS_WITH_AS(read_trace_csv(path), doctest::Contains(":2"),
                             std::runtime_error);
    }
    SUBCASE("bad number names the row") {
        write_text(std::string(kTraceHeader) +
                   "\n0,0,0,1.57,40,0,0,0,0\n0,zap,0,1.57,40,0,0,0,0\n");
        CHECK_THROWS_WITH_AS(read_trace_csv(path), doctest::Contains(":3"),
                             std::runtime_error);
    }
    SUBCASE("collision flag must be 0/1") {
        write_text(std::string(kTraceHeader) + "\n0,0,0,1.57,40,0,0,0,2\n");
        CHECK_THROWS_AS(read_trace_csv(path), std::runtime_error);
    }
    std::remove(path.c_str());
}

TEST_CASE("dataset csv round-trips bit for bit") {
    Dataset ds;
    std::mt19937_64 rng(13);
    std::normal_distribution<double> nd(0.0, 2.0);
    for (int i = 0; i < 300; ++i) {
        Sample s;
        s.run_id = static_cast<std::uint64_t>(i / 40);
        s.t = (i % 40) / 30.0;
        for (double& v : s.features) v = nd(rng);
        s.features[0] = 1.0 + i % 3;
        s.target_wheel_angle = nd(rng);
        ds.samples.push_back(s);
    }
    const std::string path = "io_dataset_roundtrip.csv";
    write_dataset_csv(ds, path);
    const Dataset back = read_dataset_csv(path);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.samples[i].run_id == ds.samples[i].run_id);
        CHECK(back.samples[i].t == ds.samples[i].t);
        CHECK(back.samples[i].features == ds.samples[i].features);
        CHECK(back.samples[i].target_wheel_angle ==
              ds.samples[i].target_wheel_angle);
    }
    std::remove(path.c_str());
}

TEST_CASE("dataset csv rejects malformed input") {
    const std::string path = "io_dataset_bad.csv";
    std::ofstream(path, std::ios::binary)
        << kDatasetHeader << "\n0,0,1,2,3,4,5,6,7\n";
    CHECK_THROWS_WITH_AS(read_dataset_csv(path),
                         doctest::Contains("expected 10 fields"),
                         std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("line plot smoke") {
    PlotSeries a;
    a.label = "train";
    for (int i = 1; i <= 20; ++i) {
        a.x.push_back(i);
        a.y.push_back(1.0 / i);
    }
    PlotSeries b = a;
    b.label = "val";
    b.dashed = true;
    for (double& v : b.y) v *= 1.3;

    PlotOptions opt;
    opt.title = "loss";
    opt.x_label = "epoch";
    opt.y_label = "mse";
    opt.log_y = true;

    const std::string path = "io_plot.svg";
    write_line_plot(path, {a, b}, opt);
    const std::string svg = slurp(path);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("train") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    std::remove(path.c_str());

    SUBCASE("mismatched series are rejected") {
        b.y.pop_back();
        CHECK_THROWS_AS(write_line_plot("x.svg", {b}, opt),
                        std::invalid_argument);
    }
}

TEST_CASE("trajectory plot smoke") {
    Course course = build_course(CourseConfig{});
    ReferencePath ref = build_reference_path(course);
    PlotSeries car;
    car.label = "pilot";
    for (double x = 0.0; x <= course.x_finish; x += 1.0) {
        car.x.push_back(x);
        car.y.push_back(ref.y(x));
    }
    TrajectoryPlot plot;
    plot.title = "trial";
    plot.course = &course;
    plot.reference = &ref;
    plot.paths = {car};

    const std::string path = "io_traj.svg";
    write_trajectory_plot(path, plot);
    const std::string svg = slurp(path);
    CHECK(svg.find("<svg") != std::string::npos);
    // 18 cones drawn as circles.
    std::size_t count = 0;
    for (std::size_t pos = svg.find("<circle"); pos != std::string::npos;
         pos = svg.find("<circle", pos + 1))
        ++count;
    CHECK(count == course.cones().size());
    CHECK(svg.find("finish") != std::string::npos);
    std::remove(path.c_str());
}
