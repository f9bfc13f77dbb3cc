#include "slalom/pipeline.hpp"

#include "slalom/csv.hpp"
#include "slalom/svg.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace slalom {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string run_trace_name(std::uint64_t run_id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "run_%05llu.csv",
                  static_cast<unsigned long long>(run_id));
    return buf;
}

std::string trial_trace_name(int index, bool expert) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), expert ? "trial_%02d_expert.csv"
                                           : "trial_%02d.csv", index);
    return buf;
}

void write_json(const json& doc, const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << doc.dump(2) << "\n";
}

json load_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return json::parse(in);
}

json metrics_json(const EvalMetrics& m) {
    json j;
    j["mse"] = m.mse;
    if (m.r2) j["r2"] = *m.r2;
    else j["r2"] = nullptr;
    j["n"] = m.n;
    return j;
}

/// Frames for one demonstration, taking every stride-th row; rates still
/// difference adjacent rows at the trace rate. The phase is staggered by
/// run so the corpus as a whole still covers every sampling offset, which
/// matters where features move quickly between strided frames.
void append_run_samples(const DemoRun& demo, const Course& course, double dt,
                        int stride, Dataset& out) {
    const auto& rows = demo.trace.rows;
    const std::size_t phase = demo.trace.run_id % stride;
    for (std::size_t i = phase; i < rows.size(); i += stride) {
        std::optional<VehicleState> prev;
        if (i > 0) prev = rows[i - 1].state;
        const FeatureFrame frame =
            extract_frame(rows[i].state, prev, course, dt);
        Sample s;
        s.run_id = demo.trace.run_id;
        s.t = rows[i].t;
        s.features = frame.as_array();
        s.target_wheel_angle = demo.commands[i];
        out.samples.push_back(s);
    }
}

struct WheelStats {
    double peak = 0.0;
    double mean_abs = 0.0;
};

WheelStats wheel_stats(const RunTrace& trace) {
    WheelStats st;
    if (trace.rows.empty()) return st;
    for (const TraceRow& row : trace.rows) {
        st.peak = std::max(st.peak, std::abs(row.state.wheel_angle));
        st.mean_abs += std::abs(row.state.wheel_angle);
    }
    st.mean_abs /= static_cast<double>(trace.rows.size());
    return st;
}

/// Peak |wheel| while the car crosses [x0, x1]; empty when it never did.
std::optional<double> window_peak(const RunTrace& trace, double x0,
                                  double x1) {
    std::optional<double> peak;
    for (const TraceRow& row : trace.rows)
        if (row.state.x >= x0 && row.state.x <= x1) {
            const double a = std::abs(row.state.wheel_angle);
            peak = peak ? std::max(*peak, a) : a;
        }
    return peak;
}

} // namespace

CollectSummary run_collect(const ExperimentConfig& config, std::uint64_t seed,
                           const fs::path& out_dir) {
    const Course course = build_course(config.course);
    const ReferencePath path = build_reference_path(course, config.path);
    const ClosedLoopConfig clc = config.closed_loop();
    const CollectSettings& cs = config.collect;

    fs::create_directories(out_dir / "traces");
    fs::create_directories(out_dir / "dataset");

    struct KeptRun {
        std::uint64_t id;
        Dataset samples;
    };
    std::vector<KeptRun> kept;
    kept.reserve(cs.n_runs);
    int rejected = 0;

    for (std::uint64_t attempt = 0;
         kept.size() < static_cast<std::size_t>(cs.n_runs); ++attempt) {
        const std::uint64_t run_seed = mix_seed(seed, attempt);
        ExpertParams driver = expert_preset(static_cast<int>(attempt % 4));
        driver.noise_seed = mix_seed(run_seed, 1);
        const SpeedProfile speed = cs.speed.make(mix_seed(run_seed, 2));

        const LaunchJitter jitter = LaunchJitter::draw(mix_seed(run_seed, 3));
        const DemoRun demo = simulate_expert_run(course, path, driver, speed,
                                                 cs.start_lane, clc, attempt,
                                                 jitter);
        const int attempts = static_cast<int>(attempt) + 1;
        if (!demo.trace.completed || demo.trace.collided) {
            ++rejected;
            if (attempts >= 50 &&
                rejected > cs.max_reject_fraction * attempts)
                throw std::runtime_error(
                    "collect: expert failed " + std::to_string(rejected) +
                    " of " + std::to_string(attempts) +
                    " demonstration runs; check course and gains");
            continue;
        }

        write_trace_csv(demo.trace, out_dir / "traces" / run_trace_name(attempt));
        KeptRun run;
        run.id = attempt;
        append_run_samples(demo, course, clc.dt, cs.frame_stride, run.samples);
        kept.push_back(std::move(run));
    }

    // Seeded run-level split: no run contributes to both files.
    std::vector<std::size_t> order(kept.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 split_rng(mix_seed(seed, 0x5EEDULL));
    std::shuffle(order.begin(), order.end(), split_rng);

    std::vector<std::size_t> train_idx(order.begin(),
                                       order.begin() + cs.n_train);
    std::vector<std::size_t> test_idx(order.begin() + cs.n_train, order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    CollectSummary summary;
    summary.kept = static_cast<int>(kept.size());
    summary.rejected = rejected;

    Dataset train_set, test_set;
    for (std::size_t i : train_idx) {
        summary.train_runs.push_back(kept[i].id);
        train_set.samples.insert(train_set.samples.end(),
                                 kept[i].samples.samples.begin(),
                                 kept[i].samples.samples.end());
    }
    for (std::size_t i : test_idx) {
        summary.test_runs.push_back(kept[i].id);
        test_set.samples.insert(test_set.samples.end(),
                                kept[i].samples.samples.begin(),
                                kept[i].samples.samples.end());
    }
    summary.train_samples = train_set.size();
    summary.test_samples = test_set.size();

    write_dataset_csv(train_set, out_dir / "dataset" / "train.csv");
    write_dataset_csv(test_set, out_dir / "dataset" / "test.csv");

    json manifest;
    manifest["seed"] = seed;
    manifest["runs"] = summary.kept;
    manifest["rejected"] = rejected;
    manifest["frame_stride"] = cs.frame_stride;
    manifest["speed_profile"] = cs.speed.describe();
    manifest["start_lane"] = lane_name(cs.start_lane);
    manifest["train_runs"] = summary.train_runs;
    manifest["test_runs"] = summary.test_runs;
    manifest["train_samples"] = summary.train_samples;
    manifest["test_samples"] = summary.test_samples;
    write_json(manifest, out_dir / "dataset" / "manifest.json");

    return summary;
}

TrainSummary run_train(const ExperimentConfig& config, std::uint64_t seed,
                       const fs::path& out_dir) {
    const Dataset train_set =
        read_dataset_csv((out_dir / "dataset" / "train.csv").string());
    const Dataset test_set =
        read_dataset_csv((out_dir / "dataset" / "test.csv").string());

    TrainConfig tc = config.train;
    tc.seed = seed;
    tc.target_scale = config.vehicle.wheel_angle_max;

    auto [model, report] = train(train_set, test_set, tc);

    TrainSummary summary;
    summary.report = report;
    summary.model_path = out_dir / "model.json";
    save_model(model, summary.model_path.string());

    json fit;
    fit["seed"] = seed;
    fit["epochs"] = report.epochs;
    fit["train_mse_per_epoch"] = report.train_mse_per_epoch;
    fit["val_mse_per_epoch"] = report.val_mse_per_epoch;
    fit["lr_per_epoch"] = report.lr_per_epoch;
    fit["final"]["train"] = metrics_json(report.final_train);
    fit["final"]["test"] = metrics_json(report.final_val);
    write_json(fit, out_dir / "fit_report.json");

    return summary;
}

SplitMetrics run_eval_offline(const ExperimentConfig& /*config*/,
                              const fs::path& out_dir) {
    const CnnModel model = load_model((out_dir / "model.json").string());
    const Dataset train_set =
        read_dataset_csv((out_dir / "dataset" / "train.csv").string());
    const Dataset test_set =
        read_dataset_csv((out_dir / "dataset" / "test.csv").string());

    SplitMetrics metrics;
    metrics.train = evaluate(model, train_set);
    metrics.test = evaluate(model, test_set);

    json report;
    report["train"] = metrics_json(metrics.train);
    report["test"] = metrics_json(metrics.test);
    write_json(report, out_dir / "eval_report.json");
    return metrics;
}

ClosedLoopSummary run_closedloop_trials(const ExperimentConfig& config,
                                        std::uint64_t seed,
                                        const fs::path& out_dir,
                                        bool compare_expert) {
    const CnnModel model = load_model((out_dir / "model.json").string());
    const Course course = build_course(config.course);
    const ReferencePath path = build_reference_path(course, config.path);
    const ClosedLoopConfig clc = config.closed_loop();

    fs::create_directories(out_dir / "trials");

    ClosedLoopSummary summary;
    for (int i = 0; i < config.eval.trials; ++i) {
        const std::uint64_t trial_seed = mix_seed(seed, 1000 + i);
        const SpeedProfile speed = config.eval.speed.make(trial_seed);

        CnnPilot pilot(model, course, clc.dt);
        VehicleState init;
        init.y = course.lane_center(config.collect.start_lane);
        init.speed = kmh_to_mps(speed.value(0.0));
        auto speed_fn = [&](double t) { return speed.value(t); };

        ClosedLoopResult res = run_closed_loop(
            course, init, std::ref(pilot), speed_fn, clc);
        res.trace.run_id = static_cast<std::uint64_t>(i);
        write_trace_csv(res.trace, out_dir / "trials" / trial_trace_name(i, false));

        TrialResult trial;
        trial.index = i;
        trial.seed = trial_seed;
        trial.speed_profile = config.eval.speed.describe();
        trial.completed = res.trace.completed;
        trial.collided = res.trace.collided;
        trial.diverged = res.diverged;
        trial.duration_s =
            res.trace.rows.empty() ? 0.0 : res.trace.rows.back().t;
        const WheelStats ws = wheel_stats(res.trace);
        trial.peak_wheel = ws.peak;
        trial.mean_abs_wheel = ws.mean_abs;

        if (compare_expert) {
            // Noise-free reference driver on the identical speed profile.
            ExpertParams ref = expert_preset(0);
            ref.noise_sigma = 0.0;
            const DemoRun expert_run =
                simulate_expert_run(course, path, ref, speed,
                                    config.collect.start_lane, clc,
                                    static_cast<std::uint64_t>(i));
            write_trace_csv(expert_run.trace,
                            out_dir / "trials" / trial_trace_name(i, true));
            trial.compared = true;
            trial.expert_peak_wheel = wheel_stats(expert_run.trace).peak;
            for (const auto& blend : path.blends()) {
                const auto pilot_peak =
                    window_peak(res.trace, blend.x0, blend.x1);
                const auto expert_peak =
                    window_peak(expert_run.trace, blend.x0, blend.x1);
                if (!pilot_peak || !expert_peak) continue;
                trial.windows += 1;
                if (*pilot_peak <= *expert_peak)
                    trial.windows_not_exceeding += 1;
            }
            summary.windows += trial.windows;
            summary.windows_not_exceeding += trial.windows_not_exceeding;
        }

        summary.completed += trial.completed;
        summary.collisions += trial.collided;
        summary.trials.push_back(trial);
    }

    json report;
    report["trials"] = json::array();
    for (const TrialResult& t : summary.trials) {
        json j;
        j["index"] = t.index;
        j["seed"] = t.seed;
        j["speed_profile"] = t.speed_profile;
        j["completed"] = t.completed;
        j["collided"] = t.collided;
        j["diverged"] = t.diverged;
        j["duration_s"] = t.duration_s;
        j["peak_wheel_rad"] = t.peak_wheel;
        j["mean_abs_wheel_rad"] = t.mean_abs_wheel;
        if (t.compared) {
            j["expert_peak_wheel_rad"] = t.expert_peak_wheel;
            j["lane_change_windows"] = t.windows;
            j["windows_not_exceeding_expert"] = t.windows_not_exceeding;
        }
        report["trials"].push_back(j);
    }
    report["n_trials"] = config.eval.trials;
    report["completed"] = summary.completed;
    report["collisions"] = summary.collisions;
    if (compare_expert) {
        report["lane_change_windows"] = summary.windows;
        report["windows_not_exceeding_expert"] = summary.windows_not_exceeding;
    }
    write_json(report, out_dir / "closedloop_report.json");

    return summary;
}

std::vector<fs::path> run_plots(const ExperimentConfig& config,
                                const fs::path& out_dir) {
    const Course course = build_course(config.course);
    const ReferencePath path = build_reference_path(course, config.path);
    fs::create_directories(out_dir / "plots");

    std::vector<fs::path> written;

    const fs::path fit_path = out_dir / "fit_report.json";
    if (fs::exists(fit_path)) {
        const json fit = load_json(fit_path);
        PlotSeries train_s, val_s;
        train_s.label = "train";
        val_s.label = "test";
        val_s.dashed = true;
        const auto& tm = fit.at("train_mse_per_epoch");
        const auto& vm = fit.at("val_mse_per_epoch");
        for (std::size_t e = 0; e < tm.size(); ++e) {
            train_s.x.push_back(static_cast<double>(e + 1));
            train_s.y.push_back(tm[e].get<double>());
        }
        for (std::size_t e = 0; e < vm.size(); ++e) {
            val_s.x.push_back(static_cast<double>(e + 1));
            val_s.y.push_back(vm[e].get<double>());
        }
        PlotOptions opt;
        opt.title = "Training loss";
        opt.x_label = "epoch";
        opt.y_label = "MSE (normalized)";
        opt.log_y = true;
        const fs::path p = out_dir / "plots" / "loss.svg";
        write_line_plot(p.string(), {train_s, val_s}, opt);
        written.push_back(p);
    }

    // Prefer a closed-loop trial; fall back to the first demonstration.
    fs::path main_trace = out_dir / "trials" / "trial_00.csv";
    fs::path ref_trace = out_dir / "trials" / "trial_00_expert.csv";
    std::string main_label = "pilot";
    if (!fs::exists(main_trace)) {
        main_trace = out_dir / "traces" / "run_00000.csv";
        ref_trace.clear();
        main_label = "expert run 0";
    }

    if (fs::exists(main_trace)) {
        const RunTrace trace = read_trace_csv(main_trace.string());
        std::optional<RunTrace> ref;
        if (!ref_trace.empty() && fs::exists(ref_trace))
            ref = read_trace_csv(ref_trace.string());

        auto xy = [](const RunTrace& tr, auto get) {
            PlotSeries s;
            s.x.reserve(tr.rows.size());
            s.y.reserve(tr.rows.size());
            for (const TraceRow& row : tr.rows) {
                s.x.push_back(row.t);
                s.y.push_back(get(row));
            }
            return s;
        };

        {
            TrajectoryPlot plot;
            plot.title = "Course and driven path";
            plot.course = &course;
            plot.reference = &path;
            PlotSeries car;
            car.label = main_label;
            for (const TraceRow& row : trace.rows) {
                car.x.push_back(row.state.x);
                car.y.push_back(row.state.y);
            }
            plot.paths.push_back(car);
            if (ref) {
                PlotSeries ex;
                ex.label = "expert";
                ex.dashed = true;
                for (const TraceRow& row : ref->rows) {
                    ex.x.push_back(row.state.x);
                    ex.y.push_back(row.state.y);
                }
                plot.paths.push_back(ex);
            }
            const fs::path p = out_dir / "plots" / "trajectory.svg";
            write_trajectory_plot(p.string(), plot);
            written.push_back(p);
        }

        {
            PlotSeries wheel = xy(trace, [](const TraceRow& r) {
                return r.state.wheel_angle;
            });
            wheel.label = main_label;
            std::vector<PlotSeries> series{wheel};
            if (ref) {
                PlotSeries ew = xy(*ref, [](const TraceRow& r) {
                    return r.state.wheel_angle;
                });
                ew.label = "expert";
                ew.dashed = true;
                series.push_back(ew);
            }
            PlotOptions opt;
            opt.title = "Steering-wheel angle";
            opt.x_label = "t [s]";
            opt.y_label = "angle [rad]";
            const fs::path p = out_dir / "plots" / "steering.svg";
            write_line_plot(p.string(), series, opt);
            written.push_back(p);
        }

        {
            PlotSeries speed = xy(trace, [](const TraceRow& r) {
                return mps_to_kmh(r.state.speed);
            });
            speed.label = main_label;
            PlotOptions opt;
            opt.title = "Speed";
            opt.x_label = "t [s]";
            opt.y_label = "speed [km/h]";
            const fs::path p = out_dir / "plots" / "speed.svg";
            write_line_plot(p.string(), {speed}, opt);
            written.push_back(p);
        }
    }

    if (written.empty())
        throw std::runtime_error("plot: no artifacts found under " +
                                 out_dir.string());
    return written;
}

} // namespace slalom
