// Python bindings for the slalom pilot: the plant, the feature encoder,
// the trained regressor, and the batch pipeline stages.

#include "slalom/config.hpp"
#include "slalom/controller.hpp"
#include "slalom/expert.hpp"
#include "slalom/features.hpp"
#include "slalom/nn.hpp"
#include "slalom/pipeline.hpp"
#include "slalom/sim.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <array>
#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace slalom;

namespace {

py::dict metrics_dict(const EvalMetrics& m) {
    py::dict d;
    d["mse"] = m.mse;
    d["r2"] = m.r2 ? py::object(py::float_(*m.r2)) : py::object(py::none());
    d["n"] = m.n;
    return d;
}

py::dict trial_dict(const TrialResult& t) {
    py::dict d;
    d["index"] = t.index;
    d["seed"] = t.seed;
    d["speed_profile"] = t.speed_profile;
    d["completed"] = t.completed;
    d["collided"] = t.collided;
    d["diverged"] = t.diverged;
    d["duration_s"] = t.duration_s;
    d["peak_wheel"] = t.peak_wheel;
    d["mean_abs_wheel"] = t.mean_abs_wheel;
    if (t.compared) {
        d["expert_peak_wheel"] = t.expert_peak_wheel;
        d["windows"] = t.windows;
        d["windows_not_exceeding"] = t.windows_not_exceeding;
    }
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Slalom steering pilot: kinematic plant, feature encoder, "
              "CNN regressor and experiment pipeline";
    m.attr("__version__") = "0.1.0";
    m.attr("TURN_LEFT") = kTurnLeft;
    m.attr("TURN_RIGHT") = kTurnRight;
    m.attr("NO_TURN") = kNoTurn;
    m.attr("NUM_FEATURES") = kNumFeatures;

    py::enum_<Lane>(m, "Lane")
        .value("LEFT", Lane::Left)
        .value("RIGHT", Lane::Right);

    py::class_<VehicleState>(m, "VehicleState")
        .def(py::init<>())
        .def_readwrite("x", &VehicleState::x)
        .def_readwrite("y", &VehicleState::y)
        .def_readwrite("heading", &VehicleState::heading)
        .def_readwrite("speed", &VehicleState::speed)
        .def_readwrite("wheel_angle", &VehicleState::wheel_angle)
        .def_readwrite("wheel_rate", &VehicleState::wheel_rate)
        .def("__repr__", [](const VehicleState& s) {
            std::ostringstream os;
            os << "VehicleState(x=" << s.x << ", y=" << s.y
               << ", heading=" << s.heading << ", speed=" << s.speed
               << ", wheel_angle=" << s.wheel_angle
               << ", wheel_rate=" << s.wheel_rate << ")";
            return os.str();
        });

    py::class_<VehicleParams>(m, "VehicleParams")
        .def(py::init<>())
        .def_readwrite("wheelbase", &VehicleParams::wheelbase)
        .def_readwrite("steering_ratio", &VehicleParams::steering_ratio)
        .def_readwrite("column_inertia", &VehicleParams::column_inertia)
        .def_readwrite("column_damping", &VehicleParams::column_damping)
        .def_readwrite("body_length", &VehicleParams::body_length)
        .def_readwrite("body_width", &VehicleParams::body_width)
        .def_readwrite("wheel_angle_max", &VehicleParams::wheel_angle_max)
        .def_readwrite("speed_tau", &VehicleParams::speed_tau);

    py::class_<Course>(m, "Course")
        .def_readonly("lane_width", &Course::lane_width)
        .def_readonly("x_finish", &Course::x_finish)
        .def("lane_center", &Course::lane_center, py::arg("lane"))
        .def("cones", [](const Course& c) {
            py::list out;
            for (const Cone& cone : c.cones())
                out.append(py::make_tuple(cone.x, cone.y, cone.radius,
                                          cone.set_index));
            return out;
        });

    m.def(
        "build_course",
        [](int n_sets, double set_length, double gap, double first_set_x,
           double lane_width, double cone_spacing, Lane first_lane) {
            CourseConfig cfg;
            cfg.n_sets = n_sets;
            cfg.set_length = set_length;
            cfg.gap = gap;
            cfg.first_set_x = first_set_x;
            cfg.lane_width = lane_width;
            cfg.cone_spacing = cone_spacing;
            cfg.first_lane = first_lane;
            return build_course(cfg);
        },
        py::arg("n_sets") = 3, py::arg("set_length") = 20.0,
        py::arg("gap") = 30.0, py::arg("first_set_x") = 30.0,
        py::arg("lane_width") = 3.5, py::arg("cone_spacing") = 4.0,
        py::arg("first_lane") = Lane::Right,
        "Builds an alternating-lane cone course.");

    m.def(
        "step",
        [](const VehicleState& state, double torque, double speed_command_kmh,
           const VehicleParams& params, double dt, int substeps) {
            StepInput input;
            input.torque = torque;
            input.speed_command = speed_command_kmh;
            return step(state, input, params, dt, substeps);
        },
        py::arg("state"), py::arg("torque"), py::arg("speed_command_kmh"),
        py::arg("params") = VehicleParams{}, py::arg("dt") = 1.0 / 30.0,
        py::arg("substeps") = 4,
        "Advances the plant one control period with RK4 substeps.");

    m.def(
        "check_collision",
        [](const VehicleState& state, const Course& course,
           const VehicleParams& params) {
            return check_collision(state, params, course).collision;
        },
        py::arg("state"), py::arg("course"),
        py::arg("params") = VehicleParams{},
        "True when the body rectangle overlaps any cone.");

    m.def(
        "extract_features",
        [](const VehicleState& state, const std::optional<VehicleState>& prev,
           const Course& course, double dt) {
            return extract_frame(state, prev, course, dt).as_array();
        },
        py::arg("state"), py::arg("prev"), py::arg("course"),
        py::arg("dt") = 1.0 / 30.0,
        "The seven raw features [turn_state, lateral, proximity, speed_kmh, "
        "heading, heading_rate, wheel_rate]; pass prev=None on a run's "
        "first frame.");

    py::class_<PdGains>(m, "PdGains")
        .def(py::init<>())
        .def_readwrite("p", &PdGains::p)
        .def_readwrite("d", &PdGains::d)
        .def_readwrite("torque_max", &PdGains::torque_max);

    m.def("pd_torque", &pd_torque, py::arg("state"), py::arg("desired_angle"),
          py::arg("gains") = PdGains{},
          "Speed-scheduled PD torque toward the desired wheel angle.");

    py::class_<CnnModel>(m, "Model")
        .def_static("load", &load_model, py::arg("path"))
        .def("save",
             [](const CnnModel& model, const std::string& path) {
                 save_model(model, path);
             },
             py::arg("path"))
        .def("predict",
             [](const CnnModel& model,
                const std::array<double, kNumFeatures>& features) {
                 return predict_wheel_angle(model, features);
             },
             py::arg("features"),
             "Steering-wheel angle in radians for seven raw feature values.")
        .def_property_readonly("parameter_count", &CnnModel::parameter_count)
        .def_readonly("target_scale", &CnnModel::target_scale)
        .def_readonly("epochs_trained", &CnnModel::epochs_trained)
        .def_readonly("seed", &CnnModel::seed);

    py::class_<ExperimentConfig>(m, "Config")
        .def_static("default",
                    [] {
                        ExperimentConfig c;
                        c.validate();
                        return c;
                    })
        .def_static("from_file", &ExperimentConfig::from_file, py::arg("path"));

    m.def(
        "collect",
        [](const ExperimentConfig& config, std::uint64_t seed,
           const std::filesystem::path& out_dir) {
            const CollectSummary s = run_collect(config, seed, out_dir);
            py::dict d;
            d["kept"] = s.kept;
            d["rejected"] = s.rejected;
            d["train_samples"] = s.train_samples;
            d["test_samples"] = s.test_samples;
            return d;
        },
        py::arg("config"), py::arg("seed"), py::arg("out_dir"),
        "Simulates demonstrations and writes traces plus the split dataset.");

    m.def(
        "train",
        [](const ExperimentConfig& config, std::uint64_t seed,
           const std::filesystem::path& out_dir) {
            const TrainSummary s = run_train(config, seed, out_dir);
            py::dict d;
            d["epochs"] = s.report.epochs;
            d["final_train"] = metrics_dict(s.report.final_train);
            d["final_val"] = metrics_dict(s.report.final_val);
            d["model_path"] = s.model_path.string();
            return d;
        },
        py::arg("config"), py::arg("seed"), py::arg("out_dir"),
        "Trains the regressor on the collected dataset; writes model.json.");

    m.def(
        "eval_offline",
        [](const ExperimentConfig& config,
           const std::filesystem::path& out_dir) {
            const SplitMetrics s = run_eval_offline(config, out_dir);
            py::dict d;
            d["train"] = metrics_dict(s.train);
            d["test"] = metrics_dict(s.test);
            return d;
        },
        py::arg("config"), py::arg("out_dir"),
        "Scores model.json on both dataset splits.");

    m.def(
        "run_closedloop",
        [](const ExperimentConfig& config, std::uint64_t seed,
           const std::filesystem::path& out_dir, bool compare_expert) {
            const ClosedLoopSummary s =
                run_closedloop_trials(config, seed, out_dir, compare_expert);
            py::dict d;
            d["completed"] = s.completed;
            d["collisions"] = s.collisions;
            py::list trials;
            for (const TrialResult& t : s.trials) trials.append(trial_dict(t));
            d["trials"] = trials;
            return d;
        },
        py::arg("config"), py::arg("seed"), py::arg("out_dir"),
        py::arg("compare_expert") = false,
        "Drives the trained model through closed-loop trials.");

    m.def(
        "plot",
        [](const ExperimentConfig& config,
           const std::filesystem::path& out_dir) {
            py::list out;
            for (const auto& p : run_plots(config, out_dir))
                out.append(p.string());
            return out;
        },
        py::arg("config"), py::arg("out_dir"),
        "Renders SVG figures for the artifacts present in out_dir.");
}
