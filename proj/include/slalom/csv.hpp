#pragma once

#include "slalom/dataset.hpp"
#include "slalom/sim.hpp"

#include <string>

namespace slalom {

/// Shortest decimal form that parses back to the same double, so files are
/// byte-stable across runs and lossless to read back.
std::string format_double(double value);

inline constexpr const char* kTraceHeader =
    "t,x,y,heading,speed_kmh,wheel_angle,wheel_rate,torque,collision_flag";

inline constexpr const char* kDatasetHeader =
    "run_id,t,f1,f2,f3,f4,f5,f6,f7,target_wheel_angle_rad";

/// One telemetry row per control step; speed is written in km/h, angles in
/// radians, collision_flag as 0/1.
void write_trace_csv(const RunTrace& trace, const std::string& path);
RunTrace read_trace_csv(const std::string& path);

/// Raw (unnormalized) feature values; normalization belongs to the model.
void write_dataset_csv(const Dataset& dataset, const std::string& path);
Dataset read_dataset_csv(const std::string& path);

} // namespace slalom
