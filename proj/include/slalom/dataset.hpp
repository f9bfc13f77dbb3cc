#pragma once

#include "slalom/features.hpp"

#include <cstdint>
#include <vector>

namespace slalom {

/// One demonstration sample: raw features and the expert's steering-wheel
/// target at that instant.
struct Sample {
    std::uint64_t run_id = 0;
    double t = 0.0;
    std::array<double, kNumFeatures> features{};
    double target_wheel_angle = 0.0; // rad
};

struct Dataset {
    std::vector<Sample> samples;

    bool empty() const { return samples.empty(); }
    std::size_t size() const { return samples.size(); }

    std::vector<std::array<double, kNumFeatures>> feature_rows() const {
        std::vector<std::array<double, kNumFeatures>> rows;
        rows.reserve(samples.size());
        for (const Sample& s : samples) rows.push_back(s.features);
        return rows;
    }
};

} // namespace slalom
