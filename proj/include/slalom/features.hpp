#pragma once

#include "slalom/sim.hpp"

#include <array>
#include <optional>

namespace slalom {

inline constexpr int kNumFeatures = 7;
inline constexpr int kMatrixRows = 5;

/// Codes for the lateral-motion state feature (f1).
inline constexpr int kTurnLeft = 1;  // approaching a right-lane cone set
inline constexpr int kTurnRight = 2; // approaching a left-lane cone set
inline constexpr int kNoTurn = 3;    // abreast of a set, or past the last one

/// The seven per-timestep features, raw (unnormalized) units.
struct FeatureFrame {
    double turn_state = kNoTurn;   // f1 in {1,2,3}
    double lateral = 0.0;          // f2, m, signed
    double long_proximity = 1.0;   // f3, 1/(1+gap), in (0,1]
    double speed_kmh = 0.0;        // f4
    double heading = kHalfPi;      // f5, rad from y-axis
    double heading_rate = 0.0;     // f6, rad/s
    double wheel_rate = 0.0;       // f7, rad/s

    std::array<double, kNumFeatures> as_array() const {
        return {turn_state, lateral,      long_proximity, speed_kmh,
                heading,    heading_rate, wheel_rate};
    }
};

/// The cone reference the distance features are measured against: the start
/// of the next set while approaching it, the end of the current set while
/// abreast of it, and the finish line (current lane) past the last set.
struct ReferenceConeInfo {
    enum class Mode { Approaching, Abreast };
    double x_ref = 0.0;
    double y_ref = 0.0;
    Mode mode = Mode::Approaching;
};

ReferenceConeInfo reference_cone(const VehicleState& state, const Course& course);

/// f1: 1 = turn left (vacant space left), 2 = turn right, 3 = no turn.
int turn_state(const VehicleState& state, const Course& course);

/// f2 = y_ref - y_car, signed.
double lateral_distance(const VehicleState& state, const ReferenceConeInfo& ref);

/// f3 = 1 / (1 + (x_ref - x_car)), gap in meters. Throws if the gap is
/// negative (reference_cone guarantees it never is).
double longitudinal_proximity(const VehicleState& state,
                              const ReferenceConeInfo& ref);

/// Extracts all seven features. prev is the state one control step back;
/// pass nullopt on the first frame of a run (zeroes f6 and f7).
FeatureFrame extract_frame(const VehicleState& state,
                           const std::optional<VehicleState>& prev,
                           const Course& course, double dt);

/// Per-feature z-score statistics fitted on training data.
class Normalizer {
public:
    static constexpr double kStdFloor = 1e-8;

    Normalizer() = default;
    Normalizer(const std::array<double, kNumFeatures>& mean,
               const std::array<double, kNumFeatures>& stddev);

    static Normalizer fit(const std::vector<std::array<double, kNumFeatures>>& rows);

    bool fitted() const { return fitted_; }
    const std::array<double, kNumFeatures>& mean() const { return mean_; }
    const std::array<double, kNumFeatures>& stddev() const { return stddev_; }

    std::array<double, kNumFeatures>
    normalize(const std::array<double, kNumFeatures>& raw) const;
    std::array<double, kNumFeatures>
    denormalize(const std::array<double, kNumFeatures>& normed) const;

private:
    std::array<double, kNumFeatures> mean_{};
    std::array<double, kNumFeatures> stddev_{};
    bool fitted_ = false;
};

using PermutationTable =
    std::array<std::array<int, kNumFeatures>, kMatrixRows>;

/// Row r is the cyclic left-rotation of 0..6 by r; row 0 is the identity.
PermutationTable default_permutation_table();

/// The CNN input: 5 rows, each a fixed permutation of the 7 normalized
/// feature values.
struct FeatureMatrix {
    std::array<double, kMatrixRows * kNumFeatures> values{};
    PermutationTable permutation_table{};

    double at(int row, int col) const {
        return values[row * kNumFeatures + col];
    }
};

FeatureMatrix build_matrix(const FeatureFrame& frame, const Normalizer& norm,
                           const PermutationTable& table);

inline FeatureMatrix build_matrix(const FeatureFrame& frame,
                                  const Normalizer& norm) {
    return build_matrix(frame, norm, default_permutation_table());
}

} // namespace slalom
