#include "slalom/features.hpp"

#include <cmath>

namespace slalom {

namespace {

// Index of the cone set the reference is taken from, or -1 past the last set.
struct Location {
    int set_index = -1;
    ReferenceConeInfo::Mode mode = ReferenceConeInfo::Mode::Approaching;
};

Location locate(const VehicleState& state, const Course& course) {
    for (std::size_t i = 0; i < course.cone_sets.size(); ++i) {
        const ConeSet& set = course.cone_sets[i];
        if (state.x < set.x_start)
            return {static_cast<int>(i), ReferenceConeInfo::Mode::Approaching};
        if (state.x <= set.x_end)
            return {static_cast<int>(i), ReferenceConeInfo::Mode::Abreast};
    }
    return {-1, ReferenceConeInfo::Mode::Approaching};
}

} // namespace

ReferenceConeInfo reference_cone(const VehicleState& state, const Course& course) {
    const Location loc = locate(state, course);
    ReferenceConeInfo ref;
    if (loc.set_index < 0) {
        // Past the last set: the finish line acts as a virtual set start on
        // the car's current lane.
        ref.x_ref = std::max(course.x_finish, state.x);
        ref.y_ref = state.y >= 0.0 ? course.lane_center(Lane::Left)
                                   : course.lane_center(Lane::Right);
        ref.mode = ReferenceConeInfo::Mode::Approaching;
        return ref;
    }
    const ConeSet& set = course.cone_sets[loc.set_index];
    ref.mode = loc.mode;
    ref.x_ref = loc.mode == ReferenceConeInfo::Mode::Approaching ? set.x_start
                                                                 : set.x_end;
    ref.y_ref = course.lane_center(set.lane);
    return ref;
}

int turn_state(const VehicleState& state, const Course& course) {
    const Location loc = locate(state, course);
    if (loc.set_index < 0) return kNoTurn;
    if (loc.mode == ReferenceConeInfo::Mode::Abreast) return kNoTurn;
    const ConeSet& set = course.cone_sets[loc.set_index];
    return set.lane == Lane::Right ? kTurnLeft : kTurnRight;
}

double lateral_distance(const VehicleState& state, const ReferenceConeInfo& ref) {
    return ref.y_ref - state.y;
}

double longitudinal_proximity(const VehicleState& state,
                              const ReferenceConeInfo& ref) {
    const double gap = ref.x_ref - state.x;
    if (gap < 0.0)
        throw std::logic_error(
            "longitudinal_proximity: reference behind the car (gap " +
            std::to_string(gap) + " m)");
    return 1.0 / (1.0 + gap);
}

FeatureFrame extract_frame(const VehicleState& state,
                           const std::optional<VehicleState>& prev,
                           const Course& course, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("extract_frame: dt must be positive");
    const ReferenceConeInfo ref = reference_cone(state, course);
    FeatureFrame f;
    f.turn_state = static_cast<double>(turn_state(state, course));
    f.lateral = lateral_distance(state, ref);
    f.long_proximity = longitudinal_proximity(state, ref);
    f.speed_kmh = mps_to_kmh(state.speed);
    f.heading = state.heading;
    if (prev) {
        f.heading_rate = wrap_angle(state.heading - prev->heading) / dt;
        f.wheel_rate = state.wheel_rate;
    } else {
        f.heading_rate = 0.0;
        f.wheel_rate = 0.0;
    }
    return f;
}

Normalizer::Normalizer(const std::array<double, kNumFeatures>& mean,
                       const std::array<double, kNumFeatures>& stddev)
    : mean_(mean), stddev_(stddev), fitted_(true) {
    for (double& s : stddev_)
        if (s < kStdFloor) s = kStdFloor;
}

Normalizer Normalizer::fit(
    const std::vector<std::array<double, kNumFeatures>>& rows) {
    if (rows.empty())
        throw std::invalid_argument("Normalizer::fit: no samples");
    std::array<double, kNumFeatures> mean{};
    std::array<double, kNumFeatures> stddev{};
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows)
        for (int i = 0; i < kNumFeatures; ++i) mean[i] += r[i];
    for (int i = 0; i < kNumFeatures; ++i) mean[i] /= n;
    for (const auto& r : rows)
        for (int i = 0; i < kNumFeatures; ++i) {
            const double d = r[i] - mean[i];
            stddev[i] += d * d;
        }
    for (int i = 0; i < kNumFeatures; ++i) stddev[i] = std::sqrt(stddev[i] / n);
    return Normalizer(mean, stddev);
}

std::array<double, kNumFeatures>
Normalizer::normalize(const std::array<double, kNumFeatures>& raw) const {
    if (!fitted_) throw std::logic_error("Normalizer: not fitted");
    std::array<double, kNumFeatures> out;
    for (int i = 0; i < kNumFeatures; ++i)
        out[i] = (raw[i] - mean_[i]) / stddev_[i];
    return out;
}

std::array<double, kNumFeatures>
Normalizer::denormalize(const std::array<double, kNumFeatures>& normed) const {
    if (!fitted_) throw std::logic_error("Normalizer: not fitted");
    std::array<double, kNumFeatures> out;
    for (int i = 0; i < kNumFeatures; ++i)
        out[i] = normed[i] * stddev_[i] + mean_[i];
    return out;
}

PermutationTable default_permutation_table() {
    PermutationTable table;
    for (int r = 0; r < kMatrixRows; ++r)
        for (int c = 0; c < kNumFeatures; ++c)
            table[r][c] = (c + r) % kNumFeatures;
    return table;
}

FeatureMatrix build_matrix(const FeatureFrame& frame, const Normalizer& norm,
                           const PermutationTable& table) {
    const auto normed = norm.normalize(frame.as_array());
    FeatureMatrix m;
    m.permutation_table = table;
    for (int r = 0; r < kMatrixRows; ++r)
        for (int c = 0; c < kNumFeatures; ++c) {
            const int idx = table[r][c];
            if (idx < 0 || idx >= kNumFeatures)
                throw std::invalid_argument("build_matrix: bad permutation index");
            m.values[r * kNumFeatures + c] = normed[idx];
        }
    return m;
}

} // namespace slalom
