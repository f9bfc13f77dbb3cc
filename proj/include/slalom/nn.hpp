#pragma once

#include "slalom/dataset.hpp"
#include "slalom/features.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace slalom {

inline constexpr int kModelFormatVersion = 1;

/// Dense HWC tensor of 64-bit reals.
struct Tensor {
    int h = 0, w = 0, c = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int h_, int w_, int c_)
        : h(h_), w(w_), c(c_),
          v(static_cast<std::size_t>(h_) * w_ * c_, 0.0) {}

    int size() const { return h * w * c; }
    double& at(int i, int j, int k) {
        return v[(static_cast<std::size_t>(i) * w + j) * c + k];
    }
    double at(int i, int j, int k) const {
        return v[(static_cast<std::size_t>(i) * w + j) * c + k];
    }
};

double elu(double x);
/// Derivative of ELU expressed through its own output (valid since ELU is
/// monotonic and sign-preserving).
double elu_deriv_from_output(double activated);

/// Valid 2D cross-correlation layer, stride 1. Weights are stored as
/// w[((ki*kw + kj)*in_c + ci)*out_c + f], biases per filter.
struct ConvLayer {
    int in_c = 0, out_c = 0, kh = 2, kw = 2;
    std::vector<double> w;
    std::vector<double> b;

    static ConvLayer zeros(int in_c, int out_c, int kh = 2, int kw = 2);
    std::size_t weight_index(int f, int ci, int ki, int kj) const {
        return (static_cast<std::size_t>(ki * kw + kj) * in_c + ci) * out_c + f;
    }
};

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer);

/// Exact gradients of the layer given d(loss)/d(output). d_input, d_w and
/// d_b are accumulated into (callers zero them when starting a batch).
void conv2d_backward(const Tensor& input, const ConvLayer& layer,
                     const Tensor& d_output, Tensor& d_input,
                     std::vector<double>& d_w, std::vector<double>& d_b);

/// Fully connected layer; weights w[o*in_dim + i].
struct DenseLayer {
    int in_dim = 0, out_dim = 0;
    std::vector<double> w;
    std::vector<double> b;

    static DenseLayer zeros(int in_dim, int out_dim);
};

void dense_forward(std::span<const double> input, const DenseLayer& layer,
                   std::span<double> output);
void dense_backward(std::span<const double> input, const DenseLayer& layer,
                    std::span<const double> d_output, std::span<double> d_input,
                    std::vector<double>& d_w, std::vector<double>& d_b);

struct ModelArch {
    int in_h = 5, in_w = 7;
    std::array<int, 3> conv_filters = {32, 64, 128};
    std::array<int, 2> dense_hidden = {128, 64};
    int kernel = 2;
};

/// The steering regressor: three 2x2 conv layers (ELU) followed by three
/// dense layers, linear output. Carries everything inference needs so the
/// feature encoding can never diverge between training and deployment.
struct CnnModel {
    std::array<ConvLayer, 3> conv;
    std::array<DenseLayer, 3> dense;
    Normalizer normalizer;
    PermutationTable permutation_table = default_permutation_table();
    double target_scale = 2.5 * kPi; // rad per unit of network output
    std::uint64_t seed = 0;
    int epochs_trained = 0;
    int format_version = kModelFormatVersion;

    /// Throws unless the layer shape chain is consistent from (in_h, in_w, 1)
    /// down to the single output.
    void validate_shapes(int in_h = 5, int in_w = 7) const;
    std::size_t parameter_count() const;
};

/// He-normal initialized model with zero biases; deterministic in the seed.
CnnModel build_model(const ModelArch& arch, std::uint64_t seed);

/// Runs the network on an encoded feature matrix. Output is in normalized
/// target units; multiply by target_scale for radians.
double forward(const CnnModel& model, const FeatureMatrix& m);

/// Per-parameter-array gradient buffers mirroring CnnModel.
struct Gradients {
    std::array<std::vector<double>, 3> conv_w, conv_b;
    std::array<std::vector<double>, 3> dense_w, dense_b;

    static Gradients zeros_like(const CnnModel& model);
    void zero();
};

/// Scratch activations reused across samples.
struct Workspace {
    Tensor t0, a1, a2, a3;
    std::vector<double> d1, d2;
    Tensor da1, da2, da3;
    std::vector<double> dd1, dd2;

    static Workspace for_model(const CnnModel& model, int in_h = 5, int in_w = 7);
};

/// Forward pass that keeps activations for a following backward pass.
double forward_workspace(const CnnModel& model, const double* input,
                         Workspace& ws);

/// Accumulates d(loss)/d(params) into grads for one sample whose forward
/// activations are in ws; d_pred is d(loss)/d(prediction).
void backward_sample(const CnnModel& model, double d_pred, Workspace& ws,
                     Gradients& grads);

/// Mean-squared-error gradients over a batch of encoded inputs
/// (batch x 35 values, row-major). Returns the batch MSE.
double backward(const CnnModel& model, const double* inputs,
                const double* targets, int batch, Gradients& grads,
                Workspace& ws);

struct AdamState {
    std::array<std::vector<double>, 3> conv_w_m, conv_w_v, conv_b_m, conv_b_v;
    std::array<std::vector<double>, 3> dense_w_m, dense_w_v, dense_b_m, dense_b_v;
    long step_count = 0;

    static AdamState zeros_like(const CnnModel& model);
};

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// One bias-corrected Adam update of every model parameter. step_count
/// advances by one.
void adam_step(CnnModel& model, const Gradients& grads, AdamState& state,
               double lr, const AdamHyper& hyper = {});

struct TrainConfig {
    int epochs = 18;
    int batch_size = 4;
    double lr0 = 0.001;
    // Reduce-on-plateau: halve when validation MSE has not improved for
    // `plateau_patience` consecutive epochs, never below lr_floor.
    double lr_factor = 0.5;
    int plateau_patience = 3;
    double lr_floor = 1e-5;
    AdamHyper adam;
    std::uint64_t seed = 1;
    double target_scale = 2.5 * kPi;
    ModelArch arch;

    void validate() const;
};

/// Offline regression quality, measured on the quantity the pilot actually
/// consumes: the denormalized prediction clamped to the wheel range, in
/// radians, against the recorded wheel angle in radians.
struct EvalMetrics {
    double mse = 0.0;            // rad^2
    std::optional<double> r2;    // absent for zero-variance targets
    std::size_t n = 0;
};

struct FitReport {
    // Optimizer-internal curves in normalized target units.
    std::vector<double> train_mse_per_epoch; // running loss of each epoch
    std::vector<double> val_mse_per_epoch;
    std::vector<double> lr_per_epoch;
    EvalMetrics final_train;
    EvalMetrics final_val;
    std::uint64_t seed = 0;
    int epochs = 0;
};

/// Trains on `train`, watching `val` for the learning-rate plateau schedule
/// (never trained on). Deterministic in the seed.
std::pair<CnnModel, FitReport> train(const Dataset& train_set,
                                     const Dataset& val_set,
                                     const TrainConfig& config);

EvalMetrics evaluate(const CnnModel& model, const Dataset& dataset);

/// Steering prediction in radians for raw features, clamped to the model's
/// physical range [-target_scale, target_scale].
double predict_wheel_angle(const CnnModel& model,
                           const std::array<double, kNumFeatures>& features);

void save_model(const CnnModel& model, const std::string& path);
CnnModel load_model(const std::string& path);

} // namespace slalom
