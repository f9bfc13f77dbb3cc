#include "slalom/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace slalom {

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

double elu_deriv_from_output(double activated) {
    return activated > 0.0 ? 1.0 : activated + 1.0;
}

ConvLayer ConvLayer::zeros(int in_c, int out_c, int kh, int kw) {
    ConvLayer l;
    l.in_c = in_c;
    l.out_c = out_c;
    l.kh = kh;
    l.kw = kw;
    l.w.assign(static_cast<std::size_t>(kh) * kw * in_c * out_c, 0.0);
    l.b.assign(out_c, 0.0);
    return l;
}

DenseLayer DenseLayer::zeros(int in_dim, int out_dim) {
    DenseLayer l;
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    l.w.assign(static_cast<std::size_t>(in_dim) * out_dim, 0.0);
    l.b.assign(out_dim, 0.0);
    return l;
}

Tensor conv2d_forward(const Tensor& input, const ConvLayer& layer) {
    if (input.c != layer.in_c)
        throw std::invalid_argument("conv2d_forward: channel mismatch");
    if (input.h < layer.kh || input.w < layer.kw)
        throw std::invalid_argument("conv2d_forward: input smaller than kernel");

    const int oh = input.h - layer.kh + 1;
    const int ow = input.w - layer.kw + 1;
    const int C = layer.in_c;
    const int F = layer.out_c;
    Tensor out(oh, ow, F);

    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double* orow = &out.v[(static_cast<std::size_t>(y) * ow + x) * F];
            for (int f = 0; f < F; ++f) orow[f] = layer.b[f];
            for (int ki = 0; ki < layer.kh; ++ki) {
                for (int kj = 0; kj < layer.kw; ++kj) {
                    const double* irow =
                        &input.v[(static_cast<std::size_t>(y + ki) * input.w +
                                  (x + kj)) * C];
                    const double* wtap =
                        &layer.w[static_cast<std::size_t>(ki * layer.kw + kj) *
                                 C * F];
                    for (int ci = 0; ci < C; ++ci) {
                        const double a = irow[ci];
                        const double* wf = wtap + static_cast<std::size_t>(ci) * F;
                        for (int f = 0; f < F; ++f) orow[f] += a * wf[f];
                    }
                }
            }
        }
    }
    return out;
}

void conv2d_backward(const Tensor& input, const ConvLayer& layer,
                     const Tensor& d_output, Tensor& d_input,
                     std::vector<double>& d_w, std::vector<double>& d_b) {
    const int oh = input.h - layer.kh + 1;
    const int ow = input.w - layer.kw + 1;
    if (d_output.h != oh || d_output.w != ow || d_output.c != layer.out_c)
        throw std::invalid_argument("conv2d_backward: d_output shape mismatch");
    if (d_input.h != input.h || d_input.w != input.w || d_input.c != input.c)
        throw std::invalid_argument("conv2d_backward: d_input shape mismatch");

    const int C = layer.in_c;
    const int F = layer.out_c;
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            const double* drow =
                &d_output.v[(static_cast<std::size_t>(y) * ow + x) * F];
            for (int f = 0; f < F; ++f) d_b[f] += drow[f];
            for (int ki = 0; ki < layer.kh; ++ki) {
                for (int kj = 0; kj < layer.kw; ++kj) {
                    const std::size_t tap =
                        static_cast<std::size_t>(ki * layer.kw + kj) * C * F;
                    const double* irow =
                        &input.v[(static_cast<std::size_t>(y + ki) * input.w +
                                  (x + kj)) * C];
                    double* dirow =
                        &d_input.v[(static_cast<std::size_t>(y + ki) * input.w +
                                    (x + kj)) * C];
                    for (int ci = 0; ci < C; ++ci) {
                        const double a = irow[ci];
                        const double* wf = &layer.w[tap + static_cast<std::size_t>(ci) * F];
                        double* gwf = &d_w[tap + static_cast<std::size_t>(ci) * F];
                        double acc = 0.0;
                        for (int f = 0; f < F; ++f) {
                            acc += drow[f] * wf[f];
                            gwf[f] += a * drow[f];
                        }
                        dirow[ci] += acc;
                    }
                }
            }
        }
    }
}

void dense_forward(std::span<const double> input, const DenseLayer& layer,
                   std::span<double> output) {
    if (static_cast<int>(input.size()) != layer.in_dim ||
        static_cast<int>(output.size()) != layer.out_dim)
        throw std::invalid_argument("dense_forward: size mismatch");
    for (int o = 0; o < layer.out_dim; ++o) {
        const double* wrow = &layer.w[static_cast<std::size_t>(o) * layer.in_dim];
        double acc = layer.b[o];
        for (int i = 0; i < layer.in_dim; ++i) acc += wrow[i] * input[i];
        output[o] = acc;
    }
}

void dense_backward(std::span<const double> input, const DenseLayer& layer,
                    std::span<const double> d_output, std::span<double> d_input,
                    std::vector<double>& d_w, std::vector<double>& d_b) {
    if (static_cast<int>(input.size()) != layer.in_dim ||
        static_cast<int>(d_output.size()) != layer.out_dim ||
        static_cast<int>(d_input.size()) != layer.in_dim)
        throw std::invalid_argument("dense_backward: size mismatch");
    for (int o = 0; o < layer.out_dim; ++o) {
        const double d = d_output[o];
        d_b[o] += d;
        const double* wrow = &layer.w[static_cast<std::size_t>(o) * layer.in_dim];
        double* gwrow = &d_w[static_cast<std::size_t>(o) * layer.in_dim];
        for (int i = 0; i < layer.in_dim; ++i) {
            gwrow[i] += d * input[i];
            d_input[i] += d * wrow[i];
        }
    }
}

void CnnModel::validate_shapes(int in_h, int in_w) const {
    int h = in_h, w = in_w, c = 1;
    for (std::size_t i = 0; i < conv.size(); ++i) {
        const ConvLayer& l = conv[i];
        if (l.in_c != c)
            throw std::invalid_argument("model: conv layer " + std::to_string(i) +
                                        " expects " + std::to_string(l.in_c) +
                                        " channels, got " + std::to_string(c));
        if (h < l.kh || w < l.kw)
            throw std::invalid_argument("model: conv layer " + std::to_string(i) +
                                        " input smaller than its kernel");
        if (l.w.size() != static_cast<std::size_t>(l.kh) * l.kw * l.in_c * l.out_c ||
            l.b.size() != static_cast<std::size_t>(l.out_c))
            throw std::invalid_argument("model: conv layer " + std::to_string(i) +
                                        " has inconsistent buffer sizes");
        h -= l.kh - 1;
        w -= l.kw - 1;
        c = l.out_c;
    }
    int dim = h * w * c;
    for (std::size_t i = 0; i < dense.size(); ++i) {
        const DenseLayer& l = dense[i];
        if (l.in_dim != dim)
            throw std::invalid_argument("model: dense layer " + std::to_string(i) +
                                        " expects " + std::to_string(l.in_dim) +
                                        " inputs, got " + std::to_string(dim));
        if (l.w.size() != static_cast<std::size_t>(l.in_dim) * l.out_dim ||
            l.b.size() != static_cast<std::size_t>(l.out_dim))
            throw std::invalid_argument("model: dense layer " + std::to_string(i) +
                                        " has inconsistent buffer sizes");
        dim = l.out_dim;
    }
    if (dim != 1)
        throw std::invalid_argument("model: final layer must have one output");
}

std::size_t CnnModel::parameter_count() const {
    std::size_t n = 0;
    for (const ConvLayer& l : conv) n += l.w.size() + l.b.size();
    for (const DenseLayer& l : dense) n += l.w.size() + l.b.size();
    return n;
}

CnnModel build_model(const ModelArch& arch, std::uint64_t seed) {
    CnnModel model;
    model.seed = seed;
    std::mt19937_64 rng(seed);

    auto he_fill = [&rng](std::vector<double>& w, int fan_in) {
        std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
        for (double& x : w) x = dist(rng);
    };

    int c = 1;
    int h = arch.in_h, w = arch.in_w;
    for (int i = 0; i < 3; ++i) {
        model.conv[i] = ConvLayer::zeros(c, arch.conv_filters[i], arch.kernel,
                                         arch.kernel);
        he_fill(model.conv[i].w, arch.kernel * arch.kernel * c);
        c = arch.conv_filters[i];
        h -= arch.kernel - 1;
        w -= arch.kernel - 1;
    }
    int dim = h * w * c;
    const std::array<int, 3> outs = {arch.dense_hidden[0], arch.dense_hidden[1], 1};
    for (int i = 0; i < 3; ++i) {
        model.dense[i] = DenseLayer::zeros(dim, outs[i]);
        he_fill(model.dense[i].w, dim);
        dim = outs[i];
    }
    model.validate_shapes(arch.in_h, arch.in_w);
    return model;
}

Workspace Workspace::for_model(const CnnModel& model, int in_h, int in_w) {
    Workspace ws;
    ws.t0 = Tensor(in_h, in_w, 1);
    int h = in_h, w = in_w;
    std::array<Tensor*, 3> acts = {&ws.a1, &ws.a2, &ws.a3};
    std::array<Tensor*, 3> grads = {&ws.da1, &ws.da2, &ws.da3};
    for (int i = 0; i < 3; ++i) {
        h -= model.conv[i].kh - 1;
        w -= model.conv[i].kw - 1;
        *acts[i] = Tensor(h, w, model.conv[i].out_c);
        *grads[i] = Tensor(h, w, model.conv[i].out_c);
    }
    ws.d1.assign(model.dense[0].out_dim, 0.0);
    ws.d2.assign(model.dense[1].out_dim, 0.0);
    ws.dd1.assign(model.dense[0].out_dim, 0.0);
    ws.dd2.assign(model.dense[1].out_dim, 0.0);
    return ws;
}

double forward_workspace(const CnnModel& model, const double* input,
                         Workspace& ws) {
    std::copy(input, input + ws.t0.size(), ws.t0.v.begin());

    const Tensor* in = &ws.t0;
    std::array<Tensor*, 3> acts = {&ws.a1, &ws.a2, &ws.a3};
    for (int i = 0; i < 3; ++i) {
        Tensor out = conv2d_forward(*in, model.conv[i]);
        for (double& x : out.v) x = elu(x);
        *acts[i] = std::move(out);
        in = acts[i];
    }

    dense_forward(ws.a3.v, model.dense[0], ws.d1);
    for (double& x : ws.d1) x = elu(x);
    dense_forward(ws.d1, model.dense[1], ws.d2);
    for (double& x : ws.d2) x = elu(x);
    double out = 0.0;
    dense_forward(ws.d2, model.dense[2], std::span<double>(&out, 1));
    return out;
}

double forward(const CnnModel& model, const FeatureMatrix& m) {
    Workspace ws = Workspace::for_model(model);
    if (static_cast<int>(m.values.size()) != ws.t0.size())
        throw std::invalid_argument("forward: input size mismatch");
    return forward_workspace(model, m.values.data(), ws);
}

Gradients Gradients::zeros_like(const CnnModel& model) {
    Gradients g;
    for (int i = 0; i < 3; ++i) {
        g.conv_w[i].assign(model.conv[i].w.size(), 0.0);
        g.conv_b[i].assign(model.conv[i].b.size(), 0.0);
        g.dense_w[i].assign(model.dense[i].w.size(), 0.0);
        g.dense_b[i].assign(model.dense[i].b.size(), 0.0);
    }
    return g;
}

void Gradients::zero() {
    for (int i = 0; i < 3; ++i) {
        std::fill(conv_w[i].begin(), conv_w[i].end(), 0.0);
        std::fill(conv_b[i].begin(), conv_b[i].end(), 0.0);
        std::fill(dense_w[i].begin(), dense_w[i].end(), 0.0);
        std::fill(dense_b[i].begin(), dense_b[i].end(), 0.0);
    }
}

void backward_sample(const CnnModel& model, double d_pred, Workspace& ws,
                     Gradients& grads) {
    // Dense stack, output first. The output layer is linear.
    std::fill(ws.dd2.begin(), ws.dd2.end(), 0.0);
    double d_out = d_pred;
    dense_backward(ws.d2, model.dense[2], std::span<const double>(&d_out, 1),
                   ws.dd2, grads.dense_w[2], grads.dense_b[2]);
    for (std::size_t i = 0; i < ws.dd2.size(); ++i)
        ws.dd2[i] *= elu_deriv_from_output(ws.d2[i]);

    std::fill(ws.dd1.begin(), ws.dd1.end(), 0.0);
    dense_backward(ws.d1, model.dense[1], ws.dd2, ws.dd1, grads.dense_w[1],
                   grads.dense_b[1]);
    for (std::size_t i = 0; i < ws.dd1.size(); ++i)
        ws.dd1[i] *= elu_deriv_from_output(ws.d1[i]);

    std::fill(ws.da3.v.begin(), ws.da3.v.end(), 0.0);
    dense_backward(ws.a3.v, model.dense[0], ws.dd1, ws.da3.v, grads.dense_w[0],
                   grads.dense_b[0]);

    // Conv stack.
    std::array<Tensor*, 3> acts = {&ws.a1, &ws.a2, &ws.a3};
    std::array<Tensor*, 3> dacts = {&ws.da1, &ws.da2, &ws.da3};
    for (int i = 2; i >= 0; --i) {
        Tensor& dact = *dacts[i];
        const Tensor& act = *acts[i];
        for (int k = 0; k < act.size(); ++k)
            dact.v[k] *= elu_deriv_from_output(act.v[k]);
        if (i > 0) {
            Tensor& dprev = *dacts[i - 1];
            std::fill(dprev.v.begin(), dprev.v.end(), 0.0);
            conv2d_backward(*acts[i - 1], model.conv[i], dact, dprev,
                            grads.conv_w[i], grads.conv_b[i]);
        } else {
            Tensor d0(ws.t0.h, ws.t0.w, ws.t0.c);
            conv2d_backward(ws.t0, model.conv[0], dact, d0, grads.conv_w[0],
                            grads.conv_b[0]);
        }
    }
}

double backward(const CnnModel& model, const double* inputs,
                const double* targets, int batch, Gradients& grads,
                Workspace& ws) {
    if (batch <= 0) throw std::invalid_argument("backward: empty batch");
    const int in_size = ws.t0.size();
    double mse = 0.0;
    for (int b = 0; b < batch; ++b) {
        const double pred = forward_workspace(model, inputs + static_cast<std::size_t>(b) * in_size, ws);
        const double residual = pred - targets[b];
        mse += residual * residual;
        backward_sample(model, 2.0 * residual / batch, ws, grads);
    }
    return mse / batch;
}

AdamState AdamState::zeros_like(const CnnModel& model) {
    AdamState s;
    for (int i = 0; i < 3; ++i) {
        s.conv_w_m[i].assign(model.conv[i].w.size(), 0.0);
        s.conv_w_v[i].assign(model.conv[i].w.size(), 0.0);
        s.conv_b_m[i].assign(model.conv[i].b.size(), 0.0);
        s.conv_b_v[i].assign(model.conv[i].b.size(), 0.0);
        s.dense_w_m[i].assign(model.dense[i].w.size(), 0.0);
        s.dense_w_v[i].assign(model.dense[i].w.size(), 0.0);
        s.dense_b_m[i].assign(model.dense[i].b.size(), 0.0);
        s.dense_b_v[i].assign(model.dense[i].b.size(), 0.0);
    }
    return s;
}

namespace {

void adam_update_array(std::vector<double>& p, const std::vector<double>& g,
                       std::vector<double>& m, std::vector<double>& v,
                       double lr, const AdamHyper& h, double bc1, double bc2) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = h.beta1 * m[i] + (1.0 - h.beta1) * g[i];
        v[i] = h.beta2 * v[i] + (1.0 - h.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + h.eps);
    }
}

} // namespace

void adam_step(CnnModel& model, const Gradients& grads, AdamState& state,
               double lr, const AdamHyper& hyper) {
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(hyper.beta1, state.step_count);
    const double bc2 = 1.0 - std::pow(hyper.beta2, state.step_count);
    for (int i = 0; i < 3; ++i) {
        adam_update_array(model.conv[i].w, grads.conv_w[i], state.conv_w_m[i],
                          state.conv_w_v[i], lr, hyper, bc1, bc2);
        adam_update_array(model.conv[i].b, grads.conv_b[i], state.conv_b_m[i],
                          state.conv_b_v[i], lr, hyper, bc1, bc2);
        adam_update_array(model.dense[i].w, grads.dense_w[i], state.dense_w_m[i],
                          state.dense_w_v[i], lr, hyper, bc1, bc2);
        adam_update_array(model.dense[i].b, grads.dense_b[i], state.dense_b_m[i],
                          state.dense_b_v[i], lr, hyper, bc1, bc2);
    }
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 1)
        throw std::invalid_argument("train: batch_size must be >= 1");
    if (!(lr0 > 0.0)) throw std::invalid_argument("train: lr0 must be > 0");
    if (!(target_scale > 0.0))
        throw std::invalid_argument("train: target_scale must be > 0");
}

namespace {

void encode_input(const std::array<double, kNumFeatures>& raw,
                  const Normalizer& norm, const PermutationTable& table,
                  double* out) {
    const auto z = norm.normalize(raw);
    for (int r = 0; r < kMatrixRows; ++r)
        for (int c = 0; c < kNumFeatures; ++c)
            out[r * kNumFeatures + c] = z[table[r][c]];
}

struct EncodedSet {
    std::vector<double> inputs;  // n x 35
    std::vector<double> targets; // normalized
    std::size_t n = 0;
};

EncodedSet encode_dataset(const Dataset& ds, const CnnModel& model) {
    EncodedSet e;
    e.n = ds.size();
    const int in_size = kMatrixRows * kNumFeatures;
    e.inputs.resize(e.n * in_size);
    e.targets.resize(e.n);
    for (std::size_t i = 0; i < e.n; ++i) {
        encode_input(ds.samples[i].features, model.normalizer,
                     model.permutation_table, &e.inputs[i * in_size]);
        e.targets[i] = ds.samples[i].target_wheel_angle / model.target_scale;
    }
    return e;
}

double mean_squared_error(const CnnModel& model, const EncodedSet& set,
                          Workspace& ws) {
    const int in_size = kMatrixRows * kNumFeatures;
    double acc = 0.0;
    for (std::size_t i = 0; i < set.n; ++i) {
        const double pred =
            forward_workspace(model, &set.inputs[i * in_size], ws);
        const double r = pred - set.targets[i];
        acc += r * r;
    }
    return set.n ? acc / static_cast<double>(set.n) : 0.0;
}

} // namespace

std::pair<CnnModel, FitReport> train(const Dataset& train_set,
                                     const Dataset& val_set,
                                     const TrainConfig& config) {
    config.validate();
    if (train_set.empty()) throw std::invalid_argument("train: empty dataset");
    if (train_set.size() < static_cast<std::size_t>(config.batch_size))
        throw std::invalid_argument("train: fewer samples than one batch");

    CnnModel model = build_model(config.arch, config.seed);
    model.normalizer = Normalizer::fit(train_set.feature_rows());
    model.permutation_table = default_permutation_table();
    model.target_scale = config.target_scale;

    const EncodedSet train_enc = encode_dataset(train_set, model);
    const EncodedSet val_enc = encode_dataset(val_set, model);

    Workspace ws = Workspace::for_model(model, config.arch.in_h, config.arch.in_w);
    Gradients grads = Gradients::zeros_like(model);
    AdamState opt = AdamState::zeros_like(model);

    std::vector<std::size_t> order(train_enc.n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    const int in_size = kMatrixRows * kNumFeatures;
    std::vector<double> batch_inputs(
        static_cast<std::size_t>(config.batch_size) * in_size);
    std::vector<double> batch_targets(config.batch_size);

    FitReport report;
    report.seed = config.seed;
    report.epochs = config.epochs;

    double lr = config.lr0;
    double best_val = std::numeric_limits<double>::infinity();
    int stagnant = 0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < train_enc.n;
             start += config.batch_size) {
            const int bsz = static_cast<int>(
                std::min<std::size_t>(config.batch_size, train_enc.n - start));
            for (int b = 0; b < bsz; ++b) {
                const std::size_t idx = order[start + b];
                std::copy_n(&train_enc.inputs[idx * in_size], in_size,
                            &batch_inputs[static_cast<std::size_t>(b) * in_size]);
                batch_targets[b] = train_enc.targets[idx];
            }
            grads.zero();
            const double batch_mse = backward(model, batch_inputs.data(),
                                              batch_targets.data(), bsz, grads,
                                              ws);
            adam_step(model, grads, opt, lr, config.adam);
            epoch_loss += batch_mse * bsz;
            seen += bsz;
        }
        epoch_loss /= static_cast<double>(seen);
        if (!std::isfinite(epoch_loss))
            throw std::runtime_error("train: non-finite training loss at epoch " +
                                     std::to_string(epoch + 1));

        const double val_mse =
            val_enc.n ? mean_squared_error(model, val_enc, ws) : epoch_loss;
        if (!std::isfinite(val_mse))
            throw std::runtime_error("train: non-finite validation loss");

        report.train_mse_per_epoch.push_back(epoch_loss);
        report.val_mse_per_epoch.push_back(val_mse);
        report.lr_per_epoch.push_back(lr);

        if (val_mse < best_val) {
            best_val = val_mse;
            stagnant = 0;
        } else {
            stagnant += 1;
            if (stagnant >= config.plateau_patience) {
                lr = std::max(lr * config.lr_factor, config.lr_floor);
                stagnant = 0;
            }
        }
    }

    model.epochs_trained = config.epochs;
    report.final_train = evaluate(model, train_set);
    report.final_val = evaluate(model, val_set);
    return {std::move(model), std::move(report)};
}

EvalMetrics evaluate(const CnnModel& model, const Dataset& dataset) {
    if (dataset.empty()) throw std::invalid_argument("evaluate: empty dataset");
    const EncodedSet enc = encode_dataset(dataset, model);
    Workspace ws = Workspace::for_model(model);

    const int in_size = kMatrixRows * kNumFeatures;
    double ss_res = 0.0;
    double mean_target = 0.0;
    for (const Sample& s : dataset.samples) mean_target += s.target_wheel_angle;
    mean_target /= static_cast<double>(enc.n);

    double ss_tot = 0.0;
    for (std::size_t i = 0; i < enc.n; ++i) {
        const double normed =
            forward_workspace(model, &enc.inputs[i * in_size], ws);
        const double pred =
            std::clamp(normed * model.target_scale, -model.target_scale,
                       model.target_scale);
        const double target = dataset.samples[i].target_wheel_angle;
        const double r = pred - target;
        ss_res += r * r;
        const double d = target - mean_target;
        ss_tot += d * d;
    }

    EvalMetrics m;
    m.n = enc.n;
    m.mse = ss_res / static_cast<double>(enc.n);
    if (ss_tot > 0.0)
        m.r2 = 1.0 - ss_res / ss_tot;
    return m;
}

double predict_wheel_angle(const CnnModel& model,
                           const std::array<double, kNumFeatures>& features) {
    FeatureFrame frame;
    frame.turn_state = features[0];
    frame.lateral = features[1];
    frame.long_proximity = features[2];
    frame.speed_kmh = features[3];
    frame.heading = features[4];
    frame.heading_rate = features[5];
    frame.wheel_rate = features[6];
    const FeatureMatrix m =
        build_matrix(frame, model.normalizer, model.permutation_table);
    const double normed = forward(model, m);
    return std::clamp(normed * model.target_scale, -model.target_scale,
                      model.target_scale);
}

// --- serialization ---

using nlohmann::json;

namespace {

json conv_to_json(const ConvLayer& l) {
    return json{{"in_c", l.in_c}, {"out_c", l.out_c}, {"kh", l.kh},
                {"kw", l.kw},     {"w", l.w},         {"b", l.b}};
}

ConvLayer conv_from_json(const json& j) {
    ConvLayer l;
    l.in_c = j.at("in_c").get<int>();
    l.out_c = j.at("out_c").get<int>();
    l.kh = j.at("kh").get<int>();
    l.kw = j.at("kw").get<int>();
    l.w = j.at("w").get<std::vector<double>>();
    l.b = j.at("b").get<std::vector<double>>();
    return l;
}

json dense_to_json(const DenseLayer& l) {
    return json{{"in_dim", l.in_dim}, {"out_dim", l.out_dim}, {"w", l.w},
                {"b", l.b}};
}

DenseLayer dense_from_json(const json& j) {
    DenseLayer l;
    l.in_dim = j.at("in_dim").get<int>();
    l.out_dim = j.at("out_dim").get<int>();
    l.w = j.at("w").get<std::vector<double>>();
    l.b = j.at("b").get<std::vector<double>>();
    return l;
}

} // namespace

void save_model(const CnnModel& model, const std::string& path) {
    if (!model.normalizer.fitted())
        throw std::logic_error("save_model: normalizer not fitted");
    json j;
    j["format_version"] = model.format_version;
    j["seed"] = model.seed;
    j["epochs_trained"] = model.epochs_trained;
    j["target_scale"] = model.target_scale;
    j["normalizer"] = {{"mean", model.normalizer.mean()},
                       {"std", model.normalizer.stddev()}};
    json perms = json::array();
    for (const auto& row : model.permutation_table) perms.push_back(row);
    j["permutation_table"] = perms;
    j["conv"] = json::array();
    for (const ConvLayer& l : model.conv) j["conv"].push_back(conv_to_json(l));
    j["dense"] = json::array();
    for (const DenseLayer& l : model.dense) j["dense"].push_back(dense_to_json(l));

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

CnnModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("load_model: " + path + ": " + e.what());
    }

    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
        throw std::runtime_error(
            "load_model: " + path + " has format version " +
            std::to_string(version) + ", this build reads version " +
            std::to_string(kModelFormatVersion));

    CnnModel model;
    model.format_version = version;
    model.seed = j.at("seed").get<std::uint64_t>();
    model.epochs_trained = j.at("epochs_trained").get<int>();
    model.target_scale = j.at("target_scale").get<double>();

    const auto mean =
        j.at("normalizer").at("mean").get<std::array<double, kNumFeatures>>();
    const auto stddev =
        j.at("normalizer").at("std").get<std::array<double, kNumFeatures>>();
    model.normalizer = Normalizer(mean, stddev);

    const json& perms = j.at("permutation_table");
    if (perms.size() != kMatrixRows)
        throw std::runtime_error("load_model: bad permutation table");
    for (int r = 0; r < kMatrixRows; ++r)
        model.permutation_table[r] =
            perms[r].get<std::array<int, kNumFeatures>>();

    const json& conv = j.at("conv");
    const json& dense = j.at("dense");
    if (conv.size() != 3 || dense.size() != 3)
        throw std::runtime_error("load_model: expected 3 conv and 3 dense layers");
    for (int i = 0; i < 3; ++i) {
        model.conv[i] = conv_from_json(conv[i]);
        model.dense[i] = dense_from_json(dense[i]);
    }
    model.validate_shapes();
    return model;
}

} // namespace slalom
