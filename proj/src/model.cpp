#include "freqfed/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "freqfed/rng.hpp"

namespace freqfed {

int ModelArch::param_count() const {
    int total = 0;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        total += layer_dims[l] * layer_dims[l + 1] + layer_dims[l + 1];
    }
    return total;
}

void ModelArch::validate() const {
    if (layer_dims.size() < 2) {
        throw std::invalid_argument("ModelArch: need at least input and output dims");
    }
    for (int d : layer_dims) {
        if (d < 1) throw std::invalid_argument("ModelArch: all layer dims must be >= 1");
    }
}

void TrainingConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("TrainingConfig: learning_rate must be finite and >= 0");
    }
    if (local_epochs < 1) throw std::invalid_argument("TrainingConfig: local_epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("TrainingConfig: batch_size must be >= 1");
}

void LabeledDataset::validate() const {
    if (feature_dim < 1) throw std::invalid_argument("LabeledDataset: feature_dim must be >= 1");
    if (features.size() != labels.size() * static_cast<std::size_t>(feature_dim)) {
        throw std::invalid_argument("LabeledDataset: feature/label count mismatch");
    }
    for (int y : labels) {
        if (y < 0) throw std::invalid_argument("LabeledDataset: negative label");
    }
}

ParameterVector init_model(const ModelArch& arch, std::uint64_t seed) {
    arch.validate();
    ParameterVector pv;
    pv.arch = arch;
    pv.values.resize(arch.param_count());
    Rng rng(seed);
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < arch.layer_dims.size(); ++l) {
        const int fan_in = arch.layer_dims[l];
        const int fan_out = arch.layer_dims[l + 1];
        const double s = std::sqrt(6.0 / (fan_in + fan_out));
        for (int i = 0; i < fan_in * fan_out; ++i) pv.values[pos++] = rng.uniform(-s, s);
        for (int i = 0; i < fan_out; ++i) pv.values[pos++] = 0.0;  // biases
    }
    return pv;
}

namespace {

struct LayerView {
    const double* weights;  // in x out, row-major
    const double* biases;
    int in;
    int out;
};

std::vector<LayerView> layer_views(const ParameterVector& pv) {
    std::vector<LayerView> views;
    const auto& dims = pv.arch.layer_dims;
    std::size_t pos = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        LayerView v;
        v.in = dims[l];
        v.out = dims[l + 1];
        v.weights = pv.values.data() + pos;
        pos += static_cast<std::size_t>(v.in) * v.out;
        v.biases = pv.values.data() + pos;
        pos += v.out;
        views.push_back(v);
    }
    return views;
}

void check_dims(const ParameterVector& model, const LabeledDataset& data) {
    model.arch.validate();
    data.validate();
    if (static_cast<int>(model.values.size()) != model.arch.param_count()) {
        throw std::invalid_argument("ParameterVector: length does not match arch");
    }
    if (data.feature_dim != model.arch.input_dim()) {
        throw std::invalid_argument("model/data dimension mismatch");
    }
    for (int y : data.labels) {
        if (y >= model.arch.output_dim()) {
            throw std::invalid_argument("label out of range for model output dim");
        }
    }
}

inline double activate(double z, Activation a) {
    return a == Activation::relu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

inline double activate_grad(double post, Activation a) {
    // Derivative expressed through the post-activation value.
    return a == Activation::relu ? (post > 0.0 ? 1.0 : 0.0) : 1.0 - post * post;
}

void softmax_inplace(double* logits, int n) {
    double mx = logits[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        logits[i] = std::exp(logits[i] - mx);
        sum += logits[i];
    }
    for (int i = 0; i < n; ++i) logits[i] /= sum;
}

// Forward pass for one sample; returns per-layer post-activation values
// (activations[0] is the input row, the last entry is the softmax output).
void forward_sample(const std::vector<LayerView>& layers, Activation act, const double* x,
                    std::vector<std::vector<double>>& activations) {
    activations[0].assign(x, x + layers.front().in);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const LayerView& L = layers[l];
        auto& out = activations[l + 1];
        out.assign(L.out, 0.0);
        const auto& in = activations[l];
        for (int i = 0; i < L.in; ++i) {
            const double a = in[i];
            if (a == 0.0) continue;
            const double* wrow = L.weights + static_cast<std::size_t>(i) * L.out;
            for (int j = 0; j < L.out; ++j) out[j] += a * wrow[j];
        }
        for (int j = 0; j < L.out; ++j) out[j] += L.biases[j];
        if (l + 1 < layers.size()) {
            for (int j = 0; j < L.out; ++j) out[j] = activate(out[j], act);
        } else {
            softmax_inplace(out.data(), L.out);
        }
    }
}

}  // namespace

std::vector<double> predict_proba(const ParameterVector& model, const LabeledDataset& data) {
    check_dims(model, data);
    const auto layers = layer_views(model);
    const int n = data.num_samples();
    const int out_dim = model.arch.output_dim();
    std::vector<double> probs(static_cast<std::size_t>(n) * out_dim);
#pragma omp parallel
    {
        std::vector<std::vector<double>> acts(layers.size() + 1);
#pragma omp for schedule(static)
        for (int s = 0; s < n; ++s) {
            forward_sample(layers, model.arch.activation, data.row(s), acts);
            std::copy(acts.back().begin(), acts.back().end(),
                      probs.begin() + static_cast<std::size_t>(s) * out_dim);
        }
    }
    return probs;
}

std::vector<int> predict(const ParameterVector& model, const LabeledDataset& data) {
    const auto probs = predict_proba(model, data);
    const int out_dim = model.arch.output_dim();
    std::vector<int> labels(data.num_samples());
    for (int s = 0; s < data.num_samples(); ++s) {
        const double* p = probs.data() + static_cast<std::size_t>(s) * out_dim;
        int best = 0;
        for (int c = 1; c < out_dim; ++c) {
            if (p[c] > p[best]) best = c;
        }
        labels[s] = best;
    }
    return labels;
}

double dataset_loss(const ParameterVector& model, const LabeledDataset& data) {
    if (data.num_samples() == 0) throw std::invalid_argument("dataset_loss: empty dataset");
    const auto probs = predict_proba(model, data);
    const int out_dim = model.arch.output_dim();
    double total = 0.0;
    for (int s = 0; s < data.num_samples(); ++s) {
        const double p = probs[static_cast<std::size_t>(s) * out_dim + data.labels[s]];
        total += -std::log(std::max(p, 1e-300));
    }
    return total / data.num_samples();
}

std::vector<double> loss_gradient(const ParameterVector& model, const LabeledDataset& data,
                                  const std::vector<int>& indices) {
    check_dims(model, data);
    const auto layers = layer_views(model);
    const Activation act = model.arch.activation;

    std::vector<int> batch = indices;
    if (batch.empty()) {
        batch.resize(data.num_samples());
        std::iota(batch.begin(), batch.end(), 0);
    }
    if (batch.empty()) throw std::invalid_argument("loss_gradient: empty batch");

    std::vector<double> grad(model.values.size(), 0.0);
    const double inv_n = 1.0 / static_cast<double>(batch.size());

    std::vector<std::vector<double>> acts(layers.size() + 1);
    std::vector<std::vector<double>> deltas(layers.size());
    for (int s : batch) {
        forward_sample(layers, act, data.row(s), acts);
        // Output delta for softmax + cross-entropy: p - onehot.
        const int last = static_cast<int>(layers.size()) - 1;
        deltas[last] = acts[last + 1];
        deltas[last][data.labels[s]] -= 1.0;
        for (int l = last - 1; l >= 0; --l) {
            const LayerView& up = layers[l + 1];
            deltas[l].assign(up.in, 0.0);
            for (int i = 0; i < up.in; ++i) {
                const double* wrow = up.weights + static_cast<std::size_t>(i) * up.out;
                double acc = 0.0;
                for (int j = 0; j < up.out; ++j) acc += wrow[j] * deltas[l + 1][j];
                deltas[l][i] = acc * activate_grad(acts[l + 1][i], act);
            }
        }
        std::size_t pos = 0;
        for (std::size_t l = 0; l < layers.size(); ++l) {
            const LayerView& L = layers[l];
            const auto& in = acts[l];
            const auto& d = deltas[l];
            for (int i = 0; i < L.in; ++i) {
                const double a = in[i] * inv_n;
                if (a != 0.0) {
                    double* grow = grad.data() + pos + static_cast<std::size_t>(i) * L.out;
                    for (int j = 0; j < L.out; ++j) grow[j] += a * d[j];
                }
            }
            pos += static_cast<std::size_t>(L.in) * L.out;
            for (int j = 0; j < L.out; ++j) grad[pos + j] += d[j] * inv_n;
            pos += L.out;
        }
    }
    return grad;
}

ParameterVector sgd_train(const ParameterVector& start, const LabeledDataset& data,
                          const TrainingConfig& cfg, const GradientFn& gradient,
                          const BatchStepFn& step, const EpochHookFn& epoch_hook) {
    check_dims(start, data);
    cfg.validate();
    if (data.num_samples() == 0) throw std::invalid_argument("sgd_train: empty dataset");

    ParameterVector w = start;
    Rng rng(cfg.seed);
    std::vector<int> order(data.num_samples());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        rng.shuffle(order);
        for (int begin = 0; begin < data.num_samples(); begin += cfg.batch_size) {
            const int end = std::min(begin + cfg.batch_size, data.num_samples());
            std::vector<int> batch(order.begin() + begin, order.begin() + end);
            std::vector<double> grad = gradient(w, data, batch);
            step(w.values, grad);
            for (double v : w.values) {
                if (!std::isfinite(v)) {
                    throw std::runtime_error("sgd_train: training diverged (non-finite weights)");
                }
            }
        }
        if (epoch_hook) epoch_hook(w.values, epoch);
    }
    return w;
}

ParameterVector client_update(const ParameterVector& global, const LabeledDataset& data,
                              const TrainingConfig& cfg) {
    const double eta = cfg.learning_rate;
    return sgd_train(
        global, data, cfg,
        [](const ParameterVector& w, const LabeledDataset& d, const std::vector<int>& batch) {
            return loss_gradient(w, d, batch);
        },
        [eta](std::vector<double>& w, const std::vector<double>& grad) {
            if (eta == 0.0) return;  // keep the zero-step identity bit-exact
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * grad[i];
        },
        nullptr);
}

double evaluate_ma(const ParameterVector& model, const LabeledDataset& test) {
    if (test.num_samples() == 0) throw std::invalid_argument("evaluate_ma: empty test set");
    const auto pred = predict(model, test);
    int correct = 0;
    for (int s = 0; s < test.num_samples(); ++s) {
        if (pred[s] == test.labels[s]) ++correct;
    }
    return static_cast<double>(correct) / test.num_samples();
}

double evaluate_ba(const ParameterVector& model, const LabeledDataset& triggered_test,
                   int target_label) {
    if (triggered_test.num_samples() == 0) {
        throw std::invalid_argument("evaluate_ba: empty test set");
    }
    const auto pred = predict(model, triggered_test);
    int hits = 0;
    int considered = 0;
    for (int s = 0; s < triggered_test.num_samples(); ++s) {
        if (triggered_test.labels[s] == target_label) continue;  // exclusion rule
        ++considered;
        if (pred[s] == target_label) ++hits;
    }
    if (considered == 0) {
        throw std::runtime_error("evaluate_ba: every sample is of the target class");
    }
    return static_cast<double>(hits) / considered;
}

}  // namespace freqfed
