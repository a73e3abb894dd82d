#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace freqfed {

enum class Activation { relu, tanh };

/// Fully-connected network shape: layer_dims = {input, hidden..., output}.
/// Hidden layers use `activation`; the output layer is a softmax over classes.
struct ModelArch {
    std::vector<int> layer_dims;
    Activation activation = Activation::relu;

    int param_count() const;
    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    void validate() const;  // throws std::invalid_argument on a bad shape

    bool operator==(const ModelArch& other) const = default;
};

/// A model's trainable weights flattened into one ordered vector.
/// Layout per layer: weight matrix (in x out, row-major) followed by biases.
struct ParameterVector {
    std::vector<double> values;
    ModelArch arch;

    int size() const { return static_cast<int>(values.size()); }
};

struct TrainingConfig {
    double learning_rate = 0.1;
    int local_epochs = 1;
    int batch_size = 32;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Row-major sample matrix plus integer class labels in [0, num_classes).
struct LabeledDataset {
    int feature_dim = 0;
    std::vector<double> features;  // num_samples x feature_dim
    std::vector<int> labels;

    int num_samples() const { return static_cast<int>(labels.size()); }
    const double* row(int i) const { return features.data() + static_cast<std::size_t>(i) * feature_dim; }
    double* row(int i) { return features.data() + static_cast<std::size_t>(i) * feature_dim; }
    void validate() const;
};

/// Deterministic initialization: per-layer uniform(-s, s) weights with
/// s = sqrt(6 / (fan_in + fan_out)), biases zero.
ParameterVector init_model(const ModelArch& arch, std::uint64_t seed);

/// Local mini-batch SGD: E epochs of w <- w - eta * grad(mean cross-entropy)
/// with seeded batch shuffling. Throws on dimension mismatch and on
/// non-finite loss (diverged training).
ParameterVector client_update(const ParameterVector& global, const LabeledDataset& data,
                              const TrainingConfig& cfg);

/// Fraction of argmax-correct predictions on a clean test set.
double evaluate_ma(const ParameterVector& model, const LabeledDataset& test);

/// Fraction of triggered samples predicted as target_label. The dataset's
/// stored labels must be the original (pre-trigger) truth; samples whose true
/// label already equals target_label are excluded from both numerator and
/// denominator. Throws if the denominator is empty after exclusion.
double evaluate_ba(const ParameterVector& model, const LabeledDataset& triggered_test,
                   int target_label);

/// Mean cross-entropy over the whole dataset.
double dataset_loss(const ParameterVector& model, const LabeledDataset& data);

/// Gradient of the mean cross-entropy over the given sample indices
/// (all samples if `indices` is empty).
std::vector<double> loss_gradient(const ParameterVector& model, const LabeledDataset& data,
                                  const std::vector<int>& indices = {});

/// Class probabilities for every sample (num_samples x output_dim, row-major).
std::vector<double> predict_proba(const ParameterVector& model, const LabeledDataset& data);

/// Argmax class per sample (ties resolved to the lowest class index).
std::vector<int> predict(const ParameterVector& model, const LabeledDataset& data);

// Hooks for attack variants that piggyback on the plain SGD schedule. The
// batch hook replaces the parameter update for one batch; the epoch hook runs
// after each epoch. Both see the live weight vector. Using the same driver
// guarantees identical batch order and RNG consumption as client_update.
using BatchStepFn = std::function<void(std::vector<double>& w, const std::vector<double>& grad)>;
using EpochHookFn = std::function<void(std::vector<double>& w, int epoch)>;
using GradientFn = std::function<std::vector<double>(const ParameterVector& w,
                                                     const LabeledDataset& data,
                                                     const std::vector<int>& batch)>;

ParameterVector sgd_train(const ParameterVector& start, const LabeledDataset& data,
                          const TrainingConfig& cfg, const GradientFn& gradient,
                          const BatchStepFn& step, const EpochHookFn& epoch_hook);

}  // namespace freqfed
