#pragma once

#include <cstdint>
#include <vector>

#include "freqfed/frequency.hpp"
#include "freqfed/model.hpp"

namespace freqfed {

/// Input coordinates overwritten by the backdoor trigger.
struct TriggerSpec {
    std::vector<int> pixel_indices;
    double pixel_value = 1.0;

    void validate(int input_dim) const;
};

/// Default trigger geometry: a 2x2 block in the top-left corner for square
/// images, otherwise the first four coordinates. Value should be the max
/// feature value of the dataset.
TriggerSpec default_trigger(int input_dim, double pixel_value);

/// Replaces the labels of a seeded ceil(pdr*len) subset with uniformly random
/// different labels. Features untouched.
LabeledDataset label_flip(const LabeledDataset& data, double pdr, int num_classes,
                          std::uint64_t seed);

/// reference + gaussian noise of std sigma per coordinate.
ParameterVector random_update(const ModelArch& arch, const ParameterVector& reference,
                              double sigma, std::uint64_t seed);

/// Gradient ascent on the training loss with a projection onto the Euclidean
/// ball of radius tau around the global model after every mini-batch step.
ParameterVector pgd_untargeted(const ParameterVector& global, const LabeledDataset& data,
                               const TrainingConfig& cfg, double tau);

/// Sets trigger pixels and the target label on a seeded ceil(pdr*len) subset.
/// When poisoned_indices is non-null it receives the chosen subset, so the
/// caller can recover the untouched benign portion.
LabeledDataset pixel_backdoor_poison(const LabeledDataset& data, const TriggerSpec& trigger,
                                     int target_label, double pdr, std::uint64_t seed,
                                     std::vector<int>* poisoned_indices = nullptr);

/// Applies the trigger to every sample, keeping the original labels; used to
/// build the backdoor-accuracy test set.
LabeledDataset apply_trigger_all(const LabeledDataset& data, const TriggerSpec& trigger);

/// global + gamma * (malicious - global); boosts a poisoned update.
ParameterVector scale_update(const ParameterVector& malicious, const ParameterVector& global,
                             double gamma);

/// count copies of the template, each plus gaussian noise of std noise_sigma
/// (zero gives bit-identical copies).
std::vector<ParameterVector> concentrated_submission(const ParameterVector& temp, int count,
                                                     double noise_sigma, std::uint64_t seed);

/// Anomaly-evasion term 1 - cos(fingerprint(w), template_fp) and its gradient
/// with respect to w. The fingerprint is a linear map of w (packing, DCT and
/// index selection), so the gradient is the adjoint map applied to the cosine
/// gradient.
double anomaly_loss(const std::vector<double>& w, const FrequencyFingerprint& template_fp);
std::vector<double> anomaly_loss_gradient(const std::vector<double>& w,
                                          const FrequencyFingerprint& template_fp);

/// SGD on alpha * cross-entropy + (1 - alpha) * anomaly loss. With alpha = 1
/// the trajectory bit-matches client_update for the same seed.
ParameterVector adaptive_frequency_train(const ParameterVector& global,
                                         const LabeledDataset& poisoned_data,
                                         const FrequencyFingerprint& benign_template_fp,
                                         double alpha, const TrainingConfig& cfg);

/// Overwrites the low-frequency DCT coefficients of w with those of the
/// benign source and transforms back. Applied between training epochs.
ParameterVector benign_freq_injection_epoch(const ParameterVector& w,
                                            const ParameterVector& benign_fp_source);

/// Backdoor training with the per-epoch low-frequency replacement above.
ParameterVector benign_freq_injection_train(const ParameterVector& global,
                                            const LabeledDataset& poisoned_data,
                                            const ParameterVector& benign_fp_source,
                                            const TrainingConfig& cfg);

}  // namespace freqfed
