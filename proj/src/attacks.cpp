#include "freqfed/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "freqfed/rng.hpp"

namespace freqfed {

void TriggerSpec::validate(int input_dim) const {
    if (pixel_indices.empty()) throw std::invalid_argument("TriggerSpec: no pixels");
    for (int idx : pixel_indices) {
        if (idx < 0 || idx >= input_dim) {
            throw std::invalid_argument("TriggerSpec: pixel index out of range");
        }
    }
}

TriggerSpec default_trigger(int input_dim, double pixel_value) {
    TriggerSpec t;
    t.pixel_value = pixel_value;
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(input_dim))));
    if (side >= 2 && side * side == input_dim) {
        t.pixel_indices = {0, 1, side, side + 1};
    } else {
        for (int i = 0; i < std::min(4, input_dim); ++i) t.pixel_indices.push_back(i);
    }
    return t;
}

namespace {

std::vector<int> seeded_subset(int n, double rate, Rng& rng) {
    const int count = static_cast<int>(std::ceil(rate * n));
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    order.resize(std::min(count, n));
    return order;
}

}  // namespace

LabeledDataset label_flip(const LabeledDataset& data, double pdr, int num_classes,
                          std::uint64_t seed) {
    data.validate();
    if (num_classes < 2) throw std::invalid_argument("label_flip: need at least 2 classes");
    if (pdr < 0.0 || pdr > 1.0) throw std::invalid_argument("label_flip: pdr must be in [0, 1]");
    LabeledDataset out = data;
    if (pdr == 0.0) return out;
    Rng rng(seed);
    for (int idx : seeded_subset(data.num_samples(), pdr, rng)) {
        const int original = out.labels[idx];
        int flipped = static_cast<int>(rng.below(num_classes - 1));
        if (flipped >= original) ++flipped;  // uniform over the other labels
        out.labels[idx] = flipped;
    }
    return out;
}

ParameterVector random_update(const ModelArch& arch, const ParameterVector& reference,
                              double sigma, std::uint64_t seed) {
    if (!(sigma > 0.0)) throw std::invalid_argument("random_update: sigma must be > 0");
    if (reference.arch != arch) throw std::invalid_argument("random_update: arch mismatch");
    ParameterVector out = reference;
    Rng rng(seed);
    for (auto& v : out.values) v += rng.normal(0.0, sigma);
    return out;
}

ParameterVector pgd_untargeted(const ParameterVector& global, const LabeledDataset& data,
                               const TrainingConfig& cfg, double tau) {
    if (tau < 0.0) throw std::invalid_argument("pgd_untargeted: tau must be >= 0");
    if (tau == 0.0) return global;
    const double eta = cfg.learning_rate;
    const std::vector<double>& center = global.values;
    return sgd_train(
        global, data, cfg,
        [](const ParameterVector& w, const LabeledDataset& d, const std::vector<int>& batch) {
            return loss_gradient(w, d, batch);
        },
        [eta, tau, &center](std::vector<double>& w, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < w.size(); ++i) w[i] += eta * grad[i];  // ascent
            double norm_sq = 0.0;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double diff = w[i] - center[i];
                norm_sq += diff * diff;
            }
            const double norm = std::sqrt(norm_sq);
            if (norm > tau) {
                const double scale = tau / norm;
                for (std::size_t i = 0; i < w.size(); ++i) {
                    w[i] = center[i] + (w[i] - center[i]) * scale;
                }
            }
        },
        nullptr);
}

LabeledDataset pixel_backdoor_poison(const LabeledDataset& data, const TriggerSpec& trigger,
                                     int target_label, double pdr, std::uint64_t seed,
                                     std::vector<int>* poisoned_indices) {
    data.validate();
    trigger.validate(data.feature_dim);
    if (pdr < 0.0 || pdr > 1.0) throw std::invalid_argument("pixel_backdoor_poison: bad pdr");
    LabeledDataset out = data;
    if (poisoned_indices) poisoned_indices->clear();
    if (pdr == 0.0) return out;
    Rng rng(seed);
    for (int idx : seeded_subset(data.num_samples(), pdr, rng)) {
        double* row = out.row(idx);
        for (int p : trigger.pixel_indices) row[p] = trigger.pixel_value;
        out.labels[idx] = target_label;
        if (poisoned_indices) poisoned_indices->push_back(idx);
    }
    return out;
}

LabeledDataset apply_trigger_all(const LabeledDataset& data, const TriggerSpec& trigger) {
    data.validate();
    trigger.validate(data.feature_dim);
    LabeledDataset out = data;
    for (int s = 0; s < out.num_samples(); ++s) {
        double* row = out.row(s);
        for (int p : trigger.pixel_indices) row[p] = trigger.pixel_value;
    }
    return out;
}

ParameterVector scale_update(const ParameterVector& malicious, const ParameterVector& global,
                             double gamma) {
    if (gamma < 1.0) throw std::invalid_argument("scale_update: gamma must be >= 1");
    if (malicious.arch != global.arch) throw std::invalid_argument("scale_update: arch mismatch");
    ParameterVector out = malicious;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] = global.values[i] + gamma * (malicious.values[i] - global.values[i]);
    }
    return out;
}

std::vector<ParameterVector> concentrated_submission(const ParameterVector& temp, int count,
                                                     double noise_sigma, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("concentrated_submission: count must be >= 1");
    if (noise_sigma < 0.0) throw std::invalid_argument("concentrated_submission: bad sigma");
    std::vector<ParameterVector> out(count, temp);
    if (noise_sigma == 0.0) return out;
    Rng rng(seed);
    for (auto& copy : out) {
        for (auto& v : copy.values) v += rng.normal(0.0, noise_sigma);
    }
    return out;
}

namespace {

struct CosineParts {
    double dot;
    double norm_w;
    double norm_t;
    FrequencyFingerprint fp;
};

CosineParts cosine_parts(const std::vector<double>& w, const FrequencyFingerprint& template_fp) {
    CosineParts parts;
    parts.fp = fingerprint(w);
    if (parts.fp.coeffs.size() != template_fp.coeffs.size()) {
        throw std::invalid_argument("anomaly loss: fingerprint length mismatch");
    }
    parts.dot = 0.0;
    double nw = 0.0;
    double nt = 0.0;
    for (std::size_t i = 0; i < parts.fp.coeffs.size(); ++i) {
        parts.dot += parts.fp.coeffs[i] * template_fp.coeffs[i];
        nw += parts.fp.coeffs[i] * parts.fp.coeffs[i];
        nt += template_fp.coeffs[i] * template_fp.coeffs[i];
    }
    parts.norm_w = std::sqrt(nw);
    parts.norm_t = std::sqrt(nt);
    if (parts.norm_w == 0.0 || parts.norm_t == 0.0) {
        throw std::runtime_error("anomaly loss: zero-norm fingerprint");
    }
    return parts;
}

}  // namespace

double anomaly_loss(const std::vector<double>& w, const FrequencyFingerprint& template_fp) {
    const auto parts = cosine_parts(w, template_fp);
    return 1.0 - parts.dot / (parts.norm_w * parts.norm_t);
}

std::vector<double> anomaly_loss_gradient(const std::vector<double>& w,
                                          const FrequencyFingerprint& template_fp) {
    const auto parts = cosine_parts(w, template_fp);
    const auto& f = parts.fp.coeffs;
    const auto& g = template_fp.coeffs;
    // d(1 - cos)/dF = -(g / (|F||g|) - (F.g) F / (|F|^3 |g|))
    std::vector<double> dfp(f.size());
    const double inv_fg = 1.0 / (parts.norm_w * parts.norm_t);
    const double dot_over = parts.dot / (parts.norm_w * parts.norm_w * parts.norm_w * parts.norm_t);
    for (std::size_t i = 0; i < f.size(); ++i) {
        dfp[i] = -(g[i] * inv_fg - f[i] * dot_over);
    }
    // Adjoint of the fingerprint map: scatter into the kept indices, inverse
    // DCT (the transform is orthonormal), then read back the packed prefix.
    const int n = parts.fp.source_n;
    CoefficientMatrix scattered{std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), n};
    const auto kept = low_frequency_indices(n);
    for (std::size_t t = 0; t < kept.size(); ++t) {
        scattered.at(kept[t].first, kept[t].second) = dfp[t];
    }
    return unpack_from_square(idct2(scattered), static_cast<int>(w.size()));
}

ParameterVector adaptive_frequency_train(const ParameterVector& global,
                                         const LabeledDataset& poisoned_data,
                                         const FrequencyFingerprint& benign_template_fp,
                                         double alpha, const TrainingConfig& cfg) {
    if (alpha <= 0.0 || alpha > 1.0) {
        throw std::invalid_argument("adaptive_frequency_train: alpha must be in (0, 1]");
    }
    const double eta = cfg.learning_rate;
    return sgd_train(
        global, poisoned_data, cfg,
        [alpha, &benign_template_fp](const ParameterVector& w, const LabeledDataset& d,
                                     const std::vector<int>& batch) {
            std::vector<double> grad = loss_gradient(w, d, batch);
            if (alpha == 1.0) return grad;  // keep the reduction path bit-identical
            const auto ano = anomaly_loss_gradient(w.values, benign_template_fp);
            for (std::size_t i = 0; i < grad.size(); ++i) {
                grad[i] = alpha * grad[i] + (1.0 - alpha) * ano[i];
            }
            return grad;
        },
        [eta](std::vector<double>& w, const std::vector<double>& grad) {
            if (eta == 0.0) return;
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * grad[i];
        },
        nullptr);
}

ParameterVector benign_freq_injection_epoch(const ParameterVector& w,
                                            const ParameterVector& benign_fp_source) {
    if (w.arch != benign_fp_source.arch) {
        throw std::invalid_argument("benign_freq_injection_epoch: arch mismatch");
    }
    CoefficientMatrix v = dct2(pack_to_square(w));
    const CoefficientMatrix benign = dct2(pack_to_square(benign_fp_source));
    for (auto [i, j] : low_frequency_indices(v.n)) v.at(i, j) = benign.at(i, j);
    ParameterVector out = w;
    out.values = unpack_from_square(idct2(v), w.size());
    return out;
}

ParameterVector benign_freq_injection_train(const ParameterVector& global,
                                            const LabeledDataset& poisoned_data,
                                            const ParameterVector& benign_fp_source,
                                            const TrainingConfig& cfg) {
    const double eta = cfg.learning_rate;
    const ModelArch arch = global.arch;
    return sgd_train(
        global, poisoned_data, cfg,
        [](const ParameterVector& w, const LabeledDataset& d, const std::vector<int>& batch) {
            return loss_gradient(w, d, batch);
        },
        [eta](std::vector<double>& w, const std::vector<double>& grad) {
            if (eta == 0.0) return;
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= eta * grad[i];
        },
        [&benign_fp_source, arch](std::vector<double>& w, int) {
            ParameterVector current;
            current.values = w;
            current.arch = arch;
            w = benign_freq_injection_epoch(current, benign_fp_source).values;
        });
}

}  // namespace freqfed
