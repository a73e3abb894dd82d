#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "freqfed/attacks.hpp"
#include "freqfed/clustering.hpp"
#include "freqfed/data.hpp"
#include "freqfed/model.hpp"

namespace freqfed {

enum class Defense { freqfed, none, krum, median, trimmed_mean, fedavg_weighted };

enum class AttackKind {
    none,
    label_flip,
    random_update,
    pgd_untargeted,
    pixel_backdoor,
    concentrated_backdoor,
    adaptive_frequency,
    benign_freq_injection
};

/// True for attacks that implant a trigger->target behaviour; those runs get
/// a backdoor-accuracy evaluation, the rest report ba = -1.
bool is_targeted(AttackKind kind);

struct AttackConfig {
    AttackKind kind = AttackKind::none;
    double pmr = 0.0;          // fraction of malicious clients
    double pdr = 0.5;          // fraction of poisoned samples per malicious client
    int target_label = 0;
    double scale_gamma = 1.0;  // update boosting factor, >= 1
    double alpha = 0.7;        // class-loss weight of the adaptive attack
    double tau = 1.0;          // PGD distance budget
    double noise_sigma = 0.0;  // random-update / concentrated-copy noise
    bool known_benign = false; // adaptive template from a real benign update
    std::uint64_t seed = 1;
};

struct DatasetSpec {
    enum class Kind { blobs, synth_images, idx };
    Kind kind = Kind::blobs;
    int blobs_classes = 4;
    int blobs_per_class = 100;
    int blobs_dim = 16;
    double blobs_spread = 0.15;
    int synth_classes = 10;
    int synth_count = 5556;
    int synth_side = 28;
    double synth_noise = 0.25;
    double synth_class_scale = 0.2;
    std::string idx_images;
    std::string idx_labels;
};

struct FederationConfig {
    int num_clients = 10;  // K
    int rounds = 5;        // T
    ModelArch arch{{16, 8, 4}, Activation::relu};
    TrainingConfig training{0.3, 2, 32, 0};
    Defense defense = Defense::freqfed;
    double trimmed_beta = 0.2;
    int krum_f = -1;  // -1 selects the largest f with K >= 2f + 3
    HdbscanParams hdbscan_params;
    AttackConfig attack;
    DatasetSpec dataset;
    double iid_rate = 1.0;
    double holdout_fraction = 0.1;
    std::uint64_t master_seed = 42;
    std::string out_dir = ".";

    void validate() const;
};

struct RoundReport {
    int round = 0;     // 1-based
    double ma = 0.0;
    double ba = -1.0;  // -1 when no backdoor attack is configured
    std::vector<int> accepted;
    std::vector<int> rejected;
    std::vector<int> cluster_sizes;
    int true_malicious_rejected = 0;
    int true_malicious_accepted = 0;
    long long wall_time_ms = 0;
    bool fallback = false;  // clustering rejected everything; kept previous model
};

/// Mutable state threaded through the round loop.
struct FederationState {
    ParameterVector global;
    std::vector<LabeledDataset> client_data;      // training data as each client sees it
    std::vector<LabeledDataset> client_clean;     // pre-poison copy (malicious clients only)
    std::vector<std::vector<int>> poisoned_rows;  // per client, rows altered by poisoning
    std::vector<bool> malicious;
    LabeledDataset holdout;
    LabeledDataset triggered_holdout;  // empty unless the attack is targeted
    TriggerSpec trigger;
    int round = 0;
};

FederationState make_federation_state(const FederationConfig& cfg);

/// One server iteration: client updates (benign or per the attack),
/// fingerprinting and filtering under the configured defense, aggregation,
/// and metric evaluation. Deterministic from the master seed.
RoundReport run_round(FederationState& state, const FederationConfig& cfg);

std::vector<RoundReport> run_federation(const FederationConfig& cfg);
std::vector<RoundReport> run_federation(const FederationConfig& cfg, FederationState& state);

enum class SweepAxis { pmr, pdr, iid_rate };

struct SweepRow {
    double value = 0.0;
    double final_ma = 0.0;
    double final_ba = -1.0;
    bool failed = false;
    std::string error;
};

/// One full federation per axis value; final-round MA/BA per value.
std::vector<SweepRow> sweep(const FederationConfig& base, SweepAxis axis,
                            const std::vector<double>& values);

// Report writers. Timing columns are zeroed unless FREQFED_TIMINGS=1 so that
// reruns of the same seed produce byte-identical files.
std::string report_csv(const std::vector<RoundReport>& rounds);
std::string report_json(const std::vector<RoundReport>& rounds);
std::string sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis);
std::string sweep_json(const std::vector<SweepRow>& rows, SweepAxis axis);
void write_file(const std::string& path, const std::string& content);

const char* axis_name(SweepAxis axis);

}  // namespace freqfed
