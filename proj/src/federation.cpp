#include "freqfed/federation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "freqfed/aggregation.hpp"
#include "freqfed/log.hpp"
#include "freqfed/rng.hpp"
#include "json.hpp"

namespace freqfed {

namespace {

// Seed-derivation tags; one stream per purpose keeps every stage independent.
enum SeedTag : std::uint64_t {
    kSeedDataset = 1,
    kSeedHoldout = 2,
    kSeedPartition = 3,
    kSeedMaliciousPick = 4,
    kSeedPoison = 5,
    kSeedInit = 6,
    kSeedTrain = 7,
    kSeedAttack = 8,
    kSeedTemplate = 9
};

bool timings_enabled() {
    static bool enabled = [] {
        const char* env = std::getenv("FREQFED_TIMINGS");
        return env != nullptr && std::string(env) == "1";
    }();
    return enabled;
}

int malicious_count(const FederationConfig& cfg) {
    if (cfg.attack.kind == AttackKind::none) return 0;
    return static_cast<int>(std::floor(cfg.attack.pmr * cfg.num_clients));
}

}  // namespace

bool is_targeted(AttackKind kind) {
    switch (kind) {
        case AttackKind::pixel_backdoor:
        case AttackKind::concentrated_backdoor:
        case AttackKind::adaptive_frequency:
        case AttackKind::benign_freq_injection:
            return true;
        default:
            return false;
    }
}

void FederationConfig::validate() const {
    if (num_clients < 2) throw std::invalid_argument("config: K must be >= 2");
    if (rounds < 1) throw std::invalid_argument("config: T must be >= 1");
    arch.validate();
    training.validate();
    if (iid_rate < 0.0 || iid_rate > 1.0) throw std::invalid_argument("config: iid_rate in [0,1]");
    if (holdout_fraction <= 0.0 || holdout_fraction >= 1.0) {
        throw std::invalid_argument("config: holdout_fraction in (0,1)");
    }
    if (trimmed_beta < 0.0 || trimmed_beta >= 0.5) {
        throw std::invalid_argument("config: trimmed_beta in [0, 0.5)");
    }
    if (hdbscan_params.min_cluster_size < 2) {
        throw std::invalid_argument("config: min_cluster_size >= 2");
    }
    if (hdbscan_params.min_samples < 1 || hdbscan_params.min_samples > num_clients - 1) {
        throw std::invalid_argument("config: min_samples in [1, K-1]");
    }
    if (attack.kind != AttackKind::none) {
        if (attack.pmr < 0.0 || attack.pmr >= 1.0) {
            throw std::invalid_argument("config: pmr in [0, 1)");
        }
        if (attack.pdr < 0.0 || attack.pdr > 1.0) throw std::invalid_argument("config: pdr in [0,1]");
        if (attack.scale_gamma < 1.0) throw std::invalid_argument("config: scale_gamma >= 1");
        if (attack.alpha <= 0.0 || attack.alpha > 1.0) {
            throw std::invalid_argument("config: alpha in (0, 1]");
        }
        if (attack.kind == AttackKind::random_update && attack.noise_sigma <= 0.0) {
            throw std::invalid_argument("config: random_update needs noise_sigma > 0");
        }
        if (attack.kind == AttackKind::pgd_untargeted && attack.tau <= 0.0) {
            throw std::invalid_argument("config: pgd_untargeted needs tau > 0");
        }
        if (attack.pmr >= 0.5) {
            log_warn("attack pmr >= 0.5 violates the k_A < K/2 assumption; running anyway");
        }
    }
}

namespace {

LabeledDataset build_source(const FederationConfig& cfg) {
    const std::uint64_t seed = derive_seed(cfg.master_seed, kSeedDataset);
    switch (cfg.dataset.kind) {
        case DatasetSpec::Kind::blobs:
            return make_blobs(cfg.dataset.blobs_classes, cfg.dataset.blobs_per_class,
                              cfg.dataset.blobs_dim, cfg.dataset.blobs_spread, seed);
        case DatasetSpec::Kind::synth_images:
            return make_synth_images(cfg.dataset.synth_classes, cfg.dataset.synth_count,
                                     cfg.dataset.synth_side, cfg.dataset.synth_noise, seed,
                                     cfg.dataset.synth_class_scale);
        case DatasetSpec::Kind::idx:
            return load_idx(cfg.dataset.idx_images, cfg.dataset.idx_labels);
    }
    throw std::logic_error("unreachable dataset kind");
}

}  // namespace

FederationState make_federation_state(const FederationConfig& cfg) {
    cfg.validate();
    FederationState state;

    LabeledDataset source = build_source(cfg);
    if (source.feature_dim != cfg.arch.input_dim()) {
        throw std::invalid_argument("config: dataset feature dim does not match arch input dim");
    }
    const int num_classes = cfg.arch.output_dim();
    for (int y : source.labels) {
        if (y >= num_classes) {
            throw std::invalid_argument("config: dataset labels exceed arch output dim");
        }
    }

    // Fixed held-out split, never partitioned to clients.
    std::vector<int> order(source.num_samples());
    std::iota(order.begin(), order.end(), 0);
    Rng holdout_rng(derive_seed(cfg.master_seed, kSeedHoldout));
    holdout_rng.shuffle(order);
    const int holdout_count =
        std::max(1, static_cast<int>(std::lround(cfg.holdout_fraction * source.num_samples())));
    std::vector<int> holdout_idx(order.begin(), order.begin() + holdout_count);
    std::vector<int> pool_idx(order.begin() + holdout_count, order.end());
    state.holdout = subset(source, holdout_idx);
    LabeledDataset pool = subset(source, pool_idx);

    double max_feature = 0.0;
    for (double v : source.features) max_feature = std::max(max_feature, v);
    state.trigger = default_trigger(source.feature_dim, max_feature > 0.0 ? max_feature : 1.0);
    if (is_targeted(cfg.attack.kind)) {
        state.triggered_holdout = apply_trigger_all(state.holdout, state.trigger);
    }

    const PartitionPlan plan =
        iid_partition(pool, cfg.num_clients, cfg.iid_rate, derive_seed(cfg.master_seed, kSeedPartition));
    state.client_data.resize(cfg.num_clients);
    for (int k = 0; k < cfg.num_clients; ++k) {
        state.client_data[k] = subset(pool, plan.client_indices[k]);
    }

    // Malicious set: first k_A indices of a seeded shuffle, fixed per federation.
    state.malicious.assign(cfg.num_clients, false);
    const int k_a = malicious_count(cfg);
    if (k_a > 0) {
        std::vector<int> ids(cfg.num_clients);
        std::iota(ids.begin(), ids.end(), 0);
        Rng pick_rng(derive_seed(cfg.master_seed, kSeedMaliciousPick, cfg.attack.seed));
        pick_rng.shuffle(ids);
        for (int t = 0; t < k_a; ++t) state.malicious[ids[t]] = true;
    }

    // Poison malicious training data once up front; the poisoned dataset is a
    // property of the client, not of the round.
    state.client_clean.resize(cfg.num_clients);
    state.poisoned_rows.resize(cfg.num_clients);
    for (int k = 0; k < cfg.num_clients; ++k) {
        if (!state.malicious[k]) continue;
        const std::uint64_t seed = derive_seed(cfg.master_seed, kSeedPoison, cfg.attack.seed, k);
        switch (cfg.attack.kind) {
            case AttackKind::label_flip:
                state.client_clean[k] = state.client_data[k];
                state.client_data[k] =
                    label_flip(state.client_data[k], cfg.attack.pdr, num_classes, seed);
                break;
            case AttackKind::pixel_backdoor:
            case AttackKind::concentrated_backdoor:
            case AttackKind::adaptive_frequency:
            case AttackKind::benign_freq_injection:
                state.client_clean[k] = state.client_data[k];
                state.client_data[k] =
                    pixel_backdoor_poison(state.client_data[k], state.trigger,
                                          cfg.attack.target_label, cfg.attack.pdr, seed,
                                          &state.poisoned_rows[k]);
                break;
            default:
                break;  // random_update / pgd_untargeted manipulate the model, not the data
        }
    }

    state.global = init_model(cfg.arch, derive_seed(cfg.master_seed, kSeedInit));
    state.round = 0;
    return state;
}

namespace {

TrainingConfig client_training_config(const FederationConfig& cfg, int round, int client) {
    TrainingConfig tc = cfg.training;
    tc.seed = derive_seed(cfg.master_seed, kSeedTrain, static_cast<std::uint64_t>(round), client);
    return tc;
}

/// The malicious client's own benign data: the rows poisoning left untouched,
/// or the pre-poison copy when everything was poisoned.
LabeledDataset benign_portion(const FederationState& state, int client) {
    const auto& clean = state.client_clean[client];
    const auto& poisoned = state.poisoned_rows[client];
    if (poisoned.empty()) return clean;
    std::vector<bool> hit(clean.num_samples(), false);
    for (int r : poisoned) hit[r] = true;
    std::vector<int> keep;
    for (int r = 0; r < clean.num_samples(); ++r) {
        if (!hit[r]) keep.push_back(r);
    }
    if (keep.empty()) return clean;
    return subset(clean, keep);
}

ParameterVector malicious_update(const FederationState& state, const FederationConfig& cfg,
                                 int client, int round,
                                 const FrequencyFingerprint* known_benign_fp) {
    const TrainingConfig tc = client_training_config(cfg, round, client);
    const std::uint64_t attack_seed =
        derive_seed(cfg.master_seed, kSeedAttack, static_cast<std::uint64_t>(round), client);
    const auto& data = state.client_data[client];
    switch (cfg.attack.kind) {
        case AttackKind::label_flip:
            return client_update(state.global, data, tc);
        case AttackKind::random_update:
            return random_update(cfg.arch, state.global, cfg.attack.noise_sigma, attack_seed);
        case AttackKind::pgd_untargeted:
            return pgd_untargeted(state.global, data, tc, cfg.attack.tau);
        case AttackKind::pixel_backdoor: {
            ParameterVector w = client_update(state.global, data, tc);
            return scale_update(w, state.global, cfg.attack.scale_gamma);
        }
        case AttackKind::adaptive_frequency: {
            FrequencyFingerprint tmpl;
            if (cfg.attack.known_benign) {
                tmpl = *known_benign_fp;
            } else {
                TrainingConfig tmpl_cfg = tc;
                tmpl_cfg.seed =
                    derive_seed(cfg.master_seed, kSeedTemplate, static_cast<std::uint64_t>(round), client);
                tmpl = fingerprint(client_update(state.global, benign_portion(state, client), tmpl_cfg));
            }
            ParameterVector w =
                adaptive_frequency_train(state.global, data, tmpl, cfg.attack.alpha, tc);
            return scale_update(w, state.global, cfg.attack.scale_gamma);
        }
        case AttackKind::benign_freq_injection: {
            TrainingConfig src_cfg = tc;
            src_cfg.seed =
                derive_seed(cfg.master_seed, kSeedTemplate, static_cast<std::uint64_t>(round), client);
            const ParameterVector benign_source =
                client_update(state.global, benign_portion(state, client), src_cfg);
            ParameterVector w = benign_freq_injection_train(state.global, data, benign_source, tc);
            return scale_update(w, state.global, cfg.attack.scale_gamma);
        }
        default:
            throw std::logic_error("malicious_update: unexpected attack kind");
    }
}

}  // namespace

RoundReport run_round(FederationState& state, const FederationConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    state.round += 1;
    const int round = state.round;
    const int k = cfg.num_clients;

    std::vector<ParameterVector> models(k);
    std::vector<std::exception_ptr> errors(k);

    // Benign updates first (the adaptive attack's known-benign template reads one).
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < k; ++i) {
        if (state.malicious[i]) continue;
        try {
            models[i] = client_update(state.global, state.client_data[i],
                                      client_training_config(cfg, round, i));
        } catch (...) {
            errors[i] = std::current_exception();
        }
    }
    for (int i = 0; i < k; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
    }

    std::vector<int> malicious_ids;
    for (int i = 0; i < k; ++i) {
        if (state.malicious[i]) malicious_ids.push_back(i);
    }

    if (!malicious_ids.empty()) {
        if (cfg.attack.kind == AttackKind::concentrated_backdoor) {
            // All compromised clients coordinate on one template model.
            const int leader = malicious_ids.front();
            ParameterVector base = client_update(state.global, state.client_data[leader],
                                                 client_training_config(cfg, round, leader));
            base = scale_update(base, state.global, cfg.attack.scale_gamma);
            const auto copies = concentrated_submission(
                base, static_cast<int>(malicious_ids.size()), cfg.attack.noise_sigma,
                derive_seed(cfg.master_seed, kSeedAttack, static_cast<std::uint64_t>(round)));
            for (std::size_t t = 0; t < malicious_ids.size(); ++t) {
                models[malicious_ids[t]] = copies[t];
            }
        } else {
            FrequencyFingerprint known_fp;
            const FrequencyFingerprint* known_ptr = nullptr;
            if (cfg.attack.kind == AttackKind::adaptive_frequency && cfg.attack.known_benign) {
                for (int i = 0; i < k; ++i) {
                    if (!state.malicious[i]) {
                        known_fp = fingerprint(models[i]);
                        known_ptr = &known_fp;
                        break;
                    }
                }
                if (known_ptr == nullptr) {
                    throw std::runtime_error("adaptive_frequency: no benign client to observe");
                }
            }
#pragma omp parallel for schedule(dynamic)
            for (std::size_t t = 0; t < malicious_ids.size(); ++t) {
                const int i = malicious_ids[t];
                try {
                    models[i] = malicious_update(state, cfg, i, round, known_ptr);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
            for (int i = 0; i < k; ++i) {
                if (errors[i]) std::rethrow_exception(errors[i]);
            }
        }
    }

    RoundReport report;
    report.round = round;
    bool keep_previous_global = false;
    std::vector<int> accepted;

    switch (cfg.defense) {
        case Defense::freqfed: {
            std::vector<FrequencyFingerprint> fps(k);
#pragma omp parallel for schedule(dynamic)
            for (int i = 0; i < k; ++i) {
                try {
                    fps[i] = fingerprint(models[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
            for (int i = 0; i < k; ++i) {
                if (errors[i]) std::rethrow_exception(errors[i]);
            }
            try {
                const auto assignment = hdbscan(cosine_distance_matrix(fps), cfg.hdbscan_params);
                for (const auto& [label, count] : assignment.cluster_sizes) {
                    report.cluster_sizes.push_back(count);
                }
                accepted = select_accepted(assignment);
            } catch (const std::exception& e) {
                log_warn(std::string("round ") + std::to_string(round) +
                         ": clustering rejected every model (" + e.what() +
                         "); keeping previous global model");
                report.fallback = true;
                keep_previous_global = true;
            }
            break;
        }
        case Defense::none:
        case Defense::median:
        case Defense::trimmed_mean:
        case Defense::fedavg_weighted: {
            accepted.resize(k);
            std::iota(accepted.begin(), accepted.end(), 0);
            break;
        }
        case Defense::krum: {
            const int f = cfg.krum_f >= 0 ? cfg.krum_f : std::max(0, (k - 3) / 2);
            const ParameterVector chosen = krum(models, f);
            for (int i = 0; i < k; ++i) {
                if (models[i].values == chosen.values) {
                    accepted.push_back(i);
                    break;
                }
            }
            break;
        }
    }

    if (!keep_previous_global) {
        switch (cfg.defense) {
            case Defense::freqfed:
            case Defense::none:
                state.global = mean_accepted(models, accepted);
                break;
            case Defense::median:
                state.global = coordinate_median(models);
                break;
            case Defense::trimmed_mean:
                state.global = trimmed_mean(models, cfg.trimmed_beta);
                break;
            case Defense::fedavg_weighted: {
                std::vector<ClientContribution> contribs;
                contribs.reserve(k);
                for (int i = 0; i < k; ++i) {
                    contribs.push_back({models[i], state.client_data[i].num_samples()});
                }
                state.global = fedavg_weighted(contribs);
                break;
            }
            case Defense::krum:
                state.global = models[accepted.front()];
                break;
        }
    }

    report.accepted = accepted;
    std::vector<bool> is_accepted(k, false);
    for (int i : accepted) is_accepted[i] = true;
    for (int i = 0; i < k; ++i) {
        if (!is_accepted[i]) report.rejected.push_back(i);
        if (state.malicious[i]) {
            if (is_accepted[i]) {
                report.true_malicious_accepted += 1;
            } else {
                report.true_malicious_rejected += 1;
            }
        }
    }

    report.ma = evaluate_ma(state.global, state.holdout);
    if (is_targeted(cfg.attack.kind)) {
        report.ba = evaluate_ba(state.global, state.triggered_holdout, cfg.attack.target_label);
    }

    const auto t_end = std::chrono::steady_clock::now();
    report.wall_time_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(t_end - t_start).count();

    log_info("round " + std::to_string(round) + ": ma=" + std::to_string(report.ma) +
             " ba=" + std::to_string(report.ba) + " accepted=" +
             std::to_string(report.accepted.size()) + "/" + std::to_string(k));
    return report;
}

std::vector<RoundReport> run_federation(const FederationConfig& cfg, FederationState& state) {
    state = make_federation_state(cfg);
    std::vector<RoundReport> reports;
    reports.reserve(cfg.rounds);
    for (int t = 0; t < cfg.rounds; ++t) {
        try {
            reports.push_back(run_round(state, cfg));
        } catch (const std::exception& e) {
            throw std::runtime_error("round " + std::to_string(t + 1) + ": " + e.what());
        }
    }
    return reports;
}

std::vector<RoundReport> run_federation(const FederationConfig& cfg) {
    FederationState state;
    return run_federation(cfg, state);
}

std::vector<SweepRow> sweep(const FederationConfig& base, SweepAxis axis,
                            const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("sweep: no values");
    std::vector<SweepRow> rows;
    for (double v : values) {
        FederationConfig cfg = base;
        switch (axis) {
            case SweepAxis::pmr:
                if (cfg.attack.kind == AttackKind::none) {
                    throw std::invalid_argument("sweep over pmr requires an attack");
                }
                cfg.attack.pmr = v;
                break;
            case SweepAxis::pdr:
                if (cfg.attack.kind == AttackKind::none) {
                    throw std::invalid_argument("sweep over pdr requires an attack");
                }
                cfg.attack.pdr = v;
                break;
            case SweepAxis::iid_rate:
                cfg.iid_rate = v;
                break;
        }
        SweepRow row;
        row.value = v;
        try {
            const auto reports = run_federation(cfg);
            row.final_ma = reports.back().ma;
            row.final_ba = reports.back().ba;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string report_csv(const std::vector<RoundReport>& rounds) {
    std::string out =
        "round,ma,ba,n_accepted,n_rejected,n_true_malicious_rejected,"
        "n_true_malicious_accepted,wall_time_ms\n";
    for (const auto& r : rounds) {
        const long long wall = timings_enabled() ? r.wall_time_ms : 0;
        out += std::to_string(r.round) + "," + format_double(r.ma) + "," + format_double(r.ba) +
               "," + std::to_string(r.accepted.size()) + "," + std::to_string(r.rejected.size()) +
               "," + std::to_string(r.true_malicious_rejected) + "," +
               std::to_string(r.true_malicious_accepted) + "," + std::to_string(wall) + "\n";
    }
    return out;
}

std::string report_json(const std::vector<RoundReport>& rounds) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rounds) {
        nlohmann::json j;
        j["round"] = r.round;
        j["ma"] = r.ma;
        j["ba"] = r.ba;
        j["accepted"] = r.accepted;
        j["rejected"] = r.rejected;
        j["cluster_sizes"] = r.cluster_sizes;
        j["n_true_malicious_rejected"] = r.true_malicious_rejected;
        j["n_true_malicious_accepted"] = r.true_malicious_accepted;
        j["wall_time_ms"] = timings_enabled() ? r.wall_time_ms : 0;
        j["fallback"] = r.fallback;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

const char* axis_name(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::pmr:
            return "pmr";
        case SweepAxis::pdr:
            return "pdr";
        case SweepAxis::iid_rate:
            return "iid_rate";
    }
    return "?";
}

std::string sweep_csv(const std::vector<SweepRow>& rows, SweepAxis axis) {
    std::string out = std::string(axis_name(axis)) + ",ma,ba,error\n";
    for (const auto& r : rows) {
        out += format_double(r.value) + "," + format_double(r.final_ma) + "," +
               format_double(r.final_ba) + "," + (r.failed ? r.error : "") + "\n";
    }
    return out;
}

std::string sweep_json(const std::vector<SweepRow>& rows, SweepAxis axis) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j;
        j[axis_name(axis)] = r.value;
        j["ma"] = r.final_ma;
        j["ba"] = r.final_ba;
        if (r.failed) j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace freqfed
