#include "freqfed/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace freqfed {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
    }
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad seed for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
    if (out.empty()) throw ConfigError("config: empty list for " + key);
    return out;
}

Defense parse_defense(const std::string& value) {
    if (value == "freqfed") return Defense::freqfed;
    if (value == "none") return Defense::none;
    if (value == "krum") return Defense::krum;
    if (value == "median") return Defense::median;
    if (value == "trimmed_mean") return Defense::trimmed_mean;
    if (value == "fedavg_weighted") return Defense::fedavg_weighted;
    throw ConfigError("config: unknown defense '" + value + "'");
}

AttackKind parse_attack(const std::string& value) {
    if (value == "none") return AttackKind::none;
    if (value == "label_flip") return AttackKind::label_flip;
    if (value == "random_update") return AttackKind::random_update;
    if (value == "pgd_untargeted") return AttackKind::pgd_untargeted;
    if (value == "pixel_backdoor") return AttackKind::pixel_backdoor;
    if (value == "concentrated_backdoor") return AttackKind::concentrated_backdoor;
    if (value == "adaptive_frequency") return AttackKind::adaptive_frequency;
    if (value == "benign_freq_injection") return AttackKind::benign_freq_injection;
    throw ConfigError("config: unknown attack '" + value + "'");
}

DatasetSpec::Kind parse_dataset_kind(const std::string& value) {
    if (value == "blobs") return DatasetSpec::Kind::blobs;
    if (value == "synth_images") return DatasetSpec::Kind::synth_images;
    if (value == "idx") return DatasetSpec::Kind::idx;
    throw ConfigError("config: unknown dataset '" + value + "'");
}

const char* defense_name(Defense d) {
    switch (d) {
        case Defense::freqfed: return "freqfed";
        case Defense::none: return "none";
        case Defense::krum: return "krum";
        case Defense::median: return "median";
        case Defense::trimmed_mean: return "trimmed_mean";
        case Defense::fedavg_weighted: return "fedavg_weighted";
    }
    return "?";
}

const char* attack_name(AttackKind a) {
    switch (a) {
        case AttackKind::none: return "none";
        case AttackKind::label_flip: return "label_flip";
        case AttackKind::random_update: return "random_update";
        case AttackKind::pgd_untargeted: return "pgd_untargeted";
        case AttackKind::pixel_backdoor: return "pixel_backdoor";
        case AttackKind::concentrated_backdoor: return "concentrated_backdoor";
        case AttackKind::adaptive_frequency: return "adaptive_frequency";
        case AttackKind::benign_freq_injection: return "benign_freq_injection";
    }
    return "?";
}

const char* dataset_name(DatasetSpec::Kind k) {
    switch (k) {
        case DatasetSpec::Kind::blobs: return "blobs";
        case DatasetSpec::Kind::synth_images: return "synth_images";
        case DatasetSpec::Kind::idx: return "idx";
    }
    return "?";
}

}  // namespace

FederationConfig parse_config_text(const std::string& text) {
    FederationConfig cfg;
    using Setter = std::function<void(FederationConfig&, const std::string&, const std::string&)>;
    static const std::map<std::string, Setter> setters = {
        {"K", [](auto& c, auto& k, auto& v) { c.num_clients = parse_int(k, v); }},
        {"T", [](auto& c, auto& k, auto& v) { c.rounds = parse_int(k, v); }},
        {"arch", [](auto& c, auto& k, auto& v) { c.arch.layer_dims = parse_int_list(k, v); }},
        {"activation",
         [](auto& c, auto&, auto& v) {
             if (v == "relu") c.arch.activation = Activation::relu;
             else if (v == "tanh") c.arch.activation = Activation::tanh;
             else throw ConfigError("config: unknown activation '" + v + "'");
         }},
        {"learning_rate",
         [](auto& c, auto& k, auto& v) { c.training.learning_rate = parse_double(k, v); }},
        {"local_epochs",
         [](auto& c, auto& k, auto& v) { c.training.local_epochs = parse_int(k, v); }},
        {"batch_size", [](auto& c, auto& k, auto& v) { c.training.batch_size = parse_int(k, v); }},
        {"defense", [](auto& c, auto&, auto& v) { c.defense = parse_defense(v); }},
        {"trimmed_beta", [](auto& c, auto& k, auto& v) { c.trimmed_beta = parse_double(k, v); }},
        {"krum_f", [](auto& c, auto& k, auto& v) { c.krum_f = parse_int(k, v); }},
        {"min_cluster_size",
         [](auto& c, auto& k, auto& v) { c.hdbscan_params.min_cluster_size = parse_int(k, v); }},
        {"min_samples",
         [](auto& c, auto& k, auto& v) { c.hdbscan_params.min_samples = parse_int(k, v); }},
        {"attack", [](auto& c, auto&, auto& v) { c.attack.kind = parse_attack(v); }},
        {"pmr", [](auto& c, auto& k, auto& v) { c.attack.pmr = parse_double(k, v); }},
        {"pdr", [](auto& c, auto& k, auto& v) { c.attack.pdr = parse_double(k, v); }},
        {"target_label", [](auto& c, auto& k, auto& v) { c.attack.target_label = parse_int(k, v); }},
        {"scale_gamma", [](auto& c, auto& k, auto& v) { c.attack.scale_gamma = parse_double(k, v); }},
        {"alpha", [](auto& c, auto& k, auto& v) { c.attack.alpha = parse_double(k, v); }},
        {"tau", [](auto& c, auto& k, auto& v) { c.attack.tau = parse_double(k, v); }},
        {"noise_sigma", [](auto& c, auto& k, auto& v) { c.attack.noise_sigma = parse_double(k, v); }},
        {"known_benign", [](auto& c, auto& k, auto& v) { c.attack.known_benign = parse_bool(k, v); }},
        {"attack_seed", [](auto& c, auto& k, auto& v) { c.attack.seed = parse_u64(k, v); }},
        {"dataset", [](auto& c, auto&, auto& v) { c.dataset.kind = parse_dataset_kind(v); }},
        {"blobs_classes", [](auto& c, auto& k, auto& v) { c.dataset.blobs_classes = parse_int(k, v); }},
        {"blobs_per_class",
         [](auto& c, auto& k, auto& v) { c.dataset.blobs_per_class = parse_int(k, v); }},
        {"blobs_dim", [](auto& c, auto& k, auto& v) { c.dataset.blobs_dim = parse_int(k, v); }},
        {"blobs_spread", [](auto& c, auto& k, auto& v) { c.dataset.blobs_spread = parse_double(k, v); }},
        {"synth_classes", [](auto& c, auto& k, auto& v) { c.dataset.synth_classes = parse_int(k, v); }},
        {"synth_count", [](auto& c, auto& k, auto& v) { c.dataset.synth_count = parse_int(k, v); }},
        {"synth_side", [](auto& c, auto& k, auto& v) { c.dataset.synth_side = parse_int(k, v); }},
        {"synth_noise", [](auto& c, auto& k, auto& v) { c.dataset.synth_noise = parse_double(k, v); }},
        {"synth_class_scale",
         [](auto& c, auto& k, auto& v) { c.dataset.synth_class_scale = parse_double(k, v); }},
        {"idx_images", [](auto& c, auto&, auto& v) { c.dataset.idx_images = v; }},
        {"idx_labels", [](auto& c, auto&, auto& v) { c.dataset.idx_labels = v; }},
        {"iid_rate", [](auto& c, auto& k, auto& v) { c.iid_rate = parse_double(k, v); }},
        {"holdout_fraction",
         [](auto& c, auto& k, auto& v) { c.holdout_fraction = parse_double(k, v); }},
        {"master_seed", [](auto& c, auto& k, auto& v) { c.master_seed = parse_u64(k, v); }},
        {"out_dir", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
    };

    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key +
                              "'");
        }
        it->second(cfg, key, value);
    }
    return cfg;
}

FederationConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_text(const FederationConfig& cfg) {
    std::ostringstream out;
    out << "K = " << cfg.num_clients << "\n";
    out << "T = " << cfg.rounds << "\n";
    out << "arch = ";
    for (std::size_t i = 0; i < cfg.arch.layer_dims.size(); ++i) {
        out << (i ? "," : "") << cfg.arch.layer_dims[i];
    }
    out << "\n";
    out << "activation = " << (cfg.arch.activation == Activation::relu ? "relu" : "tanh") << "\n";
    out << "learning_rate = " << cfg.training.learning_rate << "\n";
    out << "local_epochs = " << cfg.training.local_epochs << "\n";
    out << "batch_size = " << cfg.training.batch_size << "\n";
    out << "defense = " << defense_name(cfg.defense) << "\n";
    out << "trimmed_beta = " << cfg.trimmed_beta << "\n";
    out << "krum_f = " << cfg.krum_f << "\n";
    out << "min_cluster_size = " << cfg.hdbscan_params.min_cluster_size << "\n";
    out << "min_samples = " << cfg.hdbscan_params.min_samples << "\n";
    out << "attack = " << attack_name(cfg.attack.kind) << "\n";
    out << "pmr = " << cfg.attack.pmr << "\n";
    out << "pdr = " << cfg.attack.pdr << "\n";
    out << "target_label = " << cfg.attack.target_label << "\n";
    out << "scale_gamma = " << cfg.attack.scale_gamma << "\n";
    out << "alpha = " << cfg.attack.alpha << "\n";
    out << "tau = " << cfg.attack.tau << "\n";
    out << "noise_sigma = " << cfg.attack.noise_sigma << "\n";
    out << "known_benign = " << (cfg.attack.known_benign ? "true" : "false") << "\n";
    out << "attack_seed = " << cfg.attack.seed << "\n";
    out << "dataset = " << dataset_name(cfg.dataset.kind) << "\n";
    out << "blobs_classes = " << cfg.dataset.blobs_classes << "\n";
    out << "blobs_per_class = " << cfg.dataset.blobs_per_class << "\n";
    out << "blobs_dim = " << cfg.dataset.blobs_dim << "\n";
    out << "blobs_spread = " << cfg.dataset.blobs_spread << "\n";
    out << "synth_classes = " << cfg.dataset.synth_classes << "\n";
    out << "synth_count = " << cfg.dataset.synth_count << "\n";
    out << "synth_side = " << cfg.dataset.synth_side << "\n";
    out << "synth_noise = " << cfg.dataset.synth_noise << "\n";
    out << "synth_class_scale = " << cfg.dataset.synth_class_scale << "\n";
    if (!cfg.dataset.idx_images.empty()) out << "idx_images = " << cfg.dataset.idx_images << "\n";
    if (!cfg.dataset.idx_labels.empty()) out << "idx_labels = " << cfg.dataset.idx_labels << "\n";
    out << "iid_rate = " << cfg.iid_rate << "\n";
    out << "holdout_fraction = " << cfg.holdout_fraction << "\n";
    out << "master_seed = " << cfg.master_seed << "\n";
    out << "out_dir = " << cfg.out_dir << "\n";
    return out.str();
}

}  // namespace freqfed
