#include "freqfed/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "freqfed/rng.hpp"

namespace freqfed {

PartitionPlan iid_partition(const LabeledDataset& source, int num_clients, double iid_rate,
                            std::uint64_t seed) {
    source.validate();
    if (num_clients < 1) throw std::invalid_argument("iid_partition: K must be >= 1");
    if (source.num_samples() < num_clients) {
        throw std::invalid_argument("iid_partition: fewer samples than clients");
    }
    if (iid_rate < 0.0 || iid_rate > 1.0) {
        throw std::invalid_argument("iid_partition: iid_rate must be in [0, 1]");
    }
    const int n = source.num_samples();
    const int num_labels = *std::max_element(source.labels.begin(), source.labels.end()) + 1;

    Rng rng(seed);
    std::vector<std::vector<int>> by_label(num_labels);
    for (int i = 0; i < n; ++i) by_label[source.labels[i]].push_back(i);
    for (auto& group : by_label) rng.shuffle(group);

    std::vector<int> global_order(n);
    std::iota(global_order.begin(), global_order.end(), 0);
    rng.shuffle(global_order);

    // Client k draws its non-iid share from label group k mod L.
    for (int k = 0; k < num_clients; ++k) {
        if (by_label[k % num_labels].empty()) {
            throw std::runtime_error("iid_partition: label group " +
                                     std::to_string(k % num_labels) + " is empty in source");
        }
    }

    std::vector<int> quota(num_clients, n / num_clients);
    for (int k = 0; k < n % num_clients; ++k) quota[k] += 1;

    std::vector<bool> taken(n, false);
    std::vector<std::size_t> group_cursor(num_labels, 0);
    std::size_t global_cursor = 0;

    PartitionPlan plan;
    plan.iid_rate = iid_rate;
    plan.num_clients = num_clients;
    plan.client_indices.assign(num_clients, {});

    auto draw_from_group = [&](int label) -> int {
        auto& cursor = group_cursor[label];
        const auto& group = by_label[label];
        while (cursor < group.size() && taken[group[cursor]]) ++cursor;
        if (cursor >= group.size()) return -1;
        const int idx = group[cursor++];
        taken[idx] = true;
        return idx;
    };
    auto draw_global = [&]() -> int {
        while (global_cursor < global_order.size() && taken[global_order[global_cursor]]) {
            ++global_cursor;
        }
        if (global_cursor >= global_order.size()) return -1;
        const int idx = global_order[global_cursor++];
        taken[idx] = true;
        return idx;
    };

    // Non-iid shares first so each client's label group is not exhausted by
    // earlier clients' iid draws; shortfalls fall back to the global pool.
    std::vector<int> non_iid(num_clients);
    for (int k = 0; k < num_clients; ++k) {
        non_iid[k] = static_cast<int>(std::llround((1.0 - iid_rate) * quota[k]));
        non_iid[k] = std::min(non_iid[k], quota[k]);
        const int label = k % num_labels;
        for (int t = 0; t < non_iid[k]; ++t) {
            const int idx = draw_from_group(label);
            if (idx < 0) break;
            plan.client_indices[k].push_back(idx);
        }
    }
    for (int k = 0; k < num_clients; ++k) {
        while (static_cast<int>(plan.client_indices[k].size()) < quota[k]) {
            const int idx = draw_global();
            if (idx < 0) break;
            plan.client_indices[k].push_back(idx);
        }
        if (plan.client_indices[k].empty()) {
            throw std::runtime_error("iid_partition: client " + std::to_string(k) + " got no data");
        }
        std::sort(plan.client_indices[k].begin(), plan.client_indices[k].end());
    }
    return plan;
}

LabeledDataset subset(const LabeledDataset& source, const std::vector<int>& indices) {
    LabeledDataset out;
    out.feature_dim = source.feature_dim;
    out.features.reserve(indices.size() * static_cast<std::size_t>(source.feature_dim));
    out.labels.reserve(indices.size());
    for (int idx : indices) {
        if (idx < 0 || idx >= source.num_samples()) {
            throw std::invalid_argument("subset: index out of range");
        }
        const double* row = source.row(idx);
        out.features.insert(out.features.end(), row, row + source.feature_dim);
        out.labels.push_back(source.labels[idx]);
    }
    return out;
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw std::runtime_error("load_idx: truncated file " + path);
    }
    return (static_cast<std::uint32_t>(bytes[0]) << 24) |
           (static_cast<std::uint32_t>(bytes[1]) << 16) |
           (static_cast<std::uint32_t>(bytes[2]) << 8) | static_cast<std::uint32_t>(bytes[3]);
}

}  // namespace

LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) throw std::runtime_error("load_idx: cannot open " + images_path);
    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw std::runtime_error("load_idx: cannot open " + labels_path);

    if (read_be32(images, images_path) != 0x00000803u) {
        throw std::runtime_error("load_idx: bad image magic in " + images_path);
    }
    if (read_be32(labels, labels_path) != 0x00000801u) {
        throw std::runtime_error("load_idx: bad label magic in " + labels_path);
    }
    const std::uint32_t n_images = read_be32(images, images_path);
    const std::uint32_t rows = read_be32(images, images_path);
    const std::uint32_t cols = read_be32(images, images_path);
    const std::uint32_t n_labels = read_be32(labels, labels_path);
    if (n_images != n_labels) {
        throw std::runtime_error("load_idx: image/label count mismatch");
    }
    if (rows == 0 || cols == 0) throw std::runtime_error("load_idx: zero image dimensions");

    LabeledDataset out;
    out.feature_dim = static_cast<int>(rows * cols);
    out.features.resize(static_cast<std::size_t>(n_images) * out.feature_dim);
    out.labels.resize(n_images);

    std::vector<unsigned char> buf(static_cast<std::size_t>(n_images) * out.feature_dim);
    if (!images.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
        throw std::runtime_error("load_idx: truncated image data in " + images_path);
    }
    for (std::size_t i = 0; i < buf.size(); ++i) out.features[i] = buf[i] / 255.0;

    std::vector<unsigned char> lab(n_images);
    if (!labels.read(reinterpret_cast<char*>(lab.data()), static_cast<std::streamsize>(lab.size()))) {
        throw std::runtime_error("load_idx: truncated label data in " + labels_path);
    }
    for (std::uint32_t i = 0; i < n_images; ++i) out.labels[i] = lab[i];
    return out;
}

LabeledDataset make_blobs(int num_classes, int per_class, int dim, double spread,
                          std::uint64_t seed) {
    if (num_classes < 1 || per_class < 1 || dim < 1 || spread < 0.0) {
        throw std::invalid_argument("make_blobs: all parameters must be positive");
    }
    Rng rng(seed);
    // Class c centers on axis dim-1-(c mod dim), counted from the top so the
    // leading coordinates stay class-neutral (backdoor triggers live there);
    // the offset grows with the wrap count when num_classes > dim.
    std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim, 0.0));
    for (int c = 0; c < num_classes; ++c) {
        means[c][dim - 1 - (c % dim)] = 1.0 + static_cast<double>(c / dim);
    }
    LabeledDataset out;
    out.feature_dim = dim;
    out.features.reserve(static_cast<std::size_t>(num_classes) * per_class * dim);
    out.labels.reserve(static_cast<std::size_t>(num_classes) * per_class);
    for (int c = 0; c < num_classes; ++c) {
        for (int s = 0; s < per_class; ++s) {
            for (int d = 0; d < dim; ++d) {
                out.features.push_back(means[c][d] + (spread > 0.0 ? rng.normal(0.0, spread) : 0.0));
            }
            out.labels.push_back(c);
        }
    }
    return out;
}

namespace {

// Coarse seeded random field upsampled bilinearly to side x side.
std::vector<double> smooth_field(int side, int coarse, double amplitude, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> grid(static_cast<std::size_t>(coarse) * coarse);
    for (auto& g : grid) g = rng.uniform(0.0, amplitude);
    std::vector<double> field(static_cast<std::size_t>(side) * side);
    for (int y = 0; y < side; ++y) {
        const double fy = static_cast<double>(y) / (side - 1) * (coarse - 1);
        const int y0 = std::min(static_cast<int>(fy), coarse - 2);
        const double ty = fy - y0;
        for (int x = 0; x < side; ++x) {
            const double fx = static_cast<double>(x) / (side - 1) * (coarse - 1);
            const int x0 = std::min(static_cast<int>(fx), coarse - 2);
            const double tx = fx - x0;
            const double v00 = grid[static_cast<std::size_t>(y0) * coarse + x0];
            const double v01 = grid[static_cast<std::size_t>(y0) * coarse + x0 + 1];
            const double v10 = grid[static_cast<std::size_t>(y0 + 1) * coarse + x0];
            const double v11 = grid[static_cast<std::size_t>(y0 + 1) * coarse + x0 + 1];
            field[static_cast<std::size_t>(y) * side + x] =
                (1 - ty) * ((1 - tx) * v00 + tx * v01) + ty * ((1 - tx) * v10 + tx * v11);
        }
    }
    return field;
}

}  // namespace

LabeledDataset make_synth_images(int num_classes, int count, int side, double noise_sigma,
                                 std::uint64_t seed, double class_scale) {
    if (num_classes < 2 || count < num_classes || side < 2 || noise_sigma < 0.0 ||
        class_scale <= 0.0) {
        throw std::invalid_argument("make_synth_images: bad parameters");
    }
    const int dim = side * side;
    const int coarse = std::max(2, side / 4);

    // All classes share one base pattern; a low-amplitude per-class field on
    // top controls how much the classes overlap (smaller = harder task).
    const auto base = smooth_field(side, coarse, 0.6, derive_seed(seed, 0xBA5E));
    std::vector<std::vector<double>> protos(num_classes);
    for (int c = 0; c < num_classes; ++c) {
        protos[c] = smooth_field(side, coarse, class_scale, derive_seed(seed, 0xC1A55, c));
        for (int d = 0; d < dim; ++d) protos[c][d] += base[d];
    }

    Rng rng(derive_seed(seed, 0x5A3D1E5));
    LabeledDataset out;
    out.feature_dim = dim;
    out.features.resize(static_cast<std::size_t>(count) * dim);
    out.labels.resize(count);
    for (int s = 0; s < count; ++s) {
        const int label = s % num_classes;
        out.labels[s] = label;
        double* row = out.row(s);
        for (int d = 0; d < dim; ++d) {
            const double v = protos[label][d] + (noise_sigma > 0.0 ? rng.normal(0.0, noise_sigma) : 0.0);
            row[d] = std::clamp(v, 0.0, 1.0);
        }
    }
    return out;
}

}  // namespace freqfed
