#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "freqfed/model.hpp"

namespace freqfed {

/// Per-client sample-index lists into one source dataset. Lists are disjoint;
/// every client is nonempty.
struct PartitionPlan {
    std::vector<std::vector<int>> client_indices;
    double iid_rate = 1.0;
    int num_clients = 0;
};

/// Splits a source dataset across K clients with the given IID rate: clients
/// are assigned round-robin to label groups; a fraction iid_rate of each
/// client's samples is drawn from the whole pool and the remainder only from
/// the client's own label group. Sampling is without replacement and sizes
/// are equal up to one sample. Deterministic per seed.
PartitionPlan iid_partition(const LabeledDataset& source, int num_clients, double iid_rate,
                            std::uint64_t seed);

LabeledDataset subset(const LabeledDataset& source, const std::vector<int>& indices);

/// Loads an IDX image/label file pair (big-endian, magics 0x00000803 and
/// 0x00000801). Pixels are scaled to [0, 1] by dividing by 255.
LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Gaussian blobs around per-class means placed on scaled unit axes.
LabeledDataset make_blobs(int num_classes, int per_class, int dim, double spread,
                          std::uint64_t seed);

/// Synthetic image-classification dataset: per-class smooth random prototype
/// fields on a side x side grid plus per-sample gaussian pixel noise, clamped
/// to [0, 1]. Labels are balanced. Stands in for a digits subset when no IDX
/// files are available.
LabeledDataset make_synth_images(int num_classes, int count, int side, double noise_sigma,
                                 std::uint64_t seed, double class_scale = 0.2);

}  // namespace freqfed
