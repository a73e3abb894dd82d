#pragma once

// Test-only oracles, written directly from definitions and independent of the
// library's implementation paths.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "freqfed/model.hpp"

namespace oracles {

/// Brute-force density clustering reference: core distances and mutual
/// reachability by definition, the cluster hierarchy recovered by threshold
/// connectivity queries (no spanning tree), condensed-tree stabilities summed
/// term by term, excess-of-mass selection bottom-up. Returns labels with -1
/// for noise, clusters numbered by smallest member index.
std::vector<int> reference_hdbscan(const std::vector<double>& distances, int k,
                                   int min_cluster_size, int min_samples);

/// Canonical form of a labeling: sorted list of sorted clusters plus the
/// sorted noise set, for partition comparison across implementations.
std::string canonical_partition(const std::vector<int>& labels);

/// Minimum spanning-tree weight by exhaustive enumeration of all labeled
/// trees via Prüfer sequences (k <= 8 or so).
double brute_force_mst_weight(const std::vector<double>& weights, int k);

/// Central finite-difference gradient of an arbitrary scalar function.
std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> at,
    double step = 1e-5);

/// Worst-case symmetric relative error between two gradients.
double max_relative_error(const std::vector<double>& a, const std::vector<double>& b);

/// Closed-form nearest-class-mean classifier accuracy on its own training
/// data; the independent check for SGD training on separable data.
double nearest_mean_accuracy(const freqfed::LabeledDataset& data);

/// Writes a dataset as an IDX image/label pair (features must be in [0, 1];
/// they are quantized to bytes). Fixture support for load_idx tests.
void write_idx(const freqfed::LabeledDataset& data, int rows, int cols,
               const std::string& images_path, const std::string& labels_path);

}  // namespace oracles
