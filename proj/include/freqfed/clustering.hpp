#pragma once

#include <map>
#include <vector>

#include "freqfed/frequency.hpp"

namespace freqfed {

/// Symmetric K x K distance matrix with zero diagonal, entries in [0, 2].
struct DistanceMatrix {
    std::vector<double> entries;
    int k = 0;

    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * k + j]; }
    double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * k + j]; }
    void validate() const;  // throws on asymmetry, bad diagonal, or out-of-range entries
};

struct HdbscanParams {
    int min_cluster_size = 2;
    int min_samples = 1;
};

/// Per-model cluster labels. -1 is noise; non-negative ids are clusters,
/// numbered by ascending smallest member index.
struct ClusterAssignment {
    std::vector<int> labels;
    std::map<int, int> cluster_sizes;
};

/// d(i,j) = 1 - cos(F_i, F_j), diagonal forced to exactly zero.
/// Throws on a zero-norm fingerprint, naming the offending index.
DistanceMatrix cosine_distance_matrix(const std::vector<FrequencyFingerprint>& fps);

/// Density-based hierarchical clustering over a precomputed distance matrix:
/// core distances (min_samples-th nearest neighbour, self excluded), mutual
/// reachability, a Prim minimum spanning tree, the single-linkage hierarchy,
/// a condensed tree under min_cluster_size, and excess-of-mass cluster
/// selection. The root cluster is eligible for selection, so a dataset that
/// never splits yields one all-points cluster rather than all noise.
///
/// Membership contract: points that leave a selected cluster while it lives
/// on (sub-min_cluster_size spin-offs of the root trunk) are noise; points of
/// a selected non-root cluster are members wherever in its subtree they drop
/// out. Ties are deterministic: equal-weight MST edges sort lexicographically
/// and equal stabilities resolve in favour of the parent.
ClusterAssignment hdbscan(const DistanceMatrix& d, const HdbscanParams& p);

/// Indices of the largest non-noise cluster; size ties break toward the
/// smallest label id. Throws if every point is noise.
std::vector<int> select_accepted(const ClusterAssignment& assignment);

/// select_accepted(hdbscan(cosine_distance_matrix(fps), p)).
std::vector<int> filter_models(const std::vector<FrequencyFingerprint>& fps,
                               const HdbscanParams& p);

// Exposed for tests and the benchmark: MST edges (u, v, weight) over the
// mutual-reachability graph, lexicographic tie-breaking.
struct MstEdge {
    int u;
    int v;
    double weight;
};
std::vector<double> core_distances(const DistanceMatrix& d, int min_samples);
std::vector<double> mutual_reachability(const DistanceMatrix& d, int min_samples);
std::vector<MstEdge> minimum_spanning_tree(const std::vector<double>& weights, int k);

}  // namespace freqfed
