#include "freqfed/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace freqfed {

void DistanceMatrix::validate() const {
    if (k < 1 || entries.size() != static_cast<std::size_t>(k) * k) {
        throw std::invalid_argument("DistanceMatrix: bad shape");
    }
    for (int i = 0; i < k; ++i) {
        if (at(i, i) != 0.0) throw std::invalid_argument("DistanceMatrix: nonzero diagonal");
        for (int j = 0; j < k; ++j) {
            const double v = at(i, j);
            if (!std::isfinite(v) || v < 0.0 || v > 2.0) {
                throw std::invalid_argument("DistanceMatrix: entry out of [0,2]");
            }
            if (v != at(j, i)) throw std::invalid_argument("DistanceMatrix: not symmetric");
        }
    }
}

DistanceMatrix cosine_distance_matrix(const std::vector<FrequencyFingerprint>& fps) {
    const int k = static_cast<int>(fps.size());
    if (k < 2) throw std::invalid_argument("cosine_distance_matrix: need at least 2 fingerprints");
    const std::size_t len = fps[0].coeffs.size();
    for (const auto& fp : fps) {
        if (fp.coeffs.size() != len) {
            throw std::invalid_argument("cosine_distance_matrix: fingerprint length mismatch");
        }
    }
    std::vector<double> norms(k);
    for (int i = 0; i < k; ++i) {
        double acc = 0.0;
        for (double v : fps[i].coeffs) acc += v * v;
        norms[i] = std::sqrt(acc);
        if (norms[i] == 0.0) {
            throw std::runtime_error("cosine_distance_matrix: zero-norm fingerprint for client " +
                                     std::to_string(i));
        }
    }
    DistanceMatrix d{std::vector<double>(static_cast<std::size_t>(k) * k, 0.0), k};
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            double dot = 0.0;
            for (std::size_t t = 0; t < len; ++t) dot += fps[i].coeffs[t] * fps[j].coeffs[t];
            double dist = 1.0 - dot / (norms[i] * norms[j]);
            dist = std::clamp(dist, 0.0, 2.0);  // shave rounding outside the valid range
            d.at(i, j) = dist;
            d.at(j, i) = dist;
        }
    }
    return d;
}

std::vector<double> core_distances(const DistanceMatrix& d, int min_samples) {
    const int k = d.k;
    if (min_samples < 1 || min_samples > k - 1) {
        throw std::invalid_argument("hdbscan: min_samples must be in [1, K-1]");
    }
    std::vector<double> core(k);
    std::vector<double> row;
    for (int i = 0; i < k; ++i) {
        row.clear();
        for (int j = 0; j < k; ++j) {
            if (j != i) row.push_back(d.at(i, j));
        }
        std::sort(row.begin(), row.end());
        core[i] = row[min_samples - 1];
    }
    return core;
}

std::vector<double> mutual_reachability(const DistanceMatrix& d, int min_samples) {
    const int k = d.k;
    const auto core = core_distances(d, min_samples);
    std::vector<double> mr(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            mr[static_cast<std::size_t>(i) * k + j] =
                std::max({core[i], core[j], d.at(i, j)});
        }
    }
    return mr;
}

std::vector<MstEdge> minimum_spanning_tree(const std::vector<double>& weights, int k) {
    // Prim from vertex 0; ties go to the smallest candidate vertex, and each
    // edge is reported with its endpoints ordered (min, max).
    std::vector<bool> in_tree(k, false);
    std::vector<double> best(k, std::numeric_limits<double>::infinity());
    std::vector<int> best_from(k, -1);
    in_tree[0] = true;
    for (int j = 1; j < k; ++j) {
        best[j] = weights[static_cast<std::size_t>(0) * k + j];
        best_from[j] = 0;
    }
    std::vector<MstEdge> edges;
    edges.reserve(k - 1);
    for (int step = 1; step < k; ++step) {
        int pick = -1;
        for (int j = 0; j < k; ++j) {
            if (in_tree[j]) continue;
            if (pick == -1 || best[j] < best[pick]) pick = j;
        }
        in_tree[pick] = true;
        edges.push_back({std::min(best_from[pick], pick), std::max(best_from[pick], pick),
                         best[pick]});
        for (int j = 0; j < k; ++j) {
            if (in_tree[j]) continue;
            const double w = weights[static_cast<std::size_t>(pick) * k + j];
            if (w < best[j]) {
                best[j] = w;
                best_from[j] = pick;
            }
        }
    }
    std::sort(edges.begin(), edges.end(), [](const MstEdge& a, const MstEdge& b) {
        if (a.weight != b.weight) return a.weight < b.weight;
        if (a.u != b.u) return a.u < b.u;
        return a.v < b.v;
    });
    return edges;
}

namespace {

constexpr double kMinDistance = 1e-12;  // lambda = 1/d clamp for zero distances

double lambda_of(double distance) { return 1.0 / std::max(distance, kMinDistance); }

struct DendroNode {
    int left = -1;
    int right = -1;
    double height = 0.0;
    int size = 1;
};

// Single-linkage merge tree over sorted MST edges. Leaves are 0..k-1,
// internal nodes k..2k-2, the last node is the root.
std::vector<DendroNode> build_dendrogram(const std::vector<MstEdge>& edges, int k) {
    std::vector<DendroNode> nodes(2 * k - 1);
    std::vector<int> parent(2 * k - 1);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    std::vector<int> comp_node(2 * k - 1);
    std::iota(comp_node.begin(), comp_node.end(), 0);
    int next = k;
    for (const auto& e : edges) {
        const int ra = find(e.u);
        const int rb = find(e.v);
        DendroNode& n = nodes[next];
        n.left = comp_node[ra];
        n.right = comp_node[rb];
        n.height = e.weight;
        n.size = nodes[n.left].size + nodes[n.right].size;
        parent[ra] = rb;
        comp_node[find(rb)] = next;
        ++next;
    }
    return nodes;
}

void collect_points(const std::vector<DendroNode>& nodes, int node, std::vector<int>& out) {
    if (nodes[node].left < 0) {
        out.push_back(node);
        return;
    }
    collect_points(nodes, nodes[node].left, out);
    collect_points(nodes, nodes[node].right, out);
}

struct CondensedCluster {
    int parent = -1;
    double birth_lambda = 0.0;
    double death_lambda = 0.0;
    double stability = 0.0;
    std::vector<int> children;
};

struct CondensedTree {
    std::vector<CondensedCluster> clusters;  // id 0 is the root
    std::vector<int> exit_cluster;           // per point
    std::vector<double> exit_lambda;         // per point
    std::vector<bool> exit_at_death;         // true when the cluster died with the point inside
};

// The event pieces of an internal node: maximal subtrees below the chain of
// equal-height merges, so simultaneous merges act as one multi-way event.
std::vector<int> event_pieces(const std::vector<DendroNode>& nodes, int node, double height) {
    std::vector<int> pieces;
    std::vector<int> stack{node};
    while (!stack.empty()) {
        const int x = stack.back();
        stack.pop_back();
        if (nodes[x].left >= 0 && nodes[x].height == height) {
            stack.push_back(nodes[x].left);
            stack.push_back(nodes[x].right);
        } else {
            pieces.push_back(x);
        }
    }
    std::sort(pieces.begin(), pieces.end());
    return pieces;
}

CondensedTree condense(const std::vector<DendroNode>& nodes, int k, int min_cluster_size) {
    CondensedTree tree;
    tree.exit_cluster.assign(k, -1);
    tree.exit_lambda.assign(k, 0.0);
    tree.exit_at_death.assign(k, false);

    struct Work {
        int cluster;
        int node;
    };
    tree.clusters.push_back(CondensedCluster{});  // root, birth lambda 0
    std::vector<Work> stack{{0, 2 * k - 2}};
    std::vector<int> pts;

    while (!stack.empty()) {
        Work w = stack.back();
        stack.pop_back();
        int node = w.node;
        const int cluster = w.cluster;
        const double birth = tree.clusters[cluster].birth_lambda;

        while (true) {
            const double h = nodes[node].height;
            const double event_lambda = lambda_of(h);
            const auto pieces = event_pieces(nodes, node, h);

            std::vector<int> big;
            for (int p : pieces) {
                if (nodes[p].size >= min_cluster_size) big.push_back(p);
            }

            auto record_exits = [&](int piece, bool at_death) {
                pts.clear();
                collect_points(nodes, piece, pts);
                for (int p : pts) {
                    tree.exit_cluster[p] = cluster;
                    tree.exit_lambda[p] = event_lambda;
                    tree.exit_at_death[p] = at_death;
                }
                tree.clusters[cluster].stability +=
                    static_cast<double>(pts.size()) * (event_lambda - birth);
            };

            if (big.size() >= 2) {
                // True split: every surviving piece becomes a child cluster.
                tree.clusters[cluster].death_lambda = event_lambda;
                for (int p : pieces) {
                    if (nodes[p].size < min_cluster_size) record_exits(p, false);
                }
                for (int p : big) {
                    tree.clusters[cluster].stability +=
                        static_cast<double>(nodes[p].size) * (event_lambda - birth);
                    CondensedCluster child;
                    child.parent = cluster;
                    child.birth_lambda = event_lambda;
                    const int child_id = static_cast<int>(tree.clusters.size());
                    tree.clusters.push_back(child);
                    tree.clusters[cluster].children.push_back(child_id);
                    stack.push_back({child_id, p});
                }
                break;
            }
            if (big.size() == 1) {
                // The cluster lives on through its one large piece; smaller
                // pieces fall out of it here.
                for (int p : pieces) {
                    if (p != big[0]) record_exits(p, false);
                }
                node = big[0];
                continue;
            }
            // Dissolution: no piece is large enough to carry the cluster on.
            tree.clusters[cluster].death_lambda = event_lambda;
            for (int p : pieces) record_exits(p, true);
            break;
        }
    }
    return tree;
}

// Excess-of-mass selection, root eligible. Returns the chosen cluster ids.
std::vector<bool> select_eom(const CondensedTree& tree) {
    const int n = static_cast<int>(tree.clusters.size());
    std::vector<double> score(n, 0.0);
    std::vector<bool> preferred(n, false);
    for (int c = n - 1; c >= 0; --c) {  // children have larger ids than parents
        const auto& cl = tree.clusters[c];
        if (cl.children.empty()) {
            score[c] = cl.stability;
            preferred[c] = true;
            continue;
        }
        double child_sum = 0.0;
        for (int ch : cl.children) child_sum += score[ch];
        if (cl.stability >= child_sum) {
            score[c] = cl.stability;
            preferred[c] = true;
        } else {
            score[c] = child_sum;
        }
    }
    // A cluster is selected when it is preferred and no ancestor is.
    std::vector<bool> selected(n, false);
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        if (preferred[c]) {
            selected[c] = true;
            continue;
        }
        for (int ch : tree.clusters[c].children) stack.push_back(ch);
    }
    return selected;
}

}  // namespace

ClusterAssignment hdbscan(const DistanceMatrix& d, const HdbscanParams& p) {
    d.validate();
    const int k = d.k;
    if (p.min_cluster_size < 2) throw std::invalid_argument("hdbscan: min_cluster_size must be >= 2");
    if (k < p.min_cluster_size) throw std::invalid_argument("hdbscan: K < min_cluster_size");

    const auto mr = mutual_reachability(d, p.min_samples);
    const auto edges = minimum_spanning_tree(mr, k);
    const auto nodes = build_dendrogram(edges, k);
    const auto tree = condense(nodes, k, p.min_cluster_size);
    const auto selected = select_eom(tree);

    // Resolve every point to the nearest selected cluster above its exit
    // point. A point that fell off the root trunk while the root cluster
    // lived on stays noise even when the root is the selected cluster.
    std::vector<int> raw_label(k, -1);
    for (int i = 0; i < k; ++i) {
        int c = tree.exit_cluster[i];
        int found = -1;
        while (c >= 0) {
            if (selected[c]) {
                found = c;
                break;
            }
            c = tree.clusters[c].parent;
        }
        if (found < 0) continue;
        if (found == tree.exit_cluster[i] && found == 0 && !tree.exit_at_death[i]) continue;
        raw_label[i] = found;
    }

    // Relabel clusters 0.. by ascending smallest member index.
    std::map<int, int> first_member;
    for (int i = 0; i < k; ++i) {
        if (raw_label[i] >= 0 && first_member.find(raw_label[i]) == first_member.end()) {
            first_member[raw_label[i]] = i;
        }
    }
    std::vector<std::pair<int, int>> order;  // (first member, raw id)
    for (auto [raw, first] : first_member) order.emplace_back(first, raw);
    std::sort(order.begin(), order.end());
    std::map<int, int> relabel;
    for (std::size_t t = 0; t < order.size(); ++t) relabel[order[t].second] = static_cast<int>(t);

    ClusterAssignment out;
    out.labels.assign(k, -1);
    for (int i = 0; i < k; ++i) {
        if (raw_label[i] >= 0) {
            out.labels[i] = relabel[raw_label[i]];
            out.cluster_sizes[out.labels[i]] += 1;
        }
    }
    return out;
}

std::vector<int> select_accepted(const ClusterAssignment& assignment) {
    int best_label = -1;
    int best_count = 0;
    for (const auto& [label, count] : assignment.cluster_sizes) {
        if (label < 0) continue;
        if (count > best_count) {  // map iterates ascending, so ties keep the smaller id
            best_count = count;
            best_label = label;
        }
    }
    if (best_label < 0) {
        throw std::runtime_error("select_accepted: every model was labeled noise");
    }
    std::vector<int> accepted;
    for (std::size_t i = 0; i < assignment.labels.size(); ++i) {
        if (assignment.labels[i] == best_label) accepted.push_back(static_cast<int>(i));
    }
    return accepted;
}

std::vector<int> filter_models(const std::vector<FrequencyFingerprint>& fps,
                               const HdbscanParams& p) {
    return select_accepted(hdbscan(cosine_distance_matrix(fps), p));
}

}  // namespace freqfed
