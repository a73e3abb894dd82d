#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace oracles {

namespace {

constexpr double kMinDistance = 1e-12;

double lambda_of(double d) { return 1.0 / std::max(d, kMinDistance); }

double mr_at(const std::vector<double>& mr, int k, int i, int j) {
    return mr[static_cast<std::size_t>(i) * k + j];
}

// Connected components of `points` using only edges with mr strictly below
// (or equal to, when inclusive) the threshold.
std::vector<std::vector<int>> components_under(const std::vector<double>& mr, int k,
                                               const std::vector<int>& points, double threshold,
                                               bool inclusive) {
    std::vector<std::vector<int>> comps;
    std::set<int> remaining(points.begin(), points.end());
    while (!remaining.empty()) {
        std::vector<int> comp{*remaining.begin()};
        remaining.erase(remaining.begin());
        for (std::size_t head = 0; head < comp.size(); ++head) {
            const int u = comp[head];
            for (auto it = remaining.begin(); it != remaining.end();) {
                const double w = mr_at(mr, k, u, *it);
                const bool connected = inclusive ? (w <= threshold) : (w < threshold);
                if (connected) {
                    comp.push_back(*it);
                    it = remaining.erase(it);
                } else {
                    ++it;
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end());
    return comps;
}

// Smallest distinct mutual-reachability value within the point set at which
// the set is one connected component.
double connectivity_threshold(const std::vector<double>& mr, int k,
                              const std::vector<int>& points) {
    std::set<double> values;
    for (std::size_t a = 0; a < points.size(); ++a) {
        for (std::size_t b = a + 1; b < points.size(); ++b) {
            values.insert(mr_at(mr, k, points[a], points[b]));
        }
    }
    for (double v : values) {
        if (components_under(mr, k, points, v, true).size() == 1) return v;
    }
    throw std::logic_error("connectivity_threshold: set never connects");
}

struct RefCluster {
    int parent = -1;
    double birth_lambda = 0.0;
    double stability = 0.0;
    std::vector<int> children;
};

struct RefExit {
    int cluster = -1;
    bool at_death = false;
};

struct RefTree {
    std::vector<RefCluster> clusters;
    std::vector<RefExit> exits;  // per point
};

// Walks one cluster trunk: peel spurs while one large piece continues, stop
// at a true split or at dissolution.
void process_cluster(const std::vector<double>& mr, int k, int mcs, RefTree& tree, int cluster,
                     std::vector<int> points) {
    while (true) {
        const double birth = tree.clusters[cluster].birth_lambda;
        const double d_conn = connectivity_threshold(mr, k, points);
        const double event_lambda = lambda_of(d_conn);
        const auto pieces = components_under(mr, k, points, d_conn, false);

        std::vector<const std::vector<int>*> big;
        for (const auto& p : pieces) {
            if (static_cast<int>(p.size()) >= mcs) big.push_back(&p);
        }
        if (big.size() >= 2) {
            for (const auto& p : pieces) {
                tree.clusters[cluster].stability += p.size() * (event_lambda - birth);
                if (static_cast<int>(p.size()) < mcs) {
                    for (int pt : p) tree.exits[pt] = {cluster, false};
                }
            }
            for (const auto* p : big) {
                RefCluster child;
                child.parent = cluster;
                child.birth_lambda = event_lambda;
                const int child_id = static_cast<int>(tree.clusters.size());
                tree.clusters.push_back(child);
                tree.clusters[cluster].children.push_back(child_id);
                process_cluster(mr, k, mcs, tree, child_id, *p);
            }
            return;
        }
        if (big.size() == 1) {
            for (const auto& p : pieces) {
                if (&p == big.front()) continue;
                tree.clusters[cluster].stability += p.size() * (event_lambda - birth);
                for (int pt : p) tree.exits[pt] = {cluster, false};
            }
            points = *big.front();
            continue;
        }
        for (const auto& p : pieces) {
            tree.clusters[cluster].stability += p.size() * (event_lambda - birth);
            for (int pt : p) tree.exits[pt] = {cluster, true};
        }
        return;
    }
}

}  // namespace

std::vector<int> reference_hdbscan(const std::vector<double>& distances, int k,
                                   int min_cluster_size, int min_samples) {
    // Core distance: min_samples-th nearest other point.
    std::vector<double> core(k);
    for (int i = 0; i < k; ++i) {
        std::vector<double> row;
        for (int j = 0; j < k; ++j) {
            if (j != i) row.push_back(distances[static_cast<std::size_t>(i) * k + j]);
        }
        std::sort(row.begin(), row.end());
        core[i] = row[min_samples - 1];
    }
    std::vector<double> mr(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i != j) {
                mr[static_cast<std::size_t>(i) * k + j] =
                    std::max({core[i], core[j], distances[static_cast<std::size_t>(i) * k + j]});
            }
        }
    }

    RefTree tree;
    tree.exits.assign(k, {});
    tree.clusters.push_back(RefCluster{});
    std::vector<int> all(k);
    std::iota(all.begin(), all.end(), 0);
    process_cluster(mr, k, min_cluster_size, tree, 0, all);

    // Excess-of-mass: a cluster keeps itself when at least as stable as the
    // sum of its children; the root competes like any other cluster.
    const int n = static_cast<int>(tree.clusters.size());
    std::vector<double> score(n, 0.0);
    std::vector<bool> preferred(n, false);
    for (int c = n - 1; c >= 0; --c) {
        double child_sum = 0.0;
        for (int ch : tree.clusters[c].children) child_sum += score[ch];
        if (tree.clusters[c].children.empty() || tree.clusters[c].stability >= child_sum) {
            score[c] = tree.clusters[c].stability;
            preferred[c] = true;
        } else {
            score[c] = child_sum;
        }
    }
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

    std::vector<int> raw(k, -1);
    for (int i = 0; i < k; ++i) {
        int c = tree.exits[i].cluster;
        int found = -1;
        while (c >= 0) {
            if (selected[c]) {
                found = c;
                break;
            }
            c = tree.clusters[c].parent;
        }
        if (found < 0) continue;
        // A point that slid off the living root trunk stays noise.
        if (found == 0 && found == tree.exits[i].cluster && !tree.exits[i].at_death) continue;
        raw[i] = found;
    }

    std::map<int, int> relabel;
    std::vector<int> labels(k, -1);
    for (int i = 0; i < k; ++i) {
        if (raw[i] < 0) continue;
        if (relabel.find(raw[i]) == relabel.end()) {
            const int next = static_cast<int>(relabel.size());
            relabel[raw[i]] = next;
        }
        labels[i] = relabel[raw[i]];
    }
    return labels;
}

std::string canonical_partition(const std::vector<int>& labels) {
    std::map<int, std::vector<int>> groups;
    std::vector<int> noise;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) {
            noise.push_back(static_cast<int>(i));
        } else {
            groups[labels[i]].push_back(static_cast<int>(i));
        }
    }
    std::vector<std::vector<int>> clusters;
    for (auto& [label, members] : groups) clusters.push_back(members);
    std::sort(clusters.begin(), clusters.end());
    std::ostringstream out;
    for (const auto& c : clusters) {
        out << "{";
        for (int m : c) out << m << ",";
        out << "}";
    }
    out << "|noise:{";
    for (int m : noise) out << m << ",";
    out << "}";
    return out.str();
}

double brute_force_mst_weight(const std::vector<double>& weights, int k) {
    if (k < 2) return 0.0;
    if (k == 2) return weights[1];
    const int seq_len = k - 2;
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> seq(seq_len, 0);
    while (true) {
        // Decode the Prüfer sequence to a labeled tree.
        std::vector<int> degree(k, 1);
        for (int s : seq) degree[s] += 1;
        double total = 0.0;
        std::vector<int> deg = degree;
        std::set<int> leaves;
        for (int i = 0; i < k; ++i) {
            if (deg[i] == 1) leaves.insert(i);
        }
        for (int s : seq) {
            const int leaf = *leaves.begin();
            leaves.erase(leaves.begin());
            total += weights[static_cast<std::size_t>(leaf) * k + s];
            if (--deg[s] == 1) leaves.insert(s);
        }
        const int u = *leaves.begin();
        const int v = *std::next(leaves.begin());
        total += weights[static_cast<std::size_t>(u) * k + v];
        best = std::min(best, total);

        int pos = seq_len - 1;
        while (pos >= 0 && seq[pos] == k - 1) {
            seq[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        seq[pos] += 1;
    }
    return best;
}

std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> at,
    double step) {
    std::vector<double> grad(at.size());
    for (std::size_t i = 0; i < at.size(); ++i) {
        const double saved = at[i];
        at[i] = saved + step;
        const double hi = f(at);
        at[i] = saved - step;
        const double lo = f(at);
        at[i] = saved;
        grad[i] = (hi - lo) / (2.0 * step);
    }
    return grad;
}

double max_relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom = std::max(std::abs(a[i]) + std::abs(b[i]), 1e-8);
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

double nearest_mean_accuracy(const freqfed::LabeledDataset& data) {
    const int num_classes = *std::max_element(data.labels.begin(), data.labels.end()) + 1;
    const int dim = data.feature_dim;
    std::vector<std::vector<double>> means(num_classes, std::vector<double>(dim, 0.0));
    std::vector<int> counts(num_classes, 0);
    for (int s = 0; s < data.num_samples(); ++s) {
        counts[data.labels[s]] += 1;
        const double* row = data.row(s);
        for (int d = 0; d < dim; ++d) means[data.labels[s]][d] += row[d];
    }
    for (int c = 0; c < num_classes; ++c) {
        if (counts[c] == 0) continue;
        for (double& v : means[c]) v /= counts[c];
    }
    int correct = 0;
    for (int s = 0; s < data.num_samples(); ++s) {
        const double* row = data.row(s);
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int c = 0; c < num_classes; ++c) {
            if (counts[c] == 0) continue;
            double acc = 0.0;
            for (int d = 0; d < dim; ++d) {
                const double diff = row[d] - means[c][d];
                acc += diff * diff;
            }
            if (acc < best_d) {
                best_d = acc;
                best = c;
            }
        }
        if (best == data.labels[s]) ++correct;
    }
    return static_cast<double>(correct) / data.num_samples();
}

namespace {

void write_be32(std::ofstream& out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v >> 24),
                                    static_cast<unsigned char>(v >> 16),
                                    static_cast<unsigned char>(v >> 8),
                                    static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

}  // namespace

void write_idx(const freqfed::LabeledDataset& data, int rows, int cols,
               const std::string& images_path, const std::string& labels_path) {
    if (rows * cols != data.feature_dim) throw std::invalid_argument("write_idx: bad shape");
    std::ofstream images(images_path, std::ios::binary);
    std::ofstream labels(labels_path, std::ios::binary);
    if (!images || !labels) throw std::runtime_error("write_idx: cannot open output");
    write_be32(images, 0x00000803u);
    write_be32(images, static_cast<std::uint32_t>(data.num_samples()));
    write_be32(images, static_cast<std::uint32_t>(rows));
    write_be32(images, static_cast<std::uint32_t>(cols));
    write_be32(labels, 0x00000801u);
    write_be32(labels, static_cast<std::uint32_t>(data.num_samples()));
    for (int s = 0; s < data.num_samples(); ++s) {
        const double* row = data.row(s);
        for (int d = 0; d < data.feature_dim; ++d) {
            const double clamped = std::clamp(row[d], 0.0, 1.0);
            const unsigned char byte = static_cast<unsigned char>(std::lround(clamped * 255.0));
            images.write(reinterpret_cast<const char*>(&byte), 1);
        }
        const unsigned char label = static_cast<unsigned char>(data.labels[s]);
        labels.write(reinterpret_cast<const char*>(&label), 1);
    }
}

}  // namespace oracles
