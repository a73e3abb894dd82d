#include "freqfed/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace freqfed {

namespace {

void check_same_arch(const std::vector<ParameterVector>& models) {
    if (models.empty()) throw std::invalid_argument("aggregation: no models");
    for (const auto& m : models) {
        if (m.arch != models.front().arch || m.values.size() != models.front().values.size()) {
            throw std::invalid_argument("aggregation: mixed model architectures");
        }
    }
}

}  // namespace

ParameterVector mean_accepted(const std::vector<ParameterVector>& models,
                              const std::vector<int>& accepted) {
    check_same_arch(models);
    if (accepted.empty()) throw std::invalid_argument("mean_accepted: empty accepted set");
    for (int idx : accepted) {
        if (idx < 0 || idx >= static_cast<int>(models.size())) {
            throw std::invalid_argument("mean_accepted: index out of range");
        }
    }
    ParameterVector out = models[accepted.front()];
    const double scale = 1.0 / static_cast<double>(accepted.size());
    const std::size_t dim = out.values.size();
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(dim); ++c) {
        double acc = 0.0;
        for (int idx : accepted) acc += models[idx].values[c];
        out.values[c] = acc * scale;
    }
    return out;
}

ParameterVector fedavg_weighted(const std::vector<ClientContribution>& contribs) {
    if (contribs.empty()) throw std::invalid_argument("fedavg_weighted: no contributions");
    double total = 0.0;
    for (const auto& c : contribs) {
        if (c.sample_count < 1) throw std::invalid_argument("fedavg_weighted: sample_count < 1");
        if (c.params.arch != contribs.front().params.arch) {
            throw std::invalid_argument("fedavg_weighted: mixed model architectures");
        }
        total += c.sample_count;
    }
    ParameterVector out = contribs.front().params;
    const std::size_t dim = out.values.size();
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(dim); ++c) {
        double acc = 0.0;
        for (const auto& contrib : contribs) {
            acc += (contrib.sample_count / total) * contrib.params.values[c];
        }
        out.values[c] = acc;
    }
    return out;
}

ParameterVector krum(const std::vector<ParameterVector>& models, int f) {
    check_same_arch(models);
    const int k = static_cast<int>(models.size());
    if (f < 0) throw std::invalid_argument("krum: f must be >= 0");
    if (k < 2 * f + 3) throw std::invalid_argument("krum: need K >= 2f + 3");

    std::vector<std::vector<double>> sq(k, std::vector<double>(k, 0.0));
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            double acc = 0.0;
            for (std::size_t c = 0; c < models[i].values.size(); ++c) {
                const double diff = models[i].values[c] - models[j].values[c];
                acc += diff * diff;
            }
            sq[i][j] = acc;
            sq[j][i] = acc;
        }
    }
    const int neighbours = k - f - 2;
    int best = -1;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<double> row;
    for (int i = 0; i < k; ++i) {
        row.clear();
        for (int j = 0; j < k; ++j) {
            if (j != i) row.push_back(sq[i][j]);
        }
        std::sort(row.begin(), row.end());
        double score = 0.0;
        for (int t = 0; t < neighbours; ++t) score += row[t];
        if (score < best_score) {
            best_score = score;
            best = i;
        }
    }
    return models[best];
}

ParameterVector coordinate_median(const std::vector<ParameterVector>& models) {
    check_same_arch(models);
    const int k = static_cast<int>(models.size());
    ParameterVector out = models.front();
    const std::size_t dim = out.values.size();
#pragma omp parallel
    {
        std::vector<double> column(k);
#pragma omp for schedule(static)
        for (long long c = 0; c < static_cast<long long>(dim); ++c) {
            for (int i = 0; i < k; ++i) column[i] = models[i].values[c];
            std::sort(column.begin(), column.end());
            out.values[c] = (k % 2 == 1) ? column[k / 2]
                                         : 0.5 * (column[k / 2 - 1] + column[k / 2]);
        }
    }
    return out;
}

ParameterVector trimmed_mean(const std::vector<ParameterVector>& models, double beta) {
    check_same_arch(models);
    if (beta < 0.0 || beta >= 0.5) throw std::invalid_argument("trimmed_mean: beta must be in [0, 0.5)");
    const int k = static_cast<int>(models.size());
    const int trim = static_cast<int>(std::floor(beta * k));
    if (k - 2 * trim < 1) throw std::invalid_argument("trimmed_mean: trimming removes every value");
    ParameterVector out = models.front();
    const std::size_t dim = out.values.size();
#pragma omp parallel
    {
        std::vector<double> column(k);
#pragma omp for schedule(static)
        for (long long c = 0; c < static_cast<long long>(dim); ++c) {
            for (int i = 0; i < k; ++i) column[i] = models[i].values[c];
            std::sort(column.begin(), column.end());
            double acc = 0.0;
            for (int i = trim; i < k - trim; ++i) acc += column[i];
            out.values[c] = acc / (k - 2 * trim);
        }
    }
    return out;
}

}  // namespace freqfed
