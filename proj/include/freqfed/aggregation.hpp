#pragma once

#include <vector>

#include "freqfed/model.hpp"

namespace freqfed {

struct ClientContribution {
    ParameterVector params;
    int sample_count = 1;
};

/// Unweighted coordinate-wise mean over the accepted indices only.
ParameterVector mean_accepted(const std::vector<ParameterVector>& models,
                              const std::vector<int>& accepted);

/// Sample-count weighted average: sum(n_i / n * W_i).
ParameterVector fedavg_weighted(const std::vector<ClientContribution>& contribs);

/// Returns the single model minimizing the sum of squared distances to its
/// K - f - 2 nearest neighbours. Requires K >= 2f + 3; ties break to the
/// lowest index.
ParameterVector krum(const std::vector<ParameterVector>& models, int f);

/// Per-coordinate median (mean of the two middle values for even K).
ParameterVector coordinate_median(const std::vector<ParameterVector>& models);

/// Per coordinate: sort, drop floor(beta*K) from each end, average the rest.
ParameterVector trimmed_mean(const std::vector<ParameterVector>& models, double beta);

}  // namespace freqfed
