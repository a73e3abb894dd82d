#pragma once

#include <vector>

#include "freqfed/frequency.hpp"

namespace freqfed::reference {

// Single-threaded reference kernels. The _direct transforms evaluate the
// defining double sums term by term (O(N^4)); the _serial ones mirror the
// production separable kernels without OpenMP. Tests pin the parallel
// implementations against these, and the benchmark tool compares their
// running times.

CoefficientMatrix dct2_direct(const CoefficientMatrix& x);
CoefficientMatrix idct2_direct(const CoefficientMatrix& x);

CoefficientMatrix dct2_serial(const CoefficientMatrix& x);
CoefficientMatrix idct2_serial(const CoefficientMatrix& x);

std::vector<double> cosine_distance_matrix_serial(
    const std::vector<FrequencyFingerprint>& fps);

}  // namespace freqfed::reference
