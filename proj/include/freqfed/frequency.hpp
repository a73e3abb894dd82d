#pragma once

#include <utility>
#include <vector>

#include "freqfed/model.hpp"

namespace freqfed {

/// N x N matrix of DCT coefficients (row-major).
struct CoefficientMatrix {
    std::vector<double> entries;
    int n = 0;

    double at(int i, int j) const { return entries[static_cast<std::size_t>(i) * n + j]; }
    double& at(int i, int j) { return entries[static_cast<std::size_t>(i) * n + j]; }
};

/// Low-frequency DCT coefficients of one model, in a fixed row-major order of
/// the kept (i, j) indices with i + j <= floor(N/2).
struct FrequencyFingerprint {
    std::vector<double> coeffs;
    int source_n = 0;
};

/// Lays a flat vector row-major into the smallest square matrix that holds it
/// (N = ceil(sqrt(len))), zero-padding the tail.
CoefficientMatrix pack_to_square(const std::vector<double>& values);
inline CoefficientMatrix pack_to_square(const ParameterVector& params) {
    return pack_to_square(params.values);
}

/// Reads back the first `len` cells of a square matrix; inverse of
/// pack_to_square on the packed prefix.
std::vector<double> unpack_from_square(const CoefficientMatrix& m, int len);

/// Orthonormal 2D DCT-II, applied separably per axis.
CoefficientMatrix dct2(const CoefficientMatrix& x);

/// Inverse of dct2 (orthonormal 2D DCT-III).
CoefficientMatrix idct2(const CoefficientMatrix& x);

/// Index set kept by the low-frequency filter for side length n:
/// all (i, j) with 0 <= i, j <= h and i + j <= h, h = floor(n/2),
/// in row-major order. Fingerprint length is (h+1)(h+2)/2.
std::vector<std::pair<int, int>> low_frequency_indices(int n);
int fingerprint_length(int n);

/// Extracts the low-frequency coefficients of a DCT matrix.
FrequencyFingerprint extract_low_frequency(const CoefficientMatrix& v);

/// Full pipeline: pack -> dct2 -> extract_low_frequency.
FrequencyFingerprint fingerprint(const ParameterVector& params);
FrequencyFingerprint fingerprint(const std::vector<double>& values);

}  // namespace freqfed
