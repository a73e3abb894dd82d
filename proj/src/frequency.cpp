#include "freqfed/frequency.hpp"

#include <cmath>
#include <stdexcept>

namespace freqfed {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void check_finite(const CoefficientMatrix& m, const char* who) {
    if (m.n < 1 || m.entries.size() != static_cast<std::size_t>(m.n) * m.n) {
        throw std::invalid_argument(std::string(who) + ": matrix is not square");
    }
    for (double v : m.entries) {
        if (!std::isfinite(v)) throw std::invalid_argument(std::string(who) + ": non-finite input");
    }
}

// Cosine basis table: basis[k*n + m] = c(k) * cos(k*pi*(2m+1)/(2n)) with
// c(0) = sqrt(1/n), c(k>=1) = sqrt(2/n). Rows of the table are the
// orthonormal DCT-II basis vectors.
std::vector<double> dct_basis(int n) {
    std::vector<double> basis(static_cast<std::size_t>(n) * n);
    const double c0 = std::sqrt(1.0 / n);
    const double ck = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k) {
        const double scale = k == 0 ? c0 : ck;
        for (int m = 0; m < n; ++m) {
            basis[static_cast<std::size_t>(k) * n + m] =
                scale * std::cos(k * kPi * (2.0 * m + 1.0) / (2.0 * n));
        }
    }
    return basis;
}

// out = B * x * B^T when transpose_basis == false (forward DCT applied to
// both axes), out = B^T * x * B when true (inverse). Each output element is
// accumulated serially, so results are identical for any thread count.
CoefficientMatrix apply_separable(const CoefficientMatrix& x, const std::vector<double>& basis,
                                  bool transpose_basis) {
    const int n = x.n;
    CoefficientMatrix tmp{std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), n};
    CoefficientMatrix out{std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), n};

    // Columns first: tmp(k, j) = sum_m B(k, m) * x(m, j).
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) {
                const double b = transpose_basis ? basis[static_cast<std::size_t>(m) * n + k]
                                                 : basis[static_cast<std::size_t>(k) * n + m];
                acc += b * x.at(m, j);
            }
            tmp.at(k, j) = acc;
        }
    }
    // Then rows: out(k, l) = sum_m tmp(k, m) * B(l, m).
#pragma omp parallel for schedule(static)
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) {
                const double b = transpose_basis ? basis[static_cast<std::size_t>(m) * n + l]
                                                 : basis[static_cast<std::size_t>(l) * n + m];
                acc += tmp.at(k, m) * b;
            }
            out.at(k, l) = acc;
        }
    }
    return out;
}

}  // namespace

CoefficientMatrix pack_to_square(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("pack_to_square: empty input");
    int n = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(values.size()))));
    while (static_cast<std::size_t>(n) * n < values.size()) ++n;  // guard fp rounding
    CoefficientMatrix m{std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), n};
    std::copy(values.begin(), values.end(), m.entries.begin());
    return m;
}

std::vector<double> unpack_from_square(const CoefficientMatrix& m, int len) {
    if (len < 0 || static_cast<std::size_t>(len) > m.entries.size()) {
        throw std::invalid_argument("unpack_from_square: bad length");
    }
    return std::vector<double>(m.entries.begin(), m.entries.begin() + len);
}

CoefficientMatrix dct2(const CoefficientMatrix& x) {
    check_finite(x, "dct2");
    return apply_separable(x, dct_basis(x.n), false);
}

CoefficientMatrix idct2(const CoefficientMatrix& x) {
    check_finite(x, "idct2");
    return apply_separable(x, dct_basis(x.n), true);
}

std::vector<std::pair<int, int>> low_frequency_indices(int n) {
    if (n < 1) throw std::invalid_argument("low_frequency_indices: n must be >= 1");
    const int h = n / 2;
    std::vector<std::pair<int, int>> kept;
    for (int i = 0; i <= h; ++i) {
        for (int j = 0; j <= h; ++j) {
            if (i + j <= h) kept.emplace_back(i, j);
        }
    }
    return kept;
}

int fingerprint_length(int n) {
    const int h = n / 2;
    return (h + 1) * (h + 2) / 2;
}

FrequencyFingerprint extract_low_frequency(const CoefficientMatrix& v) {
    check_finite(v, "extract_low_frequency");
    FrequencyFingerprint fp;
    fp.source_n = v.n;
    const auto kept = low_frequency_indices(v.n);
    fp.coeffs.reserve(kept.size());
    for (auto [i, j] : kept) fp.coeffs.push_back(v.at(i, j));
    return fp;
}

FrequencyFingerprint fingerprint(const std::vector<double>& values) {
    return extract_low_frequency(dct2(pack_to_square(values)));
}

FrequencyFingerprint fingerprint(const ParameterVector& params) {
    return fingerprint(params.values);
}

}  // namespace freqfed
