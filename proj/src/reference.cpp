#include "freqfed/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace freqfed::reference {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

double c_of(int k, int n) { return k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n); }

}  // namespace

CoefficientMatrix dct2_direct(const CoefficientMatrix& x) {
    const int n = x.n;
    CoefficientMatrix out{std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), n};
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) {
                for (int q = 0; q < n; ++q) {
                    acc += x.at(m, q) * std::cos(k * kPi * (2.0 * m + 1.0) / (2.0 * n)) *
                           std::cos(l * kPi * (2.0 * q + 1.0) / (2.0 * n));
                }
            }
            out.at(k, l) = c_of(k, n) * c_of(l, n) * acc;
        }
    }
    return out;
}

CoefficientMatrix idct2_direct(const CoefficientMatrix& x) {
    const int n = x.n;
    CoefficientMatrix out{std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), n};
    for (int m = 0; m < n; ++m) {
        for (int q = 0; q < n; ++q) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                for (int l = 0; l < n; ++l) {
                    acc += c_of(k, n) * c_of(l, n) * x.at(k, l) *
                           std::cos(k * kPi * (2.0 * m + 1.0) / (2.0 * n)) *
                           std::cos(l * kPi * (2.0 * q + 1.0) / (2.0 * n));
                }
            }
            out.at(m, q) = acc;
        }
    }
    return out;
}

namespace {

std::vector<double> basis(int n) {
    std::vector<double> b(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k) {
        for (int m = 0; m < n; ++m) {
            b[static_cast<std::size_t>(k) * n + m] =
                c_of(k, n) * std::cos(k * kPi * (2.0 * m + 1.0) / (2.0 * n));
        }
    }
    return b;
}

CoefficientMatrix separable(const CoefficientMatrix& x, bool transpose) {
    const int n = x.n;
    const auto b = basis(n);
    CoefficientMatrix tmp{std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), n};
    CoefficientMatrix out{std::vector<double>(static_cast<std::size_t>(n) * n, 0.0), n};
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) {
                acc += (transpose ? b[static_cast<std::size_t>(m) * n + k]
                                  : b[static_cast<std::size_t>(k) * n + m]) *
                       x.at(m, j);
            }
            tmp.at(k, j) = acc;
        }
    }
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            double acc = 0.0;
            for (int m = 0; m < n; ++m) {
                acc += tmp.at(k, m) * (transpose ? b[static_cast<std::size_t>(m) * n + l]
                                                 : b[static_cast<std::size_t>(l) * n + m]);
            }
            out.at(k, l) = acc;
        }
    }
    return out;
}

}  // namespace

CoefficientMatrix dct2_serial(const CoefficientMatrix& x) { return separable(x, false); }
CoefficientMatrix idct2_serial(const CoefficientMatrix& x) { return separable(x, true); }

std::vector<double> cosine_distance_matrix_serial(
    const std::vector<FrequencyFingerprint>& fps) {
    const int k = static_cast<int>(fps.size());
    std::vector<double> norms(k);
    for (int i = 0; i < k; ++i) {
        double acc = 0.0;
        for (double v : fps[i].coeffs) acc += v * v;
        norms[i] = std::sqrt(acc);
        if (norms[i] == 0.0) throw std::runtime_error("zero-norm fingerprint");
    }
    std::vector<double> d(static_cast<std::size_t>(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        for (int j = i + 1; j < k; ++j) {
            double dot = 0.0;
            for (std::size_t t = 0; t < fps[i].coeffs.size(); ++t) {
                dot += fps[i].coeffs[t] * fps[j].coeffs[t];
            }
            double dist = 1.0 - dot / (norms[i] * norms[j]);
            if (dist < 0.0) dist = 0.0;
            if (dist > 2.0) dist = 2.0;
            d[static_cast<std::size_t>(i) * k + j] = dist;
            d[static_cast<std::size_t>(j) * k + i] = dist;
        }
    }
    return d;
}

}  // namespace freqfed::reference
