// Times the OpenMP kernels against their serial reference implementations:
// the separable 2D DCT, the cosine-distance matrix fill, and one federation
// round's worth of client updates.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "freqfed/clustering.hpp"
#include "freqfed/data.hpp"
#include "freqfed/frequency.hpp"
#include "freqfed/model.hpp"
#include "freqfed/reference.hpp"
#include "freqfed/rng.hpp"

using namespace freqfed;

namespace {

double time_ms(const std::function<void()>& fn, int reps = 3) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

CoefficientMatrix random_matrix(int n, std::uint64_t seed) {
    Rng rng(seed);
    CoefficientMatrix m{std::vector<double>(static_cast<std::size_t>(n) * n), n};
    for (auto& v : m.entries) v = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not enabled\n");
#endif
    std::printf("%-34s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");

    for (int n : {128, 256}) {
        const auto m = random_matrix(n, 1);
        CoefficientMatrix out;
        const double serial = time_ms([&] { out = reference::dct2_serial(m); });
        const double parallel = time_ms([&] { out = dct2(m); });
        std::printf("%-34s %12.2f %12.2f %8.2f\n",
                    ("dct2 " + std::to_string(n) + "x" + std::to_string(n)).c_str(), serial,
                    parallel, serial / parallel);
    }

    {
        const int clients = 64;
        std::vector<FrequencyFingerprint> fps(clients);
        Rng rng(2);
        for (auto& fp : fps) {
            fp.source_n = 128;
            fp.coeffs.resize(fingerprint_length(128));
            for (auto& c : fp.coeffs) c = rng.uniform(-1.0, 1.0);
        }
        std::vector<double> serial_out;
        DistanceMatrix parallel_out;
        const double serial = time_ms([&] { serial_out = reference::cosine_distance_matrix_serial(fps); });
        const double parallel = time_ms([&] { parallel_out = cosine_distance_matrix(fps); });
        std::printf("%-34s %12.2f %12.2f %8.2f\n", "cosine_distance_matrix K=64", serial, parallel,
                    serial / parallel);
    }

    {
        // One round of local updates, serial loop vs the parallel client loop.
        const ModelArch arch{{64, 32, 4}, Activation::relu};
        const ParameterVector global = init_model(arch, 3);
        const int clients = 8;
        std::vector<LabeledDataset> data(clients);
        for (int i = 0; i < clients; ++i) data[i] = make_blobs(4, 50, 64, 0.2, 100 + i);
        TrainingConfig tc{0.1, 2, 16, 0};
        std::vector<ParameterVector> models(clients);
        const double serial = time_ms([&] {
            for (int i = 0; i < clients; ++i) {
                TrainingConfig c = tc;
                c.seed = i;
                models[i] = client_update(global, data[i], c);
            }
        });
        const double parallel = time_ms([&] {
#pragma omp parallel for schedule(dynamic)
            for (int i = 0; i < clients; ++i) {
                TrainingConfig c = tc;
                c.seed = i;
                models[i] = client_update(global, data[i], c);
            }
        });
        std::printf("%-34s %12.2f %12.2f %8.2f\n", "client updates x8", serial, parallel,
                    serial / parallel);
    }
    return 0;
}
