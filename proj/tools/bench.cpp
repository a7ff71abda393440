// Serial vs OpenMP kernel benchmark: 3D solve sweeps, full-batch gradient
// accumulation, and surrogate grid sampling. The parallel paths are
// bit-deterministic by construction; this tool reports wall times only.

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <random>

#include "voxfield/ann.hpp"
#include "voxfield/boundary.hpp"
#include "voxfield/rng.hpp"
#include "voxfield/solver.hpp"

using namespace voxfield;

namespace {

template <typename Fn>
double time_ms(Fn&& fn, int repeats = 3) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

BoundaryField make_boundary(int n, std::mt19937_64& rng) {
    std::vector<double> shell(static_cast<size_t>(n) * n * n);
    for (double& v : shell) v = uniform_range(rng, 15.0, 30.0);
    return boundary_from_node_values(n, [&](int i, int j, int k) {
        return shell[static_cast<size_t>(i) + static_cast<size_t>(n) * (j + static_cast<size_t>(n) * k)];
    });
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-36s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; both columns run serially\n");
#endif
    std::printf("%-36s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    std::mt19937_64 rng(1);

    for (const int n : {16, 32, 48}) {
        const BoundaryField boundary = make_boundary(n, rng);
        SolverParams serial;
        SolverParams parallel;
        parallel.parallel = true;
        char name[64];
        std::snprintf(name, sizeof name, "laplace3d n=%d (lex GS vs red-black)", n);
        row(name, time_ms([&] { solve_laplace3d(boundary, serial); }),
            time_ms([&] { solve_laplace3d(boundary, parallel); }));
    }

    {
        const VolumeGrid volume =
            solve_laplace3d(make_boundary(16, rng), SolverParams{});
        std::vector<ann::Sample> samples;
        for (int k = 0; k < 16; ++k)
            for (int j = 0; j < 16; ++j)
                for (int i = 0; i < 16; ++i) {
                    samples.push_back({{i / 15.0, j / 15.0, k / 15.0},
                                       (volume.at(i, j, k) - 22.0) / 8.0});
                }
        for (const int hidden : {32, 128}) {
            auto model = ann::SurrogateModel::zeros(hidden);
            std::mt19937_64 prng(2);
            for (double& p : model.params) p = uniform_range(prng, -1, 1);
            std::vector<double> grad(model.params.size());
            char name[64];
            std::snprintf(name, sizeof name, "loss_and_grad 16^3 samples L=%d", hidden);
            row(name,
                time_ms([&] { ann::loss_and_grad_serial(model, samples, grad); }, 5),
                time_ms([&] { ann::loss_and_grad(model, samples, grad); }, 5));
        }
    }

    {
        ann::TrainParams quick;
        quick.max_epochs = 40;
        const auto model = ann::train_surrogate(
            solve_laplace3d(make_boundary(8, rng), SolverParams{}), 64, quick, 3);
        for (const int n : {32, 64}) {
            char name[64];
            std::snprintf(name, sizeof name, "sample_volume %d^3 L=64", n);
            row(name, time_ms([&] { ann::sample_volume_serial(model, n); }),
                time_ms([&] { ann::sample_volume(model, n); }));
        }
    }

    return 0;
}
