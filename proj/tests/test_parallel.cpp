#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "voxfield/ann.hpp"
#include "voxfield/rng.hpp"
#include "voxfield/solver.hpp"

// The OpenMP kernels are designed so that parallel execution is
// bit-deterministic: gradient accumulation reduces fixed blocks in order,
// red-black half-sweeps only update independent nodes, and sampling writes
// disjoint slots. These tests pin the parallel paths against their serial
// references.

using namespace voxfield;

TEST_SUITE_BEGIN("parallel");

TEST_CASE("gradient accumulation: OpenMP blocks equal the serial reference bitwise") {
    std::mt19937_64 rng(51);
    for (const int hidden : {4, 32}) {
        for (const size_t count : {1ul, 255ul, 256ul, 1000ul, 4096ul}) {
            const auto m = fixtures::random_model(hidden, rng);
            const auto samples = fixtures::random_samples(count, rng);
            std::vector<double> g_par(ann::SurrogateModel::param_count(hidden), 0.0);
            std::vector<double> g_ser(g_par.size(), 0.0);
            const double mse_par = ann::loss_and_grad(m, samples, g_par);
            const double mse_ser = ann::loss_and_grad_serial(m, samples, g_ser);
            CHECK(mse_par == mse_ser);
            CHECK(g_par == g_ser);
        }
    }
}

TEST_CASE("volume sampling: OpenMP equals the serial reference bitwise") {
    const auto& model = fixtures::demo_model();
    for (const int n : {2, 9, 16}) {
        const VolumeGrid a = ann::sample_volume(model, n);
        const VolumeGrid b = ann::sample_volume_serial(model, n);
        CHECK(a.values == b.values);
    }
}

TEST_CASE("red-black parallel solve agrees with the serial sweep and the oracle") {
    std::mt19937_64 rng(53);
    SolverParams serial;
    SolverParams parallel;
    parallel.parallel = true;
    for (const int n : {8, 9}) {
        const BoundaryField boundary = fixtures::random_boundary(n, rng, -1.0, 1.0);
        const VolumeGrid u_serial = solve_laplace3d(boundary, serial);
        const VolumeGrid u_parallel = solve_laplace3d(boundary, parallel);
        const VolumeGrid direct = oracle::dense_volume_solve(boundary);
        for (size_t q = 0; q < direct.values.size(); ++q) {
            CHECK(std::fabs(u_parallel.values[q] - direct.values[q]) <= 1e-8);
            CHECK(std::fabs(u_parallel.values[q] - u_serial.values[q]) <=
                  10.0 * serial.tolerance);
        }
        CHECK(discrete_residual(u_parallel) <= parallel.tolerance);

        // repeated parallel runs are bit-identical
        const VolumeGrid again = solve_laplace3d(boundary, parallel);
        CHECK(again.values == u_parallel.values);
    }
}

TEST_CASE("red-black parallel solve keeps the exact maximum principle") {
    std::mt19937_64 rng(59);
    SolverParams params;
    params.parallel = true;
    for (int trial = 0; trial < 10; ++trial) {
        const BoundaryField boundary = fixtures::random_boundary(8, rng, 5.0, 9.0);
        const VolumeGrid u = solve_laplace3d(boundary, params);
        for (double v : u.values) {
            CHECK(v >= boundary.min_value());
            CHECK(v <= boundary.max_value());
        }
    }
}

TEST_CASE("face assembly distributes faces without changing results") {
    std::mt19937_64 rng(61);
    const CornerSet cs = fixtures::random_corner_set(rng);
    SolverParams serial;
    SolverParams parallel;
    parallel.parallel = true;
    const BoundaryField a = assemble_boundary(cs, BoundaryMethod::FD2D, 9, serial);
    const BoundaryField b = assemble_boundary(cs, BoundaryMethod::FD2D, 9, parallel);
    for (size_t f = 0; f < 6; ++f) CHECK(a.faces[f].values == b.faces[f].values);
}

TEST_CASE("training with the parallel gradient path is reproducible") {
    ann::TrainParams hyper;
    hyper.max_epochs = 60;
    const auto a = ann::train_surrogate(fixtures::demo_volume(), 16, hyper, 7);
    const auto b = ann::train_surrogate(fixtures::demo_volume(), 16, hyper, 7);
    CHECK(a.params == b.params);
}

TEST_SUITE_END();
