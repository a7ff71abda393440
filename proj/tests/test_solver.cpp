#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "voxfield/rng.hpp"
#include "voxfield/solver.hpp"

using namespace voxfield;

TEST_SUITE_BEGIN("solver");

TEST_CASE("constant boundary stays constant everywhere") {
    CornerSet cs = fixtures::demo_corner_set();
    cs.values.assign(8, 20.0);
    const VolumeGrid u = solve_laplace3d(assemble_boundary(cs, BoundaryMethod::Bilinear, 8));
    REQUIRE(u.values.size() == 512);
    for (double v : u.values) CHECK(std::fabs(v - 20.0) <= 1e-12);
}

TEST_CASE("demo snapshot solve equals the trilinear interpolant (n=8)") {
    const CornerSet cs = fixtures::demo_corner_set();
    const VolumeGrid& u = fixtures::demo_volume();
    double worst = 0.0;
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                const double ref =
                    trilinear_reference(cs, {i / 7.0, j / 7.0, k / 7.0});
                worst = std::max(worst, std::fabs(ref - u.at(i, j, k)));
            }
    CHECK(worst <= 1e-8);

    // cross-check against the dense direct solve of the same system
    const VolumeGrid direct =
        oracle::dense_volume_solve(assemble_boundary(cs, BoundaryMethod::Bilinear, 8));
    for (size_t q = 0; q < u.values.size(); ++q) {
        CHECK(std::fabs(u.values[q] - direct.values[q]) <= 1e-8);
    }
}

TEST_CASE("demo snapshot at n=9 has the corner mean at the center node") {
    const VolumeGrid u = solve_laplace3d(
        assemble_boundary(fixtures::demo_corner_set(), BoundaryMethod::Bilinear, 9));
    CHECK(std::fabs(u.at(4, 4, 4) - 23.0) <= 1e-8);
}

TEST_CASE("boundary layer is copied bit-exactly") {
    std::mt19937_64 rng(41);
    const BoundaryField boundary = fixtures::random_boundary(8, rng, 10.0, 30.0);
    const VolumeGrid u = solve_laplace3d(boundary);
    CHECK(u.provenance == Provenance::FDSolve);
    for (int k = 0; k < 8; ++k)
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                if (!boundary.is_boundary_node(i, j, k)) continue;
                CHECK(u.at(i, j, k) == boundary.value_at(i, j, k));
            }
}

TEST_CASE("discrete_residual") {
    VolumeGrid constant = VolumeGrid::filled(8, 5.0);
    CHECK(discrete_residual(constant) == 0.0);

    std::mt19937_64 rng(5);
    const SolverParams params;
    VolumeGrid u = solve_laplace3d(fixtures::random_boundary(9, rng), params);
    CHECK(discrete_residual(u) <= params.tolerance);

    const double base = discrete_residual(u);
    u.at(4, 4, 4) += 0.5; // perturb one interior node: its own equation moves by 0.5
    const double perturbed = discrete_residual(u);
    CHECK(std::fabs(perturbed - 0.5) <= base + 1e-12);
}

TEST_CASE("trilinear_reference") {
    const CornerSet cs = fixtures::demo_corner_set();
    const auto points = canonical_placement(PlacementScheme::S1_corners8);
    for (size_t i = 0; i < 8; ++i) {
        CHECK(trilinear_reference(cs, points[i]) == cs.values[i]);
    }
    CHECK(trilinear_reference(cs, {0.5, 0.5, 0.5}) == doctest::Approx(23.0).epsilon(1e-15));

    CornerSet constant = cs;
    constant.values.assign(8, 7.25);
    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        const Vec3 p{uniform01(rng), uniform01(rng), uniform01(rng)};
        CHECK(std::fabs(trilinear_reference(constant, p) - 7.25) <= 1e-12);
    }
}

TEST_CASE("discrete maximum principle holds exactly for random boundaries") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = (trial % 2) ? 9 : 8;
        const BoundaryField boundary = fixtures::random_boundary(n, rng, -3.0, 12.0);
        const VolumeGrid u = solve_laplace3d(boundary);
        const double lo = boundary.min_value();
        const double hi = boundary.max_value();
        for (double v : u.values) {
            CHECK(v >= lo);
            CHECK(v <= hi);
        }
    }
}

TEST_CASE("solve is linear in the boundary data (within 10x tolerance)") {
    std::mt19937_64 rng(29);
    const SolverParams params;
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 8;
        const BoundaryField f = fixtures::random_boundary(n, rng);
        const BoundaryField g = fixtures::random_boundary(n, rng);
        const double a = uniform_range(rng, -2.0, 2.0);
        const double b = uniform_range(rng, -2.0, 2.0);
        BoundaryField combo = f;
        for (size_t face = 0; face < 6; ++face)
            for (size_t q = 0; q < combo.faces[face].values.size(); ++q) {
                combo.faces[face].values[q] =
                    a * f.faces[face].values[q] + b * g.faces[face].values[q];
            }
        const VolumeGrid uf = solve_laplace3d(f, params);
        const VolumeGrid ug = solve_laplace3d(g, params);
        const VolumeGrid uc = solve_laplace3d(combo, params);
        for (size_t q = 0; q < uc.values.size(); ++q) {
            CHECK(std::fabs(uc.values[q] - (a * uf.values[q] + b * ug.values[q])) <=
                  10.0 * params.tolerance * (1.0 + std::fabs(a) + std::fabs(b)));
        }
    }
}

TEST_CASE("x-mirror boundary symmetry carries into the solution") {
    std::mt19937_64 rng(31);
    const int n = 8;
    // Build a shell symmetric under i <-> n-1-i.
    std::vector<double> shell(static_cast<size_t>(n) * n * n, 0.0);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i <= (n - 1) / 2; ++i) {
                const double v = uniform_range(rng, 0.0, 9.0);
                shell[static_cast<size_t>(i) + static_cast<size_t>(n) * (j + static_cast<size_t>(n) * k)] = v;
                shell[static_cast<size_t>(n - 1 - i) +
                      static_cast<size_t>(n) * (j + static_cast<size_t>(n) * k)] = v;
            }
    const BoundaryField boundary = boundary_from_node_values(n, [&](int i, int j, int k) {
        return shell[static_cast<size_t>(i) + static_cast<size_t>(n) * (j + static_cast<size_t>(n) * k)];
    });
    const SolverParams params;
    const VolumeGrid u = solve_laplace3d(boundary, params);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                CHECK(std::fabs(u.at(i, j, k) - u.at(n - 1 - i, j, k)) <= 10.0 * params.tolerance);
            }
}

TEST_CASE("iterative solve matches the dense direct solve for random boundaries") {
    std::mt19937_64 rng(37);
    for (const int n : {8, 9}) {
        const BoundaryField boundary = fixtures::random_boundary(n, rng, -1.0, 1.0);
        const VolumeGrid u = solve_laplace3d(boundary);
        const VolumeGrid direct = oracle::dense_volume_solve(boundary);
        for (size_t q = 0; q < u.values.size(); ++q) {
            CHECK(std::fabs(u.values[q] - direct.values[q]) <= 1e-8);
        }
    }
}

TEST_CASE("solver rejects bad inputs and reports non-convergence") {
    std::mt19937_64 rng(43);
    CHECK_THROWS_AS(solve_laplace3d(fixtures::random_boundary(2, rng)), InputError);

    SolverParams tight;
    tight.max_iterations = 1;
    try {
        solve_laplace3d(fixtures::random_boundary(9, rng), tight);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations == 1);
        CHECK(e.residual > tight.tolerance);
    }

    SolverParams bad;
    bad.relaxation = 2.5;
    CHECK_THROWS_AS(solve_laplace3d(fixtures::random_boundary(8, rng), bad), InputError);
}

TEST_CASE("inconsistent boundary faces are rejected") {
    std::mt19937_64 rng(47);
    BoundaryField boundary = fixtures::random_boundary(8, rng);
    boundary.face(FaceId::Zmin).at(0, 0) += 1.0; // break the shared corner
    CHECK_THROWS_WITH_AS(solve_laplace3d(boundary), doctest::Contains("disagree"), InputError);
}

TEST_SUITE_END();
