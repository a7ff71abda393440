#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "voxfield/boundary.hpp"
#include "voxfield/rng.hpp"

using namespace voxfield;

TEST_SUITE_BEGIN("boundary");

TEST_CASE("interp_edges linearly blends the corner readings") {
    CornerSet cs = fixtures::demo_corner_set();
    const EdgeSet edges = interp_edges(cs, 8);
    // x-edge at (y,z)=(0,0): corners 19 and 20
    const Edge& e = edges.edge(0, 0, 0);
    for (int i = 0; i < 8; ++i) {
        CHECK(e.values[static_cast<size_t>(i)] == doctest::Approx(19.0 + i / 7.0).epsilon(1e-14));
    }

    cs.values.assign(8, 20.0);
    const EdgeSet constant = interp_edges(cs, 8);
    for (const Edge& edge : constant.edges)
        for (double v : edge.values) CHECK(v == 20.0);
}

TEST_CASE("interp_edges midpoint of a (19,27) edge at n=9 is 23") {
    CornerSet cs = fixtures::demo_corner_set();
    cs.values = {19, 27, 0, 0, 0, 0, 0, 0};
    const EdgeSet edges = interp_edges(cs, 9);
    CHECK(edges.edge(0, 0, 0).values[4] == 23.0);
}

TEST_CASE("bilinear_face reproduces corners and the center mean") {
    const FaceGrid g = bilinear_face(FaceId::Zmin, {19, 20, 26, 27}, 9);
    CHECK(g.at(0, 0) == 19.0);
    CHECK(g.at(8, 0) == 20.0);
    CHECK(g.at(0, 8) == 26.0);
    CHECK(g.at(8, 8) == 27.0);
    CHECK(g.at(4, 4) == doctest::Approx(23.0).epsilon(1e-15));

    const FaceGrid constant = bilinear_face(FaceId::Xmax, {20, 20, 20, 20}, 8);
    for (double v : constant.values) CHECK(v == 20.0);
}

TEST_CASE("fd2d_face: constant Dirichlet data stays constant") {
    FaceGrid ring = FaceGrid::zeros(FaceId::Zmin, 8);
    for (int t = 0; t < 8; ++t) {
        ring.at(t, 0) = ring.at(t, 7) = ring.at(0, t) = ring.at(7, t) = 22.0;
    }
    const FaceGrid solved = fd2d_face(ring, std::nullopt, {});
    for (int v = 0; v < 8; ++v)
        for (int u = 0; u < 8; ++u) CHECK(std::fabs(solved.at(u, v) - 22.0) <= 1e-9);
}

TEST_CASE("fd2d_face: affine boundary data is reproduced exactly") {
    const auto affine = [](double u, double v) { return 3.0 + 2.0 * u - 1.5 * v; };
    const int n = 9;
    FaceGrid ring = FaceGrid::zeros(FaceId::Ymin, n);
    for (int t = 0; t < n; ++t) {
        const double s = double(t) / (n - 1);
        ring.at(t, 0) = affine(s, 0.0);
        ring.at(t, n - 1) = affine(s, 1.0);
        ring.at(0, t) = affine(0.0, s);
        ring.at(n - 1, t) = affine(1.0, s);
    }
    const FaceGrid solved = fd2d_face(ring, std::nullopt, {});
    for (int v = 0; v < n; ++v)
        for (int u = 0; u < n; ++u) {
            const double expect = affine(double(u) / (n - 1), double(v) / (n - 1));
            CHECK(std::fabs(solved.at(u, v) - expect) <= 1e-8);
        }
}

TEST_CASE("fd2d_face: zero ring with unit center pin matches the dense solve") {
    const int n = 9;
    const FaceGrid ring = FaceGrid::zeros(FaceId::Zmin, n); // zero everywhere incl. ring
    const FaceGrid solved = fd2d_face(ring, 1.0, {});
    const FaceGrid direct = oracle::dense_face_solve(ring, 1.0);

    CHECK(solved.at(4, 4) == 1.0); // pin held exactly
    for (int v = 1; v < n - 1; ++v)
        for (int u = 1; u < n - 1; ++u) {
            if (u == 4 && v == 4) continue;
            CHECK(solved.at(u, v) > 0.0);
            CHECK(solved.at(u, v) < 1.0);
            CHECK(std::fabs(solved.at(u, v) - direct.at(u, v)) <= 1e-8);
            // symmetry under u<->1-u and v<->1-v
            CHECK(std::fabs(solved.at(u, v) - solved.at(n - 1 - u, v)) <= 1e-9);
            CHECK(std::fabs(solved.at(u, v) - solved.at(u, n - 1 - v)) <= 1e-9);
        }
}

TEST_CASE("center pin nodes: odd n pins one node, even n the four around it") {
    CHECK(center_pin_nodes(9) == std::vector<std::array<int, 2>>{{4, 4}});
    CHECK(center_pin_nodes(8) ==
          std::vector<std::array<int, 2>>{{3, 3}, {4, 3}, {3, 4}, {4, 4}});
}

TEST_CASE("fd2d_face: even-n pin holds the four center nodes exactly") {
    FaceGrid ring = FaceGrid::zeros(FaceId::Zmin, 8);
    const FaceGrid solved = fd2d_face(ring, 23.5, {});
    for (const auto& [u, v] : center_pin_nodes(8)) CHECK(solved.at(u, v) == 23.5);
}

TEST_CASE("fd2d_face: discrete maximum principle per face") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 8 + (trial % 3);
        FaceGrid ring = FaceGrid::zeros(FaceId::Xmin, n);
        for (int t = 0; t < n; ++t) {
            ring.at(t, 0) = uniform_range(rng, -5, 5);
            ring.at(t, n - 1) = uniform_range(rng, -5, 5);
            ring.at(0, t) = uniform_range(rng, -5, 5);
            ring.at(n - 1, t) = uniform_range(rng, -5, 5);
        }
        const bool with_pin = trial % 2 == 0;
        const std::optional<double> pin =
            with_pin ? std::optional<double>(uniform_range(rng, -8, 8)) : std::nullopt;
        double lo = 1e300, hi = -1e300;
        for (int t = 0; t < n; ++t) {
            for (double v : {ring.at(t, 0), ring.at(t, n - 1), ring.at(0, t), ring.at(n - 1, t)}) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (pin) {
            lo = std::min(lo, *pin);
            hi = std::max(hi, *pin);
        }
        const FaceGrid solved = fd2d_face(ring, pin, {});
        for (int v = 1; v < n - 1; ++v)
            for (int u = 1; u < n - 1; ++u) {
                CHECK(solved.at(u, v) >= lo);
                CHECK(solved.at(u, v) <= hi);
            }
    }
}

TEST_CASE("fd2d_face reports non-convergence with the final residual") {
    FaceGrid ring = FaceGrid::zeros(FaceId::Zmin, 16);
    for (int t = 0; t < 16; ++t) ring.at(t, 0) = 10.0;
    SolverParams params;
    params.max_iterations = 2;
    try {
        fd2d_face(ring, std::nullopt, params);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.iterations == 2);
        CHECK(e.residual > 0.0);
    }
}

TEST_CASE("assemble_boundary: demo snapshot, bilinear, n=8") {
    const BoundaryField boundary =
        assemble_boundary(fixtures::demo_corner_set(), BoundaryMethod::Bilinear, 8);
    const FaceGrid& zmin = boundary.face(FaceId::Zmin);
    CHECK(zmin.at(0, 0) == 19.0);
    CHECK(zmin.at(7, 0) == 20.0);
    CHECK(zmin.at(0, 7) == 26.0);
    CHECK(zmin.at(7, 7) == 27.0);
    CHECK_NOTHROW(check_edge_consistency(boundary));
}

TEST_CASE("assemble_boundary: constant corner set is constant for both methods") {
    CornerSet cs = fixtures::demo_corner_set();
    cs.values.assign(8, 20.0);
    for (BoundaryMethod method : {BoundaryMethod::Bilinear, BoundaryMethod::FD2D}) {
        const BoundaryField boundary = assemble_boundary(cs, method, 8);
        for (const FaceGrid& f : boundary.faces) {
            REQUIRE(f.values.size() == 64);
            for (double v : f.values) CHECK(std::fabs(v - 20.0) <= 1e-12);
        }
    }
}

TEST_CASE("assemble_boundary: S2 center reading pins the face center") {
    CornerSet cs;
    cs.scheme = PlacementScheme::S2_corners_plus_centers14;
    cs.field = FieldKind::temperature();
    cs.values = {19, 20, 26, 27, 20, 21, 25, 26, 23.5, 21.0, 22.0, 23.0, 25.5, 23.25};
    const BoundaryField boundary = assemble_boundary(cs, BoundaryMethod::FD2D, 9);
    CHECK(boundary.face(FaceId::Zmin).at(4, 4) == 23.5);
    CHECK(boundary.face(FaceId::Ymin).at(4, 4) == 21.0);
    CHECK(boundary.face(FaceId::Xmax).at(4, 4) == 23.25);
    CHECK_NOTHROW(check_edge_consistency(boundary));
}

TEST_CASE("both methods reproduce the 4 corner readings of every face") {
    std::mt19937_64 rng(17);
    const CornerSet cs = fixtures::random_corner_set(rng);
    for (BoundaryMethod method : {BoundaryMethod::Bilinear, BoundaryMethod::FD2D}) {
        const BoundaryField boundary = assemble_boundary(cs, method, 8);
        for (const FaceGrid& f : boundary.faces) {
            const auto ci = face_corner_indices(f.face_id);
            CHECK(f.at(0, 0) == cs.corner(ci[0]));
            CHECK(f.at(7, 0) == cs.corner(ci[1]));
            CHECK(f.at(0, 7) == cs.corner(ci[2]));
            CHECK(f.at(7, 7) == cs.corner(ci[3]));
        }
    }
}

TEST_CASE("adjacent faces share edge nodes bit-exactly") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const CornerSet cs = fixtures::random_corner_set(rng);
        const int n = 6 + trial;
        const BoundaryField boundary = assemble_boundary(
            cs, trial % 2 ? BoundaryMethod::FD2D : BoundaryMethod::Bilinear, n);
        CHECK_NOTHROW(check_edge_consistency(boundary));
        // spot check one shared edge: Zmin v=0 row vs Ymin v=0 row (the y=0,z=0 edge)
        for (int t = 0; t < n; ++t) {
            CHECK(boundary.face(FaceId::Zmin).at(t, 0) == boundary.face(FaceId::Ymin).at(t, 0));
        }
    }
}

TEST_CASE("bilinear boundary has linear precision for affine corner data") {
    const auto affine = [](const Vec3& p) { return 1.5 + 0.25 * p[0] - 2.0 * p[1] + 0.75 * p[2]; };
    CornerSet cs = fixtures::demo_corner_set();
    const auto points = canonical_placement(PlacementScheme::S1_corners8);
    for (size_t i = 0; i < 8; ++i) cs.values[i] = affine(points[i]);
    const int n = 9;
    const BoundaryField boundary = assemble_boundary(cs, BoundaryMethod::Bilinear, n);
    for (const FaceGrid& f : boundary.faces)
        for (int v = 0; v < n; ++v)
            for (int u = 0; u < n; ++u) {
                const auto node = face_node(f.face_id, u, v, n);
                const Vec3 p{double(node[0]) / (n - 1), double(node[1]) / (n - 1),
                             double(node[2]) / (n - 1)};
                CHECK(std::fabs(f.at(u, v) - affine(p)) <= 1e-12);
            }
}

TEST_CASE("assemble_boundary rejects an incomplete corner set") {
    CornerSet cs = fixtures::demo_corner_set();
    cs.values.pop_back();
    CHECK_THROWS_AS(assemble_boundary(cs, BoundaryMethod::Bilinear, 8), InputError);
}

TEST_SUITE_END();
