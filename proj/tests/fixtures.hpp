#pragma once

// Shared test data: the eight-corner snapshot used throughout the project
// docs (front/back, bottom/top, left/right with x=left->right, y=bottom->top,
// z=front->back) and helpers for synthesizing readings and boundaries.

#include <random>
#include <vector>

#include "voxfield/ann.hpp"
#include "voxfield/boundary.hpp"
#include "voxfield/core.hpp"
#include "voxfield/rng.hpp"
#include "voxfield/solver.hpp"

namespace fixtures {

// Canonical corner order (z,y,x lexicographic).
inline const std::vector<double>& demo_corner_values() {
    static const std::vector<double> v = {19, 20, 26, 27, 20, 21, 25, 26};
    return v;
}

inline voxfield::CornerSet demo_corner_set() {
    voxfield::CornerSet cs;
    cs.scheme = voxfield::PlacementScheme::S1_corners8;
    cs.field = voxfield::FieldKind::temperature();
    cs.snapshot_ms = 1'714'000'000'000;
    cs.values = demo_corner_values();
    return cs;
}

inline std::vector<voxfield::SensorReading> demo_readings(const voxfield::Domain& domain,
                                                          std::int64_t base_ms = 1'714'000'000'000) {
    std::vector<voxfield::SensorReading> readings;
    const auto points = voxfield::canonical_placement(voxfield::PlacementScheme::S1_corners8);
    for (size_t i = 0; i < points.size(); ++i) {
        readings.push_back(voxfield::SensorReading::make(
            "s" + std::to_string(i), voxfield::denormalize_point(domain, points[i]),
            demo_corner_values()[i], base_ms + static_cast<std::int64_t>(i)));
    }
    return readings;
}

inline voxfield::CornerSet random_corner_set(std::mt19937_64& rng, double lo = 15.0,
                                             double hi = 30.0) {
    voxfield::CornerSet cs;
    cs.scheme = voxfield::PlacementScheme::S1_corners8;
    cs.field = voxfield::FieldKind::temperature();
    cs.values.resize(8);
    for (double& v : cs.values) v = voxfield::uniform_range(rng, lo, hi);
    return cs;
}

/// Edge-consistent boundary with independent random node values: sampled
/// from one precomputed shell so every face reads the same number.
inline voxfield::BoundaryField random_boundary(int n, std::mt19937_64& rng, double lo = 0.0,
                                               double hi = 1.0) {
    std::vector<double> shell(static_cast<size_t>(n) * n * n, 0.0);
    for (double& v : shell) v = voxfield::uniform_range(rng, lo, hi);
    return voxfield::boundary_from_node_values(n, [&](int i, int j, int k) {
        return shell[static_cast<size_t>(i) + static_cast<size_t>(n) * (j + static_cast<size_t>(n) * k)];
    });
}

/// FD volume of the demo snapshot (bilinear boundary, n=8).
inline const voxfield::VolumeGrid& demo_volume() {
    static const voxfield::VolumeGrid volume = [] {
        const auto boundary =
            voxfield::assemble_boundary(demo_corner_set(), voxfield::BoundaryMethod::Bilinear, 8);
        return voxfield::solve_laplace3d(boundary);
    }();
    return volume;
}

/// Surrogate trained once on the demo volume with default hyperparameters.
inline const voxfield::ann::SurrogateModel& demo_model() {
    static const voxfield::ann::SurrogateModel model =
        voxfield::ann::train_surrogate(demo_volume(), 32, {}, 42);
    return model;
}

inline voxfield::ann::SurrogateModel random_model(int hidden, std::mt19937_64& rng) {
    auto m = voxfield::ann::SurrogateModel::zeros(hidden);
    for (double& p : m.params) p = voxfield::uniform_range(rng, -1.5, 1.5);
    return m;
}

inline std::vector<voxfield::ann::Sample> random_samples(size_t count, std::mt19937_64& rng) {
    std::vector<voxfield::ann::Sample> samples(count);
    for (auto& s : samples) {
        s.point = {voxfield::uniform01(rng), voxfield::uniform01(rng), voxfield::uniform01(rng)};
        s.target = voxfield::uniform_range(rng, -1.0, 1.0);
    }
    return samples;
}

} // namespace fixtures
