#pragma once

#include <cmath>

#include "voxfield/error.hpp"

namespace voxfield {

/// Shared knobs for the 2D face solves and the 3D volume solve.
/// Zero means "derive from the grid side n at solve time".
struct SolverParams {
    double tolerance = 1e-10; // max-norm residual and update threshold
    long max_iterations = 0;  // 0 = auto: 200 * n^2
    double relaxation = 0.0;  // 0 = auto: 2 / (1 + sin(pi/(n-1)))
    bool parallel = false;    // red-black OpenMP sweeps instead of serial lexicographic

    long resolved_max_iterations(int n) const {
        return max_iterations > 0 ? max_iterations : 200L * n * n;
    }

    double resolved_relaxation(int n) const {
        if (relaxation != 0.0) return relaxation;
        return 2.0 / (1.0 + std::sin(M_PI / (n - 1)));
    }

    void validate() const {
        if (!(tolerance > 0.0)) throw InputError("solver tolerance must be > 0");
        if (relaxation != 0.0 && !(relaxation > 0.0 && relaxation < 2.0)) {
            throw InputError("solver relaxation must lie in (0, 2)");
        }
        if (max_iterations < 0) throw InputError("solver max_iterations must be >= 0");
    }
};

} // namespace voxfield
