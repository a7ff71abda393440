#include "voxfield/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace voxfield {

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::FDSolve: return "fd_solve";
        case Provenance::SurrogateSample: return "surrogate_sample";
        default: return "predefined";
    }
}

std::optional<Provenance> parse_provenance(const std::string& text) {
    if (text == "fd_solve") return Provenance::FDSolve;
    if (text == "surrogate_sample") return Provenance::SurrogateSample;
    if (text == "predefined") return Provenance::Predefined;
    return std::nullopt;
}

VolumeGrid VolumeGrid::filled(int n, double value, FieldKind field, Provenance provenance) {
    if (n < 2) throw InputError("volume grid side must be >= 2");
    VolumeGrid v;
    v.n = n;
    v.field = std::move(field);
    v.provenance = provenance;
    v.values.assign(static_cast<size_t>(n) * n * n, value);
    return v;
}

double VolumeGrid::min_value() const {
    return *std::min_element(values.begin(), values.end());
}

double VolumeGrid::max_value() const {
    return *std::max_element(values.begin(), values.end());
}

namespace {

// Factorized lerp blend: exact at corners and for constant data, and its
// restriction to a face carries the same bits as bilinear_face.
double trilinear8(const double c[8], double x, double y, double z) {
    const double front = std::lerp(std::lerp(c[0], c[1], x), std::lerp(c[2], c[3], x), y);
    const double back = std::lerp(std::lerp(c[4], c[5], x), std::lerp(c[6], c[7], x), y);
    return std::lerp(front, back, z);
}

struct SweepResult {
    double max_update = 0.0;
};

SweepResult sor_sweep_lex(VolumeGrid& u, double omega) {
    const int n = u.n;
    SweepResult r;
    for (int k = 1; k < n - 1; ++k)
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const double old = u.at(i, j, k);
                const double mean = (u.at(i - 1, j, k) + u.at(i + 1, j, k) +
                                     u.at(i, j - 1, k) + u.at(i, j + 1, k) +
                                     u.at(i, j, k - 1) + u.at(i, j, k + 1)) / 6.0;
                const double next = old + omega * (mean - old);
                u.at(i, j, k) = next;
                r.max_update = std::max(r.max_update, std::fabs(next - old));
            }
    return r;
}

// One half-sweep over nodes with (i+j+k) % 2 == color. Every update reads
// only opposite-color nodes and its own old value, so iterations commute
// and the sweep is bit-deterministic under any OpenMP schedule.
double sor_half_sweep_redblack(VolumeGrid& u, double omega, int color) {
    const int n = u.n;
    double max_update = 0.0;
#pragma omp parallel for reduction(max : max_update) schedule(static)
    for (int k = 1; k < n - 1; ++k)
        for (int j = 1; j < n - 1; ++j) {
            int i = 1 + ((1 + j + k + color) & 1);
            for (; i < n - 1; i += 2) {
                const double old = u.at(i, j, k);
                const double mean = (u.at(i - 1, j, k) + u.at(i + 1, j, k) +
                                     u.at(i, j - 1, k) + u.at(i, j + 1, k) +
                                     u.at(i, j, k - 1) + u.at(i, j, k + 1)) / 6.0;
                const double next = old + omega * (mean - old);
                u.at(i, j, k) = next;
                max_update = std::max(max_update, std::fabs(next - old));
            }
        }
    return max_update;
}

} // namespace

VolumeGrid solve_laplace3d(const BoundaryField& boundary, const SolverParams& params) {
    params.validate();
    const int n = boundary.n;
    if (n < 3) throw InputError("3d solve needs grid side >= 3");
    check_edge_consistency(boundary);

    VolumeGrid u = VolumeGrid::filled(n, 0.0, boundary.field, Provenance::FDSolve);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (boundary.is_boundary_node(i, j, k)) u.at(i, j, k) = boundary.value_at(i, j, k);
            }

    // Warm start the interior with the trilinear blend of the 8 cube corners;
    // exact for bilinear boundaries, a decent first guess otherwise.
    double corners[8];
    for (int c = 0; c < 8; ++c) {
        corners[c] = boundary.value_at((c & 1) * (n - 1), ((c >> 1) & 1) * (n - 1),
                                       ((c >> 2) & 1) * (n - 1));
    }
    for (int k = 1; k < n - 1; ++k)
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                u.at(i, j, k) = trilinear8(corners, double(i) / (n - 1), double(j) / (n - 1),
                                           double(k) / (n - 1));
            }

    const double omega = params.resolved_relaxation(n);
    const long max_iter = params.resolved_max_iterations(n);
    double residual = discrete_residual(u);
    bool converged = residual <= params.tolerance;
    long iter = 0;
    while (!converged && iter < max_iter) {
        ++iter;
        double max_update = 0.0;
        if (params.parallel) {
            max_update = sor_half_sweep_redblack(u, omega, 0);
            max_update = std::max(max_update, sor_half_sweep_redblack(u, omega, 1));
        } else {
            max_update = sor_sweep_lex(u, omega).max_update;
        }
        if (max_update <= params.tolerance) {
            residual = discrete_residual(u);
            converged = residual <= params.tolerance;
        }
    }
    if (!converged) {
        residual = discrete_residual(u);
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "3d solve did not converge: residual %.3e after %ld sweeps", residual, iter);
        throw ConvergenceError(buf, iter, residual);
    }

    const double lo = boundary.min_value();
    const double hi = boundary.max_value();
    for (int k = 1; k < n - 1; ++k)
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                u.at(i, j, k) = std::clamp(u.at(i, j, k), lo, hi);
            }
    return u;
}

double discrete_residual(const VolumeGrid& volume) {
    const int n = volume.n;
    if (n < 3) throw InputError("residual needs grid side >= 3");
    double worst = 0.0;
#pragma omp parallel for reduction(max : worst) schedule(static)
    for (int k = 1; k < n - 1; ++k)
        for (int j = 1; j < n - 1; ++j)
            for (int i = 1; i < n - 1; ++i) {
                const double r = 6.0 * volume.at(i, j, k) -
                                 (volume.at(i - 1, j, k) + volume.at(i + 1, j, k) +
                                  volume.at(i, j - 1, k) + volume.at(i, j + 1, k) +
                                  volume.at(i, j, k - 1) + volume.at(i, j, k + 1));
                worst = std::max(worst, std::fabs(r) / 6.0);
            }
    return worst;
}

double trilinear_reference(const CornerSet& corner_set, const Vec3& p) {
    if (corner_set.values.size() < 8) throw InputError("corner set is incomplete");
    double c[8];
    for (int i = 0; i < 8; ++i) c[i] = corner_set.corner(i);
    return trilinear8(c, p[0], p[1], p[2]);
}

} // namespace voxfield
