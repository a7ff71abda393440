#pragma once

#include <vector>

#include "voxfield/boundary.hpp"
#include "voxfield/core.hpp"
#include "voxfield/solver_params.hpp"

namespace voxfield {

enum class Provenance { FDSolve, SurrogateSample, Predefined };

const char* provenance_name(Provenance p);
std::optional<Provenance> parse_provenance(const std::string& text);

/// n x n x n scalar samples on the regular unit-cube lattice:
/// node (i,j,k) sits at (i,j,k)/(n-1). Storage is i-fastest.
struct VolumeGrid {
    int n = 0;
    FieldKind field;
    Provenance provenance = Provenance::Predefined;
    std::vector<double> values;

    static VolumeGrid filled(int n, double value, FieldKind field = FieldKind::temperature(),
                             Provenance provenance = Provenance::Predefined);

    size_t index(int i, int j, int k) const {
        return static_cast<size_t>(i) + static_cast<size_t>(n) * (static_cast<size_t>(j) + static_cast<size_t>(n) * static_cast<size_t>(k));
    }
    double& at(int i, int j, int k) { return values[index(i, j, k)]; }
    double at(int i, int j, int k) const { return values[index(i, j, k)]; }

    double min_value() const;
    double max_value() const;
};

/// Solve the 3D Dirichlet Laplace problem on the boundary's grid.
///
/// Interior nodes satisfy the 7-point equation (node = mean of its six axis
/// neighbors) to params.tolerance in max norm; boundary nodes are copied
/// unchanged. The converged interior is clamped to the boundary range, so the
/// discrete maximum principle holds exactly, not just within tolerance.
///
/// params.parallel = false: lexicographic (k,j,i) Gauss-Seidel SOR sweeps.
/// params.parallel = true:  red-black SOR with OpenMP sweeps. Updates within
/// a color are independent, so the result is bit-deterministic for any
/// thread count; it differs from the serial path only in low-order bits.
VolumeGrid solve_laplace3d(const BoundaryField& boundary, const SolverParams& params = {});

/// Max over interior nodes of |6 u(i,j,k) - sum of axis neighbors| / 6.
double discrete_residual(const VolumeGrid& volume);

/// Closed-form 8-corner trilinear blend at p. Takes any complete CornerSet
/// (S2 centers are ignored). Trilinear functions are discretely harmonic,
/// which makes this an exact reference for bilinear-boundary solves.
double trilinear_reference(const CornerSet& corner_set, const Vec3& p);

} // namespace voxfield
