#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "voxfield/core.hpp"
#include "voxfield/solver_params.hpp"

namespace voxfield {

// Face order matches the S2 face-center order of canonical_placement().
enum class FaceId { Zmin = 0, Ymin, Xmin, Zmax, Ymax, Xmax };

constexpr std::array<FaceId, 6> kAllFaces = {FaceId::Zmin, FaceId::Ymin, FaceId::Xmin,
                                             FaceId::Zmax, FaceId::Ymax, FaceId::Xmax};

/// Face-local coordinates. Each face fixes one axis c at side s (0 or 1);
/// u runs along the lower-index free axis and v along the higher one, both
/// ascending. The (u,v) -> (x,y,z) embedding is therefore:
///   Zmin (u,v,0)   Ymin (u,0,v)   Xmin (0,u,v)
///   Zmax (u,v,1)   Ymax (u,1,v)   Xmax (1,u,v)
struct FaceGrid {
    FaceId face_id = FaceId::Zmin;
    int n = 0;
    std::vector<double> values; // n*n, row-major, u fastest

    static FaceGrid zeros(FaceId id, int n);

    double& at(int u, int v) { return values[static_cast<size_t>(v) * n + u]; }
    double at(int u, int v) const { return values[static_cast<size_t>(v) * n + u]; }
};

int face_constant_axis(FaceId id); // 0=x, 1=y, 2=z
int face_side(FaceId id);          // 0 or 1
/// 3D lattice node of face-local node (u,v) on an n-grid.
std::array<int, 3> face_node(FaceId id, int u, int v, int n);
/// Canonical corner indices (x + 2y + 4z) of a face's c00,c10,c01,c11.
std::array<int, 4> face_corner_indices(FaceId id);

/// One cube edge: runs along `axis`, the two transverse axes (in increasing
/// axis order) are fixed at side `t_lo`, `t_hi`. Twelve in axis-major order.
struct Edge {
    int axis = 0;
    int t_lo = 0;
    int t_hi = 0;
    std::vector<double> values; // n nodes, ascending along axis
};

struct EdgeSet {
    int n = 0;
    std::array<Edge, 12> edges;

    static int index(int axis, int t_lo, int t_hi) { return 4 * axis + t_lo + 2 * t_hi; }
    const Edge& edge(int axis, int t_lo, int t_hi) const { return edges[index(axis, t_lo, t_hi)]; }
};

/// Complete Dirichlet data for the unit cube: six edge-consistent faces.
enum class BoundaryMethod { Bilinear, FD2D };

const char* boundary_method_name(BoundaryMethod m);
std::optional<BoundaryMethod> parse_boundary_method(const std::string& text);

struct BoundaryField {
    int n = 0;
    std::array<FaceGrid, 6> faces;
    BoundaryMethod method = BoundaryMethod::Bilinear;
    FieldKind field;

    const FaceGrid& face(FaceId id) const { return faces[static_cast<size_t>(id)]; }
    FaceGrid& face(FaceId id) { return faces[static_cast<size_t>(id)]; }

    /// Value at a boundary lattice node (any face containing it; faces agree).
    double value_at(int i, int j, int k) const;
    bool is_boundary_node(int i, int j, int k) const;
    double min_value() const;
    double max_value() const;
};

// -- operations ------------------------------------------------------------

/// 1D linear interpolation of the two corner readings along each of the
/// 12 cube edges. Computed once so that adjacent faces share identical bits.
EdgeSet interp_edges(const CornerSet& corner_set, int n);

/// value(u,v) = (1-u)(1-v)c00 + u(1-v)c10 + (1-u)v c01 + uv c11
/// at u = i/(n-1), v = j/(n-1). corners = {c00, c10, c01, c11}.
FaceGrid bilinear_face(FaceId id, const std::array<double, 4>& corners, int n);

/// 5-point Laplace solve of a face interior. `face` must carry Dirichlet
/// data on its boundary ring (4(n-1) nodes); interior values are ignored.
/// If center_pin is set, the center node (odd n) or the four nodes around
/// the center (even n) are held at the pin value. Interior values are
/// clamped to [min, max] of the Dirichlet ring and pin after convergence,
/// which makes the discrete maximum principle exact for the returned grid.
FaceGrid fd2d_face(const FaceGrid& face, std::optional<double> center_pin,
                   const SolverParams& params);

/// Lattice nodes a center pin holds: one node for odd n, four for even n.
std::vector<std::array<int, 2>> center_pin_nodes(int n);

/// Build all six faces from a complete CornerSet. Edges are interpolated
/// once and stamped onto every face, so shared edge nodes are bit-identical.
/// FD2D with an S2 corner set pins each face's center to its center reading.
BoundaryField assemble_boundary(const CornerSet& corner_set, BoundaryMethod method,
                                int n, const SolverParams& params = {});

/// Sample a node function onto all six faces of an n-grid. Every shared node
/// gets the same single evaluation, so the result is edge-consistent by
/// construction. Used to synthesize boundary data directly from fields.
BoundaryField boundary_from_node_values(
    int n, const std::function<double(int, int, int)>& node_value,
    FieldKind field = FieldKind::temperature(),
    BoundaryMethod method = BoundaryMethod::Bilinear);

/// Throws InputError if two faces disagree on a shared lattice node.
void check_edge_consistency(const BoundaryField& boundary);

} // namespace voxfield
