#include "voxfield/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>

namespace voxfield {

FaceGrid FaceGrid::zeros(FaceId id, int n) {
    if (n < 2) throw InputError("face grid side must be >= 2");
    FaceGrid g;
    g.face_id = id;
    g.n = n;
    g.values.assign(static_cast<size_t>(n) * n, 0.0);
    return g;
}

int face_constant_axis(FaceId id) {
    switch (id) {
        case FaceId::Zmin:
        case FaceId::Zmax: return 2;
        case FaceId::Ymin:
        case FaceId::Ymax: return 1;
        default: return 0;
    }
}

int face_side(FaceId id) {
    return (id == FaceId::Zmax || id == FaceId::Ymax || id == FaceId::Xmax) ? 1 : 0;
}

namespace {

// Free axes of a face, ascending: u runs along the first, v along the second.
std::array<int, 2> face_free_axes(FaceId id) {
    const int c = face_constant_axis(id);
    if (c == 0) return {1, 2};
    if (c == 1) return {0, 2};
    return {0, 1};
}

} // namespace

std::array<int, 3> face_node(FaceId id, int u, int v, int n) {
    const int c = face_constant_axis(id);
    const auto free = face_free_axes(id);
    std::array<int, 3> node{};
    node[c] = face_side(id) * (n - 1);
    node[free[0]] = u;
    node[free[1]] = v;
    return node;
}

std::array<int, 4> face_corner_indices(FaceId id) {
    std::array<int, 4> out{};
    int idx = 0;
    for (int b = 0; b <= 1; ++b)
        for (int a = 0; a <= 1; ++a) {
            const int c = face_constant_axis(id);
            const auto free = face_free_axes(id);
            int coord[3];
            coord[c] = face_side(id);
            coord[free[0]] = a;
            coord[free[1]] = b;
            out[idx++] = coord[0] + 2 * coord[1] + 4 * coord[2];
        }
    return out;
}

const char* boundary_method_name(BoundaryMethod m) {
    return m == BoundaryMethod::Bilinear ? "bilinear" : "fd2d";
}

std::optional<BoundaryMethod> parse_boundary_method(const std::string& text) {
    if (text == "bilinear") return BoundaryMethod::Bilinear;
    if (text == "fd2d") return BoundaryMethod::FD2D;
    return std::nullopt;
}

double BoundaryField::value_at(int i, int j, int k) const {
    if (k == 0) return face(FaceId::Zmin).at(i, j);
    if (k == n - 1) return face(FaceId::Zmax).at(i, j);
    if (j == 0) return face(FaceId::Ymin).at(i, k);
    if (j == n - 1) return face(FaceId::Ymax).at(i, k);
    if (i == 0) return face(FaceId::Xmin).at(j, k);
    if (i == n - 1) return face(FaceId::Xmax).at(j, k);
    throw InputError("value_at: (" + std::to_string(i) + "," + std::to_string(j) + "," +
                     std::to_string(k) + ") is not a boundary node");
}

bool BoundaryField::is_boundary_node(int i, int j, int k) const {
    return i == 0 || i == n - 1 || j == 0 || j == n - 1 || k == 0 || k == n - 1;
}

double BoundaryField::min_value() const {
    double m = faces[0].values[0];
    for (const FaceGrid& f : faces) m = std::min(m, *std::min_element(f.values.begin(), f.values.end()));
    return m;
}

double BoundaryField::max_value() const {
    double m = faces[0].values[0];
    for (const FaceGrid& f : faces) m = std::max(m, *std::max_element(f.values.begin(), f.values.end()));
    return m;
}

EdgeSet interp_edges(const CornerSet& corner_set, int n) {
    if (n < 2) throw InputError("edge grid side must be >= 2");
    if (corner_set.values.size() < 8) throw InputError("corner set is incomplete");
    EdgeSet set;
    set.n = n;
    for (int axis = 0; axis < 3; ++axis) {
        const int lo_ax = axis == 0 ? 1 : 0;
        const int hi_ax = axis == 2 ? 1 : 2;
        for (int t_hi = 0; t_hi <= 1; ++t_hi)
            for (int t_lo = 0; t_lo <= 1; ++t_lo) {
                Edge& e = set.edges[EdgeSet::index(axis, t_lo, t_hi)];
                e.axis = axis;
                e.t_lo = t_lo;
                e.t_hi = t_hi;
                int coord[3];
                coord[lo_ax] = t_lo;
                coord[hi_ax] = t_hi;
                coord[axis] = 0;
                const double a = corner_set.corner(coord[0] + 2 * coord[1] + 4 * coord[2]);
                coord[axis] = 1;
                const double b = corner_set.corner(coord[0] + 2 * coord[1] + 4 * coord[2]);
                e.values.resize(static_cast<size_t>(n));
                for (int t = 0; t < n; ++t) {
                    const double s = double(t) / double(n - 1);
                    // std::lerp is exact at the endpoints and for a == b.
                    e.values[static_cast<size_t>(t)] = std::lerp(a, b, s);
                }
            }
    }
    return set;
}

FaceGrid bilinear_face(FaceId id, const std::array<double, 4>& corners, int n) {
    FaceGrid g = FaceGrid::zeros(id, n);
    const double c00 = corners[0], c10 = corners[1], c01 = corners[2], c11 = corners[3];
    // Factorized lerp form of (1-u)(1-v)c00 + u(1-v)c10 + (1-u)v c01 + uv c11.
    // Rows at u,v in {0,1} then carry the same bits as the 1D edge blends.
    for (int j = 0; j < n; ++j) {
        const double v = double(j) / double(n - 1);
        for (int i = 0; i < n; ++i) {
            const double u = double(i) / double(n - 1);
            g.at(i, j) = std::lerp(std::lerp(c00, c10, u), std::lerp(c01, c11, u), v);
        }
    }
    return g;
}

std::vector<std::array<int, 2>> center_pin_nodes(int n) {
    if (n % 2 == 1) {
        const int c = (n - 1) / 2;
        return {{c, c}};
    }
    // The face center falls between lattice nodes; pin the four around it.
    const int c0 = n / 2 - 1;
    const int c1 = n / 2;
    return {{c0, c0}, {c1, c0}, {c0, c1}, {c1, c1}};
}

namespace {

double face_interior_residual(const FaceGrid& g, const std::vector<unsigned char>& pinned) {
    const int n = g.n;
    double worst = 0.0;
    for (int v = 1; v < n - 1; ++v)
        for (int u = 1; u < n - 1; ++u) {
            if (pinned[static_cast<size_t>(v) * n + u]) continue;
            const double r = 4.0 * g.at(u, v) -
                             (g.at(u - 1, v) + g.at(u + 1, v) + g.at(u, v - 1) + g.at(u, v + 1));
            worst = std::max(worst, std::fabs(r) / 4.0);
        }
    return worst;
}

void stamp_edges_on_face(FaceGrid& g, const EdgeSet& edges) {
    const int n = g.n;
    const FaceId id = g.face_id;
    const int c = face_constant_axis(id);
    const int s = face_side(id);
    const auto free = face_free_axes(id);

    const auto edge_for = [&](int run_axis, int other_axis, int other_side) -> const Edge& {
        // Transverse axes of the edge, ascending: the face's constant axis
        // and the face axis orthogonal to the run direction.
        int ax1 = other_axis, s1 = other_side;
        int ax2 = c, s2 = s;
        if (ax1 > ax2) {
            std::swap(ax1, ax2);
            std::swap(s1, s2);
        }
        (void)ax1;
        return edges.edge(run_axis, s1, s2);
    };

    const Edge& v0 = edge_for(free[0], free[1], 0);
    const Edge& v1 = edge_for(free[0], free[1], 1);
    const Edge& u0 = edge_for(free[1], free[0], 0);
    const Edge& u1 = edge_for(free[1], free[0], 1);
    for (int t = 0; t < n; ++t) {
        g.at(t, 0) = v0.values[static_cast<size_t>(t)];
        g.at(t, n - 1) = v1.values[static_cast<size_t>(t)];
        g.at(0, t) = u0.values[static_cast<size_t>(t)];
        g.at(n - 1, t) = u1.values[static_cast<size_t>(t)];
    }
}

} // namespace

FaceGrid fd2d_face(const FaceGrid& face, std::optional<double> center_pin,
                   const SolverParams& params) {
    params.validate();
    const int n = face.n;
    FaceGrid g = face;
    if (n == 2) return g; // no interior

    std::vector<unsigned char> pinned(static_cast<size_t>(n) * n, 0);
    double lo = g.at(0, 0), hi = g.at(0, 0);
    for (int t = 0; t < n; ++t) {
        for (int val : {0, n - 1}) {
            lo = std::min({lo, g.at(t, val), g.at(val, t)});
            hi = std::max({hi, g.at(t, val), g.at(val, t)});
        }
    }
    if (center_pin) {
        lo = std::min(lo, *center_pin);
        hi = std::max(hi, *center_pin);
    }

    // Warm start: bilinear fill from the ring corners.
    {
        const double c00 = g.at(0, 0), c10 = g.at(n - 1, 0);
        const double c01 = g.at(0, n - 1), c11 = g.at(n - 1, n - 1);
        for (int v = 1; v < n - 1; ++v) {
            const double fv = double(v) / double(n - 1);
            for (int u = 1; u < n - 1; ++u) {
                const double fu = double(u) / double(n - 1);
                g.at(u, v) = ((1.0 - fu) * (1.0 - fv) * c00 + fu * (1.0 - fv) * c10) +
                             ((1.0 - fu) * fv * c01 + fu * fv * c11);
            }
        }
    }
    if (center_pin) {
        for (const auto& [u, v] : center_pin_nodes(n)) {
            g.at(u, v) = *center_pin;
            pinned[static_cast<size_t>(v) * n + u] = 1;
        }
    }

    const double omega = params.resolved_relaxation(n);
    const long max_iter = params.resolved_max_iterations(n);
    double residual = face_interior_residual(g, pinned);
    bool converged = residual <= params.tolerance;
    long iter = 0;
    while (!converged && iter < max_iter) {
        ++iter;
        double max_update = 0.0;
        for (int v = 1; v < n - 1; ++v)
            for (int u = 1; u < n - 1; ++u) {
                if (pinned[static_cast<size_t>(v) * n + u]) continue;
                const double old = g.at(u, v);
                const double gs = 0.25 * (g.at(u - 1, v) + g.at(u + 1, v) +
                                          g.at(u, v - 1) + g.at(u, v + 1));
                const double next = old + omega * (gs - old);
                g.at(u, v) = next;
                max_update = std::max(max_update, std::fabs(next - old));
            }
        if (max_update <= params.tolerance) {
            residual = face_interior_residual(g, pinned);
            converged = residual <= params.tolerance;
        }
    }
    if (!converged) {
        residual = face_interior_residual(g, pinned);
        char buf[128];
        std::snprintf(buf, sizeof buf, "2d face solve did not converge: residual %.3e after %ld sweeps",
                      residual, iter);
        throw ConvergenceError(buf, iter, residual);
    }
    for (int v = 1; v < n - 1; ++v)
        for (int u = 1; u < n - 1; ++u) {
            if (pinned[static_cast<size_t>(v) * n + u]) continue;
            g.at(u, v) = std::clamp(g.at(u, v), lo, hi);
        }
    return g;
}

BoundaryField assemble_boundary(const CornerSet& corner_set, BoundaryMethod method,
                                int n, const SolverParams& params) {
    if (corner_set.values.size() != static_cast<size_t>(placement_point_count(corner_set.scheme))) {
        throw InputError("corner set does not match its placement scheme");
    }
    const bool use_pins = method == BoundaryMethod::FD2D &&
                          corner_set.scheme == PlacementScheme::S2_corners_plus_centers14;

    BoundaryField boundary;
    boundary.n = n;
    boundary.method = method;
    boundary.field = corner_set.field;

    const EdgeSet edges = interp_edges(corner_set, n);

    std::exception_ptr fail;
#pragma omp parallel for if (params.parallel && method == BoundaryMethod::FD2D) schedule(static)
    for (int f = 0; f < 6; ++f) {
        try {
            const FaceId id = kAllFaces[static_cast<size_t>(f)];
            if (method == BoundaryMethod::Bilinear) {
                const auto ci = face_corner_indices(id);
                FaceGrid g = bilinear_face(id, {corner_set.corner(ci[0]), corner_set.corner(ci[1]),
                                                corner_set.corner(ci[2]), corner_set.corner(ci[3])},
                                           n);
                stamp_edges_on_face(g, edges);
                boundary.faces[static_cast<size_t>(f)] = std::move(g);
            } else {
                FaceGrid g = FaceGrid::zeros(id, n);
                stamp_edges_on_face(g, edges);
                std::optional<double> pin;
                if (use_pins) pin = corner_set.face_center(f);
                boundary.faces[static_cast<size_t>(f)] = fd2d_face(g, pin, params);
            }
        } catch (...) {
#pragma omp critical
            if (!fail) fail = std::current_exception();
        }
    }
    if (fail) std::rethrow_exception(fail);
    return boundary;
}

BoundaryField boundary_from_node_values(int n,
                                        const std::function<double(int, int, int)>& node_value,
                                        FieldKind field, BoundaryMethod method) {
    BoundaryField boundary;
    boundary.n = n;
    boundary.method = method;
    boundary.field = std::move(field);
    for (int f = 0; f < 6; ++f) {
        const FaceId id = kAllFaces[static_cast<size_t>(f)];
        FaceGrid g = FaceGrid::zeros(id, n);
        for (int v = 0; v < n; ++v)
            for (int u = 0; u < n; ++u) {
                const auto node = face_node(id, u, v, n);
                g.at(u, v) = node_value(node[0], node[1], node[2]);
            }
        boundary.faces[static_cast<size_t>(f)] = std::move(g);
    }
    check_edge_consistency(boundary);
    return boundary;
}

void check_edge_consistency(const BoundaryField& boundary) {
    const int n = boundary.n;
    std::vector<double> seen(static_cast<size_t>(n) * n * n, 0.0);
    std::vector<unsigned char> have(static_cast<size_t>(n) * n * n, 0);
    for (const FaceGrid& g : boundary.faces) {
        for (int v = 0; v < n; ++v)
            for (int u = 0; u < n; ++u) {
                const auto node = face_node(g.face_id, u, v, n);
                const size_t idx =
                    static_cast<size_t>(node[0]) + static_cast<size_t>(n) * (node[1] + static_cast<size_t>(n) * node[2]);
                const double value = g.at(u, v);
                if (have[idx] && seen[idx] != value) {
                    char buf[160];
                    std::snprintf(buf, sizeof buf,
                                  "boundary faces disagree at node (%d,%d,%d): %.17g vs %.17g",
                                  node[0], node[1], node[2], seen[idx], value);
                    throw InputError(buf);
                }
                seen[idx] = value;
                have[idx] = 1;
            }
    }
}

} // namespace voxfield
