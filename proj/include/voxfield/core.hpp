#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "voxfield/error.hpp"

namespace voxfield {

using Vec3 = std::array<double, 3>;

/// Axis-aligned box in world coordinates (meters). The normalized field
/// domain is always the unit cube; a Domain describes the physical room
/// it was scaled from.
struct Domain {
    Vec3 min_corner{0.0, 0.0, 0.0};
    Vec3 max_corner{1.0, 1.0, 1.0};

    static Domain make(const Vec3& min_corner, const Vec3& max_corner);
    static Domain unit_cube() { return {}; }

    double extent(int axis) const { return max_corner[axis] - min_corner[axis]; }
    bool contains(const Vec3& p) const;
};

enum class FieldName { Temperature, NitrogenCompound };

struct FieldKind {
    FieldName name = FieldName::Temperature;
    std::string unit = "°C";
    std::optional<std::string> compound_label; // e.g. NH3, NO3

    static FieldKind temperature();
    static FieldKind nitrogen(const std::string& compound);

    bool operator==(const FieldKind&) const = default;
};

/// One timestamped scalar sample from an identified sensor.
/// Identifiers match [A-Za-z0-9_-]{1,32}; values must be finite.
struct SensorReading {
    std::string sensor_id;
    Vec3 position{}; // world coordinates (meters)
    double value = 0.0;
    std::int64_t unix_ms = 0;

    static SensorReading make(std::string sensor_id, const Vec3& position,
                              double value, std::int64_t unix_ms);
};

bool valid_sensor_id(const std::string& id);

enum class PlacementScheme {
    S1_corners8,            // the 8 cube corners
    S2_corners_plus_centers14 // corners plus the 6 face centers
};

int placement_point_count(PlacementScheme scheme);
const char* placement_name(PlacementScheme scheme);
std::optional<PlacementScheme> parse_placement(const std::string& text);

/// A complete snapshot: one value per canonical point of the scheme,
/// stored in canonical_placement() order.
struct CornerSet {
    PlacementScheme scheme = PlacementScheme::S1_corners8;
    FieldKind field;
    std::int64_t snapshot_ms = 0;
    std::vector<double> values; // aligned with canonical_placement(scheme)

    double corner(int index) const { return values.at(static_cast<size_t>(index)); }
    // The 6 face-center readings, in face order Zmin,Ymin,Xmin,Zmax,Ymax,Xmax.
    // Only meaningful for S2.
    double face_center(int face_index) const { return values.at(static_cast<size_t>(8 + face_index)); }
};

/// A normalized sub-box produced by recursive octant subdivision.
struct Cell {
    Domain bounds = Domain::unit_cube();
    int depth = 0;

    static Cell root() { return {}; }
};

// -- operations ------------------------------------------------------------

/// Componentwise affine map of a world point into [0,1]^3.
/// Throws InputError naming the offending axis for out-of-bounds points.
Vec3 normalize_point(const Domain& domain, const Vec3& p);

/// Inverse of normalize_point; exact at domain corners.
Vec3 denormalize_point(const Domain& domain, const Vec3& q);

/// Canonical sensor positions for a scheme, in deterministic order:
/// corners in (z,y,x)-lexicographic order, then face centers in order
/// (z=0, y=0, x=0, z=1, y=1, x=1).
std::vector<Vec3> canonical_placement(PlacementScheme scheme);

/// Assign each canonical point the most recent reading whose normalized
/// position lies within `tol` (Chebyshev distance) of it. Ties are broken
/// by latest timestamp, then lexicographically larger sensor_id.
/// Throws InputError listing the missing canonical points if incomplete.
CornerSet match_readings(const std::vector<SensorReading>& readings,
                         const Domain& domain, PlacementScheme scheme,
                         FieldKind field, double tol = 0.05);

/// Split a cell into its 8 octants (in (z,y,x)-lexicographic child order).
std::array<Cell, 8> subdivide(const Cell& cell);

// -- CSV snapshot interface --------------------------------------------------
// Header `sensor_id,x,y,z,value,unix_ms`, one reading per line, '.' decimal
// separator, UTF-8, LF line endings.

std::vector<SensorReading> read_readings_csv(std::istream& in);
std::vector<SensorReading> read_readings_csv_file(const std::string& path);
void write_readings_csv(std::ostream& out, const std::vector<SensorReading>& readings);
void write_readings_csv_file(const std::string& path, const std::vector<SensorReading>& readings);

} // namespace voxfield
