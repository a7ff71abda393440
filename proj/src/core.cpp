#include "voxfield/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace voxfield {

namespace {

const char* axis_name(int axis) {
    static const char* names[3] = {"x", "y", "z"};
    return names[axis];
}

} // namespace

Domain Domain::make(const Vec3& min_corner, const Vec3& max_corner) {
    for (int d = 0; d < 3; ++d) {
        if (!(max_corner[d] > min_corner[d])) {
            throw InputError(std::string("domain: max <= min on axis ") + axis_name(d));
        }
    }
    return Domain{min_corner, max_corner};
}

bool Domain::contains(const Vec3& p) const {
    for (int d = 0; d < 3; ++d) {
        if (p[d] < min_corner[d] || p[d] > max_corner[d]) return false;
    }
    return true;
}

FieldKind FieldKind::temperature() {
    return FieldKind{FieldName::Temperature, "°C", std::nullopt};
}

FieldKind FieldKind::nitrogen(const std::string& compound) {
    return FieldKind{FieldName::NitrogenCompound, "mg/L", compound};
}

bool valid_sensor_id(const std::string& id) {
    if (id.empty() || id.size() > 32) return false;
    for (char c : id) {
        bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                  (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

SensorReading SensorReading::make(std::string sensor_id, const Vec3& position,
                                  double value, std::int64_t unix_ms) {
    if (!valid_sensor_id(sensor_id)) {
        throw InputError("sensor id '" + sensor_id + "' does not match [A-Za-z0-9_-]{1,32}");
    }
    if (!std::isfinite(value)) {
        throw InputError("reading from '" + sensor_id + "' has non-finite value");
    }
    if (unix_ms < 0) {
        throw InputError("reading from '" + sensor_id + "' has negative timestamp");
    }
    return SensorReading{std::move(sensor_id), position, value, unix_ms};
}

int placement_point_count(PlacementScheme scheme) {
    return scheme == PlacementScheme::S1_corners8 ? 8 : 14;
}

const char* placement_name(PlacementScheme scheme) {
    return scheme == PlacementScheme::S1_corners8 ? "s1" : "s2";
}

std::optional<PlacementScheme> parse_placement(const std::string& text) {
    if (text == "s1" || text == "S1") return PlacementScheme::S1_corners8;
    if (text == "s2" || text == "S2") return PlacementScheme::S2_corners_plus_centers14;
    return std::nullopt;
}

Vec3 normalize_point(const Domain& domain, const Vec3& p) {
    Vec3 q{};
    for (int d = 0; d < 3; ++d) {
        if (p[d] < domain.min_corner[d] || p[d] > domain.max_corner[d]) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "point outside domain on axis %s: %.17g not in [%.17g, %.17g]",
                          axis_name(d), p[d], domain.min_corner[d], domain.max_corner[d]);
            throw InputError(buf);
        }
        q[d] = (p[d] - domain.min_corner[d]) / domain.extent(d);
    }
    return q;
}

Vec3 denormalize_point(const Domain& domain, const Vec3& q) {
    // std::lerp is exact at q=0 and q=1, so corners round-trip bit-exactly.
    return Vec3{std::lerp(domain.min_corner[0], domain.max_corner[0], q[0]),
                std::lerp(domain.min_corner[1], domain.max_corner[1], q[1]),
                std::lerp(domain.min_corner[2], domain.max_corner[2], q[2])};
}

std::vector<Vec3> canonical_placement(PlacementScheme scheme) {
    std::vector<Vec3> points;
    points.reserve(static_cast<size_t>(placement_point_count(scheme)));
    for (int z = 0; z <= 1; ++z)
        for (int y = 0; y <= 1; ++y)
            for (int x = 0; x <= 1; ++x)
                points.push_back(Vec3{double(x), double(y), double(z)});
    if (scheme == PlacementScheme::S2_corners_plus_centers14) {
        points.push_back(Vec3{0.5, 0.5, 0.0}); // z=0
        points.push_back(Vec3{0.5, 0.0, 0.5}); // y=0
        points.push_back(Vec3{0.0, 0.5, 0.5}); // x=0
        points.push_back(Vec3{0.5, 0.5, 1.0}); // z=1
        points.push_back(Vec3{0.5, 1.0, 0.5}); // y=1
        points.push_back(Vec3{1.0, 0.5, 0.5}); // x=1
    }
    return points;
}

CornerSet match_readings(const std::vector<SensorReading>& readings,
                         const Domain& domain, PlacementScheme scheme,
                         FieldKind field, double tol) {
    if (!(tol > 0.0 && tol < 0.25)) {
        throw InputError("matching tolerance must lie in (0, 0.25)");
    }
    const std::vector<Vec3> points = canonical_placement(scheme);

    struct Match {
        const SensorReading* reading = nullptr;
    };
    std::vector<Match> best(points.size());

    for (const SensorReading& r : readings) {
        const Vec3 q = normalize_point(domain, r.position);
        for (size_t i = 0; i < points.size(); ++i) {
            const double cheb = std::max({std::fabs(q[0] - points[i][0]),
                                          std::fabs(q[1] - points[i][1]),
                                          std::fabs(q[2] - points[i][2])});
            if (cheb > tol) continue;
            const SensorReading* cur = best[i].reading;
            if (cur == nullptr || r.unix_ms > cur->unix_ms ||
                (r.unix_ms == cur->unix_ms && r.sensor_id > cur->sensor_id)) {
                best[i].reading = &r;
            }
        }
    }

    std::string missing;
    for (size_t i = 0; i < points.size(); ++i) {
        if (best[i].reading != nullptr) continue;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s(%g, %g, %g)", missing.empty() ? "" : ", ",
                      points[i][0], points[i][1], points[i][2]);
        missing += buf;
    }
    if (!missing.empty()) {
        throw InputError("incomplete snapshot, no reading near canonical point(s): " + missing);
    }

    CornerSet set;
    set.scheme = scheme;
    set.field = std::move(field);
    set.values.resize(points.size());
    std::int64_t latest = 0;
    for (size_t i = 0; i < points.size(); ++i) {
        set.values[i] = best[i].reading->value;
        latest = std::max(latest, best[i].reading->unix_ms);
    }
    set.snapshot_ms = latest;
    return set;
}

std::array<Cell, 8> subdivide(const Cell& cell) {
    std::array<Cell, 8> children;
    Vec3 mid{};
    for (int d = 0; d < 3; ++d) {
        mid[d] = 0.5 * (cell.bounds.min_corner[d] + cell.bounds.max_corner[d]);
    }
    int idx = 0;
    for (int z = 0; z <= 1; ++z)
        for (int y = 0; y <= 1; ++y)
            for (int x = 0; x <= 1; ++x) {
                const int sel[3] = {x, y, z};
                Cell child;
                child.depth = cell.depth + 1;
                for (int d = 0; d < 3; ++d) {
                    child.bounds.min_corner[d] = sel[d] ? mid[d] : cell.bounds.min_corner[d];
                    child.bounds.max_corner[d] = sel[d] ? cell.bounds.max_corner[d] : mid[d];
                }
                children[idx++] = child;
            }
    return children;
}

// -- CSV ---------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader = "sensor_id,x,y,z,value,unix_ms";

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double_field(const std::string& s, int line_no, const char* what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("csv line " + std::to_string(line_no) + ": bad " + what + " '" + s + "'");
    }
}

std::int64_t parse_ms_field(const std::string& s, int line_no) {
    try {
        size_t pos = 0;
        long long v = std::stoll(s, &pos);
        if (pos != s.size() || v < 0) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("csv line " + std::to_string(line_no) + ": bad unix_ms '" + s + "'");
    }
}

} // namespace

std::vector<SensorReading> read_readings_csv(std::istream& in) {
    std::vector<SensorReading> readings;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != kCsvHeader) {
                throw InputError(std::string("csv: expected header '") + kCsvHeader + "'");
            }
            continue;
        }
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 6) {
            throw InputError("csv line " + std::to_string(line_no) + ": expected 6 fields, got " +
                             std::to_string(fields.size()));
        }
        Vec3 pos{parse_double_field(fields[1], line_no, "x"),
                 parse_double_field(fields[2], line_no, "y"),
                 parse_double_field(fields[3], line_no, "z")};
        double value = parse_double_field(fields[4], line_no, "value");
        std::int64_t ms = parse_ms_field(fields[5], line_no);
        try {
            readings.push_back(SensorReading::make(fields[0], pos, value, ms));
        } catch (const InputError& e) {
            throw InputError("csv line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return readings;
}

std::vector<SensorReading> read_readings_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open readings csv: " + path);
    return read_readings_csv(in);
}

void write_readings_csv(std::ostream& out, const std::vector<SensorReading>& readings) {
    out << kCsvHeader << '\n';
    char buf[256];
    for (const SensorReading& r : readings) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%lld\n", r.sensor_id.c_str(),
                      r.position[0], r.position[1], r.position[2], r.value,
                      static_cast<long long>(r.unix_ms));
        out << buf;
    }
}

void write_readings_csv_file(const std::string& path, const std::vector<SensorReading>& readings) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write readings csv: " + path);
    write_readings_csv(out, readings);
    if (!out.flush()) throw IoError("short write: " + path);
}

} // namespace voxfield
