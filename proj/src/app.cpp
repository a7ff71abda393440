#include "voxfield/app.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace voxfield::app {

namespace fs = std::filesystem;

void PipelineConfig::validate() const {
    if (grid_n < 3) throw InputError("grid_n must be >= 3");
    if (surrogate.hidden < 1) throw InputError("hidden width must be >= 1");
    if (surrogate.train_cadence < 0) throw InputError("train_cadence must be >= 0");
    if (!(match_tol > 0.0 && match_tol < 0.25)) throw InputError("match_tol must lie in (0, 0.25)");
    if (!(sensor_period_s > 0.0)) throw InputError("sensor_period_s must be > 0");
    if (anomaly_floor < 0.0) throw InputError("anomaly_floor must be >= 0");
    solver.validate();
    colormap.validate();
    for (const auto& [id, pos] : sensor_positions) {
        if (!valid_sensor_id(id)) throw InputError("config: bad sensor id '" + id + "'");
        if (!domain.contains(pos)) throw InputError("config: sensor '" + id + "' lies outside the domain");
    }
}

std::map<std::string, Vec3> PipelineConfig::resolved_sensor_positions() const {
    if (!sensor_positions.empty()) return sensor_positions;
    std::map<std::string, Vec3> out;
    const auto points = canonical_placement(scheme);
    for (size_t i = 0; i < points.size(); ++i) {
        out["s" + std::to_string(i)] = denormalize_point(domain, points[i]);
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InputError("config: bad number for " + key + ": '" + value + "'");
    }
}

long parse_integer(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw InputError("config: bad integer for " + key + ": '" + value + "'");
    }
}

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw InputError("config: bad boolean for " + key + ": '" + value + "'");
}

Vec3 parse_vec3(const std::string& value, const std::string& key) {
    std::istringstream in(value);
    Vec3 v{};
    if (!(in >> v[0] >> v[1] >> v[2])) {
        throw InputError("config: expected three numbers for " + key + ": '" + value + "'");
    }
    std::string rest;
    if (in >> rest) throw InputError("config: trailing junk for " + key + ": '" + value + "'");
    return v;
}

} // namespace

void apply_config_entry(PipelineConfig& c, const std::string& key, const std::string& value) {
    if (key == "domain_min") {
        c.domain.min_corner = parse_vec3(value, key);
    } else if (key == "domain_max") {
        c.domain.max_corner = parse_vec3(value, key);
    } else if (key == "scheme") {
        const auto s = parse_placement(value);
        if (!s) throw InputError("config: unknown scheme '" + value + "'");
        c.scheme = *s;
    } else if (key == "boundary") {
        const auto b = parse_boundary_method(value);
        if (!b) throw InputError("config: unknown boundary method '" + value + "'");
        c.boundary_method = *b;
    } else if (key == "grid_n") {
        c.grid_n = static_cast<int>(parse_integer(value, key));
    } else if (key == "field") {
        if (value == "temperature") {
            c.field = FieldKind::temperature();
        } else if (value == "nitrogen") {
            c.field = FieldKind::nitrogen(c.field.compound_label.value_or("NH3"));
        } else {
            throw InputError("config: unknown field '" + value + "'");
        }
    } else if (key == "unit") {
        if (value.empty()) throw InputError("config: unit must be nonempty");
        c.field.unit = value;
    } else if (key == "compound") {
        c.field.compound_label = value.empty() ? std::nullopt : std::optional<std::string>(value);
    } else if (key == "hidden") {
        c.surrogate.hidden = static_cast<int>(parse_integer(value, key));
    } else if (key == "train_cadence") {
        c.surrogate.train_cadence = parse_integer(value, key);
    } else if (key == "max_epochs") {
        c.surrogate.hyper.max_epochs = parse_integer(value, key);
    } else if (key == "learning_rate") {
        c.surrogate.hyper.learning_rate = parse_number(value, key);
    } else if (key == "rmse_target") {
        c.surrogate.hyper.rmse_target = parse_number(value, key);
    } else if (key == "seed") {
        c.seed = static_cast<std::uint64_t>(parse_integer(value, key));
    } else if (key == "match_tol") {
        c.match_tol = parse_number(value, key);
    } else if (key == "sensor_period_s") {
        c.sensor_period_s = parse_number(value, key);
    } else if (key == "anomaly_floor") {
        c.anomaly_floor = parse_number(value, key);
    } else if (key == "solver_tolerance") {
        c.solver.tolerance = parse_number(value, key);
    } else if (key == "solver_max_iterations") {
        c.solver.max_iterations = parse_integer(value, key);
    } else if (key == "solver_relaxation") {
        c.solver.relaxation = parse_number(value, key);
    } else if (key == "solver_parallel") {
        c.solver.parallel = parse_bool(value, key);
    } else if (key == "colormap_min") {
        c.colormap.v_min = value.empty() ? std::nullopt : std::optional<double>(parse_number(value, key));
    } else if (key == "colormap_max") {
        c.colormap.v_max = value.empty() ? std::nullopt : std::optional<double>(parse_number(value, key));
    } else if (key == "transparency_mode") {
        if (value == "constant") {
            c.colormap.transparency_mode = x3d::ColorMapSpec::TransparencyMode::Constant;
        } else if (value == "value_weighted") {
            c.colormap.transparency_mode = x3d::ColorMapSpec::TransparencyMode::ValueWeighted;
        } else {
            throw InputError("config: unknown transparency mode '" + value + "'");
        }
    } else if (key == "transparency") {
        c.colormap.transparency = parse_number(value, key);
    } else if (key == "transparency_min") {
        c.colormap.transparency_min = parse_number(value, key);
    } else if (key == "transparency_max") {
        c.colormap.transparency_max = parse_number(value, key);
    } else if (key.rfind("sensor.", 0) == 0) {
        const std::string id = key.substr(7);
        if (!valid_sensor_id(id)) throw InputError("config: bad sensor id '" + id + "'");
        c.sensor_positions[id] = parse_vec3(value, key);
    } else {
        throw InputError("config: unknown key '" + key + "'");
    }
}

PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig config;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            apply_config_entry(config, key, value);
        } catch (const InputError& e) {
            throw InputError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

PipelineConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

class StageTimer {
public:
    explicit StageTimer(std::map<std::string, double>& timings) : timings_(timings) {}

    template <typename Fn>
    auto run(const char* stage, Fn&& fn) -> decltype(fn()) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record(stage, t0);
            } else {
                auto result = fn();
                record(stage, t0);
                return result;
            }
        } catch (const ConvergenceError& e) {
            throw ConvergenceError(std::string(stage) + ": " + e.what(), e.iterations, e.residual);
        } catch (const IoError& e) {
            throw IoError(std::string(stage) + ": " + e.what());
        } catch (const InputError& e) {
            throw InputError(std::string(stage) + ": " + e.what());
        }
    }

private:
    void record(const char* stage, std::chrono::steady_clock::time_point t0) {
        const auto dt = std::chrono::steady_clock::now() - t0;
        timings_[stage] = std::chrono::duration<double, std::milli>(dt).count();
    }

    std::map<std::string, double>& timings_;
};

} // namespace

SnapshotArtifacts run_pipeline_once(const std::vector<SensorReading>& readings,
                                    const PipelineConfig& config, bool train) {
    config.validate();
    SnapshotArtifacts artifacts;
    StageTimer timer(artifacts.timings_ms);

    artifacts.corner_set = timer.run("match", [&] {
        return match_readings(readings, config.domain, config.scheme, config.field,
                              config.match_tol);
    });
    artifacts.boundary_field = timer.run("boundary", [&] {
        return assemble_boundary(artifacts.corner_set, config.boundary_method, config.grid_n,
                                 config.solver);
    });
    artifacts.volume = timer.run("solve", [&] {
        return solve_laplace3d(artifacts.boundary_field, config.solver);
    });
    if (train) {
        artifacts.model = timer.run("train", [&] {
            return ann::train_surrogate(artifacts.volume, config.surrogate.hidden,
                                        config.surrogate.hyper, config.seed);
        });
        artifacts.refined_volume = timer.run("sample", [&] {
            return ann::sample_volume(*artifacts.model, kRefinedGridN);
        });
    }
    artifacts.x3d_doc = timer.run("emit", [&] {
        return x3d::emit_x3d(artifacts.volume, config.colormap);
    });
    return artifacts;
}

std::vector<SensorReading> filter_stale(std::vector<SensorReading> readings, double period_s) {
    if (readings.empty()) return readings;
    std::int64_t newest = 0;
    for (const SensorReading& r : readings) newest = std::max(newest, r.unix_ms);
    const auto window = static_cast<std::int64_t>(std::llround(2.0 * period_s * 1000.0));
    std::erase_if(readings, [&](const SensorReading& r) { return r.unix_ms < newest - window; });
    return readings;
}

// -- persistence ---------------------------------------------------------------

namespace {

constexpr int kVolumeFormatVersion = 1;

} // namespace

void save_volume(std::ostream& out, const VolumeGrid& volume) {
    out << "voxfield-volume " << kVolumeFormatVersion << '\n';
    out << "n " << volume.n << '\n';
    out << "field " << (volume.field.name == FieldName::Temperature ? "temperature" : "nitrogen")
        << ' ' << volume.field.unit;
    if (volume.field.compound_label) out << ' ' << *volume.field.compound_label;
    out << '\n';
    out << "provenance " << provenance_name(volume.provenance) << '\n';
    out << "values\n";
    char buf[40];
    const int n = volume.n;
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", volume.at(i, j, k));
                out << (i ? " " : "") << buf;
            }
            out << '\n';
        }
}

void save_volume_file(const std::string& path, const VolumeGrid& volume) {
    std::ostringstream out;
    save_volume(out, volume);
    atomic_write_file(path, out.str());
}

VolumeGrid load_volume(std::istream& in) {
    std::string tok;
    if (!(in >> tok) || tok != "voxfield-volume") {
        throw InputError("volume file: missing voxfield-volume header");
    }
    long version = 0;
    if (!(in >> version)) throw InputError("volume file: bad version");
    if (version != kVolumeFormatVersion) {
        throw InputError("volume file: unsupported version " + std::to_string(version));
    }
    if (!(in >> tok) || tok != "n") throw InputError("volume file: expected n");
    int n = 0;
    if (!(in >> n) || n < 2 || n > 4096) throw InputError("volume file: bad grid side");
    if (!(in >> tok) || tok != "field") throw InputError("volume file: expected field");
    FieldKind field;
    if (!(in >> tok)) throw InputError("volume file: missing field name");
    if (tok == "temperature") {
        field.name = FieldName::Temperature;
    } else if (tok == "nitrogen") {
        field.name = FieldName::NitrogenCompound;
    } else {
        throw InputError("volume file: unknown field '" + tok + "'");
    }
    if (!(in >> field.unit)) throw InputError("volume file: missing unit");
    if (!(in >> tok)) throw InputError("volume file: expected provenance");
    if (tok != "provenance") {
        field.compound_label = tok;
        if (!(in >> tok) || tok != "provenance") throw InputError("volume file: expected provenance");
    }
    if (!(in >> tok)) throw InputError("volume file: missing provenance value");
    const auto prov = parse_provenance(tok);
    if (!prov) throw InputError("volume file: unknown provenance '" + tok + "'");
    if (!(in >> tok) || tok != "values") throw InputError("volume file: expected values");

    VolumeGrid volume = VolumeGrid::filled(n, 0.0, field, *prov);
    for (size_t idx = 0; idx < volume.values.size(); ++idx) {
        if (!(in >> volume.values[idx])) {
            throw InputError("volume file: expected " + std::to_string(volume.values.size()) +
                             " values, got " + std::to_string(idx));
        }
        if (!std::isfinite(volume.values[idx])) throw InputError("volume file: non-finite value");
    }
    return volume;
}

VolumeGrid load_volume_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open volume file: " + path);
    return load_volume(in);
}

void atomic_write_file(const std::string& path, const std::string& contents) {
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out.flush()) throw IoError("short write: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot replace " + path + ": " + ec.message());
    }
}

void persist_artifacts(const SnapshotArtifacts& artifacts, const std::string& directory,
                       bool html) {
    const fs::path dir(directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + directory + ": " + ec.message());

    atomic_write_file((dir / "scene.x3d").string(), artifacts.x3d_doc.text);
    if (html) {
        atomic_write_file((dir / "scene.html").string(),
                          x3d::emit_html_wrapper(artifacts.x3d_doc, ""));
    }
    save_volume_file((dir / "volume.txt").string(), artifacts.volume);
    if (artifacts.model) {
        std::ostringstream out;
        ann::save_model(out, *artifacts.model);
        atomic_write_file((dir / "model.txt").string(), out.str());
    }
    if (artifacts.refined_volume) {
        save_volume_file((dir / "refined.txt").string(), *artifacts.refined_volume);
    }
}

ann::SurrogateModel load_model(const std::string& path) {
    return ann::load_model_file(path);
}

} // namespace voxfield::app
