#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voxfield/ann.hpp"
#include "voxfield/boundary.hpp"
#include "voxfield/core.hpp"
#include "voxfield/solver.hpp"
#include "voxfield/x3d.hpp"

namespace voxfield::app {

struct SurrogateConfig {
    int hidden = 32;
    long train_cadence = 10; // service mode: train on every Nth snapshot; 0 = never
    ann::TrainParams hyper;
};

struct PipelineConfig {
    Domain domain = Domain::unit_cube();
    PlacementScheme scheme = PlacementScheme::S1_corners8;
    BoundaryMethod boundary_method = BoundaryMethod::Bilinear;
    int grid_n = 8;
    FieldKind field = FieldKind::temperature();
    SurrogateConfig surrogate;
    x3d::ColorMapSpec colormap;
    SolverParams solver;
    std::uint64_t seed = 42;
    double match_tol = 0.05;
    double sensor_period_s = 60.0;
    double anomaly_floor = 0.5;
    // World-coordinate sensor positions by id. Empty: ids s0..s{K-1} at the
    // canonical placement points of the scheme.
    std::map<std::string, Vec3> sensor_positions;

    void validate() const;
    std::map<std::string, Vec3> resolved_sensor_positions() const;
};

/// Flat key-value config text: one `key = value` per line, '#' comments.
/// See the README for the key list. CLI flags override file values.
PipelineConfig parse_config_text(const std::string& text);
PipelineConfig load_config_file(const std::string& path);
void apply_config_entry(PipelineConfig& config, const std::string& key, const std::string& value);

/// Refined sampling grid of the trained surrogate.
constexpr int kRefinedGridN = 16;

struct SnapshotArtifacts {
    CornerSet corner_set;
    BoundaryField boundary_field;
    VolumeGrid volume; // FD solve
    std::optional<ann::SurrogateModel> model;
    std::optional<VolumeGrid> refined_volume;
    x3d::X3DDocument x3d_doc;
    std::map<std::string, double> timings_ms; // one entry per executed stage
};

/// match_readings -> assemble_boundary -> solve_laplace3d
/// -> (train_surrogate + sample_volume(16) when train) -> emit_x3d.
/// Stage failures are rethrown with the stage name prefixed.
SnapshotArtifacts run_pipeline_once(const std::vector<SensorReading>& readings,
                                    const PipelineConfig& config, bool train);

/// Drop readings older than 2x the sensor period relative to the newest one.
std::vector<SensorReading> filter_stale(std::vector<SensorReading> readings, double period_s);

// -- persistence ---------------------------------------------------------------

/// Text volume format: header {n, field, provenance} plus all n^3 node values
/// with 17 significant digits; reloads bit-identically.
void save_volume(std::ostream& out, const VolumeGrid& volume);
void save_volume_file(const std::string& path, const VolumeGrid& volume);
VolumeGrid load_volume(std::istream& in);
VolumeGrid load_volume_file(const std::string& path);

/// Write `contents` under `path` atomically (temp file + rename), so a
/// concurrent reader sees either the old or the new file, never a mixture.
void atomic_write_file(const std::string& path, const std::string& contents);

/// Write scene.x3d (+ scene.html), volume.txt, and when present model.txt and
/// refined.txt into `directory`, each replaced atomically.
void persist_artifacts(const SnapshotArtifacts& artifacts, const std::string& directory,
                       bool html);

ann::SurrogateModel load_model(const std::string& path);

} // namespace voxfield::app
