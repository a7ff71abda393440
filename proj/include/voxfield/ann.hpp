#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "voxfield/core.hpp"
#include "voxfield/solver.hpp"

namespace voxfield::ann {

struct TrainParams {
    double learning_rate = 0.01;
    double beta1 = 0.9;   // first-moment decay
    double beta2 = 0.999; // second-moment decay
    double epsilon = 1e-8;
    long max_epochs = 20000;
    double rmse_target = 1e-3; // normalized units
};

struct TrainingReport {
    long epochs_run = 0;
    double final_rmse_normalized = 0.0;
    double final_rmse_field_units = 0.0; // = normalized * out_halfrange
    std::int64_t wall_time_ms = 0;
    int training_grid_n = 0;
};

/// Single-hidden-layer sigmoid surrogate
///   N(x,y,z) = sum_i Z_i * sigmoid(W_1i x + W_2i y + W_3i z + b_1i) + b_2
/// evaluated in normalized output units, then mapped to field units as
/// out_mid + out_halfrange * N.
///
/// Parameters live in one flat vector, layout [W row-major 3xL | b1 | Z | b2].
struct SurrogateModel {
    int hidden = 0; // L
    std::vector<double> params;
    double out_mid = 0.0;
    double out_halfrange = 1.0;
    FieldKind field;
    std::uint64_t seed = 0;
    TrainingReport report;

    static SurrogateModel zeros(int hidden, FieldKind field = FieldKind::temperature());
    static size_t param_count(int hidden) { return 5 * static_cast<size_t>(hidden) + 1; }

    double w(int input, int neuron) const { return params[static_cast<size_t>(input) * hidden + neuron]; }
    double& w(int input, int neuron) { return params[static_cast<size_t>(input) * hidden + neuron]; }
    double b1(int neuron) const { return params[3 * static_cast<size_t>(hidden) + neuron]; }
    double& b1(int neuron) { return params[3 * static_cast<size_t>(hidden) + neuron]; }
    double z(int neuron) const { return params[4 * static_cast<size_t>(hidden) + neuron]; }
    double& z(int neuron) { return params[4 * static_cast<size_t>(hidden) + neuron]; }
    double b2() const { return params[5 * static_cast<size_t>(hidden)]; }
    double& b2() { return params[5 * static_cast<size_t>(hidden)]; }
};

struct Sample {
    Vec3 point;    // in [0,1]^3
    double target; // normalized output units
};

double sigmoid(double x);

/// Network output in normalized units (no denormalization).
double eval_normalized(const SurrogateModel& model, const Vec3& p);

/// Field-unit evaluation: out_mid + out_halfrange * N(p). Points outside
/// [0,1]^3 are evaluated as-is; flagging extrapolation is the caller's job.
double eval_surrogate(const SurrogateModel& model, const Vec3& p);

/// Mean squared error over the samples plus its exact analytic gradient
/// with respect to every parameter, written to `grad` (param layout order).
///
/// Accumulation is blockwise: fixed 256-sample blocks are summed
/// independently and then reduced in block order, so the result is
/// bit-identical for any OpenMP thread count, and identical to the serial
/// reference below.
double loss_and_grad(const SurrogateModel& model, std::span<const Sample> samples,
                     std::span<double> grad);

/// Serial reference of loss_and_grad (same block arithmetic, no OpenMP).
double loss_and_grad_serial(const SurrogateModel& model, std::span<const Sample> samples,
                            std::span<double> grad);

/// Fit the surrogate to a volume by full-batch adaptive-moment gradient
/// descent over all n^3 nodes (inputs are lattice coordinates, targets the
/// node values normalized to [-1,1]). Stops at max_epochs or when the
/// normalized RMSE reaches hyper.rmse_target; the best-so-far parameters are
/// returned. Bit-for-bit reproducible given (volume, hidden, hyper, seed).
/// A degenerate volume (max == min) yields the constant model untrained.
SurrogateModel train_surrogate(const VolumeGrid& volume, int hidden,
                               const TrainParams& hyper, std::uint64_t seed);

/// Evaluate the model on every node of an n_out lattice (OpenMP).
VolumeGrid sample_volume(const SurrogateModel& model, int n_out);
/// Serial reference of sample_volume; bit-identical output.
VolumeGrid sample_volume_serial(const SurrogateModel& model, int n_out);

struct AnomalyResult {
    double score = 0.0;     // |reading - prediction|, field units
    double threshold = 0.0; // max(3 * final RMSE, floor)
    bool flag = false;
};

/// Score a reading (position already normalized) against the model.
AnomalyResult anomaly_score(const SurrogateModel& model, const Vec3& position_norm,
                            double value, double threshold_floor = 0.5);

// -- persistence -------------------------------------------------------------
// Text document, numbers printed with 17 significant digits so a reloaded
// model evaluates bit-identically. Unsupported versions are rejected.

void save_model(std::ostream& out, const SurrogateModel& model);
void save_model_file(const std::string& path, const SurrogateModel& model);
SurrogateModel load_model(std::istream& in);
SurrogateModel load_model_file(const std::string& path);

/// Deterministic serialization of everything except wall-clock timing;
/// two trainings of the same inputs produce equal canonical bytes.
std::string canonical_bytes(const SurrogateModel& model);

} // namespace voxfield::ann
