#include "voxfield/ann.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "voxfield/rng.hpp"

namespace voxfield::ann {

namespace {

constexpr size_t kGradBlock = 256;

void require_valid_dimensions(int hidden) {
    if (hidden < 1) throw InputError("hidden width must be >= 1");
}

// Raw (unaveraged) sum of squared errors and d(sse)/dparam over one
// contiguous sample block, accumulated sequentially.
double accumulate_block(const SurrogateModel& m, std::span<const Sample> block,
                        std::span<double> grad) {
    const int L = m.hidden;
    double sse = 0.0;
    std::vector<double> h(static_cast<size_t>(L));
    for (const Sample& s : block) {
        double out = m.b2();
        for (int i = 0; i < L; ++i) {
            const double a = m.w(0, i) * s.point[0] + m.w(1, i) * s.point[1] +
                             m.w(2, i) * s.point[2] + m.b1(i);
            h[static_cast<size_t>(i)] = sigmoid(a);
            out += m.z(i) * h[static_cast<size_t>(i)];
        }
        const double err = out - s.target;
        sse += err * err;
        const double douts = 2.0 * err;
        grad[5 * static_cast<size_t>(L)] += douts; // b2
        for (int i = 0; i < L; ++i) {
            const double hi = h[static_cast<size_t>(i)];
            grad[4 * static_cast<size_t>(L) + i] += douts * hi; // Z
            const double da = douts * m.z(i) * hi * (1.0 - hi);
            grad[3 * static_cast<size_t>(L) + i] += da; // b1
            grad[0 * static_cast<size_t>(L) + i] += da * s.point[0];
            grad[1 * static_cast<size_t>(L) + i] += da * s.point[1];
            grad[2 * static_cast<size_t>(L) + i] += da * s.point[2];
        }
    }
    return sse;
}

double loss_and_grad_blocks(const SurrogateModel& model, std::span<const Sample> samples,
                            std::span<double> grad, bool parallel) {
    if (samples.empty()) throw InputError("loss_and_grad needs at least one sample");
    const size_t np = SurrogateModel::param_count(model.hidden);
    if (grad.size() != np) throw InputError("gradient span has wrong length");
    if (model.params.size() != np) throw InputError("model parameter vector has wrong length");

    const size_t nblocks = (samples.size() + kGradBlock - 1) / kGradBlock;
    std::vector<std::vector<double>> block_grads(nblocks, std::vector<double>(np, 0.0));
    std::vector<double> block_sse(nblocks, 0.0);

#pragma omp parallel for if (parallel) schedule(static)
    for (long b = 0; b < static_cast<long>(nblocks); ++b) {
        const size_t begin = static_cast<size_t>(b) * kGradBlock;
        const size_t len = std::min(kGradBlock, samples.size() - begin);
        block_sse[static_cast<size_t>(b)] = accumulate_block(
            model, samples.subspan(begin, len), block_grads[static_cast<size_t>(b)]);
    }

    // Sequential reduction in block order keeps the arithmetic independent
    // of the thread count.
    std::fill(grad.begin(), grad.end(), 0.0);
    double sse = 0.0;
    for (size_t b = 0; b < nblocks; ++b) {
        sse += block_sse[b];
        for (size_t p = 0; p < np; ++p) grad[p] += block_grads[b][p];
    }
    const double inv_m = 1.0 / double(samples.size());
    for (size_t p = 0; p < np; ++p) grad[p] *= inv_m;
    return sse * inv_m;
}

} // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

SurrogateModel SurrogateModel::zeros(int hidden, FieldKind field) {
    require_valid_dimensions(hidden);
    SurrogateModel m;
    m.hidden = hidden;
    m.params.assign(param_count(hidden), 0.0);
    m.field = std::move(field);
    return m;
}

double eval_normalized(const SurrogateModel& model, const Vec3& p) {
    const int L = model.hidden;
    double out = model.b2();
    for (int i = 0; i < L; ++i) {
        const double a = model.w(0, i) * p[0] + model.w(1, i) * p[1] + model.w(2, i) * p[2] +
                         model.b1(i);
        out += model.z(i) * sigmoid(a);
    }
    return out;
}

double eval_surrogate(const SurrogateModel& model, const Vec3& p) {
    return model.out_mid + model.out_halfrange * eval_normalized(model, p);
}

double loss_and_grad(const SurrogateModel& model, std::span<const Sample> samples,
                     std::span<double> grad) {
    return loss_and_grad_blocks(model, samples, grad, true);
}

double loss_and_grad_serial(const SurrogateModel& model, std::span<const Sample> samples,
                            std::span<double> grad) {
    return loss_and_grad_blocks(model, samples, grad, false);
}

SurrogateModel train_surrogate(const VolumeGrid& volume, int hidden,
                               const TrainParams& hyper, std::uint64_t seed) {
    require_valid_dimensions(hidden);
    const auto t0 = std::chrono::steady_clock::now();
    for (double v : volume.values) {
        if (!std::isfinite(v)) throw InputError("training volume has non-finite values");
    }

    const double vmin = volume.min_value();
    const double vmax = volume.max_value();

    SurrogateModel model = SurrogateModel::zeros(hidden, volume.field);
    model.seed = seed;
    model.report.training_grid_n = volume.n;

    if (vmax == vmin) {
        model.out_mid = vmin;
        model.out_halfrange = 1.0;
        model.report.epochs_run = 0;
        model.report.final_rmse_normalized = 0.0;
        model.report.final_rmse_field_units = 0.0;
        model.report.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - t0)
                                        .count();
        return model;
    }

    model.out_mid = 0.5 * (vmax + vmin);
    model.out_halfrange = 0.5 * (vmax - vmin);

    const int n = volume.n;
    std::vector<Sample> samples;
    samples.reserve(volume.values.size());
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                Sample s;
                s.point = Vec3{double(i) / (n - 1), double(j) / (n - 1), double(k) / (n - 1)};
                s.target = (volume.at(i, j, k) - model.out_mid) / model.out_halfrange;
                samples.push_back(s);
            }

    std::mt19937_64 rng(seed);
    const double w_bound = 1.0 / std::sqrt(3.0);
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < hidden; ++i) model.w(k, i) = uniform_range(rng, -w_bound, w_bound);
    const double z_bound = 1.0 / std::sqrt(double(hidden));
    for (int i = 0; i < hidden; ++i) model.z(i) = uniform_range(rng, -z_bound, z_bound);
    // b1, b2 start at zero.

    const size_t np = SurrogateModel::param_count(hidden);
    std::vector<double> grad(np, 0.0);
    std::vector<double> m1(np, 0.0), m2(np, 0.0);

    double mse = loss_and_grad(model, samples, grad);
    std::vector<double> best_params = model.params;
    double best_mse = mse;
    long epochs = 0;

    while (epochs < hyper.max_epochs && std::sqrt(best_mse) > hyper.rmse_target) {
        ++epochs;
        const double bc1 = 1.0 - std::pow(hyper.beta1, double(epochs));
        const double bc2 = 1.0 - std::pow(hyper.beta2, double(epochs));
        for (size_t p = 0; p < np; ++p) {
            m1[p] = hyper.beta1 * m1[p] + (1.0 - hyper.beta1) * grad[p];
            m2[p] = hyper.beta2 * m2[p] + (1.0 - hyper.beta2) * grad[p] * grad[p];
            const double step = hyper.learning_rate * (m1[p] / bc1) /
                                (std::sqrt(m2[p] / bc2) + hyper.epsilon);
            model.params[p] -= step;
        }
        mse = loss_and_grad(model, samples, grad);
        if (mse < best_mse) {
            best_mse = mse;
            best_params = model.params;
        }
    }

    model.params = std::move(best_params);
    model.report.epochs_run = epochs;
    model.report.final_rmse_normalized = std::sqrt(best_mse);
    model.report.final_rmse_field_units = model.report.final_rmse_normalized * model.out_halfrange;
    model.report.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
    return model;
}

namespace {

VolumeGrid sample_volume_impl(const SurrogateModel& model, int n_out, bool parallel) {
    if (n_out < 2) throw InputError("sample grid side must be >= 2");
    VolumeGrid out = VolumeGrid::filled(n_out, 0.0, model.field, Provenance::SurrogateSample);
#pragma omp parallel for if (parallel) schedule(static)
    for (int k = 0; k < n_out; ++k)
        for (int j = 0; j < n_out; ++j)
            for (int i = 0; i < n_out; ++i) {
                const Vec3 p{double(i) / (n_out - 1), double(j) / (n_out - 1),
                             double(k) / (n_out - 1)};
                out.at(i, j, k) = eval_surrogate(model, p);
            }
    return out;
}

} // namespace

VolumeGrid sample_volume(const SurrogateModel& model, int n_out) {
    return sample_volume_impl(model, n_out, true);
}

VolumeGrid sample_volume_serial(const SurrogateModel& model, int n_out) {
    return sample_volume_impl(model, n_out, false);
}

AnomalyResult anomaly_score(const SurrogateModel& model, const Vec3& position_norm,
                            double value, double threshold_floor) {
    AnomalyResult r;
    r.threshold = std::max(3.0 * model.report.final_rmse_field_units, threshold_floor);
    r.score = std::fabs(value - eval_surrogate(model, position_norm));
    r.flag = r.score > r.threshold;
    return r;
}

// -- persistence -------------------------------------------------------------

namespace {

constexpr int kModelFormatVersion = 1;

const char* field_name_token(const FieldKind& f) {
    return f.name == FieldName::Temperature ? "temperature" : "nitrogen";
}

void write_doubles(std::ostream& out, const double* v, size_t count) {
    char buf[40];
    for (size_t i = 0; i < count; ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", v[i]);
        out << (i ? " " : "") << buf;
    }
    out << '\n';
}

std::string expect_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw InputError(std::string("model file: missing ") + what);
    return tok;
}

void expect_keyword(std::istream& in, const char* kw) {
    const std::string tok = expect_token(in, kw);
    if (tok != kw) throw InputError(std::string("model file: expected '") + kw + "', got '" + tok + "'");
}

double read_double(std::istream& in, const char* what) {
    double v = 0.0;
    if (!(in >> v)) throw InputError(std::string("model file: bad ") + what);
    return v;
}

long read_long(std::istream& in, const char* what) {
    long v = 0;
    if (!(in >> v)) throw InputError(std::string("model file: bad ") + what);
    return v;
}

} // namespace

void save_model(std::ostream& out, const SurrogateModel& model) {
    char buf[64];
    out << "voxfield-model " << kModelFormatVersion << '\n';
    out << "field " << field_name_token(model.field) << ' ' << model.field.unit;
    if (model.field.compound_label) out << ' ' << *model.field.compound_label;
    out << '\n';
    out << "L " << model.hidden << '\n';
    out << "seed " << model.seed << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", model.out_mid);
    out << "out_mid " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g", model.out_halfrange);
    out << "out_halfrange " << buf << '\n';
    const size_t L = static_cast<size_t>(model.hidden);
    out << "W\n";
    for (int k = 0; k < 3; ++k) write_doubles(out, model.params.data() + k * L, L);
    out << "b1\n";
    write_doubles(out, model.params.data() + 3 * L, L);
    out << "Z\n";
    write_doubles(out, model.params.data() + 4 * L, L);
    std::snprintf(buf, sizeof buf, "%.17g", model.b2());
    out << "b2 " << buf << '\n';
    std::snprintf(buf, sizeof buf, "%.17g %.17g", model.report.final_rmse_normalized,
                  model.report.final_rmse_field_units);
    out << "report " << model.report.epochs_run << ' ' << buf << ' ' << model.report.wall_time_ms
        << ' ' << model.report.training_grid_n << '\n';
}

void save_model_file(const std::string& path, const SurrogateModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file: " + path);
    save_model(out, model);
    if (!out.flush()) throw IoError("short write: " + path);
}

SurrogateModel load_model(std::istream& in) {
    expect_keyword(in, "voxfield-model");
    const long version = read_long(in, "format version");
    if (version != kModelFormatVersion) {
        throw InputError("model file: unsupported version " + std::to_string(version));
    }
    expect_keyword(in, "field");
    const std::string name = expect_token(in, "field name");
    FieldKind field;
    if (name == "temperature") {
        field.name = FieldName::Temperature;
    } else if (name == "nitrogen") {
        field.name = FieldName::NitrogenCompound;
    } else {
        throw InputError("model file: unknown field kind '" + name + "'");
    }
    field.unit = expect_token(in, "field unit");
    {
        // Optional compound label: anything before the L keyword.
        std::string tok = expect_token(in, "L");
        if (tok != "L") {
            field.compound_label = tok;
            expect_keyword(in, "L");
        }
    }
    const long hidden = read_long(in, "hidden width");
    if (hidden < 1 || hidden > 1'000'000) throw InputError("model file: bad hidden width");
    SurrogateModel model = SurrogateModel::zeros(static_cast<int>(hidden), field);
    expect_keyword(in, "seed");
    if (!(in >> model.seed)) throw InputError("model file: bad seed");
    expect_keyword(in, "out_mid");
    model.out_mid = read_double(in, "out_mid");
    expect_keyword(in, "out_halfrange");
    model.out_halfrange = read_double(in, "out_halfrange");
    if (!(model.out_halfrange > 0.0)) throw InputError("model file: out_halfrange must be > 0");
    const size_t L = static_cast<size_t>(hidden);
    expect_keyword(in, "W");
    for (size_t p = 0; p < 3 * L; ++p) model.params[p] = read_double(in, "W");
    expect_keyword(in, "b1");
    for (size_t p = 0; p < L; ++p) model.params[3 * L + p] = read_double(in, "b1");
    expect_keyword(in, "Z");
    for (size_t p = 0; p < L; ++p) model.params[4 * L + p] = read_double(in, "Z");
    expect_keyword(in, "b2");
    model.params[5 * L] = read_double(in, "b2");
    expect_keyword(in, "report");
    model.report.epochs_run = read_long(in, "epochs");
    model.report.final_rmse_normalized = read_double(in, "rmse");
    model.report.final_rmse_field_units = read_double(in, "rmse");
    model.report.wall_time_ms = read_long(in, "wall time");
    model.report.training_grid_n = static_cast<int>(read_long(in, "grid n"));
    for (double v : model.params) {
        if (!std::isfinite(v)) throw InputError("model file: non-finite parameter");
    }
    return model;
}

SurrogateModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    return load_model(in);
}

std::string canonical_bytes(const SurrogateModel& model) {
    SurrogateModel copy = model;
    copy.report.wall_time_ms = 0;
    std::ostringstream out;
    save_model(out, copy);
    return out.str();
}

} // namespace voxfield::ann
