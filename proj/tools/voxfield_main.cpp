// voxfield CLI: the pipeline stages as filesystem-composable subcommands.
//
// Exit codes: 0 success, 2 bad input, 3 convergence failure, 4 I/O.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "voxfield/app.hpp"
#include "voxfield/netsim.hpp"
#include "voxfield/service.hpp"

using namespace voxfield;

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<std::string> scheme;
    std::optional<std::string> boundary;
    std::optional<int> grid;
    std::optional<int> hidden;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "flat key-value config file");
    cmd->add_option("--scheme", flags.scheme, "sensor placement: s1|s2");
    cmd->add_option("--boundary", flags.boundary, "boundary method: bilinear|fd2d");
    cmd->add_option("--grid", flags.grid, "grid side n");
    cmd->add_option("--hidden", flags.hidden, "surrogate hidden width L");
    cmd->add_option("--seed", flags.seed, "deterministic seed");
}

app::PipelineConfig resolve_config(const CommonFlags& flags) {
    app::PipelineConfig config;
    if (!flags.config_path.empty()) config = app::load_config_file(flags.config_path);
    if (flags.scheme) app::apply_config_entry(config, "scheme", *flags.scheme);
    if (flags.boundary) app::apply_config_entry(config, "boundary", *flags.boundary);
    if (flags.grid) config.grid_n = *flags.grid;
    if (flags.hidden) config.surrogate.hidden = *flags.hidden;
    if (flags.seed) config.seed = *flags.seed;
    config.validate();
    return config;
}

Vec3 parse_point(const std::string& text) {
    Vec3 p{};
    char extra = 0;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf%c", &p[0], &p[1], &p[2], &extra) != 3) {
        throw InputError("bad point '" + text + "', expected x,y,z");
    }
    return p;
}

void print_timings(const app::SnapshotArtifacts& artifacts) {
    for (const auto& [stage, ms] : artifacts.timings_ms) {
        std::fprintf(stderr, "%-8s %8.3f ms\n", stage.c_str(), ms);
    }
}

int run_simulate(const CommonFlags& flags, const std::string& out, double period_s,
                 double duration_s, double mean_delay, double jitter_sd, double fetch_buffer,
                 std::int64_t base_ms, const std::string& corners_text) {
    app::PipelineConfig config = resolve_config(flags);

    CornerSet cs;
    cs.scheme = PlacementScheme::S1_corners8;
    cs.field = config.field;
    {
        std::istringstream in(corners_text);
        std::string tok;
        while (std::getline(in, tok, ',')) cs.values.push_back(std::stod(tok));
        if (cs.values.size() != 8) throw InputError("--corners needs 8 comma-separated values");
    }

    net::LinkModel link;
    link.mean_delay_ms = mean_delay;
    link.jitter_sd_ms = jitter_sd;
    link.seed = config.seed;

    std::vector<std::string> ids;
    std::vector<Vec3> positions;
    for (const auto& [id, world] : config.resolved_sensor_positions()) {
        ids.push_back(id);
        positions.push_back(normalize_point(config.domain, world));
    }

    const auto profile = [&](const Vec3& p, std::int64_t) { return trilinear_reference(cs, p); };
    const net::Schedule schedule = net::simulate_sensors(profile, ids, positions, config.domain,
                                                         period_s, link, duration_s, base_ms);

    std::vector<SensorReading> readings;
    readings.reserve(schedule.deliveries.size());
    for (const auto& d : schedule.deliveries) readings.push_back(d.reading);
    if (out.empty() || out == "-") {
        write_readings_csv(std::cout, readings);
    } else {
        write_readings_csv_file(out, readings);
    }

    const net::FetchMetrics metrics = net::timed_fetch_metrics(schedule, period_s, fetch_buffer);
    std::fprintf(stderr,
                 "delivered %llu, late %llu (fetch buffer %.0f ms), delay mean %.1f ms max %.1f ms\n",
                 static_cast<unsigned long long>(metrics.delivered),
                 static_cast<unsigned long long>(metrics.late), fetch_buffer,
                 metrics.mean_delay_ms, metrics.max_delay_ms);
    return 0;
}

int run_solve(const CommonFlags& flags, const std::string& input, const std::string& out) {
    const app::PipelineConfig config = resolve_config(flags);
    const auto readings = read_readings_csv_file(input);
    const auto fresh = app::filter_stale(readings, config.sensor_period_s);
    const auto artifacts = app::run_pipeline_once(fresh, config, false);
    app::save_volume_file(out, artifacts.volume);
    print_timings(artifacts);
    std::fprintf(stderr, "volume %dx%dx%d -> %s\n", config.grid_n, config.grid_n, config.grid_n,
                 out.c_str());
    return 0;
}

int run_train(const CommonFlags& flags, const std::string& input, const std::string& out) {
    const app::PipelineConfig config = resolve_config(flags);
    const VolumeGrid volume = app::load_volume_file(input);
    const auto model = ann::train_surrogate(volume, config.surrogate.hidden,
                                            config.surrogate.hyper, config.seed);
    ann::save_model_file(out, model);
    std::fprintf(stderr, "trained L=%d in %ld epochs, rmse %.6g %s (%.6g normalized), %lld ms\n",
                 model.hidden, model.report.epochs_run, model.report.final_rmse_field_units,
                 model.field.unit.c_str(), model.report.final_rmse_normalized,
                 static_cast<long long>(model.report.wall_time_ms));
    return 0;
}

int run_eval(const std::string& input, const std::vector<std::string>& points, int grid,
             const std::string& out) {
    const auto model = ann::load_model_file(input);
    if (grid > 0) {
        if (out.empty()) throw InputError("eval --grid needs --out for the sampled volume");
        app::save_volume_file(out, ann::sample_volume(model, grid));
        std::fprintf(stderr, "sampled %d^3 -> %s\n", grid, out.c_str());
        return 0;
    }
    if (points.empty()) throw InputError("eval needs --point x,y,z (normalized) or --grid n");
    for (const std::string& text : points) {
        const Vec3 p = parse_point(text);
        std::printf("%.17g\n", ann::eval_surrogate(model, p));
    }
    return 0;
}

int run_emit(const CommonFlags& flags, const std::string& input, const std::string& out,
             bool html, const std::string& title) {
    const app::PipelineConfig config = resolve_config(flags);
    const VolumeGrid volume = app::load_volume_file(input);
    const auto doc = x3d::emit_x3d(volume, config.colormap);
    if (out.empty() || out == "-") {
        std::fputs(doc.text.c_str(), stdout);
    } else {
        app::atomic_write_file(out, doc.text);
        if (html) {
            const std::string html_path =
                std::filesystem::path(out).replace_extension(".html").string();
            app::atomic_write_file(html_path, x3d::emit_html_wrapper(doc, title));
            std::fprintf(stderr, "wrote %s and %s (%ld shapes)\n", out.c_str(),
                         html_path.c_str(), doc.shape_count);
            return 0;
        }
        std::fprintf(stderr, "wrote %s (%ld shapes)\n", out.c_str(), doc.shape_count);
    }
    return 0;
}

int run_serve(const CommonFlags& flags, const std::string& listen, double period,
              const std::string& out_dir, bool html) {
    app::ServiceOptions options;
    options.config = resolve_config(flags);
    const size_t colon = listen.rfind(':');
    if (colon == std::string::npos) throw InputError("--listen expects host:port");
    options.listen_host = listen.substr(0, colon);
    try {
        options.listen_port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw InputError("bad port in --listen '" + listen + "'");
    }
    options.recompute_period_s = period;
    options.out_dir = out_dir;
    options.html = html;
    std::fprintf(stderr, "serving on %s, recompute every %.3g s, artifacts in %s\n",
                 listen.c_str(), period, out_dir.c_str());
    app::run_service(options);
    return 0;
}

int run_anomaly(const CommonFlags& flags, const std::string& model_path, const std::string& input,
                std::optional<double> floor) {
    const app::PipelineConfig config = resolve_config(flags);
    const auto model = ann::load_model_file(model_path);
    const auto readings = read_readings_csv_file(input);
    const double threshold_floor = floor.value_or(config.anomaly_floor);
    int flagged = 0;
    for (const SensorReading& r : readings) {
        const Vec3 q = normalize_point(config.domain, r.position);
        const auto a = ann::anomaly_score(model, q, r.value, threshold_floor);
        std::printf("%s %lld score=%.6g threshold=%.6g flag=%d\n", r.sensor_id.c_str(),
                    static_cast<long long>(r.unix_ms), a.score, a.threshold, a.flag ? 1 : 0);
        flagged += a.flag ? 1 : 0;
    }
    std::fprintf(stderr, "%d/%zu readings flagged\n", flagged, readings.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"voxfield: sensor-driven scalar field reconstruction and X3D visualization"};
    cli.require_subcommand(1);

    // simulate
    auto* simulate = cli.add_subcommand("simulate", "generate a readings CSV over a jittery link");
    CommonFlags sim_flags;
    add_common(simulate, sim_flags);
    std::string sim_out = "-";
    double sim_period = 60.0, sim_duration = 3600.0, sim_mean = 80.0, sim_jitter = 30.0;
    double sim_buffer = 500.0;
    std::int64_t sim_base = 1'700'000'000'000;
    std::string sim_corners = "19,20,26,27,20,21,25,26";
    simulate->add_option("--out", sim_out, "output CSV path ('-' = stdout)");
    simulate->add_option("--period", sim_period, "sensor emission period, seconds");
    simulate->add_option("--duration", sim_duration, "simulated span, seconds");
    simulate->add_option("--mean-delay", sim_mean, "link transmission latency, ms");
    simulate->add_option("--jitter", sim_jitter, "link jitter standard deviation, ms");
    simulate->add_option("--fetch-buffer", sim_buffer, "consumer fetch buffer, ms");
    simulate->add_option("--base-ms", sim_base, "unix ms of the first emission");
    simulate->add_option("--corners", sim_corners, "8 corner values of the simulated field");

    // solve
    auto* solve = cli.add_subcommand("solve", "assemble boundaries and solve the volume from a CSV");
    CommonFlags solve_flags;
    add_common(solve, solve_flags);
    std::string solve_input, solve_out = "volume.txt";
    solve->add_option("--input", solve_input, "readings CSV")->required();
    solve->add_option("--out", solve_out, "output volume file");

    // train
    auto* train = cli.add_subcommand("train", "fit the surrogate to a solved volume");
    CommonFlags train_flags;
    add_common(train, train_flags);
    std::string train_input, train_out = "model.txt";
    train->add_option("--input", train_input, "volume file")->required();
    train->add_option("--out", train_out, "output model file");

    // eval
    auto* eval = cli.add_subcommand("eval", "evaluate a model at points or onto a grid");
    std::string eval_input, eval_out;
    std::vector<std::string> eval_points;
    int eval_grid = 0;
    eval->add_option("--input", eval_input, "model file")->required();
    eval->add_option("--point", eval_points, "normalized point x,y,z (repeatable)");
    eval->add_option("--grid", eval_grid, "sample an n^3 volume instead");
    eval->add_option("--out", eval_out, "output volume file for --grid");

    // emit
    auto* emit = cli.add_subcommand("emit", "render a volume file as an X3D scene");
    CommonFlags emit_flags;
    add_common(emit, emit_flags);
    std::string emit_input, emit_out = "-", emit_title;
    bool emit_html = false;
    emit->add_option("--input", emit_input, "volume file")->required();
    emit->add_option("--out", emit_out, "output X3D path ('-' = stdout)");
    emit->add_flag("--html", emit_html, "also write a static HTML viewer page");
    emit->add_option("--title", emit_title, "HTML page title");

    // serve
    auto* serve = cli.add_subcommand("serve", "run the ingestion service and recompute loop");
    CommonFlags serve_flags;
    add_common(serve, serve_flags);
    std::string serve_listen = "127.0.0.1:4044", serve_out = ".";
    double serve_period = 60.0;
    bool serve_html = false;
    serve->add_option("--listen", serve_listen, "host:port for the wire protocol");
    serve->add_option("--period", serve_period, "recompute period, seconds");
    serve->add_option("--out", serve_out, "artifact directory");
    serve->add_flag("--html", serve_html, "also publish scene.html");

    // anomaly
    auto* anomaly = cli.add_subcommand("anomaly", "score readings against a trained model");
    CommonFlags anomaly_flags;
    add_common(anomaly, anomaly_flags);
    std::string anomaly_model, anomaly_input;
    std::optional<double> anomaly_floor;
    anomaly->add_option("--model", anomaly_model, "model file")->required();
    anomaly->add_option("--input", anomaly_input, "readings CSV")->required();
    anomaly->add_option("--floor", anomaly_floor, "minimum flag threshold, field units");

    CLI11_PARSE(cli, argc, argv);

    try {
        if (simulate->parsed()) {
            return run_simulate(sim_flags, sim_out, sim_period, sim_duration, sim_mean,
                                sim_jitter, sim_buffer, sim_base, sim_corners);
        }
        if (solve->parsed()) return run_solve(solve_flags, solve_input, solve_out);
        if (train->parsed()) return run_train(train_flags, train_input, train_out);
        if (eval->parsed()) return run_eval(eval_input, eval_points, eval_grid, eval_out);
        if (emit->parsed()) return run_emit(emit_flags, emit_input, emit_out, emit_html, emit_title);
        if (serve->parsed()) {
            return run_serve(serve_flags, serve_listen, serve_period, serve_out, serve_html);
        }
        if (anomaly->parsed()) {
            return run_anomaly(anomaly_flags, anomaly_model, anomaly_input, anomaly_floor);
        }
    } catch (const ConvergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const InputError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
