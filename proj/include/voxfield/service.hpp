#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "voxfield/app.hpp"
#include "voxfield/netsim.hpp"

namespace voxfield::app {

struct ServiceOptions {
    PipelineConfig config;
    std::string listen_host = "127.0.0.1";
    int listen_port = 0; // 0 = pick an ephemeral port
    double recompute_period_s = 60.0;
    std::string out_dir = ".";
    bool html = false;
    size_t buffer_capacity = 1000;
};

/// The per-room data concentrator plus processing loop. Ingestion speaks the
/// line protocol (PUT/GET/STAT) over TCP into a circular FIFO; every
/// recompute period the newest complete snapshot is pushed through the
/// pipeline and the artifacts are atomically replaced in out_dir. Training
/// runs on every train_cadence-th snapshot. Readings are scored against the
/// current model before retraining; flagged anomalies go to service.log.
class Service {
public:
    explicit Service(ServiceOptions options);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void start(); // bind, listen, spawn threads; throws IoError on failure
    void stop();  // idempotent

    int port() const { return port_; }
    std::uint64_t snapshots_published() const { return snapshots_published_.load(); }

    /// Run one recompute step immediately (used by tests and the CLI's
    /// shutdown flush); returns true if a new snapshot was published.
    bool recompute_now();

private:
    void accept_loop();
    void connection_loop(int fd);
    std::string handle_line(const std::string& line);
    void recompute_loop();
    void log_line(const std::string& line);

    ServiceOptions options_;
    net::ConcentratorBuffer buffer_;
    std::map<std::string, Vec3> positions_; // resolved sensor map
    int listen_fd_ = -1;
    int port_ = 0;

    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::thread recompute_thread_;
    std::mutex workers_mutex_;
    std::vector<std::thread> workers_;
    std::vector<int> client_fds_;

    std::mutex state_mutex_; // latest readings, model, counters
    std::map<std::string, SensorReading> latest_;
    std::optional<ann::SurrogateModel> model_;
    std::int64_t last_snapshot_ms_ = -1;
    std::uint64_t snapshot_index_ = 0;
    std::atomic<std::uint64_t> snapshots_published_{0};

    std::mutex wake_mutex_;
    std::condition_variable wake_;

    std::mutex log_mutex_;
};

/// Blocking entry point for the CLI: start, run until SIGINT/SIGTERM, stop.
void run_service(const ServiceOptions& options);

} // namespace voxfield::app
