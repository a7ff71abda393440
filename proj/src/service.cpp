#include "voxfield/service.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace voxfield::app {

namespace {

std::atomic<bool> g_signal_stop{false};

void on_signal(int) { g_signal_stop.store(true); }

} // namespace

Service::Service(ServiceOptions options)
    : options_(std::move(options)), buffer_(options_.buffer_capacity) {
    options_.config.validate();
    if (!(options_.recompute_period_s > 0.0)) {
        throw InputError("recompute period must be > 0");
    }
    positions_ = options_.config.resolved_sensor_positions();
}

Service::~Service() { stop(); }

void Service::start() {
    if (running_.exchange(true)) return;

    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw IoError("socket() failed");
    const int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(options_.listen_port));
    if (::inet_pton(AF_INET, options_.listen_host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        running_ = false;
        throw IoError("bad listen address: " + options_.listen_host);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
        ::listen(listen_fd_, 16) != 0) {
        ::close(listen_fd_);
        listen_fd_ = -1;
        running_ = false;
        throw IoError("cannot listen on " + options_.listen_host + ":" +
                      std::to_string(options_.listen_port));
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);

    log_line("service listening on " + options_.listen_host + ":" + std::to_string(port_));
    accept_thread_ = std::thread(&Service::accept_loop, this);
    recompute_thread_ = std::thread(&Service::recompute_loop, this);
}

void Service::stop() {
    if (!running_.exchange(false)) return;
    wake_.notify_all();
    if (listen_fd_ >= 0) {
        ::shutdown(listen_fd_, SHUT_RDWR);
        ::close(listen_fd_);
        listen_fd_ = -1;
    }
    {
        std::lock_guard lock(workers_mutex_);
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    if (recompute_thread_.joinable()) recompute_thread_.join();
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(workers_mutex_);
        workers.swap(workers_);
    }
    for (std::thread& t : workers) {
        if (t.joinable()) t.join();
    }
}

void Service::accept_loop() {
    while (running_.load()) {
        pollfd pfd{listen_fd_, POLLIN, 0};
        const int rc = ::poll(&pfd, 1, 100);
        if (rc <= 0) continue;
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) continue;
        std::lock_guard lock(workers_mutex_);
        client_fds_.push_back(fd);
        workers_.emplace_back(&Service::connection_loop, this, fd);
    }
}

void Service::connection_loop(int fd) {
    std::string pending;
    char chunk[4096];
    while (running_.load()) {
        const ssize_t got = ::recv(fd, chunk, sizeof chunk, 0);
        if (got <= 0) break;
        pending.append(chunk, static_cast<size_t>(got));
        size_t start = 0;
        while (true) {
            const size_t nl = pending.find('\n', start);
            if (nl == std::string::npos) break;
            const std::string reply = handle_line(pending.substr(start, nl - start));
            start = nl + 1;
            if (!reply.empty() && ::send(fd, reply.data(), reply.size(), MSG_NOSIGNAL) < 0) {
                start = pending.size();
                break;
            }
        }
        pending.erase(0, start);
        if (pending.size() > 1 << 20) break; // unterminated garbage
    }
    ::close(fd);
    std::lock_guard lock(workers_mutex_);
    std::erase(client_fds_, fd);
}

std::string Service::handle_line(const std::string& line) {
    net::WireMessage msg;
    try {
        msg = net::decode_message(line);
    } catch (const net::ProtocolError& e) {
        return net::encode_message(net::PutErr{e.code});
    }

    if (const auto* put = std::get_if<net::Put>(&msg)) {
        const auto it = positions_.find(put->id);
        if (it == positions_.end()) {
            // Syntactically fine but unknown to this room's sensor map.
            return net::encode_message(net::PutErr{"BADID"});
        }
        buffer_.push(SensorReading::make(put->id, it->second, put->value, put->unix_ms));
        return net::encode_message(net::PutAck{});
    }
    if (const auto* get = std::get_if<net::Get>(&msg)) {
        const auto records = buffer_.drain(get->k);
        std::string out = net::encode_message(net::Begin{records.size()});
        for (const SensorReading& r : records) {
            out += net::encode_message(net::Rec{r.sensor_id, r.unix_ms, r.value});
        }
        out += net::encode_message(net::End{});
        return out;
    }
    if (std::holds_alternative<net::Stat>(msg)) {
        return net::encode_message(
            net::StatReply{buffer_.occupancy(), buffer_.capacity(), buffer_.dropped_total()});
    }
    return net::encode_message(net::PutErr{"BADVERB"});
}

void Service::recompute_loop() {
    while (running_.load()) {
        {
            std::unique_lock lock(wake_mutex_);
            wake_.wait_for(lock,
                           std::chrono::duration<double>(options_.recompute_period_s),
                           [&] { return !running_.load(); });
        }
        if (!running_.load()) break;
        try {
            recompute_now();
        } catch (const Error& e) {
            log_line(std::string("pipeline error: ") + e.what());
        }
    }
}

bool Service::recompute_now() {
    std::lock_guard lock(state_mutex_);

    for (SensorReading& r : buffer_.drain(buffer_.capacity())) {
        const auto it = latest_.find(r.sensor_id);
        if (it == latest_.end() || r.unix_ms > it->second.unix_ms) {
            latest_.insert_or_assign(r.sensor_id, std::move(r));
        }
    }
    if (latest_.empty()) return false;

    std::vector<SensorReading> readings;
    readings.reserve(latest_.size());
    for (const auto& [id, r] : latest_) readings.push_back(r);
    readings = filter_stale(std::move(readings), options_.config.sensor_period_s);

    CornerSet snapshot;
    try {
        snapshot = match_readings(readings, options_.config.domain, options_.config.scheme,
                                  options_.config.field, options_.config.match_tol);
    } catch (const InputError& e) {
        log_line(std::string("snapshot skipped: ") + e.what());
        return false;
    }
    if (snapshot.snapshot_ms <= last_snapshot_ms_) return false; // nothing new

    if (model_) {
        for (const SensorReading& r : readings) {
            const Vec3 q = normalize_point(options_.config.domain, r.position);
            const auto a = ann::anomaly_score(*model_, q, r.value, options_.config.anomaly_floor);
            if (a.flag) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "anomaly sensor=%s score=%.6g threshold=%.6g flag=1",
                              r.sensor_id.c_str(), a.score, a.threshold);
                log_line(buf);
            }
        }
    }

    const long cadence = options_.config.surrogate.train_cadence;
    const bool train = cadence > 0 && snapshot_index_ % static_cast<std::uint64_t>(cadence) == 0;

    const SnapshotArtifacts artifacts = run_pipeline_once(readings, options_.config, train);
    persist_artifacts(artifacts, options_.out_dir, options_.html);

    if (artifacts.model) model_ = artifacts.model;
    last_snapshot_ms_ = snapshot.snapshot_ms;
    ++snapshot_index_;
    snapshots_published_.fetch_add(1);

    char buf[200];
    std::snprintf(buf, sizeof buf, "snapshot %lld published (trained=%d, solve=%.3fms, emit=%.3fms)",
                  static_cast<long long>(snapshot.snapshot_ms), train ? 1 : 0,
                  artifacts.timings_ms.count("solve") ? artifacts.timings_ms.at("solve") : 0.0,
                  artifacts.timings_ms.count("emit") ? artifacts.timings_ms.at("emit") : 0.0);
    log_line(buf);
    return true;
}

void Service::log_line(const std::string& line) {
    std::lock_guard lock(log_mutex_);
    std::error_code ec;
    std::filesystem::create_directories(options_.out_dir, ec);
    std::ofstream log(std::filesystem::path(options_.out_dir) / "service.log", std::ios::app);
    if (log) {
        log << line << '\n';
        log.flush();
    }
}

void run_service(const ServiceOptions& options) {
    Service service(options);
    g_signal_stop.store(false);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    service.start();
    while (!g_signal_stop.load()) {
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
    service.stop();
}

} // namespace voxfield::app
