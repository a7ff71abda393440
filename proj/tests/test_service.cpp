#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "fixtures.hpp"
#include "voxfield/service.hpp"

using namespace voxfield;
using namespace voxfield::app;

namespace fs = std::filesystem;

namespace {

// Minimal blocking line client for the wire protocol.
class Client {
public:
    explicit Client(int port) {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        REQUIRE(fd_ >= 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(static_cast<uint16_t>(port));
        ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
        REQUIRE(::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    }
    ~Client() {
        if (fd_ >= 0) ::close(fd_);
    }

    void send_line(const std::string& line) {
        REQUIRE(::send(fd_, line.data(), line.size(), 0) == static_cast<ssize_t>(line.size()));
    }

    std::string read_line() {
        while (true) {
            const size_t nl = pending_.find('\n');
            if (nl != std::string::npos) {
                const std::string line = pending_.substr(0, nl + 1);
                pending_.erase(0, nl + 1);
                return line;
            }
            char chunk[512];
            const ssize_t got = ::recv(fd_, chunk, sizeof chunk, 0);
            REQUIRE(got > 0);
            pending_.append(chunk, static_cast<size_t>(got));
        }
    }

private:
    int fd_ = -1;
    std::string pending_;
};

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("voxfield_service_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

ServiceOptions fast_options(const fs::path& dir) {
    ServiceOptions options;
    options.out_dir = dir.string();
    options.recompute_period_s = 0.05;
    options.config.surrogate.train_cadence = 0; // no training unless a test asks
    options.config.sensor_period_s = 3600.0;    // keep injected timestamps fresh
    return options;
}

void put_snapshot(Client& client, const std::vector<double>& values, std::int64_t base_ms) {
    for (size_t i = 0; i < values.size(); ++i) {
        client.send_line("PUT s" + std::to_string(i) + " " +
                         std::to_string(base_ms + static_cast<std::int64_t>(i)) + " " +
                         net::format_wire_value(values[i]) + "\n");
        CHECK(client.read_line() == "OK\n");
    }
}

bool wait_for(const std::function<bool()>& done, double timeout_s = 10.0) {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    while (std::chrono::steady_clock::now() < deadline) {
        if (done()) return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return done();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TEST_SUITE_BEGIN("service");

TEST_CASE("wire protocol: PUT/GET/STAT against a live service") {
    const auto dir = fresh_dir("proto");
    ServiceOptions options = fast_options(dir);
    options.recompute_period_s = 3600.0; // keep the recompute loop out of the buffer
    Service service(options);
    service.start();
    Client client(service.port());

    client.send_line("STAT\n");
    CHECK(client.read_line() == "STAT 0 1000 0\n");

    client.send_line("PUT s0 1000 21.5\n");
    CHECK(client.read_line() == "OK\n");
    client.send_line("PUT nosuch 1000 21.5\n");
    CHECK(client.read_line() == "ERR BADID\n"); // unknown to this room's sensor map
    client.send_line("PUT s1 abc 21.5\n");
    CHECK(client.read_line() == "ERR BADTS\n");
    client.send_line("FROB\n");
    CHECK(client.read_line() == "ERR BADVERB\n");

    client.send_line("PUT s1 1001 22.25\n");
    CHECK(client.read_line() == "OK\n");
    client.send_line("STAT\n");
    CHECK(client.read_line() == "STAT 2 1000 0\n");

    client.send_line("GET 5\n");
    CHECK(client.read_line() == "BEGIN 2\n");
    CHECK(client.read_line() == "REC s0 1000 21.5\n");
    CHECK(client.read_line() == "REC s1 1001 22.25\n");
    CHECK(client.read_line() == "END\n");
    client.send_line("STAT\n");
    CHECK(client.read_line() == "STAT 0 1000 0\n"); // GET removed the records

    service.stop();
    fs::remove_all(dir);
}

TEST_CASE("service publishes artifacts and matches offline playback") {
    const auto dir = fresh_dir("playback");
    ServiceOptions options = fast_options(dir);
    options.html = true;
    Service service(options);
    service.start();
    {
        Client client(service.port());
        put_snapshot(client, fixtures::demo_corner_values(), 1'714'000'000'000);
    }
    REQUIRE(wait_for([&] { return service.snapshots_published() >= 1; }));
    REQUIRE(fs::exists(dir / "scene.x3d"));
    REQUIRE(fs::exists(dir / "scene.html"));

    // offline run over the same snapshot (playback mode)
    std::vector<SensorReading> readings;
    const auto positions = options.config.resolved_sensor_positions();
    for (size_t i = 0; i < 8; ++i) {
        const std::string id = "s" + std::to_string(i);
        readings.push_back(SensorReading::make(
            id, positions.at(id), fixtures::demo_corner_values()[i],
            1'714'000'000'000 + static_cast<std::int64_t>(i)));
    }
    const auto offline = run_pipeline_once(readings, options.config, false);
    CHECK(slurp(dir / "scene.x3d") == offline.x3d_doc.text);

    // nothing new to ingest => artifacts stay put
    const auto published = service.snapshots_published();
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    CHECK(service.snapshots_published() == published);

    service.stop();
    fs::remove_all(dir);
}

TEST_CASE("service retrains on cadence and logs anomalous readings") {
    const auto dir = fresh_dir("anomaly");
    ServiceOptions options = fast_options(dir);
    options.config.surrogate.train_cadence = 1;
    options.config.surrogate.hidden = 8;
    options.config.surrogate.hyper.max_epochs = 200;
    Service service(options);
    service.start();

    {
        Client client(service.port());
        put_snapshot(client, fixtures::demo_corner_values(), 2'000'000'000'000);
    }
    REQUIRE(wait_for([&] { return service.snapshots_published() >= 1; }));
    REQUIRE(fs::exists(dir / "model.txt"));

    // corner s0 jumps 19 -> 40 in the next snapshot
    std::vector<double> spiked = fixtures::demo_corner_values();
    spiked[0] = 40.0;
    {
        Client client(service.port());
        put_snapshot(client, spiked, 2'000'000'100'000);
    }
    REQUIRE(wait_for([&] { return service.snapshots_published() >= 2; }));
    service.stop();

    const std::string log = slurp(dir / "service.log");
    const size_t pos = log.find("anomaly sensor=s0");
    REQUIRE(pos != std::string::npos);
    const size_t score_pos = log.find("score=", pos);
    REQUIRE(score_pos != std::string::npos);
    CHECK(std::stod(log.substr(score_pos + 6)) >= 20.0);
    CHECK(log.find("flag=1", pos) != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("incomplete snapshots are skipped and previous artifacts retained") {
    const auto dir = fresh_dir("incomplete");
    Service service(fast_options(dir));
    service.start();
    {
        Client client(service.port());
        client.send_line("PUT s0 1000 19\n");
        CHECK(client.read_line() == "OK\n");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
    CHECK(service.snapshots_published() == 0);
    CHECK(!fs::exists(dir / "scene.x3d"));
    service.stop();

    const std::string log = slurp(dir / "service.log");
    CHECK(log.find("snapshot skipped") != std::string::npos);
    fs::remove_all(dir);
}

TEST_SUITE_END();
