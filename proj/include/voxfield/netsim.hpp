#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "voxfield/core.hpp"

namespace voxfield::net {

/// Capacity-bounded FIFO of readings. Pushing into a full buffer evicts the
/// oldest record and counts it as dropped; draining removes from the front.
/// One producer and one consumer may use it concurrently; every mutation is
/// serialized through an internal lock.
class ConcentratorBuffer {
public:
    explicit ConcentratorBuffer(size_t capacity = 1000);

    void push(const SensorReading& reading);
    std::vector<SensorReading> drain(size_t k);

    size_t occupancy() const;
    size_t capacity() const { return capacity_; }
    std::uint64_t dropped_total() const;
    std::uint64_t pushed_total() const;
    std::uint64_t drained_total() const;

private:
    mutable std::mutex mutex_;
    std::deque<SensorReading> records_;
    size_t capacity_;
    std::uint64_t dropped_ = 0;
    std::uint64_t pushed_ = 0;
    std::uint64_t drained_ = 0;
};

// -- wire protocol -----------------------------------------------------------
// Line-based ASCII over a reliable ordered byte stream. Fields are separated
// by exactly one space, lines end with LF:
//   PUT <id> <unix_ms> <value>   ->  OK | ERR <code>
//   GET <k>                      ->  BEGIN <m>, m x REC <id> <unix_ms> <value>, END
//   STAT                         ->  STAT <occupancy> <capacity> <dropped_total>
// value: optional sign, <= 6 fractional digits; unix_ms: nonnegative decimal.
// Error codes: BADVERB, BADFIELDS, BADTS, BADVAL, BADID.

struct Put {
    std::string id;
    std::int64_t unix_ms = 0;
    double value = 0.0;
    bool operator==(const Put&) const = default;
};
struct PutAck {
    bool operator==(const PutAck&) const = default;
};
struct PutErr {
    std::string code;
    bool operator==(const PutErr&) const = default;
};
struct Get {
    std::uint64_t k = 1;
    bool operator==(const Get&) const = default;
};
struct Begin {
    std::uint64_t m = 0;
    bool operator==(const Begin&) const = default;
};
struct Rec {
    std::string id;
    std::int64_t unix_ms = 0;
    double value = 0.0;
    bool operator==(const Rec&) const = default;
};
struct End {
    bool operator==(const End&) const = default;
};
struct Stat {
    bool operator==(const Stat&) const = default;
};
struct StatReply {
    std::uint64_t occupancy = 0;
    std::uint64_t capacity = 0;
    std::uint64_t dropped_total = 0;
    bool operator==(const StatReply&) const = default;
};

using WireMessage = std::variant<Put, PutAck, PutErr, Get, Begin, Rec, End, Stat, StatReply>;

class ProtocolError : public InputError {
public:
    ProtocolError(std::string code, size_t position, const std::string& msg)
        : InputError(msg), code(std::move(code)), position(position) {}
    std::string code;   // one of the wire error codes
    size_t position;    // byte offset of the offending field in the line
};

/// Shortest decimal with at most 6 fractional digits. Values that do not
/// survive this quantization are not valid wire values.
std::string format_wire_value(double v);
/// Nearest representable value after wire quantization.
double quantize_wire_value(double v);
bool valid_wire_value(double v);

/// One LF-terminated line. Throws InputError for unencodable messages.
std::string encode_message(const WireMessage& msg);
/// Accepts one line, with or without its trailing LF.
/// Throws ProtocolError on malformed input.
WireMessage decode_message(std::string_view line);

// -- link + sensor simulation -------------------------------------------------

/// End-to-end delivery delay model: a fixed transmission latency plus
/// nonnegative jitter, jitter ~ |N(0, jitter_sd_ms)| (a zero-mean normal
/// truncated at 0). Every delay is therefore >= mean_delay_ms.
struct LinkModel {
    double mean_delay_ms = 80.0;
    double jitter_sd_ms = 30.0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Field sampled by simulated sensors: (normalized position, emit unix ms) -> value.
using FieldProfile = std::function<double(const Vec3&, std::int64_t)>;

struct Delivery {
    SensorReading reading;   // timestamped with the emission time
    std::int64_t emit_ms = 0;
    double delay_ms = 0.0;
    double arrival_ms = 0.0; // emit_ms + delay_ms
};

struct Schedule {
    std::vector<Delivery> deliveries; // ascending arrival time
};

/// Each sensor emits one reading per period at t = 0, period, 2*period, ...
/// strictly below `duration_s`. Values are wire-quantized. Deterministic
/// given link.seed.
Schedule simulate_sensors(const FieldProfile& profile, const std::vector<std::string>& ids,
                          const std::vector<Vec3>& positions_norm, const Domain& domain,
                          double period_s, const LinkModel& link, double duration_s,
                          std::int64_t base_unix_ms = 0);

struct FetchMetrics {
    std::uint64_t delivered = 0;
    std::uint64_t late = 0; // delay strictly greater than the fetch buffer
    double mean_delay_ms = 0.0;
    double max_delay_ms = 0.0;
    double fetch_period_s = 0.0;
    double fetch_buffer_ms = 0.0;
};

/// A record is late (counted as loss) iff its end-to-end delay exceeds
/// fetch_buffer_ms; delay == buffer is on time. Nothing is discarded.
FetchMetrics timed_fetch_metrics(const Schedule& schedule, double fetch_period_s,
                                 double fetch_buffer_ms);

} // namespace voxfield::net
