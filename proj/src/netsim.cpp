#include "voxfield/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "voxfield/rng.hpp"

namespace voxfield::net {

ConcentratorBuffer::ConcentratorBuffer(size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InputError("buffer capacity must be >= 1");
}

void ConcentratorBuffer::push(const SensorReading& reading) {
    std::lock_guard lock(mutex_);
    if (records_.size() == capacity_) {
        records_.pop_front();
        ++dropped_;
    }
    records_.push_back(reading);
    ++pushed_;
}

std::vector<SensorReading> ConcentratorBuffer::drain(size_t k) {
    std::lock_guard lock(mutex_);
    const size_t take = std::min(k, records_.size());
    std::vector<SensorReading> out;
    out.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        out.push_back(std::move(records_.front()));
        records_.pop_front();
    }
    drained_ += take;
    return out;
}

size_t ConcentratorBuffer::occupancy() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::uint64_t ConcentratorBuffer::dropped_total() const {
    std::lock_guard lock(mutex_);
    return dropped_;
}

std::uint64_t ConcentratorBuffer::pushed_total() const {
    std::lock_guard lock(mutex_);
    return pushed_;
}

std::uint64_t ConcentratorBuffer::drained_total() const {
    std::lock_guard lock(mutex_);
    return drained_;
}

// -- wire codec ----------------------------------------------------------------

std::string format_wire_value(double v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    std::string s(buf);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

double quantize_wire_value(double v) {
    return std::strtod(format_wire_value(v).c_str(), nullptr);
}

bool valid_wire_value(double v) {
    if (!std::isfinite(v)) return false;
    const double q = quantize_wire_value(v);
    return q == v && std::signbit(q) == std::signbit(v);
}

namespace {

struct Splitter {
    std::vector<std::string_view> fields;
    std::vector<size_t> offsets;
};

Splitter split_line(std::string_view line) {
    Splitter out;
    size_t start = 0;
    while (true) {
        const size_t space = line.find(' ', start);
        if (space == std::string_view::npos) {
            out.fields.push_back(line.substr(start));
            out.offsets.push_back(start);
            break;
        }
        out.fields.push_back(line.substr(start, space - start));
        out.offsets.push_back(start);
        start = space + 1;
    }
    return out;
}

bool parse_unsigned(std::string_view s, std::uint64_t& out) {
    if (s.empty() || s.size() > 20) return false;
    std::uint64_t v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        const std::uint64_t digit = static_cast<std::uint64_t>(c - '0');
        if (v > (UINT64_MAX - digit) / 10) return false;
        v = v * 10 + digit;
    }
    out = v;
    return true;
}

bool parse_timestamp(std::string_view s, std::int64_t& out) {
    std::uint64_t v = 0;
    if (!parse_unsigned(s, v) || v > static_cast<std::uint64_t>(INT64_MAX)) return false;
    out = static_cast<std::int64_t>(v);
    return true;
}

// Optional sign, at least one integer digit, optional '.' with 1..6 digits.
bool parse_value(std::string_view s, double& out) {
    size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    size_t int_digits = 0;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
        ++i;
        ++int_digits;
    }
    if (int_digits == 0) return false;
    if (i < s.size() && s[i] == '.') {
        ++i;
        size_t frac_digits = 0;
        while (i < s.size() && s[i] >= '0' && s[i] <= '9') {
            ++i;
            ++frac_digits;
        }
        if (frac_digits == 0 || frac_digits > 6) return false;
    }
    if (i != s.size()) return false;
    out = std::strtod(std::string(s).c_str(), nullptr);
    return std::isfinite(out);
}

[[noreturn]] void fail(const char* code, size_t position, const std::string& detail) {
    throw ProtocolError(code, position,
                        detail + " at byte " + std::to_string(position));
}

void require_fields(const Splitter& sp, size_t count) {
    if (sp.fields.size() != count) {
        fail("BADFIELDS", 0,
             "expected " + std::to_string(count) + " fields, got " + std::to_string(sp.fields.size()));
    }
    for (size_t i = 0; i < sp.fields.size(); ++i) {
        if (sp.fields[i].empty()) fail("BADFIELDS", sp.offsets[i], "empty field");
    }
}

std::string check_id(const Splitter& sp, size_t idx) {
    std::string id(sp.fields[idx]);
    if (!valid_sensor_id(id)) fail("BADID", sp.offsets[idx], "bad sensor id '" + id + "'");
    return id;
}

const char* kKnownErrCodes[] = {"BADVERB", "BADFIELDS", "BADTS", "BADVAL", "BADID"};

} // namespace

std::string encode_message(const WireMessage& msg) {
    char buf[640];
    return std::visit(
        [&](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, Put> || std::is_same_v<T, Rec>) {
                if (!valid_sensor_id(m.id)) throw InputError("encode: bad sensor id '" + m.id + "'");
                if (m.unix_ms < 0) throw InputError("encode: negative timestamp");
                if (!valid_wire_value(m.value)) {
                    throw InputError("encode: value not representable with 6 fractional digits");
                }
                std::snprintf(buf, sizeof buf, "%s %s %lld %s\n",
                              std::is_same_v<T, Put> ? "PUT" : "REC", m.id.c_str(),
                              static_cast<long long>(m.unix_ms), format_wire_value(m.value).c_str());
                return buf;
            } else if constexpr (std::is_same_v<T, PutAck>) {
                return "OK\n";
            } else if constexpr (std::is_same_v<T, PutErr>) {
                if (std::find_if(std::begin(kKnownErrCodes), std::end(kKnownErrCodes),
                                 [&](const char* c) { return m.code == c; }) ==
                    std::end(kKnownErrCodes)) {
                    throw InputError("encode: unknown error code '" + m.code + "'");
                }
                return "ERR " + m.code + "\n";
            } else if constexpr (std::is_same_v<T, Get>) {
                if (m.k < 1) throw InputError("encode: GET count must be >= 1");
                return "GET " + std::to_string(m.k) + "\n";
            } else if constexpr (std::is_same_v<T, Begin>) {
                return "BEGIN " + std::to_string(m.m) + "\n";
            } else if constexpr (std::is_same_v<T, End>) {
                return "END\n";
            } else if constexpr (std::is_same_v<T, Stat>) {
                return "STAT\n";
            } else { // StatReply
                std::snprintf(buf, sizeof buf, "STAT %llu %llu %llu\n",
                              static_cast<unsigned long long>(m.occupancy),
                              static_cast<unsigned long long>(m.capacity),
                              static_cast<unsigned long long>(m.dropped_total));
                return buf;
            }
        },
        msg);
}

WireMessage decode_message(std::string_view line) {
    if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
    const Splitter sp = split_line(line);
    const std::string_view verb = sp.fields[0];

    if (verb == "PUT" || verb == "REC") {
        require_fields(sp, 4);
        std::string id = check_id(sp, 1);
        std::int64_t ms = 0;
        if (!parse_timestamp(sp.fields[2], ms)) {
            fail("BADTS", sp.offsets[2], "bad timestamp '" + std::string(sp.fields[2]) + "'");
        }
        double value = 0.0;
        if (!parse_value(sp.fields[3], value)) {
            fail("BADVAL", sp.offsets[3], "bad value '" + std::string(sp.fields[3]) + "'");
        }
        if (verb == "PUT") return Put{std::move(id), ms, value};
        return Rec{std::move(id), ms, value};
    }
    if (verb == "OK") {
        require_fields(sp, 1);
        return PutAck{};
    }
    if (verb == "ERR") {
        require_fields(sp, 2);
        for (const char* code : kKnownErrCodes) {
            if (sp.fields[1] == code) return PutErr{code};
        }
        fail("BADFIELDS", sp.offsets[1], "unknown error code '" + std::string(sp.fields[1]) + "'");
    }
    if (verb == "GET") {
        require_fields(sp, 2);
        std::uint64_t k = 0;
        if (!parse_unsigned(sp.fields[1], k) || k < 1) {
            fail("BADFIELDS", sp.offsets[1], "bad GET count '" + std::string(sp.fields[1]) + "'");
        }
        return Get{k};
    }
    if (verb == "BEGIN") {
        require_fields(sp, 2);
        std::uint64_t m = 0;
        if (!parse_unsigned(sp.fields[1], m)) {
            fail("BADFIELDS", sp.offsets[1], "bad BEGIN count '" + std::string(sp.fields[1]) + "'");
        }
        return Begin{m};
    }
    if (verb == "END") {
        require_fields(sp, 1);
        return End{};
    }
    if (verb == "STAT") {
        if (sp.fields.size() == 1) return Stat{};
        require_fields(sp, 4);
        StatReply r;
        if (!parse_unsigned(sp.fields[1], r.occupancy) || !parse_unsigned(sp.fields[2], r.capacity) ||
            !parse_unsigned(sp.fields[3], r.dropped_total)) {
            fail("BADFIELDS", sp.offsets[1], "bad STAT reply fields");
        }
        return r;
    }
    fail("BADVERB", 0, "unknown verb '" + std::string(verb) + "'");
}

// -- link + sensor simulation ---------------------------------------------------

void LinkModel::validate() const {
    if (mean_delay_ms < 0.0) throw InputError("link mean delay must be >= 0");
    if (jitter_sd_ms < 0.0) throw InputError("link jitter sd must be >= 0");
}

Schedule simulate_sensors(const FieldProfile& profile, const std::vector<std::string>& ids,
                          const std::vector<Vec3>& positions_norm, const Domain& domain,
                          double period_s, const LinkModel& link, double duration_s,
                          std::int64_t base_unix_ms) {
    link.validate();
    if (!(period_s > 0.0)) throw InputError("sensor period must be > 0");
    if (duration_s < 0.0) throw InputError("duration must be >= 0");
    if (ids.size() != positions_norm.size() || ids.empty()) {
        throw InputError("simulate_sensors: ids and positions must pair up");
    }
    if (base_unix_ms < 0) throw InputError("base unix ms must be >= 0");

    std::mt19937_64 rng(link.seed);
    Schedule schedule;
    const auto emissions = static_cast<std::int64_t>(std::ceil(duration_s / period_s));
    schedule.deliveries.reserve(static_cast<size_t>(emissions) * ids.size());

    for (std::int64_t m = 0;; ++m) {
        const double t_s = double(m) * period_s;
        if (!(t_s < duration_s)) break;
        const std::int64_t emit_ms = base_unix_ms + static_cast<std::int64_t>(std::llround(t_s * 1000.0));
        for (size_t s = 0; s < ids.size(); ++s) {
            const double raw = profile(positions_norm[s], emit_ms);
            const double value = quantize_wire_value(raw);
            Delivery d;
            d.reading = SensorReading::make(ids[s], denormalize_point(domain, positions_norm[s]),
                                            value, emit_ms);
            d.emit_ms = emit_ms;
            const double jitter = link.jitter_sd_ms > 0.0
                                      ? link.jitter_sd_ms * std::fabs(standard_normal(rng))
                                      : 0.0;
            d.delay_ms = link.mean_delay_ms + jitter;
            d.arrival_ms = double(emit_ms) + d.delay_ms;
            schedule.deliveries.push_back(std::move(d));
        }
    }
    std::stable_sort(schedule.deliveries.begin(), schedule.deliveries.end(),
                     [](const Delivery& a, const Delivery& b) { return a.arrival_ms < b.arrival_ms; });
    return schedule;
}

FetchMetrics timed_fetch_metrics(const Schedule& schedule, double fetch_period_s,
                                 double fetch_buffer_ms) {
    if (!(fetch_buffer_ms > 0.0)) throw InputError("fetch buffer must be > 0");
    if (!(fetch_period_s > 0.0)) throw InputError("fetch period must be > 0");
    FetchMetrics m;
    m.fetch_period_s = fetch_period_s;
    m.fetch_buffer_ms = fetch_buffer_ms;
    double sum = 0.0;
    for (const Delivery& d : schedule.deliveries) {
        ++m.delivered;
        if (d.delay_ms > fetch_buffer_ms) ++m.late;
        sum += d.delay_ms;
        m.max_delay_ms = std::max(m.max_delay_ms, d.delay_ms);
    }
    if (m.delivered > 0) m.mean_delay_ms = sum / double(m.delivered);
    return m;
}

} // namespace voxfield::net
