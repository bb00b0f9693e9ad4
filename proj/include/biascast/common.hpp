#pragma once

#include <chrono>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biascast {

using Date = std::chrono::sys_days;

/// Parses `YYYY-MM-DD`. Throws std::invalid_argument on malformed or impossible dates.
Date parse_date(std::string_view text);

/// Parses an ISO-8601 instant (`YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|±HH:MM]`, or a bare date)
/// and returns the UTC calendar day it falls on.
Date parse_timestamp_utc_day(std::string_view text);

std::string format_date(Date d);

/// Inclusive day range.
struct DateWindow {
    Date first;
    Date last;

    [[nodiscard]] bool contains(Date d) const { return d >= first && d <= last; }
    [[nodiscard]] std::size_t days() const {
        return last < first ? 0 : static_cast<std::size_t>((last - first).count()) + 1;
    }
};

/// Default January–April 2018 window.
DateWindow default_window();

/// Seeded generator shared by every stochastic component. The engine is
/// std::mt19937_64; normal draws use the Box–Muller transform on two uniform
/// doubles built from the top 53 bits of successive engine outputs, so a
/// sequence is a documented function of the seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal(double mean = 0.0, double stddev = 1.0);
    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Derives an independent component seed from the global seed and a stable tag
/// (FNV-1a of the tag mixed with the seed through splitmix64).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
std::vector<std::vector<std::string>> read_csv(std::string_view text);
std::vector<std::vector<std::string>> read_csv_file(const std::string& path);
std::string csv_escape(std::string_view field);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Shortest round-trippable decimal form of a double.
std::string format_double(double v);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace biascast
