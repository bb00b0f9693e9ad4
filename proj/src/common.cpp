#include "biascast/common.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace biascast {

namespace {

int parse_fixed_int(std::string_view text, std::size_t pos, std::size_t len, std::string_view whole) {
    if (pos + len > text.size()) {
        throw std::invalid_argument("truncated date/time: '" + std::string(whole) + "'");
    }
    int value = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        const char c = text[i];
        if (c < '0' || c > '9') {
            throw std::invalid_argument("non-digit in date/time: '" + std::string(whole) + "'");
        }
        value = value * 10 + (c - '0');
    }
    return value;
}

Date make_date(int y, int m, int d, std::string_view whole) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date: '" + std::string(whole) + "'");
    }
    return sys_days{ymd};
}

}  // namespace

Date parse_date(std::string_view text) {
    const std::string t = trim(text);
    if (t.size() != 10 || t[4] != '-' || t[7] != '-') {
        throw std::invalid_argument("expected YYYY-MM-DD, got '" + t + "'");
    }
    return make_date(parse_fixed_int(t, 0, 4, t), parse_fixed_int(t, 5, 2, t),
                     parse_fixed_int(t, 8, 2, t), t);
}

Date parse_timestamp_utc_day(std::string_view text) {
    const std::string t = trim(text);
    if (t.size() < 10 || t[4] != '-' || t[7] != '-') {
        throw std::invalid_argument("expected ISO-8601 timestamp, got '" + t + "'");
    }
    const Date day = make_date(parse_fixed_int(t, 0, 4, t), parse_fixed_int(t, 5, 2, t),
                               parse_fixed_int(t, 8, 2, t), t);
    if (t.size() == 10) {
        return day;
    }
    if (t[10] != 'T' && t[10] != ' ') {
        throw std::invalid_argument("bad date/time separator in '" + t + "'");
    }
    if (t.size() < 19 || t[13] != ':' || t[16] != ':') {
        throw std::invalid_argument("expected HH:MM:SS in '" + t + "'");
    }
    const int hh = parse_fixed_int(t, 11, 2, t);
    const int mm = parse_fixed_int(t, 14, 2, t);
    const int ss = parse_fixed_int(t, 17, 2, t);
    if (hh > 23 || mm > 59 || ss > 60) {
        throw std::invalid_argument("time of day out of range in '" + t + "'");
    }
    std::size_t pos = 19;
    if (pos < t.size() && t[pos] == '.') {
        ++pos;
        const std::size_t digits_start = pos;
        while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) {
            ++pos;
        }
        if (pos == digits_start) {
            throw std::invalid_argument("empty fractional seconds in '" + t + "'");
        }
    }
    long offset_minutes = 0;
    if (pos < t.size()) {
        if (t[pos] == 'Z' || t[pos] == 'z') {
            ++pos;
        } else if (t[pos] == '+' || t[pos] == '-') {
            const int sign = t[pos] == '+' ? 1 : -1;
            if (pos + 6 != t.size() || t[pos + 3] != ':') {
                throw std::invalid_argument("bad UTC offset in '" + t + "'");
            }
            const int oh = parse_fixed_int(t, pos + 1, 2, t);
            const int om = parse_fixed_int(t, pos + 4, 2, t);
            if (oh > 23 || om > 59) {
                throw std::invalid_argument("UTC offset out of range in '" + t + "'");
            }
            offset_minutes = sign * (oh * 60L + om);
            pos += 6;
        }
    }
    if (pos != t.size()) {
        throw std::invalid_argument("trailing characters in timestamp '" + t + "'");
    }
    // local = utc + offset, so utc = local - offset
    const long local_minutes = hh * 60L + mm;
    const long utc_minutes = local_minutes - offset_minutes;
    const long day_shift = utc_minutes < 0 ? -1 : (utc_minutes >= 24 * 60 ? 1 : 0);
    return day + std::chrono::days{day_shift};
}

std::string format_date(Date d) {
    using namespace std::chrono;
    const year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

DateWindow default_window() {
    return {parse_date("2018-01-01"), parse_date("2018-04-30")};
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double stddev) {
    if (has_spare_) {
        has_spare_ = false;
        return mean + stddev * spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return mean + stddev * r * std::cos(angle);
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) {
        throw std::invalid_argument("Rng::index requires n > 0");
    }
    // rejection sampling keeps the draw unbiased
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) {
        x = engine_();
    }
    return static_cast<std::size_t>(x % n);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : tag) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<std::vector<std::string>> read_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    auto end_row = [&] {
        row.push_back(std::move(field));
        field.clear();
        // a line consisting of a single empty field is a blank line
        if (!(row.size() == 1 && row[0].empty())) {
            rows.push_back(std::move(row));
        }
        row.clear();
        field_started = false;
    };
    while (i < text.size()) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\r') {
            // tolerated before \n
        } else if (c == '\n') {
            end_row();
        } else {
            field.push_back(c);
            field_started = true;
        }
        ++i;
    }
    if (in_quotes) {
        throw std::invalid_argument("unterminated quoted CSV field");
    }
    if (field_started || !field.empty() || !row.empty()) {
        end_row();
    }
    return rows;
}

std::vector<std::vector<std::string>> read_csv_file(const std::string& path) {
    return read_csv(read_text_file(path));
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
        return std::string(field);
    }
    std::string out = "\"";
    for (const char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "' for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw std::runtime_error("write failed for '" + path + "'");
    }
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

}  // namespace biascast
