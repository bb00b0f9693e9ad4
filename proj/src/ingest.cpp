#include "biascast/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>

namespace biascast::ingest {

namespace {

// Two-label public suffixes under which outlets register a third label.
constexpr std::array<std::string_view, 22> kMultiLabelSuffixes = {
    "co.uk", "org.uk", "ac.uk", "gov.uk", "me.uk", "com.au", "net.au", "org.au",
    "co.nz", "co.jp",  "co.in", "com.br", "com.mx", "co.za", "com.cn", "com.tr",
    "com.sg", "com.hk", "co.kr", "com.ar", "co.il", "com.tw"};

bool valid_label(std::string_view label) {
    if (label.empty() || label.size() > 63 || label.front() == '-' || label.back() == '-') {
        return false;
    }
    return std::all_of(label.begin(), label.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    });
}

std::vector<std::string_view> split_labels(std::string_view host) {
    std::vector<std::string_view> labels;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = host.find('.', start);
        labels.push_back(host.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
        if (dot == std::string_view::npos) {
            break;
        }
        start = dot + 1;
    }
    return labels;
}

[[noreturn]] void bad_domain(std::string_view original, std::string_view why) {
    throw ParseError("cannot extract a domain from '" + std::string(original) + "': " + std::string(why));
}

}  // namespace

std::string extract_domain(std::string_view url_or_domain) {
    const std::string original = trim(url_or_domain);
    if (original.empty()) {
        bad_domain(url_or_domain, "empty input");
    }
    std::string_view rest = original;
    if (const auto pos = rest.find("://"); pos != std::string_view::npos) {
        const std::string_view scheme = rest.substr(0, pos);
        const bool scheme_ok = !scheme.empty() && std::isalpha(static_cast<unsigned char>(scheme[0])) &&
                               std::all_of(scheme.begin(), scheme.end(), [](char c) {
                                   return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ||
                                          c == '.';
                               });
        if (!scheme_ok) {
            bad_domain(original, "invalid scheme");
        }
        rest.remove_prefix(pos + 3);
    } else if (rest.starts_with("//")) {
        rest.remove_prefix(2);
    }
    std::string_view authority = rest.substr(0, rest.find_first_of("/?#"));
    if (const auto at = authority.rfind('@'); at != std::string_view::npos) {
        authority.remove_prefix(at + 1);
    }
    if (const auto colon = authority.find(':'); colon != std::string_view::npos) {
        const std::string_view port = authority.substr(colon + 1);
        if (port.empty() || !std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
            bad_domain(original, "invalid port");
        }
        authority = authority.substr(0, colon);
    }
    std::string host = to_lower(authority);
    if (!host.empty() && host.back() == '.') {
        host.pop_back();
    }
    if (host.empty()) {
        bad_domain(original, "no host");
    }
    const auto labels = split_labels(host);
    if (labels.size() < 2) {
        bad_domain(original, "host has no public suffix");
    }
    for (const auto label : labels) {
        if (!valid_label(label)) {
            bad_domain(original, "invalid host label");
        }
    }
    const std::string_view tld = labels.back();
    if (std::all_of(tld.begin(), tld.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        bad_domain(original, "IP addresses have no registrable domain");
    }
    std::size_t keep = 2;
    if (labels.size() >= 3) {
        const std::string suffix = std::string(labels[labels.size() - 2]) + "." + std::string(tld);
        if (std::find(kMultiLabelSuffixes.begin(), kMultiLabelSuffixes.end(), suffix) != kMultiLabelSuffixes.end()) {
            keep = 3;
        }
    } else if (labels.size() == 2) {
        const std::string whole = std::string(labels[0]) + "." + std::string(labels[1]);
        if (std::find(kMultiLabelSuffixes.begin(), kMultiLabelSuffixes.end(), whole) != kMultiLabelSuffixes.end()) {
            bad_domain(original, "host is a bare public suffix");
        }
    }
    std::string out;
    for (std::size_t i = labels.size() - keep; i < labels.size(); ++i) {
        if (!out.empty()) {
            out.push_back('.');
        }
        out.append(labels[i]);
    }
    return out;
}

void BiasTable::add(std::string_view domain, Leaning leaning) {
    std::string key = extract_domain(domain);
    if (!entries_.emplace(key, leaning).second) {
        throw std::invalid_argument("duplicate bias table domain '" + key + "'");
    }
}

std::optional<Leaning> BiasTable::find(std::string_view url_or_domain) const {
    const auto it = entries_.find(extract_domain(url_or_domain));
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<Leaning> label_post(const PostRecord& post, const BiasTable& table) {
    if (table.empty()) {
        throw std::invalid_argument("bias table is empty");
    }
    return table.find(post.url_or_domain);
}

std::vector<LabeledPost> label_posts(const std::vector<PostRecord>& posts, const BiasTable& table,
                                     IngestSummary& summary, std::optional<DateWindow> window) {
    summary = IngestSummary{};
    std::vector<LabeledPost> out;
    out.reserve(posts.size());
    for (const auto& post : posts) {
        if (window && !window->contains(post.day)) {
            continue;
        }
        ++summary.total_posts;
        if (!summary.date_range) {
            summary.date_range = DateWindow{post.day, post.day};
        } else {
            summary.date_range->first = std::min(summary.date_range->first, post.day);
            summary.date_range->last = std::max(summary.date_range->last, post.day);
        }
        if (const auto l = label_post(post, table)) {
            ++summary.labeled_posts;
            ++summary.per_leaning_counts[index_of(*l)];
            out.push_back({post, *l});
        } else {
            ++summary.unlabeled_posts;
        }
    }
    return out;
}

LeaningSeries aggregate_daily(const std::vector<LabeledPost>& posts, CountMetric metric, const DateWindow& window) {
    const std::size_t days = window.days();
    if (days == 0) {
        throw std::invalid_argument("aggregation window is empty (start after end)");
    }
    LeaningSeries out;
    for (const Leaning l : kAllLeanings) {
        auto& s = out[index_of(l)];
        s.start_date = window.first;
        s.values.assign(days, 0.0);
        s.leaning = l;
        s.metric = metric == CountMetric::post_count ? Metric::post_count : Metric::likes_sum;
    }
    bool platform_set = false;
    for (const auto& lp : posts) {
        if (!window.contains(lp.post.day)) {
            continue;
        }
        if (!platform_set) {
            for (auto& s : out) s.platform = lp.post.platform;
            platform_set = true;
        }
        const auto day = static_cast<std::size_t>((lp.post.day - window.first).count());
        auto& v = out[index_of(lp.leaning)].values[day];
        v += metric == CountMetric::post_count ? 1.0 : static_cast<double>(lp.post.likes);
    }
    return out;
}

std::array<SentimentSeries, 5> daily_mean_sentiment(const std::vector<LabeledPost>& posts, const DateWindow& window) {
    const std::size_t days = window.days();
    if (days == 0) {
        throw std::invalid_argument("aggregation window is empty (start after end)");
    }
    std::vector<std::string> missing;
    for (const auto& lp : posts) {
        if (!lp.post.sentiment) {
            missing.push_back(lp.post.post_id);
        }
    }
    if (!missing.empty()) {
        std::string msg = "posts without a sentiment value:";
        for (const auto& id : missing) {
            msg += " " + id;
        }
        throw std::invalid_argument(msg);
    }
    std::array<std::vector<double>, 5> sums;
    std::array<std::vector<std::size_t>, 5> counts;
    for (std::size_t i = 0; i < 5; ++i) {
        sums[i].assign(days, 0.0);
        counts[i].assign(days, 0);
    }
    for (const auto& lp : posts) {
        if (!window.contains(lp.post.day)) {
            continue;
        }
        const auto day = static_cast<std::size_t>((lp.post.day - window.first).count());
        sums[index_of(lp.leaning)][day] += *lp.post.sentiment;
        ++counts[index_of(lp.leaning)][day];
    }
    std::array<SentimentSeries, 5> out;
    for (const Leaning l : kAllLeanings) {
        const std::size_t li = index_of(l);
        auto& s = out[li];
        s.start_date = window.first;
        s.leaning = l;
        s.values.resize(days);
        for (std::size_t d = 0; d < days; ++d) {
            if (counts[li][d] > 0) {
                s.values[d] = sums[li][d] / static_cast<double>(counts[li][d]);
            }
        }
    }
    return out;
}

double score_sentiment_lexicon(std::string_view text, const std::unordered_map<std::string, double>& lexicon) {
    double total = 0.0;
    std::size_t matched = 0;
    std::string token;
    auto flush = [&] {
        if (!token.empty()) {
            if (const auto it = lexicon.find(token); it != lexicon.end()) {
                total += it->second;
                ++matched;
            }
            token.clear();
        }
    };
    for (const char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) || c == '\'') {
            token.push_back(static_cast<char>(std::tolower(uc)));
        } else {
            flush();
        }
    }
    flush();
    if (matched == 0) {
        return 0.0;
    }
    return std::clamp(total / static_cast<double>(matched), -1.0, 1.0);
}

namespace {

void expect_header(const std::vector<std::vector<std::string>>& rows, const std::vector<std::string>& header,
                   std::string_view what) {
    if (rows.empty()) {
        throw ParseError(std::string(what) + " file is empty");
    }
    std::vector<std::string> got;
    for (const auto& f : rows[0]) got.push_back(trim(f));
    if (got != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw ParseError(std::string(what) + " header must be '" + expected + "'");
    }
}

std::string row_context(std::size_t line) {
    return "line " + std::to_string(line + 1) + ": ";
}

}  // namespace

std::vector<PostRecord> parse_posts_csv(std::string_view text) {
    const auto rows = read_csv(text);
    expect_header(rows, {"post_id", "timestamp", "platform", "url_or_domain", "likes", "sentiment"}, "posts");
    if (rows.size() == 1) {
        throw ParseError("posts file contains no records");
    }
    std::vector<PostRecord> posts;
    posts.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 6) {
            throw ParseError(row_context(i) + "expected 6 fields, got " + std::to_string(r.size()));
        }
        PostRecord p;
        p.post_id = trim(r[0]);
        try {
            p.day = parse_timestamp_utc_day(r[1]);
            p.platform = parse_platform(r[2]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(row_context(i) + e.what());
        }
        p.url_or_domain = trim(r[3]);
        const std::string likes = trim(r[4]);
        std::uint64_t likes_value = 0;
        const auto [ptr, ec] = std::from_chars(likes.data(), likes.data() + likes.size(), likes_value);
        if (likes.empty() || ec != std::errc{} || ptr != likes.data() + likes.size()) {
            throw ParseError(row_context(i) + "likes must be a nonnegative integer, got '" + likes + "'");
        }
        p.likes = likes_value;
        const std::string sentiment = trim(r[5]);
        if (!sentiment.empty()) {
            double s = 0.0;
            const auto res = std::from_chars(sentiment.data(), sentiment.data() + sentiment.size(), s);
            if (res.ec != std::errc{} || res.ptr != sentiment.data() + sentiment.size() || !(s >= -1.0 && s <= 1.0)) {
                throw ParseError(row_context(i) + "sentiment must be a real in [-1, 1], got '" + sentiment + "'");
            }
            p.sentiment = s;
        }
        posts.push_back(std::move(p));
    }
    return posts;
}

BiasTable parse_bias_csv(std::string_view text) {
    const auto rows = read_csv(text);
    expect_header(rows, {"domain", "leaning"}, "bias");
    BiasTable table;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 2) {
            throw ParseError(row_context(i) + "expected 2 fields, got " + std::to_string(r.size()));
        }
        try {
            table.add(r[0], parse_leaning(r[1]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(row_context(i) + e.what());
        }
    }
    if (table.empty()) {
        throw ParseError("bias file contains no entries");
    }
    return table;
}

namespace {

constexpr std::string_view kSeriesHeader = "date,left,left_leaning,center,right_leaning,right\n";

}  // namespace

std::string series_to_csv(const LeaningSeries& series) {
    std::ostringstream out;
    out << kSeriesHeader;
    const std::size_t days = series[0].values.size();
    for (std::size_t d = 0; d < days; ++d) {
        out << format_date(series[0].date_at(d));
        for (const auto& s : series) {
            out << ',' << format_double(s.values.at(d));
        }
        out << '\n';
    }
    return out.str();
}

std::string sentiment_to_csv(const std::array<SentimentSeries, 5>& series) {
    std::ostringstream out;
    out << kSeriesHeader;
    const std::size_t days = series[0].values.size();
    for (std::size_t d = 0; d < days; ++d) {
        out << format_date(series[0].start_date + std::chrono::days{static_cast<long>(d)});
        for (const auto& s : series) {
            out << ',';
            if (s.values.at(d)) {
                out << format_double(*s.values[d]);
            }
        }
        out << '\n';
    }
    return out.str();
}

LeaningSeries series_from_csv(std::string_view text, Metric metric, Platform platform) {
    const auto rows = read_csv(text);
    expect_header(rows, {"date", "left", "left_leaning", "center", "right_leaning", "right"}, "series");
    if (rows.size() < 2) {
        throw ParseError("series file has no rows");
    }
    LeaningSeries out;
    for (const Leaning l : kAllLeanings) {
        auto& s = out[index_of(l)];
        s.leaning = l;
        s.metric = metric;
        s.platform = platform;
    }
    Date expected{};
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 6) {
            throw ParseError(row_context(i) + "expected 6 fields");
        }
        Date d{};
        try {
            d = parse_date(r[0]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(row_context(i) + e.what());
        }
        if (i == 1) {
            for (auto& s : out) s.start_date = d;
        } else if (d != expected) {
            throw ParseError(row_context(i) + "dates must be consecutive days");
        }
        expected = d + std::chrono::days{1};
        for (std::size_t k = 0; k < 5; ++k) {
            const std::string cell = trim(r[k + 1]);
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
                throw ParseError(row_context(i) + "non-numeric value '" + cell + "'");
            }
            out[k].values.push_back(v);
        }
    }
    return out;
}

std::string summary_to_json(const IngestSummary& s) {
    nlohmann::ordered_json j;
    j["total_posts"] = s.total_posts;
    j["labeled_posts"] = s.labeled_posts;
    j["unlabeled_posts"] = s.unlabeled_posts;
    nlohmann::ordered_json per;
    for (const Leaning l : kAllLeanings) {
        per[std::string(to_string(l))] = s.per_leaning_counts[index_of(l)];
    }
    j["per_leaning_counts"] = per;
    if (s.date_range) {
        j["date_range"] = {{"first", format_date(s.date_range->first)}, {"last", format_date(s.date_range->last)}};
    } else {
        j["date_range"] = nullptr;
    }
    return j.dump(2) + "\n";
}

}  // namespace biascast::ingest
