#pragma once

#include "biascast/common.hpp"
#include "biascast/labels.hpp"
#include "biascast/timeseries.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace biascast::ingest {

/// Raised for unparsable URLs/hostnames and malformed input rows.
class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct PostRecord {
    std::string post_id;
    Date day{};  // UTC calendar day of the post timestamp
    Platform platform = Platform::twitter;
    std::string url_or_domain;
    std::uint64_t likes = 0;
    std::optional<double> sentiment;
};

/// Registrable domain (lowercase) -> leaning. Lookups normalize their input.
class BiasTable {
public:
    BiasTable() = default;

    /// Throws ParseError for a malformed domain and std::invalid_argument for a
    /// domain that is already present.
    void add(std::string_view domain, Leaning leaning);
    [[nodiscard]] std::optional<Leaning> find(std::string_view url_or_domain) const;
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] std::size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, Leaning> entries_;
};

struct IngestSummary {
    std::size_t total_posts = 0;
    std::size_t labeled_posts = 0;
    std::size_t unlabeled_posts = 0;
    std::array<std::size_t, 5> per_leaning_counts{};
    std::optional<DateWindow> date_range;
};

/// Lowercased registrable domain of a URL or bare hostname: scheme, credentials,
/// port, path, query, and fragment are dropped, and the host is reduced to one
/// label below its public suffix (so "www." and other subdomains collapse).
std::string extract_domain(std::string_view url_or_domain);

/// Throws std::invalid_argument for an empty table; propagates ParseError.
std::optional<Leaning> label_post(const PostRecord& post, const BiasTable& table);

struct LabeledPost {
    PostRecord post;
    Leaning leaning;
};

/// Labels every post. Unlabeled posts are dropped from the result and counted in
/// the summary. When `window` is given, posts outside it are excluded from both.
std::vector<LabeledPost> label_posts(const std::vector<PostRecord>& posts, const BiasTable& table,
                                     IngestSummary& summary, std::optional<DateWindow> window = std::nullopt);

enum class CountMetric { post_count, likes_sum };

using LeaningSeries = std::array<timeseries::DailySeries, 5>;

/// One zero-filled series per leaning covering every day of `window`.
LeaningSeries aggregate_daily(const std::vector<LabeledPost>& posts, CountMetric metric, const DateWindow& window);

/// Per-leaning daily mean sentiment; days without posts are std::nullopt.
struct SentimentSeries {
    Date start_date{};
    Leaning leaning = Leaning::center;
    std::vector<std::optional<double>> values;
};

/// Throws std::invalid_argument listing the post ids that lack a sentiment value.
std::array<SentimentSeries, 5> daily_mean_sentiment(const std::vector<LabeledPost>& posts, const DateWindow& window);

/// Mean lexicon value over matched lowercase alphanumeric tokens, clamped to
/// [-1, 1]; 0 when nothing matches.
double score_sentiment_lexicon(std::string_view text, const std::unordered_map<std::string, double>& lexicon);

// File formats

/// Header `post_id,timestamp,platform,url_or_domain,likes,sentiment`.
std::vector<PostRecord> parse_posts_csv(std::string_view text);
/// Header `domain,leaning`.
BiasTable parse_bias_csv(std::string_view text);

/// Header `date,left,left_leaning,center,right_leaning,right`.
std::string series_to_csv(const LeaningSeries& series);
std::string sentiment_to_csv(const std::array<SentimentSeries, 5>& series);
/// Inverse of series_to_csv; metric and platform are supplied by the caller.
LeaningSeries series_from_csv(std::string_view text, Metric metric, Platform platform);

std::string summary_to_json(const IngestSummary& s);

}  // namespace biascast::ingest
