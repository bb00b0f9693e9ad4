#include "biascast/ingest.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace biascast;
using namespace biascast::ingest;

namespace {

PostRecord make_post(std::string id, std::string_view day, std::string domain, std::uint64_t likes = 0,
                     std::optional<double> sentiment = std::nullopt) {
    PostRecord p;
    p.post_id = std::move(id);
    p.day = parse_date(day);
    p.url_or_domain = std::move(domain);
    p.likes = likes;
    p.sentiment = sentiment;
    return p;
}

BiasTable fox_table() {
    BiasTable t;
    t.add("foxnews.com", Leaning::right);
    return t;
}

}  // namespace

TEST_CASE("extract_domain normalizes URLs and bare hosts") {
    CHECK(extract_domain("https://www.cnn.com/2018/01/x.html") == "cnn.com");
    CHECK(extract_domain("Breitbart.com") == "breitbart.com");
    CHECK(extract_domain("http://user:pw@edition.CNN.com:8080/path?q=1#frag") == "cnn.com");
    CHECK(extract_domain("https://www.bbc.co.uk/news") == "bbc.co.uk");
    CHECK(extract_domain("//www.nytimes.com/") == "nytimes.com");
    CHECK(extract_domain("foxnews.com.") == "foxnews.com");
}

TEST_CASE("extract_domain rejects malformed input with the offending text") {
    try {
        extract_domain("not a url ::");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("not a url ::") != std::string::npos);
    }
    CHECK_THROWS_AS(extract_domain(""), ParseError);
    CHECK_THROWS_AS(extract_domain("localhost"), ParseError);
    CHECK_THROWS_AS(extract_domain("http://192.168.0.1/"), ParseError);
    CHECK_THROWS_AS(extract_domain("https://cnn.com:port/"), ParseError);
    CHECK_THROWS_AS(extract_domain("co.uk"), ParseError);
}

TEST_CASE("label_post looks up the registrable domain") {
    const BiasTable table = fox_table();
    CHECK(label_post(make_post("1", "2018-01-01", "foxnews.com"), table) == Leaning::right);
    CHECK_FALSE(label_post(make_post("2", "2018-01-01", "example.org"), table).has_value());
    CHECK(label_post(make_post("3", "2018-01-01", "WWW.FoxNews.com"), table) == Leaning::right);
    CHECK_THROWS_AS(label_post(make_post("4", "2018-01-01", "not a url ::"), table), ParseError);
    CHECK_THROWS_AS(label_post(make_post("5", "2018-01-01", "foxnews.com"), BiasTable{}), std::invalid_argument);
}

TEST_CASE("label_post is idempotent") {
    const BiasTable table = fox_table();
    const auto post = make_post("1", "2018-01-01", "https://video.foxnews.com/v/1");
    const auto first = label_post(post, table);
    for (int i = 0; i < 3; ++i) CHECK(label_post(post, table) == first);
}

TEST_CASE("bias table rejects duplicate domains after normalization") {
    BiasTable t;
    t.add("cnn.com", Leaning::left);
    CHECK_THROWS_AS(t.add("WWW.CNN.com", Leaning::center), std::invalid_argument);
}

TEST_CASE("aggregate_daily counts and sums per leaning") {
    const DateWindow day{parse_date("2018-01-05"), parse_date("2018-01-05")};
    std::vector<LabeledPost> posts{{make_post("a", "2018-01-05", "x.com", 2), Leaning::left},
                                   {make_post("b", "2018-01-05", "x.com", 3), Leaning::left},
                                   {make_post("c", "2018-01-05", "x.com", 5), Leaning::left}};
    const auto counts = aggregate_daily(posts, CountMetric::post_count, day);
    CHECK(counts[index_of(Leaning::left)].values == std::vector<double>{3});
    for (const Leaning l : {Leaning::left_leaning, Leaning::center, Leaning::right_leaning, Leaning::right}) {
        CHECK(counts[index_of(l)].values == std::vector<double>{0});
    }
    const auto likes = aggregate_daily(posts, CountMetric::likes_sum, day);
    CHECK(likes[index_of(Leaning::left)].values == std::vector<double>{10});
}

TEST_CASE("aggregate_daily covers the whole window and drops outside posts") {
    const DateWindow window = default_window();
    std::vector<LabeledPost> posts{{make_post("a", "2017-12-31", "x.com"), Leaning::center},
                                   {make_post("b", "2018-02-01", "x.com"), Leaning::center},
                                   {make_post("c", "2018-05-01", "x.com"), Leaning::center}};
    const auto series = aggregate_daily(posts, CountMetric::post_count, window);
    for (const auto& s : series) CHECK(s.values.size() == 120);
    const auto& center = series[index_of(Leaning::center)].values;
    CHECK(std::accumulate(center.begin(), center.end(), 0.0) == 1.0);
    CHECK(center[31] == 1.0);
    CHECK_THROWS_AS(aggregate_daily(posts, CountMetric::post_count,
                                    DateWindow{parse_date("2018-02-01"), parse_date("2018-01-01")}),
                    std::invalid_argument);
}

TEST_CASE("aggregation is permutation invariant and conserves posts") {
    BiasTable table;
    table.add("l.com", Leaning::left);
    table.add("c.com", Leaning::center);
    table.add("r.com", Leaning::right);
    const char* domains[] = {"l.com", "c.com", "r.com", "unknown.net"};
    Rng rng(7);
    std::vector<PostRecord> posts;
    for (int i = 0; i < 300; ++i) {
        auto p = make_post(std::to_string(i), "2018-01-01", domains[rng.index(4)], rng.index(50));
        p.day = parse_date("2017-12-25") + std::chrono::days{static_cast<long>(rng.index(20))};
        posts.push_back(p);
    }
    const DateWindow window{parse_date("2018-01-01"), parse_date("2018-01-10")};
    IngestSummary in_window;
    const auto labeled = label_posts(posts, table, in_window, window);
    const auto counts = aggregate_daily(labeled, CountMetric::post_count, window);
    double total = 0;
    for (const auto& s : counts) total += std::accumulate(s.values.begin(), s.values.end(), 0.0);
    const auto resident = std::count_if(posts.begin(), posts.end(), [&](const auto& p) { return window.contains(p.day); });
    CHECK(total + static_cast<double>(in_window.unlabeled_posts) == static_cast<double>(resident));
    CHECK(in_window.labeled_posts + in_window.unlabeled_posts == in_window.total_posts);
    CHECK(std::accumulate(in_window.per_leaning_counts.begin(), in_window.per_leaning_counts.end(), std::size_t{0}) ==
          in_window.labeled_posts);

    auto shuffled = labeled;
    for (int round = 0; round < 5; ++round) {
        rng.shuffle(shuffled);
        const auto again = aggregate_daily(shuffled, CountMetric::likes_sum, window);
        const auto base = aggregate_daily(labeled, CountMetric::likes_sum, window);
        for (std::size_t k = 0; k < 5; ++k) CHECK(again[k].values == base[k].values);
    }
}

TEST_CASE("daily_mean_sentiment uses explicit nulls") {
    const DateWindow window{parse_date("2018-01-01"), parse_date("2018-01-02")};
    std::vector<LabeledPost> posts{{make_post("a", "2018-01-01", "x.com", 0, 0.5), Leaning::left},
                                   {make_post("b", "2018-01-01", "x.com", 0, -0.5), Leaning::left},
                                   {make_post("c", "2018-01-02", "x.com", 0, -0.8), Leaning::right}};
    const auto s = daily_mean_sentiment(posts, window);
    CHECK(s[index_of(Leaning::left)].values[0] == doctest::Approx(0.0));
    CHECK_FALSE(s[index_of(Leaning::left)].values[1].has_value());
    CHECK(s[index_of(Leaning::right)].values[1] == doctest::Approx(-0.8));
    CHECK_FALSE(s[index_of(Leaning::center)].values[0].has_value());

    posts.push_back({make_post("missing-1", "2018-01-01", "x.com"), Leaning::center});
    try {
        daily_mean_sentiment(posts, window);
        FAIL("expected error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("missing-1") != std::string::npos);
    }
}

TEST_CASE("score_sentiment_lexicon") {
    const std::unordered_map<std::string, double> lex{{"good", 0.6}, {"bad", -0.6}, {"awful", -3.0}};
    CHECK(score_sentiment_lexicon("good good", lex) == doctest::Approx(0.6));
    CHECK(score_sentiment_lexicon("xyzzy", lex) == 0.0);
    CHECK(score_sentiment_lexicon("Good, BAD!", lex) == doctest::Approx(0.0));
    CHECK(score_sentiment_lexicon("awful", lex) == -1.0);
}

TEST_CASE("posts CSV parsing") {
    const std::string csv =
        "post_id,timestamp,platform,url_or_domain,likes,sentiment\n"
        "1,2018-01-05T23:30:00-02:00,twitter,https://www.cnn.com/a,4,0.25\n"
        "2,2018-01-05T10:00:00Z,gab,\"foxnews.com\",0,\n";
    const auto posts = parse_posts_csv(csv);
    REQUIRE(posts.size() == 2);
    CHECK(format_date(posts[0].day) == "2018-01-06");
    CHECK(posts[0].likes == 4);
    CHECK(posts[0].sentiment == 0.25);
    CHECK(posts[1].platform == Platform::gab);
    CHECK_FALSE(posts[1].sentiment.has_value());

    CHECK_THROWS_AS(parse_posts_csv(""), ParseError);
    CHECK_THROWS_AS(parse_posts_csv("post_id,timestamp,platform,url_or_domain,likes,sentiment\n"), ParseError);
    CHECK_THROWS_AS(parse_posts_csv("id,when\n1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_posts_csv("post_id,timestamp,platform,url_or_domain,likes,sentiment\n"
                                    "1,2018-13-01T00:00:00Z,twitter,cnn.com,1,\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_posts_csv("post_id,timestamp,platform,url_or_domain,likes,sentiment\n"
                                    "1,2018-01-01T00:00:00Z,twitter,cnn.com,-1,\n"),
                    ParseError);
    CHECK_THROWS_AS(parse_posts_csv("post_id,timestamp,platform,url_or_domain,likes,sentiment\n"
                                    "1,2018-01-01T00:00:00Z,twitter,cnn.com,1,1.5\n"),
                    ParseError);
}

TEST_CASE("series CSV round trip") {
    const DateWindow window{parse_date("2018-01-30"), parse_date("2018-02-02")};
    std::vector<LabeledPost> posts{{make_post("a", "2018-01-31", "x.com", 7), Leaning::right_leaning}};
    const auto series = aggregate_daily(posts, CountMetric::likes_sum, window);
    const std::string csv = series_to_csv(series);
    CHECK(csv.rfind("date,left,left_leaning,center,right_leaning,right\n2018-01-30,0,0,0,0,0\n2018-01-31,0,0,0,7,0\n", 0) == 0);
    const auto back = series_from_csv(csv, Metric::likes_sum, Platform::twitter);
    for (std::size_t k = 0; k < 5; ++k) {
        CHECK(back[k].values == series[k].values);
        CHECK(back[k].start_date == series[k].start_date);
    }
}

TEST_CASE("sentiment CSV leaves null cells empty") {
    const DateWindow window{parse_date("2018-01-01"), parse_date("2018-01-01")};
    std::vector<LabeledPost> posts{{make_post("a", "2018-01-01", "x.com", 0, 0.5), Leaning::left}};
    CHECK(sentiment_to_csv(daily_mean_sentiment(posts, window)) ==
          "date,left,left_leaning,center,right_leaning,right\n2018-01-01,0.5,,,,\n");
}
