#include "biascast/labels.hpp"

#include "biascast/common.hpp"

#include <algorithm>
#include <stdexcept>

namespace biascast {

namespace {

std::string normalize_name(std::string_view s) {
    std::string out = to_lower(trim(s));
    std::replace(out.begin(), out.end(), '-', '_');
    return out;
}

}  // namespace

std::string_view to_string(Leaning l) {
    switch (l) {
        case Leaning::left: return "left";
        case Leaning::left_leaning: return "left_leaning";
        case Leaning::center: return "center";
        case Leaning::right_leaning: return "right_leaning";
        case Leaning::right: return "right";
    }
    return "?";
}

std::string_view to_string(Platform p) {
    return p == Platform::twitter ? "twitter" : "gab";
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::post_count: return "post_count";
        case Metric::likes_sum: return "likes_sum";
        case Metric::sentiment_mean: return "sentiment_mean";
        case Metric::synthetic: return "synthetic";
    }
    return "?";
}

Leaning parse_leaning(std::string_view s) {
    const std::string n = normalize_name(s);
    for (const Leaning l : kAllLeanings) {
        if (n == to_string(l)) {
            return l;
        }
    }
    throw std::invalid_argument("unknown leaning '" + std::string(s) + "'");
}

Platform parse_platform(std::string_view s) {
    const std::string n = normalize_name(s);
    if (n == "twitter") return Platform::twitter;
    if (n == "gab") return Platform::gab;
    throw std::invalid_argument("unknown platform '" + std::string(s) + "'");
}

Metric parse_metric(std::string_view s) {
    const std::string n = normalize_name(s);
    for (const Metric m : {Metric::post_count, Metric::likes_sum, Metric::sentiment_mean, Metric::synthetic}) {
        if (n == to_string(m)) {
            return m;
        }
    }
    throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

}  // namespace biascast
