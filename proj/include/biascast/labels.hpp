#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace biascast {

/// The five political leaning labels, in report column order.
enum class Leaning { left, left_leaning, center, right_leaning, right };

inline constexpr std::array<Leaning, 5> kAllLeanings = {
    Leaning::left, Leaning::left_leaning, Leaning::center, Leaning::right_leaning, Leaning::right};

enum class Platform { twitter, gab };

enum class Metric { post_count, likes_sum, sentiment_mean, synthetic };

std::string_view to_string(Leaning l);
std::string_view to_string(Platform p);
std::string_view to_string(Metric m);

/// Parsers accept the canonical lowercase names (hyphens are read as underscores).
/// They throw std::invalid_argument on unknown names.
Leaning parse_leaning(std::string_view s);
Platform parse_platform(std::string_view s);
Metric parse_metric(std::string_view s);

constexpr std::size_t index_of(Leaning l) { return static_cast<std::size_t>(l); }

}  // namespace biascast
