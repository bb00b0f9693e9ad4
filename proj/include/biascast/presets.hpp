#pragma once

#include "biascast/forecasters.hpp"
#include "biascast/labels.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace biascast::forecasters {

/// Named hyperparameter bundle for one (platform, metric) pair.
struct Preset {
    std::string name;
    Platform platform = Platform::twitter;
    Metric metric = Metric::post_count;
    /// Fixed SARIMA orders per leaning; leanings without one use `fallback_grid`.
    std::map<Leaning, sarima::SarimaSpec> sarima_specs;
    sarima::GridSpec fallback_grid;
    neural::NetworkConfig lstm;       // lstm_1day and lstm_14day
    neural::NetworkConfig gru;        // gru_14day
    neural::NetworkConfig multistep;  // multistep_14_5

    /// Config for one kind; `leaning` picks the SARIMA orders (nullopt uses the grid).
    [[nodiscard]] ForecasterConfig config_for(Kind kind, std::optional<Leaning> leaning) const;
};

/// twitter-posts, twitter-likes, gab-posts, gab-likes.
const Preset& preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace biascast::forecasters
