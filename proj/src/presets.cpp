#include "biascast/presets.hpp"

#include <array>
#include <stdexcept>

namespace biascast::forecasters {

namespace {

neural::NetworkConfig lstm_config(int epochs) {
    neural::NetworkConfig c;
    c.cell = neural::CellKind::lstm;
    c.layers = 4;
    c.hidden = 32;  // width unstated for the 4-layer models
    c.optimizer = neural::OptimizerKind::rmsprop;
    c.epochs = epochs;
    c.batch_size = 16;
    c.learning_rate = 5e-4;
    c.init_gain = 3.0;  // unit gain loses ~16x of the signal per stacked LSTM layer
    return c;
}

neural::NetworkConfig gru_config() {
    neural::NetworkConfig c;
    c.cell = neural::CellKind::gru;
    c.layers = 4;
    c.hidden = 32;
    c.dropout = 0.2;
    c.optimizer = neural::OptimizerKind::adam;
    c.epochs = 100;
    c.batch_size = 16;
    c.learning_rate = 5e-4;
    return c;
}

neural::NetworkConfig multistep_config(int epochs) {
    neural::NetworkConfig c;
    c.cell = neural::CellKind::lstm;
    c.layers = 8;
    c.hidden = 8;
    c.optimizer = neural::OptimizerKind::rmsprop;
    c.epochs = epochs;
    c.batch_size = 16;
    c.learning_rate = 0.002;
    c.init_gain = 3.0;
    return c;
}

sarima::GridSpec small_grid() {
    sarima::GridSpec g;
    g.p = {0, 1, 2};
    g.d = {0, 1};
    g.q = {0, 1, 2};
    g.P = {0, 1};
    g.D = {0, 1};
    g.Q = {0, 1};
    g.s = {0, 7};
    return g;
}

Preset make(std::string name, Platform platform, Metric metric, std::map<Leaning, sarima::SarimaSpec> specs,
            int lstm_epochs, int multistep_epochs) {
    Preset p;
    p.name = std::move(name);
    p.platform = platform;
    p.metric = metric;
    p.sarima_specs = std::move(specs);
    p.fallback_grid = small_grid();
    p.lstm = lstm_config(lstm_epochs);
    p.gru = gru_config();
    p.multistep = multistep_config(multistep_epochs);
    return p;
}

std::map<Leaning, sarima::SarimaSpec> everywhere(const sarima::SarimaSpec& s) {
    std::map<Leaning, sarima::SarimaSpec> m;
    for (const Leaning l : kAllLeanings) m[l] = s;
    return m;
}

const std::array<Preset, 4>& all() {
    static const std::array<Preset, 4> presets{
        make("twitter-posts", Platform::twitter, Metric::post_count, everywhere({9, 0, 10, 2, 1, 1, 12}), 100, 125),
        make("twitter-likes", Platform::twitter, Metric::likes_sum, everywhere({11, 1, 3, 3, 1, 3, 12}), 100, 100),
        make("gab-posts", Platform::gab, Metric::post_count,
             {{Leaning::left, {7, 1, 10, 3, 1, 1, 14}},
              {Leaning::right, {6, 2, 10, 4, 1, 1, 11}},
              {Leaning::center, {11, 1, 10, 2, 1, 1, 14}}},
             200, 150),
        make("gab-likes", Platform::gab, Metric::likes_sum,
             {{Leaning::left, {11, 1, 6, 3, 0, 4, 12}},
              {Leaning::right, {9, 1, 11, 1, 1, 3, 12}},
              {Leaning::center, {8, 1, 11, 4, 0, 0, 12}}},
             200, 100),
    };
    return presets;
}

}  // namespace

ForecasterConfig Preset::config_for(Kind kind, std::optional<Leaning> leaning) const {
    ForecasterConfig c;
    c.kind = kind;
    switch (kind) {
        case Kind::sarima: {
            const auto it = leaning ? sarima_specs.find(*leaning) : sarima_specs.end();
            if (it != sarima_specs.end()) {
                c.spec = it->second;
            } else {
                c.grid = fallback_grid;
            }
            break;
        }
        case Kind::lstm_1day:
        case Kind::lstm_14day: c.network = lstm; break;
        case Kind::gru_14day: c.network = gru; break;
        case Kind::multistep_14_5: c.network = multistep; break;
    }
    return normalized(c);
}

const Preset& preset(std::string_view name) {
    for (const auto& p : all()) {
        if (p.name == name) return p;
    }
    std::string known;
    for (const auto& p : all()) known += (known.empty() ? "" : ", ") + p.name;
    throw std::invalid_argument("unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& p : all()) out.push_back(p.name);
    return out;
}

}  // namespace biascast::forecasters
