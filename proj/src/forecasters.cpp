#include "biascast/forecasters.hpp"

#include <stdexcept>

namespace biascast::forecasters {

std::string_view to_string(Kind k) {
    switch (k) {
        case Kind::sarima: return "sarima";
        case Kind::lstm_1day: return "lstm_1day";
        case Kind::lstm_14day: return "lstm_14day";
        case Kind::gru_14day: return "gru_14day";
        case Kind::multistep_14_5: return "multistep_14_5";
    }
    return "unknown";
}

Kind parse_kind(std::string_view s) {
    for (const Kind k : kAllKinds) {
        if (to_string(k) == s) return k;
    }
    throw std::invalid_argument("unknown forecaster kind '" + std::string(s) + "'");
}

std::size_t lookback(Kind k) {
    switch (k) {
        case Kind::sarima: return 0;
        case Kind::lstm_1day: return 1;
        default: return 14;
    }
}

std::size_t horizon(Kind k) { return k == Kind::multistep_14_5 ? kMultistepHorizon : 1; }

std::size_t minimum_train_length(Kind k) { return k == Kind::sarima ? 1 : lookback(k) + horizon(k); }

ForecasterConfig normalized(ForecasterConfig config) {
    auto& net = config.network;
    switch (config.kind) {
        case Kind::sarima:
            if (config.spec.has_value() == config.grid.has_value()) {
                throw std::invalid_argument("sarima needs exactly one of a spec or a grid");
            }
            if (config.spec) config.spec->validate();
            return config;
        case Kind::lstm_1day:
            net.cell = neural::CellKind::lstm;
            net.input_size = 1;
            break;
        case Kind::lstm_14day:
        case Kind::gru_14day:
            net.cell = config.kind == Kind::gru_14day ? neural::CellKind::gru : neural::CellKind::lstm;
            net.input_size = config.sequence_input ? 1 : 14;
            break;
        case Kind::multistep_14_5:
            net.cell = neural::CellKind::lstm;
            net.input_size = 1;
            break;
    }
    net.output_size = 1;
    net.validate();
    return config;
}

namespace {

void require_length(Kind kind, std::size_t n, std::string_view what) {
    const std::size_t need = minimum_train_length(kind);
    if (n < need) {
        throw std::invalid_argument(std::string(to_string(kind)) + " needs at least " + std::to_string(need) + " " +
                                    std::string(what) + " points (lookback " + std::to_string(lookback(kind)) +
                                    " + horizon " + std::to_string(horizon(kind)) + "), got " + std::to_string(n));
    }
}

std::vector<std::vector<double>> network_inputs(const TrainedForecaster& model, std::span<const double> window) {
    std::vector<std::vector<double>> in;
    if (model.network->config().input_size == 1) {
        for (const double v : window) in.push_back({v});
    } else {
        in.emplace_back(window.begin(), window.end());
    }
    return in;
}

}  // namespace

neural::Sample teacher_forced_sample(const timeseries::WindowPair& pair) {
    if (pair.input.size() != kMultistepLookback || pair.target.size() != kMultistepHorizon) {
        throw std::invalid_argument("multistep windows must be 14 -> 5, got " + std::to_string(pair.input.size()) +
                                    " -> " + std::to_string(pair.target.size()));
    }
    neural::Sample s;
    for (const double v : pair.input) s.inputs.push_back({v});
    for (std::size_t k = 0; k + 1 < kMultistepHorizon; ++k) s.inputs.push_back({pair.target[k]});
    for (std::size_t k = 0; k < kMultistepHorizon; ++k) {
        s.target_steps.push_back(kMultistepLookback - 1 + k);
        s.targets.push_back({pair.target[k]});
    }
    return s;
}

neural::TrainResult train_multistep_teacher_forced(const neural::NetworkConfig& config,
                                                   const timeseries::WindowSet& windows,
                                                   const DecoderInputHook& hook) {
    if (windows.lookback != kMultistepLookback || windows.horizon != kMultistepHorizon) {
        throw std::invalid_argument("multistep training needs 14 -> 5 windows");
    }
    if (windows.pairs.empty()) {
        throw std::invalid_argument("multistep training needs at least one window");
    }
    if (config.input_size != 1 || config.output_size != 1) {
        throw std::invalid_argument("multistep network must map one value to one value per step");
    }
    std::vector<neural::Sample> samples;
    samples.reserve(windows.pairs.size());
    for (const auto& p : windows.pairs) samples.push_back(teacher_forced_sample(p));
    if (hook) hook(samples);
    return neural::train_samples(config, samples);
}

DecodeTrace decode_multistep(const neural::Network& net, std::span<const double> lookback_scaled) {
    if (lookback_scaled.size() != kMultistepLookback) {
        throw std::invalid_argument("multistep decoding needs exactly 14 values, got " +
                                    std::to_string(lookback_scaled.size()));
    }
    auto state = neural::initial_state(net);
    for (std::size_t t = 0; t + 1 < kMultistepLookback; ++t) {
        neural::step(net, state, std::vector<double>{lookback_scaled[t]});
    }
    DecodeTrace trace;
    double input = lookback_scaled.back();
    for (std::size_t k = 0; k < kMultistepHorizon; ++k) {
        trace.decoder_inputs.push_back(input);
        input = neural::step(net, state, std::vector<double>{input}).at(0);
        trace.outputs.push_back(input);
    }
    return trace;
}

TrainedForecaster fit_forecaster(const ForecasterConfig& raw, const timeseries::SplitPair& split) {
    const ForecasterConfig config = normalized(raw);
    const auto& train = split.train.values;
    require_length(config.kind, train.size(), "training");

    TrainedForecaster out;
    out.kind = config.kind;
    out.sequence_input = config.sequence_input;

    if (config.kind == Kind::sarima) {
        out.scaler = timeseries::ScalerState::identity();
        if (config.spec) {
            out.sarima = sarima::fit(train, *config.spec, config.grid_options.fit);
        } else {
            out.sarima = sarima::grid_search(train, *config.grid, config.grid_options).fit;
        }
        out.metadata.seed = config.grid_options.fit.seed;
        out.metadata.final_loss = out.sarima->sse;
        return out;
    }

    out.scaler = timeseries::fit_scaler(train);
    const auto scaled = out.scaler.apply(train);
    const auto windows = timeseries::make_windows(scaled, lookback(config.kind), horizon(config.kind));
    neural::TrainResult result = config.kind == Kind::multistep_14_5
                                     ? train_multistep_teacher_forced(config.network, windows)
                                     : neural::train(config.network, windows);
    out.network = std::move(result.network);
    out.metadata.epochs_run = static_cast<int>(result.epoch_losses.size());
    out.metadata.final_loss = result.epoch_losses.empty() ? 0.0 : result.epoch_losses.back();
    out.metadata.seed = config.network.seed;
    return out;
}

double predict_next(const TrainedForecaster& model, std::span<const double> history) {
    if (model.kind == Kind::sarima) {
        if (!model.sarima) throw std::invalid_argument("sarima forecaster carries no fit");
        return sarima::forecast(*model.sarima, history, 1).at(0);
    }
    if (!model.network) throw std::invalid_argument("neural forecaster carries no network");
    const std::size_t L = lookback(model.kind);
    if (history.size() < L) {
        throw std::invalid_argument(std::string(to_string(model.kind)) + " needs " + std::to_string(L) +
                                    " history values, got " + std::to_string(history.size()));
    }
    const auto tail = history.subspan(history.size() - L);
    if (model.kind == Kind::multistep_14_5) {
        return forecast_multistep(model, tail).front();
    }
    const auto scaled = model.scaler.apply(tail);
    return model.scaler.invert(neural::predict(*model.network, network_inputs(model, scaled)).at(0));
}

std::vector<double> forecast_multistep(const TrainedForecaster& model, std::span<const double> last14) {
    if (model.kind != Kind::multistep_14_5 || !model.network) {
        throw std::invalid_argument("forecast_multistep needs a multistep model");
    }
    if (last14.size() != kMultistepLookback) {
        throw std::invalid_argument("forecast_multistep needs exactly 14 values, got " +
                                    std::to_string(last14.size()));
    }
    const auto trace = decode_multistep(*model.network, model.scaler.apply(last14));
    return model.scaler.invert(trace.outputs);
}

nlohmann::ordered_json to_json(const TrainedForecaster& model) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(model.kind);
    j["sequence_input"] = model.sequence_input;
    j["scaler"] = {{"min", model.scaler.min}, {"max", model.scaler.max}};
    if (model.sarima) {
        j["model"] = sarima::to_json(*model.sarima);
    } else if (model.network) {
        j["model"] = neural::to_json(*model.network);
    }
    j["metadata"] = {{"epochs_run", model.metadata.epochs_run},
                     {"final_loss", model.metadata.final_loss},
                     {"seed", model.metadata.seed}};
    return j;
}

TrainedForecaster forecaster_from_json(const nlohmann::json& j) {
    TrainedForecaster m;
    m.kind = parse_kind(j.at("kind").get<std::string>());
    m.sequence_input = j.value("sequence_input", false);
    m.scaler.min = j.at("scaler").at("min").get<double>();
    m.scaler.max = j.at("scaler").at("max").get<double>();
    if (m.kind == Kind::sarima) {
        m.sarima = sarima::fit_from_json(j.at("model"));
    } else {
        m.network = neural::network_from_json(j.at("model"));
    }
    const auto& meta = j.at("metadata");
    m.metadata.epochs_run = meta.at("epochs_run").get<int>();
    m.metadata.final_loss = meta.at("final_loss").get<double>();
    m.metadata.seed = meta.at("seed").get<std::uint64_t>();
    return m;
}

}  // namespace biascast::forecasters
