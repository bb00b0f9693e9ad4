#pragma once

#include "biascast/neural.hpp"
#include "biascast/sarima.hpp"
#include "biascast/timeseries.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace biascast::forecasters {

enum class Kind { sarima, lstm_1day, lstm_14day, gru_14day, multistep_14_5 };

inline constexpr Kind kAllKinds[] = {Kind::sarima, Kind::lstm_1day, Kind::lstm_14day, Kind::gru_14day,
                                     Kind::multistep_14_5};

std::string_view to_string(Kind k);
Kind parse_kind(std::string_view s);

/// Lookback L and horizon H; sarima reports (0, 1) since it conditions on the full history.
std::size_t lookback(Kind k);
std::size_t horizon(Kind k);
/// Shortest training series the kind accepts (L + H for the neural kinds).
std::size_t minimum_train_length(Kind k);

struct ForecasterConfig {
    Kind kind = Kind::sarima;

    // sarima: a fixed spec, or a grid searched on the training half
    std::optional<sarima::SarimaSpec> spec;
    std::optional<sarima::GridSpec> grid;
    sarima::GridOptions grid_options;

    // neural kinds; input/output sizes are filled in from the kind
    neural::NetworkConfig network;
    bool sequence_input = false;  // lstm_14day / gru_14day: 14 one-value steps instead of one flat step
};

/// Fills `network.input_size` / `output_size` for the kind and validates the rest.
ForecasterConfig normalized(ForecasterConfig config);

struct TrainingMetadata {
    int epochs_run = 0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
};

struct TrainedForecaster {
    Kind kind = Kind::sarima;
    bool sequence_input = false;
    std::optional<sarima::SarimaFit> sarima;
    std::optional<neural::Network> network;
    timeseries::ScalerState scaler;  // identity for sarima, which fits on the original scale
    TrainingMetadata metadata;
};

/// Fits one model on `split.train`. Neural kinds fit a min-max scaler on the
/// training half and train on scaled windows. Throws std::invalid_argument
/// naming the minimum length when the training half is too short.
TrainedForecaster fit_forecaster(const ForecasterConfig& config, const timeseries::SplitPair& split);

/// One-step forecast on the original scale from the trailing history. The
/// multistep model returns its first decoded step.
double predict_next(const TrainedForecaster& model, std::span<const double> history);

// Teacher-forced multistep model. One stacked recurrent network reads the 14
// lookback values one per step; the outputs at steps 13..17 are the forecasts
// for t+1..t+5. Step k (1-based) consumes the value of day t+k-1: the last
// lookback day for k = 1, then during training the ground-truth targets and at
// inference the model's own previous outputs.

inline constexpr std::size_t kMultistepLookback = 14;
inline constexpr std::size_t kMultistepHorizon = 5;

/// The training sample built from a 14 -> 5 window: inputs are the 14 lookback
/// values followed by the first four ground-truth targets.
neural::Sample teacher_forced_sample(const timeseries::WindowPair& pair);

/// Called once per training batch with the samples fed to the network.
using DecoderInputHook = std::function<void(std::span<const neural::Sample>)>;

/// Trains on scaled 14 -> 5 windows; the loss is the sum of the five per-step MSEs.
neural::TrainResult train_multistep_teacher_forced(const neural::NetworkConfig& config,
                                                   const timeseries::WindowSet& windows,
                                                   const DecoderInputHook& hook = {});

struct DecodeTrace {
    std::vector<double> decoder_inputs;  // value fed at each of the 5 decoding steps
    std::vector<double> outputs;         // scaled outputs t+1..t+5
};

/// Autoregressive decoding of 5 scaled values from 14 scaled values.
DecodeTrace decode_multistep(const neural::Network& net, std::span<const double> lookback_scaled);

/// Five forecasts t+1..t+5 on the original scale from exactly 14 values.
std::vector<double> forecast_multistep(const TrainedForecaster& model, std::span<const double> last14);

/// Bundle JSON: kind, scaler, model payload, metadata.
nlohmann::ordered_json to_json(const TrainedForecaster& model);
TrainedForecaster forecaster_from_json(const nlohmann::json& j);

}  // namespace biascast::forecasters
