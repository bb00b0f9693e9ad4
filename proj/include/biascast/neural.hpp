#pragma once

#include "biascast/common.hpp"
#include "biascast/timeseries.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace biascast::neural {

/// Dense row-major array with an explicit shape.
struct NumericArray {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    NumericArray() = default;
    explicit NumericArray(std::vector<std::size_t> dims);
    static NumericArray matrix(std::size_t rows, std::size_t cols) { return NumericArray({rows, cols}); }
    static NumericArray vector(std::size_t n) { return NumericArray({n}); }

    [[nodiscard]] std::size_t size() const { return data.size(); }
    [[nodiscard]] std::size_t rows() const { return shape.at(0); }
    [[nodiscard]] std::size_t cols() const { return shape.size() > 1 ? shape[1] : 1; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
    void fill(double v) { std::fill(data.begin(), data.end(), v); }
};

enum class CellKind { lstm, gru };
enum class OptimizerKind { rmsprop, adam };

std::string_view to_string(CellKind k);
std::string_view to_string(OptimizerKind k);
CellKind parse_cell(std::string_view s);
OptimizerKind parse_optimizer(std::string_view s);

struct NetworkConfig {
    CellKind cell = CellKind::lstm;
    int layers = 1;
    int hidden = 8;
    int input_size = 1;
    int output_size = 1;
    double dropout = 0.0;
    std::uint64_t seed = 0;
    double learning_rate = 0.001;
    int epochs = 100;
    int batch_size = 0;  // 0 trains full-batch
    OptimizerKind optimizer = OptimizerKind::rmsprop;
    double clip_norm = 5.0;  // global gradient norm cap; <= 0 disables
    double init_gain = 1.0;  // weights start uniform in +-init_gain/sqrt(fan_in)

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Gate matrices act on the concatenation [h_{t-1}, x_t]; shape (hidden, hidden + input).
struct LstmLayerWeights {
    NumericArray W_i, W_f, W_g, W_o;
    NumericArray b_i, b_f, b_g, b_o;

    static LstmLayerWeights zeros(std::size_t input, std::size_t hidden);
    [[nodiscard]] std::size_t hidden() const { return b_i.size(); }
    [[nodiscard]] std::size_t input() const { return W_i.cols() - hidden(); }
};

/// W_* has shape (hidden, input), U_* has shape (hidden, hidden).
struct GruLayerWeights {
    NumericArray W_z, W_r, W_h;
    NumericArray U_z, U_r, U_h;
    NumericArray b_z, b_r, b_h;

    static GruLayerWeights zeros(std::size_t input, std::size_t hidden);
    [[nodiscard]] std::size_t hidden() const { return b_z.size(); }
    [[nodiscard]] std::size_t input() const { return W_z.cols(); }
};

struct CellState {
    std::vector<double> h;
    std::vector<double> c;  // LSTM only
};

/// One LSTM step:
///   i = sig(W_i [h,x] + b_i), f = sig(W_f [h,x] + b_f), g = tanh(W_g [h,x] + b_g),
///   o = sig(W_o [h,x] + b_o), c' = f*c + i*g, h' = o*tanh(c').
CellState lstm_step(std::span<const double> x, const CellState& state, const LstmLayerWeights& w);

/// One GRU step:
///   z = sig(W_z x + U_z h + b_z), r = sig(W_r x + U_r h + b_r),
///   h~ = tanh(W_h x + U_h (r*h) + b_h), h' = (1-z)*h + z*h~.
std::vector<double> gru_step(std::span<const double> x, std::span<const double> h, const GruLayerWeights& w);

/// Stacked recurrent layers followed by a linear projection of the top hidden state.
class Network {
public:
    Network() = default;
    /// All-zero parameters shaped by `config`.
    explicit Network(const NetworkConfig& config);

    /// Uniform(-g/sqrt(fan_in), g/sqrt(fan_in)) draws from a seeded generator,
    /// g = config.init_gain.
    static Network initialized(const NetworkConfig& config, std::uint64_t seed);

    [[nodiscard]] const NetworkConfig& config() const { return config_; }
    NetworkConfig& mutable_config() { return config_; }

    std::vector<LstmLayerWeights>& lstm_layers() { return lstm_; }
    std::vector<GruLayerWeights>& gru_layers() { return gru_; }
    [[nodiscard]] const std::vector<LstmLayerWeights>& lstm_layers() const { return lstm_; }
    [[nodiscard]] const std::vector<GruLayerWeights>& gru_layers() const { return gru_; }
    NumericArray& output_weights() { return w_out_; }
    NumericArray& output_bias() { return b_out_; }
    [[nodiscard]] const NumericArray& output_weights() const { return w_out_; }
    [[nodiscard]] const NumericArray& output_bias() const { return b_out_; }

    /// Every parameter array in a stable order (layer by layer, output last).
    std::vector<NumericArray*> parameters();
    [[nodiscard]] std::vector<const NumericArray*> parameters() const;
    [[nodiscard]] std::vector<std::string> parameter_names() const;

private:
    NetworkConfig config_;
    std::vector<LstmLayerWeights> lstm_;
    std::vector<GruLayerWeights> gru_;
    NumericArray w_out_;
    NumericArray b_out_;
};

/// Per-layer recurrent state for step-by-step inference.
struct RecurrentState {
    std::vector<CellState> layers;
};

RecurrentState initial_state(const Network& net);
/// Advances every layer by one input vector (inference mode) and returns the projected output.
std::vector<double> step(const Network& net, RecurrentState& state, std::span<const double> x);

/// A sequence of input vectors (time-major) with targets attached to chosen steps.
struct Sample {
    std::vector<std::vector<double>> inputs;
    std::vector<std::size_t> target_steps;
    std::vector<std::vector<double>> targets;  // parallel to target_steps; each of output_size
};

enum class Mode { inference, training };

/// Activations retained by a training-mode forward pass.
struct ForwardCache {
    struct Step {
        std::vector<double> x;        // layer input after dropout
        std::vector<double> h_prev, c_prev;
        std::vector<double> a, b, g, o;  // LSTM: i,f,g,o; GRU: z,r,h~ (o unused)
        std::vector<double> h, c;
    };
    std::vector<std::vector<Step>> layers;        // [layer][t]
    std::vector<std::vector<double>> input_masks;  // [layer*T + t] dropout mask on that layer's input
    std::vector<std::vector<double>> top;          // [t] top hidden state
    std::vector<std::vector<double>> outputs;      // [t] projected outputs
};

/// Runs the stack over `inputs` and returns one projected output per step. In
/// training mode with dropout > 0, inverted dropout masks are drawn from `rng`
/// for each layer input above the first, i.e. between stacked recurrent layers.
std::vector<std::vector<double>> forward(const Network& net, const std::vector<std::vector<double>>& inputs, Mode mode,
                                         Rng* rng = nullptr, ForwardCache* cache = nullptr);

using Gradients = std::vector<NumericArray>;

/// Zero gradients shaped like `net.parameters()`.
Gradients zero_gradients(const Network& net);

/// Reverse-mode gradients through the unrolled steps given dL/d(output_t) for
/// every step (an empty vector means zero). Accumulates into `grads`.
void backward(const Network& net, const ForwardCache& cache, const std::vector<std::vector<double>>& output_grads,
              Gradients& grads);

struct LossTerms {
    std::vector<double> per_step;  // mean squared error for each target step, averaged over the batch
    double total = 0.0;            // sum of per_step
};

/// Batch loss: for each target step, the squared error averaged over outputs and
/// samples; the total is the sum across target steps. Samples must share target steps.
LossTerms mse_loss(const Network& net, std::span<const Sample> batch);

/// Loss and accumulated gradients for one batch (training mode).
LossTerms loss_and_gradients(const Network& net, std::span<const Sample> batch, Rng* dropout_rng, Gradients& grads);

/// Optimizer accumulators, one entry per parameter array.
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::rmsprop;
    double rho = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<std::vector<double>> first;   // adam m
    std::vector<std::vector<double>> second;  // rmsprop s / adam v
    long step = 0;                            // adam t

    static OptimizerState for_network(const Network& net, OptimizerKind kind);
};

/// s <- rho*s + (1-rho)*g^2; theta <- theta - lr*g/sqrt(s + eps).
void rmsprop_step(std::span<double> params, std::span<const double> grads, std::span<double> s, double lr,
                  double rho = 0.9, double eps = 1e-8);

/// Bias-corrected Adam update at step t (t >= 1).
void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v,
               long t, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Applies the configured optimizer to every parameter array of `net`.
void apply_update(Network& net, const Gradients& grads, OptimizerState& state, double lr);

/// Scales `grads` so their global L2 norm is at most `max_norm`; returns the pre-clip norm.
double clip_global_norm(Gradients& grads, double max_norm);

/// Raised when a training loss turns non-finite.
class TrainingDiverged : public std::runtime_error {
public:
    TrainingDiverged(int epoch, double last_finite_loss);
    [[nodiscard]] int epoch() const { return epoch_; }
    [[nodiscard]] double last_finite_loss() const { return last_finite_loss_; }

private:
    int epoch_;
    double last_finite_loss_;
};

struct TrainResult {
    Network network;
    std::vector<double> epoch_losses;
};

/// Mini-batch training on arbitrary samples. Weight initialization, batch
/// shuffling, and dropout masks are derived from `config.seed`. `initial`
/// replaces the random initialization when given.
TrainResult train_samples(const NetworkConfig& config, const std::vector<Sample>& samples,
                          const std::optional<Network>& initial = std::nullopt);

/// Converts a one-step window into a sample: with input_size == lookback the
/// window is one flat step, with input_size == 1 it is a sequence of lookback steps.
/// The target sits on the last step and must have output_size values.
Sample window_sample(const timeseries::WindowPair& pair, const NetworkConfig& config);

/// Trains on every pair of `windows` (see window_sample).
TrainResult train(const NetworkConfig& config, const timeseries::WindowSet& windows,
                  const std::optional<Network>& initial = std::nullopt);

/// Inference-mode prediction at the last step of `inputs`.
std::vector<double> predict(const Network& net, const std::vector<std::vector<double>>& inputs);

nlohmann::ordered_json to_json(const NetworkConfig& config);
NetworkConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

}  // namespace biascast::neural
