#include "biascast/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace biascast::neural {

NumericArray::NumericArray(std::vector<std::size_t> dims) : shape(std::move(dims)) {
    std::size_t n = 1;
    for (const auto d : shape) n *= d;
    data.assign(n, 0.0);
}

std::string_view to_string(CellKind k) { return k == CellKind::lstm ? "lstm" : "gru"; }
std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::rmsprop ? "rmsprop" : "adam"; }

CellKind parse_cell(std::string_view s) {
    if (s == "lstm") return CellKind::lstm;
    if (s == "gru") return CellKind::gru;
    throw std::invalid_argument("unknown cell kind '" + std::string(s) + "'");
}

OptimizerKind parse_optimizer(std::string_view s) {
    if (s == "rmsprop") return OptimizerKind::rmsprop;
    if (s == "adam") return OptimizerKind::adam;
    throw std::invalid_argument("unknown optimizer '" + std::string(s) + "'");
}

void NetworkConfig::validate() const {
    if (layers < 1) throw std::invalid_argument("network needs at least one layer");
    if (hidden < 1) throw std::invalid_argument("hidden width must be >= 1");
    if (input_size < 1) throw std::invalid_argument("input size must be >= 1");
    if (output_size < 1) throw std::invalid_argument("output size must be >= 1");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be > 0");
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 0) throw std::invalid_argument("batch size must be >= 0");
    if (!(init_gain > 0.0)) throw std::invalid_argument("init gain must be > 0");
}

// ---------------------------------------------------------------------------
// Small dense kernels

namespace {

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// out = W[:, col0:col0+x.size()] * x, accumulated
void matvec_acc(const NumericArray& W, std::span<const double> x, std::size_t col0, std::vector<double>& out) {
    const std::size_t cols = W.cols();
    for (std::size_t r = 0; r < W.rows(); ++r) {
        const double* row = W.data.data() + r * cols + col0;
        double acc = 0.0;
        for (std::size_t c = 0; c < x.size(); ++c) acc += row[c] * x[c];
        out[r] += acc;
    }
}

// out[col0 + c] += sum_r W[r, col0 + c] * g[r]
void matvec_t_acc(const NumericArray& W, std::span<const double> g, std::size_t col0, std::size_t ncols,
                  std::span<double> out) {
    const std::size_t cols = W.cols();
    for (std::size_t r = 0; r < W.rows(); ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        const double* row = W.data.data() + r * cols + col0;
        for (std::size_t c = 0; c < ncols; ++c) out[c] += row[c] * gr;
    }
}

// dW[:, col0:col0+x.size()] += g x^T
void outer_acc(NumericArray& dW, std::span<const double> g, std::span<const double> x, std::size_t col0) {
    const std::size_t cols = dW.cols();
    for (std::size_t r = 0; r < dW.rows(); ++r) {
        const double gr = g[r];
        if (gr == 0.0) continue;
        double* row = dW.data.data() + r * cols + col0;
        for (std::size_t c = 0; c < x.size(); ++c) row[c] += gr * x[c];
    }
}

void add_to(NumericArray& dst, std::span<const double> src) {
    for (std::size_t i = 0; i < src.size(); ++i) dst.data[i] += src[i];
}

void check_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        std::ostringstream msg;
        msg << what << ": expected size " << want << ", got " << got;
        throw std::invalid_argument(msg.str());
    }
}

struct LstmGates {
    std::vector<double> i, f, g, o, c, h;
};

LstmGates lstm_forward(std::span<const double> x, std::span<const double> h, std::span<const double> c,
                       const LstmLayerWeights& w) {
    const std::size_t H = w.hidden();
    check_size(h.size(), H, "lstm hidden state");
    check_size(c.size(), H, "lstm cell state");
    check_size(x.size(), w.input(), "lstm input");
    LstmGates out;
    out.i.assign(w.b_i.data.begin(), w.b_i.data.end());
    out.f.assign(w.b_f.data.begin(), w.b_f.data.end());
    out.g.assign(w.b_g.data.begin(), w.b_g.data.end());
    out.o.assign(w.b_o.data.begin(), w.b_o.data.end());
    for (auto [W, acc] : {std::pair{&w.W_i, &out.i}, {&w.W_f, &out.f}, {&w.W_g, &out.g}, {&w.W_o, &out.o}}) {
        matvec_acc(*W, h, 0, *acc);
        matvec_acc(*W, x, H, *acc);
    }
    out.c.resize(H);
    out.h.resize(H);
    for (std::size_t k = 0; k < H; ++k) {
        out.i[k] = sigmoid(out.i[k]);
        out.f[k] = sigmoid(out.f[k]);
        out.g[k] = std::tanh(out.g[k]);
        out.o[k] = sigmoid(out.o[k]);
        out.c[k] = out.f[k] * c[k] + out.i[k] * out.g[k];
        out.h[k] = out.o[k] * std::tanh(out.c[k]);
    }
    return out;
}

struct GruGates {
    std::vector<double> z, r, cand, h;
};

GruGates gru_forward(std::span<const double> x, std::span<const double> h, const GruLayerWeights& w) {
    const std::size_t H = w.hidden();
    check_size(h.size(), H, "gru hidden state");
    check_size(x.size(), w.input(), "gru input");
    GruGates out;
    out.z.assign(w.b_z.data.begin(), w.b_z.data.end());
    out.r.assign(w.b_r.data.begin(), w.b_r.data.end());
    out.cand.assign(w.b_h.data.begin(), w.b_h.data.end());
    matvec_acc(w.W_z, x, 0, out.z);
    matvec_acc(w.U_z, h, 0, out.z);
    matvec_acc(w.W_r, x, 0, out.r);
    matvec_acc(w.U_r, h, 0, out.r);
    std::vector<double> rh(H);
    for (std::size_t k = 0; k < H; ++k) {
        out.z[k] = sigmoid(out.z[k]);
        out.r[k] = sigmoid(out.r[k]);
        rh[k] = out.r[k] * h[k];
    }
    matvec_acc(w.W_h, x, 0, out.cand);
    matvec_acc(w.U_h, rh, 0, out.cand);
    out.h.resize(H);
    for (std::size_t k = 0; k < H; ++k) {
        out.cand[k] = std::tanh(out.cand[k]);
        out.h[k] = (1.0 - out.z[k]) * h[k] + out.z[k] * out.cand[k];
    }
    return out;
}

}  // namespace

LstmLayerWeights LstmLayerWeights::zeros(std::size_t input, std::size_t hidden) {
    LstmLayerWeights w;
    for (auto* m : {&w.W_i, &w.W_f, &w.W_g, &w.W_o}) *m = NumericArray::matrix(hidden, hidden + input);
    for (auto* b : {&w.b_i, &w.b_f, &w.b_g, &w.b_o}) *b = NumericArray::vector(hidden);
    return w;
}

GruLayerWeights GruLayerWeights::zeros(std::size_t input, std::size_t hidden) {
    GruLayerWeights w;
    for (auto* m : {&w.W_z, &w.W_r, &w.W_h}) *m = NumericArray::matrix(hidden, input);
    for (auto* m : {&w.U_z, &w.U_r, &w.U_h}) *m = NumericArray::matrix(hidden, hidden);
    for (auto* b : {&w.b_z, &w.b_r, &w.b_h}) *b = NumericArray::vector(hidden);
    return w;
}

CellState lstm_step(std::span<const double> x, const CellState& state, const LstmLayerWeights& w) {
    auto g = lstm_forward(x, state.h, state.c, w);
    return {std::move(g.h), std::move(g.c)};
}

std::vector<double> gru_step(std::span<const double> x, std::span<const double> h, const GruLayerWeights& w) {
    return gru_forward(x, h, w).h;
}

// ---------------------------------------------------------------------------
// Network

Network::Network(const NetworkConfig& config) : config_(config) {
    config_.validate();
    const auto H = static_cast<std::size_t>(config_.hidden);
    for (int l = 0; l < config_.layers; ++l) {
        const std::size_t in = l == 0 ? static_cast<std::size_t>(config_.input_size) : H;
        if (config_.cell == CellKind::lstm) {
            lstm_.push_back(LstmLayerWeights::zeros(in, H));
        } else {
            gru_.push_back(GruLayerWeights::zeros(in, H));
        }
    }
    w_out_ = NumericArray::matrix(static_cast<std::size_t>(config_.output_size), H);
    b_out_ = NumericArray::vector(static_cast<std::size_t>(config_.output_size));
}

Network Network::initialized(const NetworkConfig& config, std::uint64_t seed) {
    Network net(config);
    Rng rng(seed);
    auto fill = [&](NumericArray& a, std::size_t fan_in) {
        const double bound = config.init_gain / std::sqrt(static_cast<double>(fan_in));
        for (double& v : a.data) v = rng.uniform(-bound, bound);
    };
    for (auto& w : net.lstm_) {
        const std::size_t fan_in = w.W_i.cols();
        for (auto* a : {&w.W_i, &w.W_f, &w.W_g, &w.W_o, &w.b_i, &w.b_f, &w.b_g, &w.b_o}) fill(*a, fan_in);
    }
    for (auto& w : net.gru_) {
        const std::size_t fan_in = w.input() + w.hidden();
        for (auto* a : {&w.W_z, &w.W_r, &w.W_h, &w.U_z, &w.U_r, &w.U_h, &w.b_z, &w.b_r, &w.b_h}) fill(*a, fan_in);
    }
    fill(net.w_out_, static_cast<std::size_t>(config.hidden));
    fill(net.b_out_, static_cast<std::size_t>(config.hidden));
    return net;
}

std::vector<NumericArray*> Network::parameters() {
    std::vector<NumericArray*> out;
    for (auto& w : lstm_) {
        for (auto* a : {&w.W_i, &w.W_f, &w.W_g, &w.W_o, &w.b_i, &w.b_f, &w.b_g, &w.b_o}) out.push_back(a);
    }
    for (auto& w : gru_) {
        for (auto* a : {&w.W_z, &w.W_r, &w.W_h, &w.U_z, &w.U_r, &w.U_h, &w.b_z, &w.b_r, &w.b_h}) out.push_back(a);
    }
    out.push_back(&w_out_);
    out.push_back(&b_out_);
    return out;
}

std::vector<const NumericArray*> Network::parameters() const {
    auto mut = const_cast<Network*>(this)->parameters();
    return {mut.begin(), mut.end()};
}

std::vector<std::string> Network::parameter_names() const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < lstm_.size(); ++l) {
        for (const char* n : {"W_i", "W_f", "W_g", "W_o", "b_i", "b_f", "b_g", "b_o"}) {
            out.push_back("layer" + std::to_string(l) + "." + n);
        }
    }
    for (std::size_t l = 0; l < gru_.size(); ++l) {
        for (const char* n : {"W_z", "W_r", "W_h", "U_z", "U_r", "U_h", "b_z", "b_r", "b_h"}) {
            out.push_back("layer" + std::to_string(l) + "." + n);
        }
    }
    out.emplace_back("output.W");
    out.emplace_back("output.b");
    return out;
}

RecurrentState initial_state(const Network& net) {
    RecurrentState s;
    const auto H = static_cast<std::size_t>(net.config().hidden);
    for (int l = 0; l < net.config().layers; ++l) {
        s.layers.push_back({std::vector<double>(H, 0.0),
                            net.config().cell == CellKind::lstm ? std::vector<double>(H, 0.0) : std::vector<double>{}});
    }
    return s;
}

namespace {

std::vector<double> project(const Network& net, std::span<const double> top) {
    std::vector<double> y(net.output_bias().data.begin(), net.output_bias().data.end());
    matvec_acc(net.output_weights(), top, 0, y);
    return y;
}

}  // namespace

std::vector<double> step(const Network& net, RecurrentState& state, std::span<const double> x) {
    check_size(x.size(), static_cast<std::size_t>(net.config().input_size), "network input");
    std::vector<double> in(x.begin(), x.end());
    for (std::size_t l = 0; l < state.layers.size(); ++l) {
        auto& st = state.layers[l];
        if (net.config().cell == CellKind::lstm) {
            st = lstm_step(in, st, net.lstm_layers()[l]);
        } else {
            st.h = gru_step(in, st.h, net.gru_layers()[l]);
        }
        in = st.h;
    }
    return project(net, in);
}

namespace {

std::vector<double> dropout_mask(std::size_t n, double rate, Rng& rng) {
    std::vector<double> m(n);
    const double keep = 1.0 - rate;
    for (double& v : m) v = rng.uniform() < keep ? 1.0 / keep : 0.0;
    return m;
}

}  // namespace

std::vector<std::vector<double>> forward(const Network& net, const std::vector<std::vector<double>>& inputs, Mode mode,
                                         Rng* rng, ForwardCache* cache) {
    const auto& cfg = net.config();
    const std::size_t T = inputs.size();
    const auto H = static_cast<std::size_t>(cfg.hidden);
    const auto L = static_cast<std::size_t>(cfg.layers);
    if (T == 0) {
        throw std::invalid_argument("forward: empty input sequence");
    }
    for (const auto& x : inputs) check_size(x.size(), static_cast<std::size_t>(cfg.input_size), "network input");
    const bool drop = mode == Mode::training && cfg.dropout > 0.0;
    if (drop && rng == nullptr) {
        throw std::invalid_argument("forward: training with dropout needs a generator");
    }
    if (cache) {
        *cache = ForwardCache{};
        cache->layers.resize(L);
        cache->input_masks.resize(L * T);
    }

    std::vector<std::vector<double>> seq = inputs;
    for (std::size_t l = 0; l < L; ++l) {
        std::vector<double> h(H, 0.0), c(H, 0.0);
        if (cache) cache->layers[l].reserve(T);
        for (std::size_t t = 0; t < T; ++t) {
            std::vector<double> x = std::move(seq[t]);
            if (drop && l > 0) {
                auto mask = dropout_mask(x.size(), cfg.dropout, *rng);
                for (std::size_t k = 0; k < x.size(); ++k) x[k] *= mask[k];
                if (cache) cache->input_masks[l * T + t] = std::move(mask);
            }
            ForwardCache::Step st;
            if (cfg.cell == CellKind::lstm) {
                auto g = lstm_forward(x, h, c, net.lstm_layers()[l]);
                if (cache) {
                    st = {x, h, c, g.i, g.f, g.g, g.o, g.h, g.c};
                }
                h = std::move(g.h);
                c = std::move(g.c);
            } else {
                auto g = gru_forward(x, h, net.gru_layers()[l]);
                if (cache) {
                    st = {x, h, {}, g.z, g.r, g.cand, {}, g.h, {}};
                }
                h = std::move(g.h);
            }
            if (cache) cache->layers[l].push_back(std::move(st));
            seq[t] = h;
        }
    }

    std::vector<std::vector<double>> outputs(T);
    for (std::size_t t = 0; t < T; ++t) {
        outputs[t] = project(net, seq[t]);
    }
    if (cache) cache->top = std::move(seq);
    if (cache) cache->outputs = outputs;
    return outputs;
}

Gradients zero_gradients(const Network& net) {
    Gradients g;
    for (const auto* p : net.parameters()) g.emplace_back(p->shape);
    return g;
}

void backward(const Network& net, const ForwardCache& cache, const std::vector<std::vector<double>>& output_grads,
              Gradients& grads) {
    const auto& cfg = net.config();
    const auto H = static_cast<std::size_t>(cfg.hidden);
    const auto L = static_cast<std::size_t>(cfg.layers);
    const std::size_t T = cache.outputs.size();
    if (output_grads.size() != T) {
        throw std::invalid_argument("backward: one output gradient per step is required");
    }
    const std::size_t per_layer = cfg.cell == CellKind::lstm ? 8 : 9;
    if (grads.size() != per_layer * L + 2) {
        throw std::invalid_argument("backward: gradient container does not match the network");
    }
    NumericArray& dW_out = grads[per_layer * L];
    NumericArray& db_out = grads[per_layer * L + 1];

    // gradient flowing into the top layer's hidden output at each step
    std::vector<std::vector<double>> dh_above(T, std::vector<double>(H, 0.0));
    for (std::size_t t = 0; t < T; ++t) {
        const auto& dy = output_grads[t];
        if (dy.empty()) continue;
        check_size(dy.size(), static_cast<std::size_t>(cfg.output_size), "output gradient");
        outer_acc(dW_out, dy, cache.top[t], 0);
        add_to(db_out, dy);
        matvec_t_acc(net.output_weights(), dy, 0, H, dh_above[t]);
    }

    for (std::size_t l = L; l-- > 0;) {
        const auto& steps = cache.layers[l];
        const std::size_t in_size = steps.front().x.size();
        std::vector<std::vector<double>> dx(T, std::vector<double>(in_size, 0.0));
        std::vector<double> dh_next(H, 0.0), dc_next(H, 0.0);
        NumericArray* g = &grads[per_layer * l];

        if (cfg.cell == CellKind::lstm) {
            const auto& w = net.lstm_layers()[l];
            std::vector<double> dai(H), daf(H), dag(H), dao(H);
            for (std::size_t t = T; t-- > 0;) {
                const auto& s = steps[t];
                for (std::size_t k = 0; k < H; ++k) {
                    const double dh = dh_above[t][k] + dh_next[k];
                    const double tc = std::tanh(s.c[k]);
                    const double dc = dc_next[k] + dh * s.o[k] * (1.0 - tc * tc);
                    const double i = s.a[k], f = s.b[k], gg = s.g[k], o = s.o[k];
                    dao[k] = dh * tc * o * (1.0 - o);
                    dai[k] = dc * gg * i * (1.0 - i);
                    dag[k] = dc * i * (1.0 - gg * gg);
                    daf[k] = dc * s.c_prev[k] * f * (1.0 - f);
                    dc_next[k] = dc * f;
                }
                const std::array<const std::vector<double>*, 4> da{&dai, &daf, &dag, &dao};
                const std::array<const NumericArray*, 4> Ws{&w.W_i, &w.W_f, &w.W_g, &w.W_o};
                std::fill(dh_next.begin(), dh_next.end(), 0.0);
                for (std::size_t q = 0; q < 4; ++q) {
                    outer_acc(g[q], *da[q], s.h_prev, 0);
                    outer_acc(g[q], *da[q], s.x, H);
                    add_to(g[4 + q], *da[q]);
                    matvec_t_acc(*Ws[q], *da[q], 0, H, dh_next);
                    matvec_t_acc(*Ws[q], *da[q], H, in_size, dx[t]);
                }
            }
        } else {
            const auto& w = net.gru_layers()[l];
            std::vector<double> daz(H), dar(H), dah(H), drh(H), rh(H);
            for (std::size_t t = T; t-- > 0;) {
                const auto& s = steps[t];
                std::vector<double> dh_prev(H, 0.0);
                for (std::size_t k = 0; k < H; ++k) {
                    const double dh = dh_above[t][k] + dh_next[k];
                    const double z = s.a[k], cand = s.g[k];
                    dah[k] = dh * z * (1.0 - cand * cand);
                    daz[k] = dh * (cand - s.h_prev[k]) * z * (1.0 - z);
                    dh_prev[k] = dh * (1.0 - z);
                    rh[k] = s.b[k] * s.h_prev[k];
                }
                std::fill(drh.begin(), drh.end(), 0.0);
                matvec_t_acc(w.U_h, dah, 0, H, drh);
                for (std::size_t k = 0; k < H; ++k) {
                    const double r = s.b[k];
                    dar[k] = drh[k] * s.h_prev[k] * r * (1.0 - r);
                    dh_prev[k] += drh[k] * r;
                }
                // W_z, W_r, W_h, U_z, U_r, U_h, b_z, b_r, b_h
                outer_acc(g[0], daz, s.x, 0);
                outer_acc(g[1], dar, s.x, 0);
                outer_acc(g[2], dah, s.x, 0);
                outer_acc(g[3], daz, s.h_prev, 0);
                outer_acc(g[4], dar, s.h_prev, 0);
                outer_acc(g[5], dah, rh, 0);
                add_to(g[6], daz);
                add_to(g[7], dar);
                add_to(g[8], dah);
                matvec_t_acc(w.U_z, daz, 0, H, dh_prev);
                matvec_t_acc(w.U_r, dar, 0, H, dh_prev);
                matvec_t_acc(w.W_z, daz, 0, in_size, dx[t]);
                matvec_t_acc(w.W_r, dar, 0, in_size, dx[t]);
                matvec_t_acc(w.W_h, dah, 0, in_size, dx[t]);
                dh_next = std::move(dh_prev);
            }
        }

        if (l > 0) {
            for (std::size_t t = 0; t < T; ++t) {
                const auto& mask = cache.input_masks[l * T + t];
                if (!mask.empty()) {
                    for (std::size_t k = 0; k < in_size; ++k) dx[t][k] *= mask[k];
                }
            }
            dh_above = std::move(dx);
        }
    }
}

// ---------------------------------------------------------------------------
// Loss

namespace {

void check_batch(const Network& net, std::span<const Sample> batch) {
    if (batch.empty()) {
        throw std::invalid_argument("empty batch");
    }
    const auto& steps = batch.front().target_steps;
    for (const auto& s : batch) {
        if (s.target_steps != steps || s.targets.size() != steps.size()) {
            throw std::invalid_argument("samples in a batch must share target steps");
        }
        for (std::size_t k = 0; k < steps.size(); ++k) {
            if (steps[k] >= s.inputs.size()) {
                throw std::invalid_argument("target step beyond the input sequence");
            }
            check_size(s.targets[k].size(), static_cast<std::size_t>(net.config().output_size), "target");
        }
    }
}

}  // namespace

LossTerms mse_loss(const Network& net, std::span<const Sample> batch) {
    check_batch(net, batch);
    const std::size_t K = batch.front().target_steps.size();
    LossTerms out;
    out.per_step.assign(K, 0.0);
    const auto outputs_n = static_cast<double>(net.config().output_size);
    const auto B = static_cast<double>(batch.size());
    for (const auto& s : batch) {
        const auto y = forward(net, s.inputs, Mode::inference);
        for (std::size_t k = 0; k < K; ++k) {
            const auto& pred = y[s.target_steps[k]];
            double se = 0.0;
            for (std::size_t j = 0; j < pred.size(); ++j) se += (pred[j] - s.targets[k][j]) * (pred[j] - s.targets[k][j]);
            out.per_step[k] += se / (outputs_n * B);
        }
    }
    out.total = std::accumulate(out.per_step.begin(), out.per_step.end(), 0.0);
    return out;
}

LossTerms loss_and_gradients(const Network& net, std::span<const Sample> batch, Rng* dropout_rng, Gradients& grads) {
    check_batch(net, batch);
    const std::size_t K = batch.front().target_steps.size();
    LossTerms out;
    out.per_step.assign(K, 0.0);
    const auto outputs_n = static_cast<double>(net.config().output_size);
    const auto B = static_cast<double>(batch.size());
    ForwardCache cache;
    for (const auto& s : batch) {
        const auto y = forward(net, s.inputs, Mode::training, dropout_rng, &cache);
        std::vector<std::vector<double>> dy(y.size());
        for (std::size_t k = 0; k < K; ++k) {
            const std::size_t t = s.target_steps[k];
            const auto& pred = y[t];
            double se = 0.0;
            if (dy[t].empty()) dy[t].assign(pred.size(), 0.0);
            for (std::size_t j = 0; j < pred.size(); ++j) {
                const double err = pred[j] - s.targets[k][j];
                se += err * err;
                dy[t][j] += 2.0 * err / (outputs_n * B);
            }
            out.per_step[k] += se / (outputs_n * B);
        }
        backward(net, cache, dy, grads);
    }
    out.total = std::accumulate(out.per_step.begin(), out.per_step.end(), 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Optimizers

OptimizerState OptimizerState::for_network(const Network& net, OptimizerKind kind) {
    OptimizerState s;
    s.kind = kind;
    for (const auto* p : net.parameters()) {
        s.second.emplace_back(p->size(), 0.0);
        if (kind == OptimizerKind::adam) s.first.emplace_back(p->size(), 0.0);
    }
    return s;
}

void rmsprop_step(std::span<double> params, std::span<const double> grads, std::span<double> s, double lr, double rho,
                  double eps) {
    if (grads.size() != params.size() || s.size() != params.size()) {
        throw std::invalid_argument("rmsprop_step: size mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        s[i] = rho * s[i] + (1.0 - rho) * grads[i] * grads[i];
        params[i] -= lr * grads[i] / std::sqrt(s[i] + eps);
    }
}

void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> m, std::span<double> v, long t,
               double lr, double beta1, double beta2, double eps) {
    if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
        throw std::invalid_argument("adam_step: size mismatch");
    }
    if (t < 1) {
        throw std::invalid_argument("adam_step: step counter must be >= 1");
    }
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double m_hat = m[i] / c1;
        const double v_hat = v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

void apply_update(Network& net, const Gradients& grads, OptimizerState& state, double lr) {
    auto params = net.parameters();
    if (grads.size() != params.size() || state.second.size() != params.size()) {
        throw std::invalid_argument("apply_update: optimizer state does not match the network");
    }
    if (state.kind == OptimizerKind::adam) {
        ++state.step;
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (state.kind == OptimizerKind::rmsprop) {
            rmsprop_step(params[i]->data, grads[i].data, state.second[i], lr, state.rho, state.epsilon);
        } else {
            adam_step(params[i]->data, grads[i].data, state.first[i], state.second[i], state.step, lr, state.beta1,
                      state.beta2, state.epsilon);
        }
    }
}

double clip_global_norm(Gradients& grads, double max_norm) {
    double sq = 0.0;
    for (const auto& g : grads) {
        for (const double v : g.data) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto& g : grads) {
            for (double& v : g.data) v *= scale;
        }
    }
    return norm;
}

// ---------------------------------------------------------------------------
// Training

TrainingDiverged::TrainingDiverged(int epoch, double last_finite_loss)
    : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                         " (last finite loss " + format_double(last_finite_loss) + ")"),
      epoch_(epoch),
      last_finite_loss_(last_finite_loss) {}

TrainResult train_samples(const NetworkConfig& config, const std::vector<Sample>& samples,
                          const std::optional<Network>& initial) {
    config.validate();
    if (samples.empty()) {
        throw std::invalid_argument("training needs at least one sample");
    }
    TrainResult out;
    if (initial) {
        out.network = *initial;
        out.network.mutable_config() = config;
        if (out.network.parameters().size() != Network(config).parameters().size()) {
            throw std::invalid_argument("initial network does not match the configuration");
        }
    } else {
        out.network = Network::initialized(config, derive_seed(config.seed, "init"));
    }
    Network& net = out.network;
    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
    Rng dropout_rng(derive_seed(config.seed, "dropout"));
    OptimizerState opt = OptimizerState::for_network(net, config.optimizer);

    const std::size_t n = samples.size();
    const std::size_t batch =
        config.batch_size <= 0 ? n : std::min(n, static_cast<std::size_t>(config.batch_size));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<Sample> chunk;
    double last_finite = 0.0;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (batch < n) {
            shuffle_rng.shuffle(order);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            chunk.clear();
            for (std::size_t i = start; i < end; ++i) chunk.push_back(samples[order[i]]);
            Gradients grads = zero_gradients(net);
            const LossTerms loss = loss_and_gradients(net, chunk, &dropout_rng, grads);
            if (!std::isfinite(loss.total)) {
                throw TrainingDiverged(epoch, last_finite);
            }
            epoch_loss += loss.total * static_cast<double>(end - start);
            clip_global_norm(grads, config.clip_norm);
            apply_update(net, grads, opt, config.learning_rate);
        }
        epoch_loss /= static_cast<double>(n);
        if (!std::isfinite(epoch_loss)) {
            throw TrainingDiverged(epoch, last_finite);
        }
        last_finite = epoch_loss;
        out.epoch_losses.push_back(epoch_loss);
    }
    for (const auto* p : net.parameters()) {
        for (const double v : p->data) {
            if (!std::isfinite(v)) {
                throw TrainingDiverged(config.epochs, last_finite);
            }
        }
    }
    return out;
}

Sample window_sample(const timeseries::WindowPair& pair, const NetworkConfig& config) {
    const std::size_t L = pair.input.size();
    Sample s;
    if (static_cast<std::size_t>(config.input_size) == L) {
        s.inputs.push_back(pair.input);
    } else if (config.input_size == 1) {
        for (const double v : pair.input) s.inputs.push_back({v});
    } else {
        throw std::invalid_argument("input size " + std::to_string(config.input_size) +
                                    " fits neither a flat nor a sequence window of length " + std::to_string(L));
    }
    check_size(pair.target.size(), static_cast<std::size_t>(config.output_size), "window target");
    s.target_steps = {s.inputs.size() - 1};
    s.targets = {pair.target};
    return s;
}

TrainResult train(const NetworkConfig& config, const timeseries::WindowSet& windows, const std::optional<Network>& initial) {
    if (windows.pairs.empty()) {
        throw std::invalid_argument("training needs a non-empty window set");
    }
    std::vector<Sample> samples;
    samples.reserve(windows.pairs.size());
    for (const auto& p : windows.pairs) samples.push_back(window_sample(p, config));
    return train_samples(config, samples, initial);
}

std::vector<double> predict(const Network& net, const std::vector<std::vector<double>>& inputs) {
    return forward(net, inputs, Mode::inference).back();
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::ordered_json to_json(const NetworkConfig& c) {
    nlohmann::ordered_json j;
    j["cell"] = to_string(c.cell);
    j["layers"] = c.layers;
    j["hidden"] = c.hidden;
    j["input_size"] = c.input_size;
    j["output_size"] = c.output_size;
    j["dropout"] = c.dropout;
    j["seed"] = c.seed;
    j["learning_rate"] = c.learning_rate;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["optimizer"] = to_string(c.optimizer);
    j["clip_norm"] = c.clip_norm;
    j["init_gain"] = c.init_gain;
    return j;
}

NetworkConfig config_from_json(const nlohmann::json& j) {
    NetworkConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "cell") c.cell = parse_cell(v.get<std::string>());
        else if (key == "layers") c.layers = v.get<int>();
        else if (key == "hidden") c.hidden = v.get<int>();
        else if (key == "input_size") c.input_size = v.get<int>();
        else if (key == "output_size") c.output_size = v.get<int>();
        else if (key == "dropout") c.dropout = v.get<double>();
        else if (key == "seed") c.seed = v.get<std::uint64_t>();
        else if (key == "learning_rate") c.learning_rate = v.get<double>();
        else if (key == "epochs") c.epochs = v.get<int>();
        else if (key == "batch_size") c.batch_size = v.get<int>();
        else if (key == "optimizer") c.optimizer = parse_optimizer(v.get<std::string>());
        else if (key == "clip_norm") c.clip_norm = v.get<double>();
        else if (key == "init_gain") c.init_gain = v.get<double>();
        else throw std::invalid_argument("unknown network config key '" + key + "'");
    }
    c.validate();
    return c;
}

nlohmann::ordered_json to_json(const Network& net) {
    nlohmann::ordered_json j;
    j["config"] = to_json(net.config());
    j["optimizer"] = to_string(net.config().optimizer);
    j["seed"] = net.config().seed;
    nlohmann::ordered_json weights = nlohmann::ordered_json::object();
    const auto names = net.parameter_names();
    const auto params = net.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        weights[names[i]] = {{"shape", params[i]->shape}, {"data", params[i]->data}};
    }
    j["weights"] = weights;
    return j;
}

Network network_from_json(const nlohmann::json& j) {
    Network net(config_from_json(j.at("config")));
    const auto names = net.parameter_names();
    auto params = net.parameters();
    const auto& weights = j.at("weights");
    if (weights.size() != params.size()) {
        throw std::invalid_argument("network JSON has " + std::to_string(weights.size()) + " weight arrays, expected " +
                                    std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& w = weights.at(names[i]);
        const auto shape = w.at("shape").get<std::vector<std::size_t>>();
        if (shape != params[i]->shape) {
            throw std::invalid_argument("shape mismatch for " + names[i]);
        }
        auto data = w.at("data").get<std::vector<double>>();
        if (data.size() != params[i]->size()) {
            throw std::invalid_argument("data length mismatch for " + names[i]);
        }
        params[i]->data = std::move(data);
    }
    return net;
}

}  // namespace biascast::neural
