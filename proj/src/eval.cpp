#include "biascast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace biascast::eval {

double rmse(std::span<const double> predicted, std::span<const double> truth) {
    if (predicted.empty() || predicted.size() != truth.size()) {
        throw std::invalid_argument("rmse needs equal non-empty lengths, got " + std::to_string(predicted.size()) +
                                    " and " + std::to_string(truth.size()));
    }
    double se = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double e = predicted[i] - truth[i];
        se += e * e;
    }
    return std::sqrt(se / static_cast<double>(predicted.size()));
}

std::string leaning_label(const timeseries::DailySeries& s) {
    return s.leaning ? std::string(to_string(*s.leaning)) : "synthetic";
}

namespace {

using forecasters::Kind;

struct MultistepErrors {
    std::array<double, 5> per_step{};
    double pooled = 0.0;
};

MultistepErrors multistep_errors(const forecasters::TrainedForecaster& model, std::span<const double> values) {
    const auto ws = timeseries::make_windows(values, forecasters::kMultistepLookback, forecasters::kMultistepHorizon);
    std::array<double, 5> se{};
    for (const auto& p : ws.pairs) {
        const auto f = forecasters::forecast_multistep(model, p.input);
        for (std::size_t k = 0; k < 5; ++k) se[k] += (f[k] - p.target[k]) * (f[k] - p.target[k]);
    }
    MultistepErrors out;
    const auto n = static_cast<double>(ws.pairs.size());
    double total = 0.0;
    for (std::size_t k = 0; k < 5; ++k) {
        out.per_step[k] = std::sqrt(se[k] / n);
        total += se[k];
    }
    out.pooled = std::sqrt(total / (5.0 * n));
    return out;
}

}  // namespace

std::vector<double> rolling_predictions(const forecasters::TrainedForecaster& model, const timeseries::SplitPair& split) {
    std::vector<double> history(split.train.values.begin(), split.train.values.end());
    history.reserve(split.train.size() + split.test.size());
    std::vector<double> pred;
    for (const double y : split.test.values) {
        pred.push_back(forecasters::predict_next(model, history));
        history.push_back(y);
    }
    return pred;
}

EvalRow evaluate(const forecasters::TrainedForecaster& model, const timeseries::SplitPair& split) {
    const auto& train = split.train.values;
    const auto& test = split.test.values;
    const std::size_t L = forecasters::lookback(model.kind);
    const std::size_t H = forecasters::horizon(model.kind);
    if (test.size() < L + H) {
        throw std::invalid_argument(std::string(forecasters::to_string(model.kind)) + " evaluation needs a test half of at least " +
                                    std::to_string(L + H) + " points, got " + std::to_string(test.size()));
    }

    EvalRow row;
    row.model = forecasters::to_string(model.kind);
    row.leaning = leaning_label(split.train);
    row.metric = to_string(split.train.metric);

    if (model.kind == Kind::multistep_14_5) {
        const auto te = multistep_errors(model, test);
        row.per_step = te.per_step;
        row.test_rmse = te.pooled;
        if (train.size() >= L + H) {
            row.train_rmse = multistep_errors(model, train).pooled;
        }
        return row;
    }

    row.test_rmse = rmse(rolling_predictions(model, split), test);

    if (model.kind == Kind::sarima) {
        row.train_rmse = model.sarima->train_rmse;
    } else if (train.size() > L) {
        std::vector<double> in_sample;
        for (std::size_t i = L; i < train.size(); ++i) {
            in_sample.push_back(forecasters::predict_next(model, std::span(train).first(i)));
        }
        row.train_rmse = rmse(in_sample, std::span(train).subspan(L));
    }
    return row;
}

// ---------------------------------------------------------------------------
// Report tables

namespace {

const std::array<std::string, 10> kHeader{"model", "leaning", "metric", "train_rmse", "test_rmse",
                                          "step1", "step2",   "step3",  "step4",      "step5"};

std::string fixed2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string cell(const std::optional<double>& v) { return v ? fixed2(*v) : std::string(); }

std::vector<std::string> cells(const EvalRow& r) {
    std::vector<std::string> out{r.model, r.leaning, r.metric, cell(r.train_rmse), fixed2(r.test_rmse)};
    for (std::size_t k = 0; k < 5; ++k) {
        out.push_back(r.per_step ? fixed2((*r.per_step)[k]) : std::string());
    }
    return out;
}

double parse_number(const std::string& s, std::size_t line) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size() || !std::isfinite(v)) {
        throw std::invalid_argument("report line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

}  // namespace

std::string render_csv(std::span<const EvalRow> rows) {
    std::string out;
    for (std::size_t i = 0; i < kHeader.size(); ++i) out += (i ? "," : "") + kHeader[i];
    out += "\n";
    for (const auto& r : rows) {
        const auto c = cells(r);
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (i) out += ",";
            out += csv_escape(c[i]);
        }
        out += "\n";
    }
    return out;
}

std::string render_text(std::span<const EvalRow> rows) {
    std::vector<std::vector<std::string>> table;
    table.emplace_back(kHeader.begin(), kHeader.end());
    for (const auto& r : rows) table.push_back(cells(r));
    std::vector<std::size_t> width(kHeader.size(), 0);
    for (const auto& row : table) {
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    }
    std::string out;
    for (const auto& row : table) {
        std::string line;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const std::size_t pad = width[i] - row[i].size();
            // text columns left-aligned, numbers right-aligned
            if (i < 3) {
                line += row[i] + std::string(pad, ' ');
            } else {
                line += std::string(pad, ' ') + row[i];
            }
            if (i + 1 < row.size()) line += "  ";
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
    }
    return out;
}

std::vector<EvalRow> parse_csv(std::string_view text) {
    const auto rows = read_csv(text);
    if (rows.empty()) {
        throw std::invalid_argument("report is empty (no header)");
    }
    if (rows[0] != std::vector<std::string>(kHeader.begin(), kHeader.end())) {
        throw std::invalid_argument("report header does not match the expected columns");
    }
    std::vector<EvalRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i];
        const std::size_t line = i + 1;
        if (f.size() != kHeader.size()) {
            throw std::invalid_argument("report line " + std::to_string(line) + ": expected 10 fields, got " +
                                        std::to_string(f.size()));
        }
        EvalRow r;
        r.model = f[0];
        r.leaning = f[1];
        r.metric = f[2];
        if (!f[3].empty()) r.train_rmse = parse_number(f[3], line);
        r.test_rmse = parse_number(f[4], line);
        const auto filled = std::count_if(f.begin() + 5, f.end(), [](const std::string& s) { return !s.empty(); });
        if (filled == 5) {
            std::array<double, 5> steps{};
            for (std::size_t k = 0; k < 5; ++k) steps[k] = parse_number(f[5 + k], line);
            r.per_step = steps;
        } else if (filled != 0) {
            throw std::invalid_argument("report line " + std::to_string(line) + ": step columns must be all or none");
        }
        out.push_back(std::move(r));
    }
    return out;
}

EvalRow quantized(EvalRow row) {
    auto q = [](double v) { return std::stod(fixed2(v)); };
    if (row.train_rmse) row.train_rmse = q(*row.train_rmse);
    row.test_rmse = q(row.test_rmse);
    if (row.per_step) {
        for (double& v : *row.per_step) v = q(v);
    }
    return row;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 800, kHeight = 420;
constexpr double kLeft = 70, kRight = 170, kTop = 40, kBottom = 60;

const std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string xml_escape(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string render_svg(std::span<const PlotSeries> series, std::string_view title) {
    if (series.empty()) {
        throw std::invalid_argument("plot needs at least one series");
    }
    Date first = series.front().start;
    Date last = series.front().start;
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (const auto& s : series) {
        if (s.values.empty()) {
            throw std::invalid_argument("plot series '" + s.label + "' is empty");
        }
        first = std::min(first, s.start);
        last = std::max(last, s.start + std::chrono::days{static_cast<long>(s.values.size()) - 1});
        for (const double v : s.values) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("plot series '" + s.label + "' has a non-finite value");
            }
            lo = any ? std::min(lo, v) : v;
            hi = any ? std::max(hi, v) : v;
            any = true;
        }
    }
    if (hi == lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    const double span_days = std::max(1.0, static_cast<double>((last - first).count()));
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto x_of = [&](Date d) { return kLeft + plot_w * static_cast<double>((d - first).count()) / span_days; };
    auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
      << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"16\">" << xml_escape(title) << "</text>\n";

    // axes and ticks
    o << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(kLeft + plot_w)
      << "\" y2=\"" << num(kTop + plot_h) << "\"/>\n"
      << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
      << num(kTop + plot_h) << "\"/>\n"
      << "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
    const int ticks = 5;
    for (int i = 0; i < ticks; ++i) {
        const auto offset = static_cast<long>(std::lround(span_days * i / (ticks - 1)));
        const Date d = first + std::chrono::days{offset};
        const double x = x_of(d);
        o << "<line x1=\"" << num(x) << "\" y1=\"" << num(kTop + plot_h) << "\" x2=\"" << num(x) << "\" y2=\""
          << num(kTop + plot_h + 5) << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + plot_h + 20) << "\" text-anchor=\"middle\">"
          << format_date(d) << "</text>\n";
        const double v = lo + (hi - lo) * i / (ticks - 1);
        const double y = y_of(v);
        o << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft) << "\" y2=\""
          << num(y) << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick_label(v)
          << "</text>\n";
    }
    o << "</g>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        o << "<polyline fill=\"none\" stroke=\"" << kPalette[i % kPalette.size()]
          << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t t = 0; t < s.values.size(); ++t) {
            if (t) o << ' ';
            o << num(x_of(s.start + std::chrono::days{static_cast<long>(t)})) << ',' << num(y_of(s.values[t]));
        }
        o << "\"/>\n";
    }

    o << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double y = kTop + 10 + 20.0 * static_cast<double>(i);
        const double x = kLeft + plot_w + 15;
        o << "<rect x=\"" << num(x) << "\" y=\"" << num(y - 9) << "\" width=\"12\" height=\"12\" fill=\""
          << kPalette[i % kPalette.size()] << "\"/>\n"
          << "<text x=\"" << num(x + 18) << "\" y=\"" << num(y + 2) << "\">" << xml_escape(series[i].label)
          << "</text>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

}  // namespace biascast::eval
