#include "biascast/cli.hpp"

#include "biascast/eval.hpp"
#include "biascast/ingest.hpp"
#include "biascast/presets.hpp"
#include "biascast/sarima.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace biascast::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using forecasters::Kind;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) {
        throw std::invalid_argument(where + " must be a JSON object");
    }
    for (const auto& [key, v] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw std::invalid_argument("unknown key '" + key + "' in " + where);
        }
    }
}

std::string resolve_path(const fs::path& base, const std::string& p) {
    const fs::path path(p);
    return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

SyntheticSpec parse_synthetic(const json& j) {
    SyntheticSpec s;
    const auto generator = j.at("generator").get<std::string>();
    if (generator == "sine") {
        check_keys(j, {"generator", "n", "seed", "start", "period", "amplitude", "noise_sigma"}, "synthetic");
        timeseries::SineKind k;
        k.period = j.value("period", k.period);
        k.amplitude = j.value("amplitude", k.amplitude);
        k.noise_sigma = j.value("noise_sigma", k.noise_sigma);
        s.generator = k;
    } else if (generator == "ar1") {
        check_keys(j, {"generator", "n", "seed", "start", "alpha", "sigma"}, "synthetic");
        timeseries::Ar1Kind k;
        k.alpha = j.value("alpha", k.alpha);
        k.sigma = j.value("sigma", k.sigma);
        s.generator = k;
    } else if (generator == "sarima") {
        check_keys(j, {"generator", "n", "seed", "start", "order", "seasonal", "c", "alpha", "theta", "phi", "eta", "sigma"},
                   "synthetic");
        const auto spec = sarima::spec_from_json(j);
        timeseries::SeasonalSarimaKind k;
        k.p = spec.p, k.d = spec.d, k.q = spec.q;
        k.P = spec.P, k.D = spec.D, k.Q = spec.Q, k.s = spec.s;
        k.c = j.value("c", 0.0);
        k.alpha = j.value("alpha", std::vector<double>{});
        k.theta = j.value("theta", std::vector<double>{});
        k.phi = j.value("phi", std::vector<double>{});
        k.eta = j.value("eta", std::vector<double>{});
        k.sigma = j.value("sigma", 1.0);
        s.generator = k;
    } else {
        throw std::invalid_argument("unknown synthetic generator '" + generator + "' (sine, ar1, sarima)");
    }
    const auto n = j.value("n", std::int64_t{120});
    if (n < 1) {
        throw std::invalid_argument("synthetic n must be positive");
    }
    s.n = static_cast<std::size_t>(n);
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("start")) s.start = parse_date(j.at("start").get<std::string>());
    return s;
}

ForecasterRequest parse_request(const json& j) {
    ForecasterRequest r;
    if (j.is_string()) {
        r.kind = forecasters::parse_kind(j.get<std::string>());
        return r;
    }
    check_keys(j, {"kind", "preset", "spec", "grid", "network"}, "forecaster entry");
    r.kind = forecasters::parse_kind(j.at("kind").get<std::string>());
    const std::string kind(forecasters::to_string(r.kind));
    if (j.contains("preset")) {
        r.preset = j.at("preset").get<std::string>();
        forecasters::preset(*r.preset);
    }
    if (j.contains("spec") || j.contains("grid")) {
        if (r.kind != Kind::sarima) {
            throw std::invalid_argument("spec/grid only apply to sarima, not " + kind);
        }
        if (j.contains("spec") && j.contains("grid")) {
            throw std::invalid_argument("sarima entry takes a spec or a grid, not both");
        }
        if (j.contains("spec")) {
            check_keys(j.at("spec"), {"order", "seasonal"}, "sarima spec");
            r.spec = sarima::spec_from_json(j.at("spec"));
        } else {
            r.grid = sarima::grid_from_json(j.at("grid"));
        }
    }
    if (j.contains("network")) {
        if (r.kind == Kind::sarima) {
            throw std::invalid_argument("network settings do not apply to sarima");
        }
        r.network = j.at("network");
        // surface unknown or invalid keys at load time
        auto probe = json(neural::to_json(neural::NetworkConfig{}));
        probe.merge_patch(r.network);
        neural::config_from_json(probe);
    }
    return r;
}

std::string series_tag(const timeseries::DailySeries& s) {
    return std::string(to_string(s.metric)) + "__" + eval::leaning_label(s);
}

std::string spec_cells(const sarima::SarimaSpec& s) {
    std::ostringstream o;
    o << s.p << ',' << s.d << ',' << s.q << ',' << s.P << ',' << s.D << ',' << s.Q << ',' << s.s;
    return o.str();
}

ingest::IngestSummary read_posts(const RunConfig& config, std::vector<ingest::LabeledPost>& labeled) {
    if (!config.posts_path || !config.bias_path) {
        throw std::invalid_argument("config has no input paths");
    }
    const auto table = ingest::parse_bias_csv(read_text_file(*config.bias_path));
    auto posts = ingest::parse_posts_csv(read_text_file(*config.posts_path));
    std::erase_if(posts, [&](const ingest::PostRecord& p) { return p.platform != config.platform; });
    if (posts.empty()) {
        throw std::invalid_argument("no " + std::string(to_string(config.platform)) + " posts in " + *config.posts_path);
    }
    ingest::IngestSummary summary;
    labeled = ingest::label_posts(posts, table, summary, config.window);
    return summary;
}

}  // namespace

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
    check_keys(j, {"input", "synthetic", "window", "platform", "metrics", "leanings", "preset", "forecasters", "split",
                   "seed", "out"},
               "run config");
    RunConfig c;
    if (j.contains("input") == j.contains("synthetic")) {
        throw std::invalid_argument("run config needs exactly one of 'input' and 'synthetic'");
    }
    if (j.contains("input")) {
        const auto& in = j.at("input");
        check_keys(in, {"posts", "bias"}, "input");
        c.posts_path = resolve_path(base_dir, in.at("posts").get<std::string>());
        c.bias_path = resolve_path(base_dir, in.at("bias").get<std::string>());
    } else {
        c.synthetic = parse_synthetic(j.at("synthetic"));
    }
    if (j.contains("window")) {
        const auto& w = j.at("window");
        check_keys(w, {"first", "last"}, "window");
        c.window = {parse_date(w.at("first").get<std::string>()), parse_date(w.at("last").get<std::string>())};
        if (c.window.days() == 0) {
            throw std::invalid_argument("window starts after it ends");
        }
    }
    if (j.contains("platform")) c.platform = parse_platform(j.at("platform").get<std::string>());
    if (j.contains("metrics")) {
        c.metrics.clear();
        for (const auto& m : j.at("metrics")) {
            const auto metric = parse_metric(m.get<std::string>());
            if (metric == Metric::synthetic) {
                throw std::invalid_argument("'synthetic' is not an ingest metric");
            }
            c.metrics.push_back(metric);
        }
    }
    if (j.contains("leanings")) {
        c.leanings.clear();
        for (const auto& l : j.at("leanings")) c.leanings.push_back(parse_leaning(l.get<std::string>()));
    }
    if (j.contains("preset")) {
        c.preset = j.at("preset").get<std::string>();
        forecasters::preset(*c.preset);
    }
    if (j.contains("forecasters")) {
        for (const auto& f : j.at("forecasters")) c.forecasters.push_back(parse_request(f));
    }
    for (const auto& r : c.forecasters) {
        if (r.kind == Kind::sarima && !r.spec && !r.grid && !r.preset && !c.preset) {
            throw std::invalid_argument("sarima entry needs a spec, a grid, or a preset");
        }
    }
    c.split = j.value("split", c.split);
    if (!(c.split > 0.0 && c.split < 1.0)) {
        throw std::invalid_argument("split ratio must lie in (0, 1)");
    }
    c.seed = j.value("seed", c.seed);
    c.out_dir = resolve_path(base_dir, j.value("out", c.out_dir));
    return c;
}

RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    try {
        return parse_run_config(j, fs::path(path).parent_path());
    } catch (const json::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

std::vector<timeseries::DailySeries> load_series(const RunConfig& config) {
    if (config.synthetic) {
        const auto& s = *config.synthetic;
        const auto seed = s.seed ? *s.seed : derive_seed(config.seed, "synthetic");
        return {timeseries::generate_synthetic(s.generator, s.n, seed, s.start)};
    }
    std::vector<ingest::LabeledPost> labeled;
    read_posts(config, labeled);
    std::vector<timeseries::DailySeries> out;
    for (const Metric m : config.metrics) {
        if (m == Metric::sentiment_mean) {
            throw std::invalid_argument("sentiment_mean series have empty days and cannot be forecast");
        }
        const auto all = ingest::aggregate_daily(
            labeled, m == Metric::post_count ? ingest::CountMetric::post_count : ingest::CountMetric::likes_sum,
            config.window);
        for (const Leaning l : config.leanings) {
            auto s = all[index_of(l)];
            s.platform = config.platform;
            out.push_back(std::move(s));
        }
    }
    return out;
}

forecasters::ForecasterConfig resolve(const RunConfig& config, const ForecasterRequest& request,
                                      const timeseries::DailySeries& series) {
    forecasters::ForecasterConfig fc;
    fc.kind = request.kind;
    const auto& preset_name = request.preset ? request.preset : config.preset;
    if (preset_name) {
        fc = forecasters::preset(*preset_name).config_for(request.kind, series.leaning);
    }
    if (request.spec) {
        fc.spec = request.spec;
        fc.grid.reset();
    }
    if (request.grid) {
        fc.grid = request.grid;
        fc.spec.reset();
    }
    if (!request.network.empty()) {
        auto j = json(neural::to_json(fc.network));
        j.merge_patch(request.network);
        fc.network = neural::config_from_json(j);
    }
    const auto seed = derive_seed(config.seed, std::string(forecasters::to_string(request.kind)) + "/" + series_tag(series));
    if (!request.network.contains("seed")) fc.network.seed = seed;
    fc.grid_options.fit.seed = seed;
    return fc;
}

std::string series_values_csv(const timeseries::DailySeries& s) {
    std::string out = "date,value\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out += format_date(s.date_at(i)) + "," + format_double(s.values[i]) + "\n";
    }
    return out;
}

CommandResult cmd_ingest(const RunConfig& config) {
    std::vector<ingest::LabeledPost> labeled;
    const auto summary = read_posts(config, labeled);
    CommandResult r;
    for (const Metric m : config.metrics) {
        const std::string name = "series_" + std::string(to_string(m)) + ".csv";
        if (m == Metric::sentiment_mean) {
            r.files[name] = ingest::sentiment_to_csv(ingest::daily_mean_sentiment(labeled, config.window));
        } else {
            r.files[name] = ingest::series_to_csv(ingest::aggregate_daily(
                labeled, m == Metric::post_count ? ingest::CountMetric::post_count : ingest::CountMetric::likes_sum,
                config.window));
        }
    }
    r.files["summary.json"] = ingest::summary_to_json(summary);
    return r;
}

CommandResult cmd_run(const RunConfig& config) {
    if (config.forecasters.empty()) {
        throw std::invalid_argument("run config lists no forecasters");
    }
    const auto series = load_series(config);
    CommandResult r;
    std::vector<eval::EvalRow> rows;
    for (const auto& s : series) {
        const auto tag = series_tag(s);
        const auto split = timeseries::chronological_split(s, config.split);
        std::vector<eval::PlotSeries> plot{{"actual", s.start_date, s.values}};
        if (config.synthetic) r.files["series/" + tag + ".csv"] = series_values_csv(s);
        for (const auto& req : config.forecasters) {
            const std::string kind(forecasters::to_string(req.kind));
            try {
                const auto model = forecasters::fit_forecaster(resolve(config, req, s), split);
                rows.push_back(eval::evaluate(model, split));
                plot.push_back({kind, split.test.start_date, eval::rolling_predictions(model, split)});
                r.files["models/" + kind + "__" + tag + ".json"] = forecasters::to_json(model).dump(1) + "\n";
            } catch (const std::exception& e) {
                r.failures.push_back(kind + " " + tag + ": " + e.what());
            }
        }
        r.files["plots/" + tag + ".svg"] = eval::render_svg(plot, tag);
    }
    // row order: metric, then kind, then leaning
    auto rank = [](const eval::EvalRow& row) {
        const auto kind = static_cast<int>(forecasters::parse_kind(row.model));
        const int leaning = row.leaning == "synthetic" ? -1 : static_cast<int>(parse_leaning(row.leaning));
        return std::tuple(static_cast<int>(parse_metric(row.metric)), kind, leaning);
    };
    std::stable_sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) { return rank(a) < rank(b); });

    r.files["report.csv"] = eval::render_csv(rows);
    std::string text = eval::render_text(rows);
    text += "\nOne-step test RMSE is rolling-origin: each prediction conditions on the true values before it.\n"
            "Multistep test RMSE pools t+1..t+5 over sliding 14 -> 5 windows inside the test half.\n";
    if (!r.failures.empty()) {
        text += "\nFailed fits:\n";
        std::string failures;
        for (const auto& f : r.failures) {
            text += "  " + f + "\n";
            failures += f + "\n";
        }
        r.files["failures.txt"] = failures;
    }
    r.files["report.txt"] = text;
    return r;
}

CommandResult cmd_gridsearch(const RunConfig& config) {
    const auto it = std::find_if(config.forecasters.begin(), config.forecasters.end(),
                                 [](const ForecasterRequest& f) { return f.kind == Kind::sarima; });
    if (it == config.forecasters.end()) {
        throw std::invalid_argument("gridsearch needs a sarima forecaster entry");
    }
    const auto series = load_series(config);
    CommandResult r;
    for (const auto& s : series) {
        const auto tag = series_tag(s);
        auto fc = resolve(config, *it, s);
        sarima::GridSpec grid;
        if (it->grid) {
            grid = *it->grid;
        } else if (const auto& name = it->preset ? it->preset : config.preset) {
            grid = forecasters::preset(*name).fallback_grid;
        } else {
            throw std::invalid_argument("gridsearch needs a grid or a preset");
        }
        const auto split = timeseries::chronological_split(s, config.split);
        std::vector<sarima::CandidateScore> scores;
        nlohmann::ordered_json out;
        out["series"] = tag;
        out["selection"] = grid.selection == sarima::Selection::aic ? "aic" : "holdout_rmse";
        try {
            const auto result = sarima::grid_search(split.train.values, grid, fc.grid_options);
            out["best"] = sarima::to_json(result.fit.spec, result.fit.params);
            scores = result.scores;
        } catch (const sarima::GridSearchError& e) {
            r.failures.push_back(tag + ": " + e.what());
            out["best"] = nullptr;
            scores = e.scores();
        } catch (const std::exception& e) {
            r.failures.push_back(tag + ": " + e.what());
            out["best"] = nullptr;
        }
        std::string table = "p,d,q,P,D,Q,s,score,diagnostic\n";
        auto candidates = nlohmann::ordered_json::array();
        for (const auto& c : scores) {
            table += spec_cells(c.spec) + "," + (c.score ? format_double(*c.score) : "") + "," + csv_escape(c.diagnostic) + "\n";
            candidates.push_back({{"spec", c.spec.to_string()},
                                  {"score", c.score ? json(*c.score) : json(nullptr)},
                                  {"diagnostic", c.diagnostic}});
        }
        out["candidates"] = candidates;
        r.files["gridsearch/" + tag + ".json"] = out.dump(2) + "\n";
        r.files["gridsearch/" + tag + "_scores.csv"] = table;
    }
    return r;
}

CommandResult cmd_simulate(const RunConfig& config) {
    if (!config.synthetic) {
        throw std::invalid_argument("simulate needs a 'synthetic' block in the config");
    }
    CommandResult r;
    r.files["synthetic.csv"] = series_values_csv(load_series(config).front());
    return r;
}

std::string cmd_report(std::string_view report_csv, ReportFormat format) {
    const auto rows = eval::parse_csv(report_csv);
    return format == ReportFormat::csv ? eval::render_csv(rows) : eval::render_text(rows);
}

void write_outputs(const FileSet& files, const fs::path& out_dir) {
    for (const auto& [name, content] : files) {
        const auto path = out_dir / name;
        fs::create_directories(path.parent_path());
        write_text_file(path.string(), content);
    }
}

}  // namespace biascast::cli
