#include "tt2fr/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unistd.h>

namespace tt2fr {

using json = nlohmann::ordered_json;

double rmse(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.empty()) {
        throw std::invalid_argument("rmse of empty vectors");
    }
    if (actual.size() != forecast.size()) {
        throw std::invalid_argument("rmse: " + std::to_string(actual.size()) + " actual vs " +
                                    std::to_string(forecast.size()) + " forecast values");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const double d = actual[i] - forecast[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(actual.size()));
}

std::string_view to_string(Defuzzifier d) {
    return d == Defuzzifier::peak ? "peak" : "centroid";
}

Defuzzifier defuzzifier_from_string(std::string_view s) {
    if (s == "peak") {
        return Defuzzifier::peak;
    }
    if (s == "centroid") {
        return Defuzzifier::centroid;
    }
    throw ConfigError("unknown defuzzifier '" + std::string(s) + "' (expected peak or centroid)");
}

// ---- config ----------------------------------------------------------------

namespace {

void only_keys(const json& j, std::string_view where, std::initializer_list<std::string_view> keys) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + " must be an object");
    }
    for (const auto& [k, v] : j.items()) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            throw ConfigError("unknown key '" + std::string(where) + "." + k + "'");
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, std::string_view where) {
    if (!j.contains(key)) {
        return;
    }
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("'" + std::string(where) + "." + key + "' has the wrong type");
    }
}

std::string to_string_nested(const json& j, const char* key, std::string_view where, std::string fallback) {
    read(j, key, fallback, where);
    return fallback;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    only_keys(j, "config",
              {"schema_version", "label", "h", "objective_mode", "necessity_rhs", "term_weights", "defuzzifier",
               "split", "fuzzifier", "solver", "chart"});
    if (!j.contains("schema_version")) {
        throw ConfigError("config is missing schema_version");
    }
    int version = 0;
    read(j, "schema_version", version, "config");
    if (version != kSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                          std::to_string(kSchemaVersion) + ")");
    }

    ExperimentConfig cfg;
    read(j, "label", cfg.label, "config");
    read(j, "h", cfg.fit.h, "config");
    read(j, "term_weights", cfg.fit.term_weights, "config");
    read(j, "chart", cfg.chart, "config");
    try {
        cfg.fit.objective_mode = objective_mode_from_string(
            to_string_nested(j, "objective_mode", "config", std::string(to_string(cfg.fit.objective_mode))));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const auto rhs = to_string_nested(j, "necessity_rhs", "config", "corrected");
    if (rhs == "corrected") {
        cfg.fit.necessity_rhs = NecessityRhs::corrected;
    } else if (rhs == "literal") {
        cfg.fit.necessity_rhs = NecessityRhs::literal;
    } else {
        throw ConfigError("unknown necessity_rhs '" + rhs + "' (expected corrected or literal)");
    }
    cfg.defuzzifier = defuzzifier_from_string(to_string_nested(j, "defuzzifier", "config", "peak"));

    if (j.contains("split")) {
        const auto& s = j.at("split");
        only_keys(s, "split", {"date", "test_fraction"});
        if (s.contains("date") && !s.at("date").is_null()) {
            std::string d;
            read(s, "date", d, "split");
            cfg.split_date = d;
        }
        read(s, "test_fraction", cfg.test_fraction, "split");
    }
    if (j.contains("fuzzifier")) {
        const auto& f = j.at("fuzzifier");
        only_keys(f, "fuzzifier", {"window_len", "main_rule", "inner_shrink", "lag_count", "intercept"});
        read(f, "window_len", cfg.fuzzifier.window_len, "fuzzifier");
        read(f, "inner_shrink", cfg.fuzzifier.inner_shrink, "fuzzifier");
        read(f, "lag_count", cfg.fuzzifier.lag_count, "fuzzifier");
        read(f, "intercept", cfg.fuzzifier.intercept, "fuzzifier");
        cfg.fuzzifier.main_rule = main_rule_from_string(to_string_nested(f, "main_rule", "fuzzifier", "last"));
    }
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        only_keys(s, "solver",
                  {"starts", "seed", "max_iterations", "feasibility_tol", "stationarity_tol", "box_bound", "parallel"});
        auto& sc = cfg.fit.solver;
        read(s, "starts", sc.starts, "solver");
        read(s, "seed", sc.seed, "solver");
        read(s, "max_iterations", sc.max_iterations, "solver");
        read(s, "feasibility_tol", sc.feasibility_tol, "solver");
        read(s, "stationarity_tol", sc.stationarity_tol, "solver");
        read(s, "box_bound", sc.box_bound, "solver");
        read(s, "parallel", sc.parallel, "solver");
    }
    validate(cfg);
    return cfg;
}

json to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["label"] = cfg.label;
    j["h"] = cfg.fit.h;
    j["objective_mode"] = to_string(cfg.fit.objective_mode);
    j["necessity_rhs"] = cfg.fit.necessity_rhs == NecessityRhs::corrected ? "corrected" : "literal";
    j["term_weights"] = cfg.fit.term_weights;
    j["defuzzifier"] = to_string(cfg.defuzzifier);
    j["split"]["date"] = cfg.split_date ? json(*cfg.split_date) : json(nullptr);
    j["split"]["test_fraction"] = cfg.test_fraction;
    j["fuzzifier"]["window_len"] = cfg.fuzzifier.window_len;
    j["fuzzifier"]["main_rule"] = to_string(cfg.fuzzifier.main_rule);
    j["fuzzifier"]["inner_shrink"] = cfg.fuzzifier.inner_shrink;
    j["fuzzifier"]["lag_count"] = cfg.fuzzifier.lag_count;
    j["fuzzifier"]["intercept"] = cfg.fuzzifier.intercept;
    const auto& s = cfg.fit.solver;
    j["solver"]["starts"] = s.starts;
    j["solver"]["seed"] = s.seed;
    j["solver"]["max_iterations"] = s.max_iterations;
    j["solver"]["feasibility_tol"] = s.feasibility_tol;
    j["solver"]["stationarity_tol"] = s.stationarity_tol;
    j["solver"]["box_bound"] = s.box_bound;
    j["solver"]["parallel"] = s.parallel;
    j["chart"] = cfg.chart;
    return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void validate(const ExperimentConfig& cfg) {
    try {
        validate(cfg.fit);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    validate(cfg.fuzzifier);
    if (cfg.split_date && !is_iso_date(*cfg.split_date)) {
        throw ConfigError("split.date '" + *cfg.split_date + "' is not YYYY-MM-DD");
    }
    if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0)) {
        throw ConfigError("split.test_fraction must lie in (0, 1)");
    }
    const auto& s = cfg.fit.solver;
    if (s.starts < 1 || s.max_iterations < 1 || !(s.feasibility_tol > 0) || !(s.stationarity_tol > 0) ||
        !(s.box_bound > 0)) {
        throw ConfigError("solver settings must be positive");
    }
}

// ---- experiment ------------------------------------------------------------

std::pair<SeriesDataset, SeriesDataset> split_by_config(const SeriesDataset& ds, const ExperimentConfig& cfg) {
    if (cfg.split_date) {
        return split(ds, *cfg.split_date);
    }
    if (ds.size() < 2) {
        throw DataError("need at least two rows to split");
    }
    const auto n = ds.size();
    auto test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.test_fraction));
    test = std::clamp<std::size_t>(test, 1, n - 1);
    return {slice(ds, 0, n - test), slice(ds, n - test, n)};
}

std::vector<ForecastRecord> forecast(const SeriesDataset& ds, const CoefficientSet& coeffs,
                                     const ExperimentConfig& cfg, bool train) {
    std::vector<ForecastRecord> out;
    out.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        std::vector<double> row(ds.data.inputs.row(ii).begin(), ds.data.inputs.row(ii).end());
        ForecastRecord r;
        r.date = ds.dates[i];
        r.train = train;
        r.actual = ds.targets[i];
        r.predicted = predict(coeffs, row);
        r.forecast = cfg.defuzzifier == Defuzzifier::peak ? defuzzify(r.predicted) : centroid(r.predicted);
        r.reduced = predicted_reduction(r.predicted, cfg.fit.h).to_fou();
        out.push_back(r);
    }
    return out;
}

namespace {

void score(ForecastReport& rep) {
    std::vector<double> a[2];
    std::vector<double> f[2];
    for (const auto& r : rep.records) {
        a[r.train ? 0 : 1].push_back(r.actual);
        f[r.train ? 0 : 1].push_back(r.forecast);
    }
    rep.train_size = a[0].size();
    rep.test_size = a[1].size();
    rep.train_rmse = rmse(a[0], f[0]);
    rep.test_rmse = rmse(a[1], f[1]);
}

}  // namespace

ForecastReport least_squares_baseline(const SeriesDataset& train, const SeriesDataset& test) {
    const auto& X = train.data.inputs;
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train.targets.data(),
                                                                static_cast<Eigen::Index>(train.targets.size()));
    const Eigen::VectorXd beta = X.completeOrthogonalDecomposition().solve(y);

    ForecastReport rep;
    rep.label = "classic_regression";
    for (const auto* part : {&train, &test}) {
        for (std::size_t i = 0; i < part->size(); ++i) {
            ForecastRecord r;
            r.date = part->dates[i];
            r.train = part == &train;
            r.actual = part->targets[i];
            r.forecast = part->data.inputs.row(static_cast<Eigen::Index>(i)).dot(beta);
            r.predicted = r.reduced = It2TriFou::crisp(r.forecast);
            rep.records.push_back(r);
        }
    }
    score(rep);
    return rep;
}

ExperimentResult run_experiment(const std::vector<SeriesPoint>& series, const ExperimentConfig& cfg) {
    validate(cfg);
    ExperimentResult res;
    res.config = cfg;

    SeriesDataset ds;
    try {
        ds = build_dataset(series, cfg.fuzzifier);
    } catch (const DataError& e) {
        throw DataError(std::string("fuzzify: ") + e.what());
    }
    std::pair<SeriesDataset, SeriesDataset> parts;
    try {
        parts = split_by_config(ds, cfg);
    } catch (const DataError& e) {
        throw DataError(std::string("split: ") + e.what());
    }
    const auto& [train, test] = parts;
    res.split_date = test.dates.front();

    FitResult fit;
    try {
        fit = fit_tt2fr(train.data, cfg.fit);
    } catch (const FitError& e) {
        throw FitError(std::string("fit: ") + e.what(), e.status(), e.constraint_index());
    } catch (const std::invalid_argument& e) {
        throw DataError(std::string("fit: ") + e.what());
    }
    res.coefficients = fit.coefficients;
    res.solution = fit.solution;

    auto& rep = res.report;
    rep.label = cfg.label;
    rep.h = cfg.fit.h;
    rep.records = forecast(train, fit.coefficients, cfg, true);
    auto test_records = forecast(test, fit.coefficients, cfg, false);
    rep.records.insert(rep.records.end(), test_records.begin(), test_records.end());
    score(rep);

    res.baseline = least_squares_baseline(train, test);
    return res;
}

// ---- serialization ---------------------------------------------------------

namespace {

json fou_json(const It2TriFou& f) {
    return json::array({f.a_low, f.a_up, f.peak, f.c_low, f.c_up});
}

It2TriFou fou_from(const json& j) {
    if (!j.is_array() || j.size() != 5) {
        throw DataError("expected a five-element footprint array");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>(), j[4].get<double>()};
}

std::string num(double v) {
    char buf[32];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace

json to_json(const CoefficientSet& c) {
    auto arr = json::array();
    for (const auto& t : c.terms) {
        arr.push_back(fou_json(t));
    }
    return arr;
}

CoefficientSet coefficients_from_json(const json& j) {
    const json& arr = j.is_object() && j.contains("coefficients") ? j.at("coefficients") : j;
    if (!arr.is_array() || arr.empty()) {
        throw DataError("coefficients must be a non-empty array of footprints");
    }
    CoefficientSet c;
    try {
        for (const auto& t : arr) {
            c.terms.push_back(fou_from(t));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("coefficients: ") + e.what());
    }
    return c;
}

json report_json(const ExperimentResult& r) {
    const auto& rep = r.report;
    json j;
    j["schema_version"] = kSchemaVersion;
    j["label"] = rep.label;
    j["h"] = rep.h ? json(*rep.h) : json(nullptr);
    j["objective_mode"] = to_string(r.config.fit.objective_mode);
    j["defuzzifier"] = to_string(r.config.defuzzifier);
    j["split_date"] = r.split_date;
    j["train_size"] = rep.train_size;
    j["test_size"] = rep.test_size;
    j["train_rmse"] = rep.train_rmse;
    j["test_rmse"] = rep.test_rmse;
    j["solver"]["status"] = to_string(r.solution.status);
    j["solver"]["objective_value"] = r.solution.objective_value;
    j["solver"]["kkt_residual"] = r.solution.kkt_residual;
    j["solver"]["start_index"] = r.solution.start_index;
    j["solver"]["iterations"] = r.solution.iterations;
    j["coefficients"] = to_json(r.coefficients);
    j["baseline"]["label"] = r.baseline.label;
    j["baseline"]["train_rmse"] = r.baseline.train_rmse;
    j["baseline"]["test_rmse"] = r.baseline.test_rmse;
    auto recs = json::array();
    for (const auto& x : rep.records) {
        json o;
        o["date"] = x.date;
        o["split"] = x.train ? "train" : "test";
        o["actual"] = x.actual;
        o["forecast"] = x.forecast;
        o["fou"] = fou_json(x.predicted);
        o["reduced"] = fou_json(x.reduced);
        recs.push_back(std::move(o));
    }
    j["records"] = std::move(recs);
    j["config"] = to_json(r.config);
    return j;
}

std::string forecast_csv(const std::vector<ForecastRecord>& records) {
    std::string s = "date,actual,forecast,a_low,a_up,c_low,c_up\n";
    for (const auto& r : records) {
        const auto& f = r.predicted;
        s += r.date + ',' + num(r.actual) + ',' + num(r.forecast) + ',' + num(f.a_low) + ',' + num(f.a_up) + ',' +
             num(f.c_low) + ',' + num(f.c_up) + '\n';
    }
    return s;
}

std::string chart_svg(const ForecastReport& report) {
    constexpr double W = 900;
    constexpr double H = 420;
    constexpr double M = 50;
    const auto& recs = report.records;
    std::ostringstream o;
    o << std::fixed << std::setprecision(2);
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << ' ' << H << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (recs.empty()) {
        o << "</svg>\n";
        return o.str();
    }
    double lo = recs[0].actual;
    double hi = recs[0].actual;
    for (const auto& r : recs) {
        lo = std::min({lo, r.actual, r.predicted.a_low});
        hi = std::max({hi, r.actual, r.predicted.c_up});
    }
    if (hi - lo < 1e-12) {
        hi = lo + 1.0;
    }
    const double n = static_cast<double>(std::max<std::size_t>(recs.size() - 1, 1));
    auto px = [&](std::size_t i) { return M + (W - 2 * M) * static_cast<double>(i) / n; };
    auto py = [&](double v) { return H - M - (H - 2 * M) * (v - lo) / (hi - lo); };

    auto band = [&](auto lower, auto upper, const char* fill) {
        o << "<polygon fill=\"" << fill << "\" stroke=\"none\" points=\"";
        for (std::size_t i = 0; i < recs.size(); ++i) {
            o << px(i) << ',' << py(upper(recs[i])) << ' ';
        }
        for (std::size_t i = recs.size(); i-- > 0;) {
            o << px(i) << ',' << py(lower(recs[i])) << ' ';
        }
        o << "\"/>\n";
    };
    band([](const ForecastRecord& r) { return r.predicted.a_low; },
         [](const ForecastRecord& r) { return r.predicted.c_up; }, "#cfe0f3");
    band([](const ForecastRecord& r) { return r.predicted.a_up; },
         [](const ForecastRecord& r) { return r.predicted.c_low; }, "#8fb6e0");

    auto line = [&](auto value, const char* stroke) {
        o << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < recs.size(); ++i) {
            o << px(i) << ',' << py(value(recs[i])) << ' ';
        }
        o << "\"/>\n";
    };
    line([](const ForecastRecord& r) { return r.actual; }, "black");
    line([](const ForecastRecord& r) { return r.forecast; }, "#c0392b");

    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (recs[i - 1].train && !recs[i].train) {
            const double x = 0.5 * (px(i - 1) + px(i));
            o << "<line x1=\"" << x << "\" y1=\"" << M << "\" x2=\"" << x << "\" y2=\"" << H - M
              << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
        }
    }
    o << "<rect x=\"" << M << "\" y=\"" << M << "\" width=\"" << W - 2 * M << "\" height=\"" << H - 2 * M
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    o << "<text x=\"" << M << "\" y=\"" << M - 12 << "\" font-family=\"sans-serif\" font-size=\"13\">"
      << report.label << ": actual (black), forecast (red), footprint band (blue)</text>\n";
    o << "<text x=\"4\" y=\"" << M + 4 << "\" font-family=\"sans-serif\" font-size=\"10\">" << hi << "</text>\n";
    o << "<text x=\"4\" y=\"" << H - M << "\" font-family=\"sans-serif\" font-size=\"10\">" << lo << "</text>\n";
    o << "<text x=\"" << M << "\" y=\"" << H - M + 16 << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << recs.front().date << "</text>\n";
    o << "<text x=\"" << W - M - 60 << "\" y=\"" << H - M + 16 << "\" font-family=\"sans-serif\" font-size=\"10\">"
      << recs.back().date << "</text>\n";
    o << "</svg>\n";
    return o.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            fs::remove(tmp);
            throw std::runtime_error("write failed for " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

void write_artifacts(const ExperimentResult& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "report.json", report_json(r).dump(2) + "\n");
    write_file_atomic(dir / "forecast.csv", forecast_csv(r.report.records));
    json c;
    c["schema_version"] = kSchemaVersion;
    c["h"] = r.config.fit.h;
    c["objective_mode"] = to_string(r.config.fit.objective_mode);
    c["coefficients"] = to_json(r.coefficients);
    write_file_atomic(dir / "coefficients.json", c.dump(2) + "\n");
    if (r.config.chart) {
        write_file_atomic(dir / "chart.svg", chart_svg(r.report));
    }
}

// ---- comparison ------------------------------------------------------------

std::vector<ComparisonRow> compare(const std::vector<ComparisonRow>& rows) {
    auto out = rows;
    std::stable_sort(out.begin(), out.end(),
                     [](const ComparisonRow& a, const ComparisonRow& b) { return a.test_rmse < b.test_rmse; });
    return out;
}

std::vector<ComparisonRow> compare(const std::vector<ForecastReport>& reports) {
    std::vector<ComparisonRow> rows;
    for (const auto& r : reports) {
        rows.push_back({r.label, r.train_rmse, r.test_rmse});
    }
    return compare(rows);
}

std::vector<ComparisonRow> comparison_rows_from_report(const json& report) {
    try {
        std::vector<ComparisonRow> rows{
            {report.at("label").get<std::string>(), report.at("train_rmse").get<double>(),
             report.at("test_rmse").get<double>()}};
        if (report.contains("baseline")) {
            const auto& b = report.at("baseline");
            rows.push_back({b.at("label").get<std::string>(), b.at("train_rmse").get<double>(),
                            b.at("test_rmse").get<double>()});
        }
        return rows;
    } catch (const json::exception& e) {
        throw DataError(std::string("not a report: ") + e.what());
    }
}

std::string render_table(const std::vector<ComparisonRow>& rows) {
    std::size_t w = 5;
    for (const auto& r : rows) {
        w = std::max(w, r.label.size());
    }
    char buf[256];
    std::string s;
    std::snprintf(buf, sizeof buf, "%-*s  %14s  %14s\n", static_cast<int>(w), "model", "train_rmse", "test_rmse");
    s += buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%-*s  %14.6f  %14.6f\n", static_cast<int>(w), r.label.c_str(), r.train_rmse,
                      r.test_rmse);
        s += buf;
    }
    return s;
}

json comparison_json(const std::vector<ComparisonRow>& rows) {
    auto arr = json::array();
    for (const auto& r : rows) {
        json o;
        o["label"] = r.label;
        o["train_rmse"] = r.train_rmse;
        o["test_rmse"] = r.test_rmse;
        arr.push_back(std::move(o));
    }
    json j;
    j["schema_version"] = kSchemaVersion;
    j["rows"] = std::move(arr);
    return j;
}

std::vector<ComparisonRow> comparison_from_json(const json& j) {
    std::vector<ComparisonRow> rows;
    try {
        for (const auto& o : j.at("rows")) {
            rows.push_back({o.at("label").get<std::string>(), o.at("train_rmse").get<double>(),
                            o.at("test_rmse").get<double>()});
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("not a comparison: ") + e.what());
    }
    return rows;
}

}  // namespace tt2fr
