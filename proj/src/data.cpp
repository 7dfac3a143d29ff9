#include "tt2fr/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <chrono>
#include <fstream>
#include <istream>
#include <numeric>

namespace tt2fr {

namespace {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const auto* end = s.data() + s.size();
    const auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && p == end;
}

std::string at_line(std::size_t line, const std::string& msg) {
    return "line " + std::to_string(line) + ": " + msg;
}

}  // namespace

bool is_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return false;
    }
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (!parse_number(s.substr(0, 4), y) || !parse_number(s.substr(5, 2), m) ||
        !parse_number(s.substr(8, 2), d)) {
        return false;
    }
    return std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}}.ok();
}

std::vector<SeriesPoint> load_csv(std::istream& in) {
    std::vector<SeriesPoint> out;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s = raw;
        if (line == 1 && s.starts_with("\xEF\xBB\xBF")) {
            s.remove_prefix(3);
        }
        s = trim(s);
        if (s.empty()) {
            continue;
        }
        const auto comma = s.find(',');
        if (comma == std::string_view::npos) {
            throw DataError(at_line(line, "expected 'date,value'"));
        }
        const auto date = trim(s.substr(0, comma));
        const auto rest = trim(s.substr(comma + 1));
        if (rest.find(',') != std::string_view::npos) {
            throw DataError(at_line(line, "expected exactly two columns"));
        }
        double value = 0.0;
        const bool date_ok = is_iso_date(date);
        const bool value_ok = parse_number(rest, value);
        if (out.empty() && !date_ok && !value_ok) {
            continue;  // header
        }
        if (!date_ok) {
            throw DataError(at_line(line, "invalid date '" + std::string(date) + "' (expected YYYY-MM-DD)"));
        }
        if (!value_ok || !std::isfinite(value)) {
            throw DataError(at_line(line, "invalid value '" + std::string(rest) + "'"));
        }
        if (!(value > 0.0)) {
            throw DataError(at_line(line, "value must be positive, got " + std::string(rest)));
        }
        if (!out.empty() && !(out.back().date < date)) {
            throw DataError(at_line(line, "dates must be strictly increasing ('" + std::string(date) +
                                              "' follows '" + out.back().date + "')"));
        }
        out.push_back({std::string(date), value});
    }
    if (out.empty()) {
        throw DataError("no data rows");
    }
    return out;
}

std::vector<SeriesPoint> load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    try {
        return load_csv(in);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string_view to_string(MainRule r) {
    return r == MainRule::last ? "last" : "mean";
}

MainRule main_rule_from_string(std::string_view s) {
    if (s == "last") {
        return MainRule::last;
    }
    if (s == "mean") {
        return MainRule::mean;
    }
    throw ConfigError("unknown main_rule '" + std::string(s) + "' (expected last or mean)");
}

void validate(const FuzzifierConfig& cfg) {
    if (cfg.window_len < 2) {
        throw ConfigError("window_len must be at least 2");
    }
    if (!(cfg.inner_shrink > 0.0 && cfg.inner_shrink <= 1.0)) {
        throw ConfigError("inner_shrink must lie in (0, 1]");
    }
    if (cfg.lag_count < 1) {
        throw ConfigError("lag_count must be at least 1");
    }
}

Tt2Number fuzzify_window(std::span<const double> window, const FuzzifierConfig& cfg) {
    if (window.size() != static_cast<std::size_t>(cfg.window_len)) {
        throw std::invalid_argument("fuzzify_window: window has " + std::to_string(window.size()) +
                                    " values, expected " + std::to_string(cfg.window_len));
    }
    const auto [lo, hi] = std::minmax_element(window.begin(), window.end());
    const double low = *lo;
    const double high = *hi;
    double main = window.back();
    if (cfg.main_rule == MainRule::mean) {
        main = std::clamp(std::accumulate(window.begin(), window.end(), 0.0) / static_cast<double>(window.size()),
                          low, high);
    }
    const double s = cfg.inner_shrink;
    It2TriFou fou{low, main - s * (main - low), main, main + s * (high - main), high};
    // Keep the ordering exact under rounding.
    fou.a_up = std::clamp(fou.a_up, low, main);
    fou.c_low = std::clamp(fou.c_low, main, high);
    return {fou, 0.5};
}

SeriesDataset build_dataset(const std::vector<SeriesPoint>& series, const FuzzifierConfig& cfg) {
    validate(cfg);
    const auto w = static_cast<std::size_t>(cfg.window_len);
    const auto lags = static_cast<std::size_t>(cfg.lag_count);
    const std::size_t first = w + lags - 1;
    if (series.size() <= first) {
        throw DataError("series has " + std::to_string(series.size()) + " points; window " +
                        std::to_string(w) + " with " + std::to_string(lags) + " lag(s) needs at least " +
                        std::to_string(first + 1));
    }
    const std::size_t rows = series.size() - first;
    const auto cols = static_cast<Eigen::Index>(lags + (cfg.intercept ? 1 : 0));

    std::vector<double> values(series.size());
    std::transform(series.begin(), series.end(), values.begin(), [](const SeriesPoint& p) { return p.value; });

    SeriesDataset ds;
    ds.data.inputs.resize(static_cast<Eigen::Index>(rows), cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = first + r;
        const auto rr = static_cast<Eigen::Index>(r);
        for (std::size_t k = 0; k < lags; ++k) {
            ds.data.inputs(rr, static_cast<Eigen::Index>(k)) = values[t - 1 - k];
        }
        if (cfg.intercept) {
            ds.data.inputs(rr, cols - 1) = 1.0;
        }
        ds.dates.push_back(series[t].date);
        ds.data.outputs.push_back(fuzzify_window(std::span(values).subspan(t + 1 - w, w), cfg));
        ds.targets.push_back(values[t]);
    }
    return ds;
}

SeriesDataset slice(const SeriesDataset& ds, std::size_t first, std::size_t last) {
    SeriesDataset out;
    const auto n = static_cast<Eigen::Index>(last - first);
    out.data.inputs = ds.data.inputs.middleRows(static_cast<Eigen::Index>(first), n);
    out.dates.assign(ds.dates.begin() + static_cast<std::ptrdiff_t>(first),
                     ds.dates.begin() + static_cast<std::ptrdiff_t>(last));
    out.data.outputs.assign(ds.data.outputs.begin() + static_cast<std::ptrdiff_t>(first),
                            ds.data.outputs.begin() + static_cast<std::ptrdiff_t>(last));
    out.targets.assign(ds.targets.begin() + static_cast<std::ptrdiff_t>(first),
                       ds.targets.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
}

std::pair<SeriesDataset, SeriesDataset> split(const SeriesDataset& ds, std::string_view boundary) {
    if (!is_iso_date(boundary)) {
        throw ConfigError("split date '" + std::string(boundary) + "' is not YYYY-MM-DD");
    }
    const auto it = std::lower_bound(ds.dates.begin(), ds.dates.end(), boundary,
                                     [](const std::string& d, std::string_view b) { return d < b; });
    const auto k = static_cast<std::size_t>(it - ds.dates.begin());
    if (k == 0) {
        throw DataError("split at " + std::string(boundary) + " leaves the training set empty");
    }
    if (k == ds.size()) {
        throw DataError("split at " + std::string(boundary) + " leaves the test set empty");
    }
    return {slice(ds, 0, k), slice(ds, k, ds.size())};
}

nlohmann::ordered_json to_json(const SeriesDataset& ds) {
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        std::vector<double> inputs(ds.data.inputs.row(ii).begin(), ds.data.inputs.row(ii).end());
        const auto& f = ds.data.outputs[i].fou;
        nlohmann::ordered_json row;
        row["date"] = ds.dates[i];
        row["inputs"] = inputs;
        row["fou"] = {f.a_low, f.a_up, f.peak, f.c_low, f.c_up};
        row["target"] = ds.targets[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace tt2fr
