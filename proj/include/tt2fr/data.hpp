#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tt2fr/errors.hpp"
#include "tt2fr/regression.hpp"

namespace tt2fr {

/// One observation. Dates are ISO-8601 calendar dates (YYYY-MM-DD) and compare
/// lexicographically.
struct SeriesPoint {
    std::string date;
    double value = 0.0;
};

/// True when `s` is a valid YYYY-MM-DD calendar date.
bool is_iso_date(std::string_view s);

/// Two-column CSV (date,value) with an optional header line. Blank lines are
/// skipped. Throws DataError naming the offending line on parse errors,
/// nonpositive values and non-increasing dates.
std::vector<SeriesPoint> load_csv(std::istream& in);
std::vector<SeriesPoint> load_csv(const std::filesystem::path& path);

enum class MainRule { last, mean };

std::string_view to_string(MainRule r);
MainRule main_rule_from_string(std::string_view s);

/// Window fuzzification: low = min, high = max, main per main_rule, and the
/// lower membership shrunk toward main by inner_shrink on each side.
struct FuzzifierConfig {
    int window_len = 5;
    MainRule main_rule = MainRule::last;
    double inner_shrink = 0.5;
    int lag_count = 1;
    bool intercept = true;
};

/// Throws ConfigError.
void validate(const FuzzifierConfig& cfg);

/// fou = (low, main - s(main - low), main, main + s(high - main), high),
/// apex fraction 0.5.
Tt2Number fuzzify_window(std::span<const double> window, const FuzzifierConfig& cfg);

/// Lagged regression rows aligned with their dates and raw values.
struct SeriesDataset {
    std::vector<std::string> dates;
    RegressionDataset data;
    std::vector<double> targets;

    std::size_t size() const { return dates.size(); }
};

/// Row t uses the lag_count previous raw values (most recent first), then a
/// constant 1 when intercept is on. Its output fuzzifies the window ending at
/// t. Every row needs window_len + lag_count points of history, so the first
/// row is t = window_len + lag_count - 1.
SeriesDataset build_dataset(const std::vector<SeriesPoint>& series, const FuzzifierConfig& cfg);

/// Rows dated strictly before `boundary` go to train, the rest to test.
/// Throws DataError if either side is empty.
std::pair<SeriesDataset, SeriesDataset> split(const SeriesDataset& ds, std::string_view boundary);

/// Subset of rows [first, last).
SeriesDataset slice(const SeriesDataset& ds, std::size_t first, std::size_t last);

/// Array of {date, inputs, fou, target} objects.
nlohmann::ordered_json to_json(const SeriesDataset& ds);

}  // namespace tt2fr
