#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tt2fr/data.hpp"
#include "tt2fr/errors.hpp"
#include "tt2fr/regression.hpp"

namespace tt2fr {

/// Root mean square error. Throws std::invalid_argument on empty or
/// mismatched inputs.
double rmse(std::span<const double> actual, std::span<const double> forecast);

enum class Defuzzifier { peak, centroid };

std::string_view to_string(Defuzzifier d);
Defuzzifier defuzzifier_from_string(std::string_view s);

inline constexpr int kSchemaVersion = 1;

struct ExperimentConfig {
    std::string label = "TT2FR";
    FitConfig fit;
    FuzzifierConfig fuzzifier;
    /// Rows dated before split_date train the model. Without a date the last
    /// test_fraction of rows (at least one) are held out.
    std::optional<std::string> split_date;
    double test_fraction = 0.2;
    Defuzzifier defuzzifier = Defuzzifier::peak;
    bool chart = true;
};

/// Throws ConfigError on unknown keys, wrong types, a missing or unsupported
/// schema_version, or out-of-range values.
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ConfigError.
void validate(const ExperimentConfig& cfg);

struct ForecastRecord {
    std::string date;
    bool train = true;
    double actual = 0.0;
    double forecast = 0.0;
    It2TriFou predicted;
    /// Predicted footprint reduced at h (reporting only).
    It2TriFou reduced;
};

struct ForecastReport {
    std::string label;
    /// Absent for models without a cut level.
    std::optional<double> h;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::vector<ForecastRecord> records;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::string split_date;
    CoefficientSet coefficients;
    QpSolution solution;
    ForecastReport report;
    ForecastReport baseline;
};

/// Train/test split per the config.
std::pair<SeriesDataset, SeriesDataset> split_by_config(const SeriesDataset& ds, const ExperimentConfig& cfg);

/// Predicted footprints and crisp forecasts for every row of `ds`.
std::vector<ForecastRecord> forecast(const SeriesDataset& ds, const CoefficientSet& coeffs,
                                     const ExperimentConfig& cfg, bool train);

/// Ordinary least squares on (inputs -> raw target), fitted on train.
ForecastReport least_squares_baseline(const SeriesDataset& train, const SeriesDataset& test);

/// Fuzzify, split, fit on train, forecast all rows, score. Stage failures are
/// rethrown with the stage name prefixed (FitError, DataError and ConfigError
/// keep their type).
ExperimentResult run_experiment(const std::vector<SeriesPoint>& series, const ExperimentConfig& cfg);

nlohmann::ordered_json to_json(const CoefficientSet& c);
CoefficientSet coefficients_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json report_json(const ExperimentResult& r);
std::string forecast_csv(const std::vector<ForecastRecord>& records);
std::string chart_svg(const ForecastReport& report);

/// Writes report.json, forecast.csv, coefficients.json and (if enabled)
/// chart.svg into `dir`, each atomically.
void write_artifacts(const ExperimentResult& r, const std::filesystem::path& dir);

/// Writes to a temporary sibling file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

struct ComparisonRow {
    std::string label;
    double train_rmse = 0.0;
    double test_rmse = 0.0;

    bool operator==(const ComparisonRow&) const = default;
};

/// Rows sorted ascending by test RMSE (stable for ties).
std::vector<ComparisonRow> compare(const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> compare(const std::vector<ForecastReport>& reports);

/// Rows from a report.json document: the model, then its baseline if present.
std::vector<ComparisonRow> comparison_rows_from_report(const nlohmann::ordered_json& report);

std::string render_table(const std::vector<ComparisonRow>& rows);
nlohmann::ordered_json comparison_json(const std::vector<ComparisonRow>& rows);
std::vector<ComparisonRow> comparison_from_json(const nlohmann::ordered_json& j);

}  // namespace tt2fr
