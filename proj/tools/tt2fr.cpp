// Command-line front end: fuzzify, fit, predict, eval, compare.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 infeasible fit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tt2fr/data.hpp"
#include "tt2fr/eval.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tt2fr;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kInfeasible = 4 };

struct Common {
    std::string input;
    std::string config;
    std::optional<double> h;
    std::optional<std::string> mode;
    std::optional<std::uint64_t> seed;
    std::string out_dir = ".";
};

void add_common(CLI::App* cmd, Common& c, bool needs_input = true) {
    // -h would clash with --h.
    cmd->set_help_flag("--help", "Print this help message and exit");
    auto* in = cmd->add_option("-i,--input", c.input, "Series CSV (date,value)");
    if (needs_input) {
        in->required();
    }
    cmd->add_option("-c,--config", c.config, "Experiment config JSON");
    cmd->add_option("--h", c.h, "Cut level in [0, 1)");
    cmd->add_option("--mode", c.mode, "Objective mode: paper_literal or text_consistent");
    cmd->add_option("--seed", c.seed, "Multi-start seed");
    cmd->add_option("-o,--out-dir", c.out_dir, "Output directory");
}

ExperimentConfig resolve_config(const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.h) {
        cfg.fit.h = *c.h;
    }
    if (c.mode) {
        try {
            cfg.fit.objective_mode = objective_mode_from_string(*c.mode);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    if (c.seed) {
        cfg.fit.solver.seed = *c.seed;
    }
    validate(cfg);
    return cfg;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path);
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
}

int cmd_fuzzify(const Common& c, const std::string& out) {
    const auto cfg = resolve_config(c);
    const auto ds = build_dataset(load_csv(fs::path(c.input)), cfg.fuzzifier);
    const auto text = to_json(ds).dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
    } else {
        write_file_atomic(out, text);
    }
    return kOk;
}

int cmd_fit(const Common& c) {
    const auto cfg = resolve_config(c);
    const auto ds = build_dataset(load_csv(fs::path(c.input)), cfg.fuzzifier);
    const auto [train, test] = split_by_config(ds, cfg);
    const auto fit = fit_tt2fr(train.data, cfg.fit);

    json j;
    j["schema_version"] = kSchemaVersion;
    j["h"] = cfg.fit.h;
    j["objective_mode"] = to_string(cfg.fit.objective_mode);
    j["train_size"] = train.size();
    j["solver"]["status"] = to_string(fit.solution.status);
    j["solver"]["objective_value"] = fit.solution.objective_value;
    j["solver"]["kkt_residual"] = fit.solution.kkt_residual;
    j["coefficients"] = to_json(fit.coefficients);
    fs::create_directories(c.out_dir);
    write_file_atomic(fs::path(c.out_dir) / "coefficients.json", j.dump(2) + "\n");

    std::cout << "fitted " << fit.coefficients.size() << " coefficients on " << train.size() << " rows ("
              << to_string(fit.solution.status) << ", objective " << fit.solution.objective_value << ")\n";
    return kOk;
}

int cmd_predict(const Common& c, const std::string& coeff_path) {
    const auto cfg = resolve_config(c);
    const auto coeffs = coefficients_from_json(read_json(coeff_path));
    const auto ds = build_dataset(load_csv(fs::path(c.input)), cfg.fuzzifier);
    if (static_cast<std::size_t>(ds.data.inputs.cols()) != coeffs.size()) {
        throw DataError("coefficients have " + std::to_string(coeffs.size()) + " terms but the dataset has " +
                        std::to_string(ds.data.inputs.cols()) + " regressors");
    }
    const auto recs = forecast(ds, coeffs, cfg, false);
    fs::create_directories(c.out_dir);
    write_file_atomic(fs::path(c.out_dir) / "forecast.csv", forecast_csv(recs));
    std::cout << "wrote " << recs.size() << " forecasts\n";
    return kOk;
}

int cmd_eval(const Common& c, bool no_chart) {
    auto cfg = resolve_config(c);
    if (no_chart) {
        cfg.chart = false;
    }
    const auto res = run_experiment(load_csv(fs::path(c.input)), cfg);
    write_artifacts(res, c.out_dir);
    std::cout << render_table(compare(std::vector<ForecastReport>{res.report, res.baseline}));
    return kOk;
}

int cmd_compare(const std::vector<std::string>& reports, const std::string& out) {
    std::vector<ComparisonRow> rows;
    for (const auto& p : reports) {
        const auto r = comparison_rows_from_report(read_json(p));
        rows.insert(rows.end(), r.begin(), r.end());
    }
    rows = compare(rows);
    std::cout << render_table(rows);
    if (!out.empty()) {
        write_file_atomic(out, comparison_json(rows).dump(2) + "\n");
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Triangular type-2 fuzzy linear regression for crisp time series"};
    app.require_subcommand(1);
    app.set_help_flag("-h,--help", "Print this help message and exit");

    Common common;
    std::string fuzzify_out;
    auto* fuzzify = app.add_subcommand("fuzzify", "Fuzzify windows and print the regression dataset as JSON");
    add_common(fuzzify, common);
    fuzzify->add_option("--out", fuzzify_out, "Write the dataset here instead of stdout");

    auto* fit = app.add_subcommand("fit", "Fit coefficients on the training rows; writes coefficients.json");
    add_common(fit, common);

    std::string coeff_path;
    auto* predict = app.add_subcommand("predict", "Forecast every row with saved coefficients; writes forecast.csv");
    add_common(predict, common);
    predict->add_option("--coefficients", coeff_path, "coefficients.json from fit")->required();

    bool no_chart = false;
    auto* eval = app.add_subcommand("eval", "Fit, forecast and score; writes report, forecast CSV, chart");
    add_common(eval, common);
    eval->add_flag("--no-chart", no_chart, "Skip chart.svg");

    std::vector<std::string> reports;
    std::string compare_out;
    auto* cmp = app.add_subcommand("compare", "Rank report.json files by test RMSE");
    cmp->add_option("reports", reports, "report.json files")->required();
    cmp->add_option("--out", compare_out, "Write the table as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*fuzzify) {
            return cmd_fuzzify(common, fuzzify_out);
        }
        if (*fit) {
            return cmd_fit(common);
        }
        if (*predict) {
            return cmd_predict(common, coeff_path);
        }
        if (*eval) {
            return cmd_eval(common, no_chart);
        }
        return cmd_compare(reports, compare_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const FitError& e) {
        std::cerr << "fit failed: " << e.what() << "\n";
        return kInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
