// Acceptance checks, one PASS/FAIL line per criterion.
//
//   acceptance          run every criterion
//   acceptance 3 5      run only criteria 3 and 5
//
// Exit status is 0 iff every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "generators.hpp"
#include "hcut_oracle.hpp"
#include "tt2fr/eval.hpp"

using namespace tt2fr;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

bool same_bits(const VectorXd& a, const VectorXd& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

double max_abs_diff(const It2TriFou& a, const It2TriFou& b) {
    return std::max({std::abs(a.a_low - b.a_low), std::abs(a.a_up - b.a_up), std::abs(a.peak - b.peak),
                     std::abs(a.c_low - b.c_low), std::abs(a.c_up - b.c_up)});
}

// 1. reduce(t, 0) is the identity and reduce(t, 1) collapses each side.
Outcome identity_and_collapse() {
    testing::Gen gen(1001);
    double id_err = 0.0;
    double collapse = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const Tt2Number t{gen.fou(), gen.coin(0.7) ? 0.5 : gen.uniform(0, 1)};
        id_err = std::max(id_err, max_abs_diff(reduce(t, 0.0).to_fou(), t.fou));
        const auto r1 = reduce(t, 1.0);
        collapse = std::max({collapse, std::abs(r1.x1h - r1.x2h), std::abs(r1.x3h - r1.x4h)});
    }
    return {id_err <= 1e-12 && collapse < 1e-12,
            fmt("10^4 cases, identity error %.3g, collapse gap %.3g", id_err, collapse)};
}

// 2. Outer interval shrinks and inner interval grows as h increases.
Outcome nesting() {
    testing::Gen gen(1002);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto t = gen.tt2();
        double h = gen.uniform(0, 1);
        double h2 = gen.uniform(0, 1);
        if (h > h2) {
            std::swap(h, h2);
        }
        if (h == h2) {
            continue;
        }
        const auto a = reduce(t, h);
        const auto b = reduce(t, h2);
        worst = std::max({worst, a.x2h - b.x2h, b.x4h - a.x4h, b.x1h - a.x1h, a.x3h - b.x3h});
    }
    return {worst <= 1e-10, fmt("10^3 triples, worst nesting violation %.3g", std::max(worst, 0.0))};
}

// 3. Closed-form reduction against the geometric line-intersection oracle.
Outcome oracle_agreement() {
    testing::Gen gen(1003);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Tt2Number t{gen.proper_fou(), 0.5};
        const double h = gen.uniform(0, 1);
        const auto r = reduce(t, h);
        const auto o = testing::geometric_reduce(t, h);
        worst = std::max(worst, max_abs_diff(r.to_fou(), o.to_fou()));
    }
    const auto ex = reduce(Tt2Number{{0, 1, 2, 3, 4}, 0.5}, 0.5);
    const double ex_err = max_abs_diff(ex.to_fou(), It2TriFou{0.4, 0.857142857142857, 2, 3.142857142857143, 3.6});
    return {worst <= 1e-9 && ex_err <= 1e-9,
            fmt("10^3 cases, max deviation %.3g; worked example (0,1,2,3,4) h=0.5 error %.3g", worst, ex_err)};
}

// 4. QP solver vs exhaustive grid on random convex problems.
Outcome qp_correctness() {
    testing::Gen gen(1004);
    int grid_fail = 0;
    int kkt_fail = 0;
    int det_fail = 0;
    double worst_kkt = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = gen.integer(2, 3);
        const int m = gen.integer(1, 5);
        MatrixXd L(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                L(i, j) = gen.uniform(-1, 1);
            }
        }
        const MatrixXd H = L * L.transpose() + 0.1 * MatrixXd::Identity(n, n);
        VectorXd g(n);
        for (int i = 0; i < n; ++i) {
            g(i) = gen.uniform(-3, 3);
        }
        MatrixXd A(m, n);
        VectorXd b(m);
        for (int k = 0; k < m; ++k) {
            for (int j = 0; j < n; ++j) {
                A(k, j) = gen.uniform(-1, 1);
            }
            b(k) = gen.uniform(0.1, 1.0);
        }
        const QpProblem p(H, g, 0.0, A, b);
        const auto s = solve(p);
        worst_kkt = std::max(worst_kkt, s.kkt_residual);
        if (!(s.kkt_residual <= 1e-6) || p.max_violation(s.point) > 1e-8) {
            ++kkt_fail;
        }
        std::vector<std::pair<double, double>> box;
        for (int i = 0; i < n; ++i) {
            box.emplace_back(s.point(i) - 1.0, s.point(i) + 1.0);
        }
        const auto o = brute_force_oracle(p, box, n == 2 ? 401 : 81);
        for (int i = 0; i < n; ++i) {
            if (std::abs(s.point(i) - o.point(i)) > 2 * o.step[static_cast<std::size_t>(i)]) {
                ++grid_fail;
                break;
            }
        }
        SolverConfig serial;
        serial.parallel = false;
        if (!same_bits(solve(p).point, s.point) || !same_bits(solve(p, serial).point, s.point)) {
            ++det_fail;
        }
    }
    return {grid_fail == 0 && kkt_fail == 0 && det_fail == 0,
            fmt("100 problems: %d off-grid, %d KKT/feasibility failures (worst KKT %.3g), %d nondeterministic",
                grid_fail, kkt_fail, worst_kkt, det_fail)};
}

// 5. Recovery of known coefficients from noiseless data.
Outcome recovery_trials(bool crisp_lower, int& fits, double& worst_peak, double& worst_violation) {
    testing::Gen gen(crisp_lower ? 1055 : 1005);
    fits = 0;
    worst_peak = 0.0;
    worst_violation = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const auto truth = crisp_lower ? gen.crisp_lower_coefficients(2) : gen.coefficients(2);
        const auto data = gen.exact_dataset(truth, 30);
        for (double h : {0.0, 0.4, 0.9}) {
            for (auto mode : {ObjectiveMode::paper_literal, ObjectiveMode::text_consistent}) {
                FitConfig cfg;
                cfg.h = h;
                cfg.objective_mode = mode;
                const auto fit = fit_tt2fr(data, cfg);
                ++fits;
                for (std::size_t j = 0; j < 2; ++j) {
                    worst_peak = std::max(worst_peak, std::abs(fit.coefficients.terms[j].peak - truth.terms[j].peak));
                }
                worst_violation =
                    std::max(worst_violation, max_constraint_violation(reduce_dataset(data, h), fit.coefficients, h));
            }
        }
    }
    return {worst_peak < 1e-4 && worst_violation <= 1e-8, {}};
}

Outcome exact_recovery() {
    int fits = 0;
    double peak = 0.0;
    double viol = 0.0;
    auto out = recovery_trials(false, fits, peak, viol);
    out.detail = fmt("%d fits (5 datasets x h in {0,0.4,0.9} x 2 modes), worst peak error %.3g, worst violation %.3g",
                     fits, peak, viol);
    return out;
}

Outcome exact_recovery_crisp_lower() {
    int fits = 0;
    double peak = 0.0;
    double viol = 0.0;
    auto out = recovery_trials(true, fits, peak, viol);
    out.detail = fmt("generators with a_up = b = c_low: %d fits, worst peak error %.3g, worst violation %.3g", fits,
                     peak, viol);
    return out;
}

// 6. fit_tt2fr is bit-identical to fit_it2fr on pre-reduced data.
Outcome reduction_commutes() {
    testing::Gen gen(1006);
    int mismatches = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto data = gen.exact_dataset(gen.coefficients(2), gen.integer(5, 25));
        FitConfig cfg;
        cfg.h = gen.uniform(0.0, 0.95);
        cfg.objective_mode = gen.coin() ? ObjectiveMode::paper_literal : ObjectiveMode::text_consistent;
        const auto a = fit_tt2fr(data, cfg);
        const auto b = fit_it2fr(reduce_dataset(data, cfg.h), cfg);
        if (!same_bits(a.solution.point, b.solution.point)) {
            ++mismatches;
        }
    }
    return {mismatches == 0, fmt("20 datasets, %d mismatches", mismatches)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 7. Bundled sample series through fit and eval at h = 0.4.
Outcome end_to_end() {
    const fs::path data = TT2FR_DATA_DIR;
    const auto series = load_csv(data / "sample_series.csv");
    auto cfg = load_config(data / "config.json");
    cfg.fit.h = 0.4;

    const auto ds = build_dataset(series, cfg.fuzzifier);
    const auto [train, test] = split_by_config(ds, cfg);
    const auto fit = fit_tt2fr(train.data, cfg.fit);

    const auto base = fs::temp_directory_path() / "tt2fr_acceptance";
    fs::remove_all(base);
    const auto r1 = run_experiment(series, cfg);
    const auto r2 = run_experiment(series, cfg);
    write_artifacts(r1, base / "a");
    write_artifacts(r2, base / "b");
    const auto rep_a = slurp(base / "a" / "report.json");
    const bool deterministic = rep_a == slurp(base / "b" / "report.json") &&
                               slurp(base / "a" / "forecast.csv") == slurp(base / "b" / "forecast.csv") &&
                               same_bits(fit.solution.point, r1.solution.point);
    const auto csv = slurp(base / "a" / "forecast.csv");
    const auto csv_rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) - 1;
    fs::remove_all(base);

    const bool ok = series.size() >= 60 && deterministic && std::isfinite(r1.report.train_rmse) &&
                    csv_rows == ds.size() && r1.report.records.size() == ds.size();
    return {ok, fmt("%zu points, %zu evaluated dates, %zu CSV rows, train RMSE %.4f, test RMSE %.4f, %s", series.size(),
                    ds.size(), csv_rows, r1.report.train_rmse, r1.report.test_rmse,
                    deterministic ? "byte-identical reruns" : "reruns differ")};
}

// 8. RMSE unit values.
Outcome rmse_units() {
    const std::vector<double> a{0, 0};
    const std::vector<double> b{3, 4};
    const double v = rmse(a, b);
    const double z = rmse(b, b);
    return {std::abs(v - 3.535533906) <= 1e-9 && z == 0.0, fmt("rmse((0,0),(3,4)) = %.10f, rmse(a,a) = %g", v, z)};
}

// 9. The two objective modes give different spreads on a crafted instance.
Outcome modes_differ() {
    testing::Gen gen(81);
    const CoefficientSet truth{{{0.4, 0.7, 1.0, 1.2, 1.6}}};
    const auto data = gen.exact_dataset(truth, 12);
    FitConfig text;
    FitConfig literal;
    literal.objective_mode = ObjectiveMode::paper_literal;
    const auto a = fit_tt2fr(data, text);
    const auto b = fit_tt2fr(data, literal);
    const auto reduced = reduce_dataset(data, text.h);
    const double va = max_constraint_violation(reduced, a.coefficients, text.h);
    const double vb = max_constraint_violation(reduced, b.coefficients, literal.h);
    const auto spread = [](const It2TriFou& c) { return (c.c_low - c.a_up) + (c.c_up - c.a_low); };
    const double sa = spread(a.coefficients.terms[0]);
    const double sb = spread(b.coefficients.terms[0]);
    return {std::abs(sa - sb) > 1e-3 && va <= 1e-8 && vb <= 1e-8,
            fmt("total spread text_consistent %.6f vs paper_literal %.6f, violations %.3g / %.3g", sa, sb, va, vb)};
}

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0 = none
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {1, "h-cut identity and collapse", 1.0, identity_and_collapse},
        {2, "h-cut monotone nesting", 0.0, nesting},
        {3, "closed form vs geometric oracle", 0.0, oracle_agreement},
        {4, "QP correctness and determinism", 10.0, qp_correctness},
        {5, "exact recovery from noiseless data", 30.0, exact_recovery},
        {6, "reduction commutes with fitting", 0.0, reduction_commutes},
        {7, "end-to-end pipeline on the sample series", 60.0, end_to_end},
        {8, "RMSE unit values", 0.0, rmse_units},
        {9, "objective modes stay distinct", 0.0, modes_differ},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::atoi(argv[i]));
    }

    bool all_pass = true;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.contains(c.id)) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.time_limit > 0 && secs >= c.time_limit) {
            o.pass = false;
            o.detail += fmt("; over the %.0f s limit", c.time_limit);
        }
        all_pass = all_pass && o.pass;
        std::printf("criterion %d: %s  %s: %s (%.3f s)\n", c.id, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                    secs);
        if (c.id == 5) {
            const auto info = exact_recovery_crisp_lower();
            std::printf("criterion 5 (info): %s  identifiable subclass: %s\n", info.pass ? "PASS" : "FAIL",
                        info.detail.c_str());
        }
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
