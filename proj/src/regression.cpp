#include "tt2fr/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tt2fr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

void check_inputs(const MatrixXd& inputs, std::size_t outputs) {
    if (inputs.rows() == 0 || inputs.cols() == 0) {
        throw std::invalid_argument("dataset needs at least one row and one regressor");
    }
    if (static_cast<std::size_t>(inputs.rows()) != outputs) {
        throw std::invalid_argument("dataset has " + std::to_string(inputs.rows()) +
                                    " input rows but " + std::to_string(outputs) + " outputs");
    }
    for (Index i = 0; i < inputs.rows(); ++i) {
        for (Index j = 0; j < inputs.cols(); ++j) {
            if (!(inputs(i, j) > 0.0) || !std::isfinite(inputs(i, j))) {
                throw std::invalid_argument("input (" + std::to_string(i) + ", " +
                                            std::to_string(j) + ") must be strictly positive");
            }
        }
    }
}

// Adds sign * weight * (d'x + e)^2 to the objective, where d is sparse.
struct SquareAccumulator {
    QuadraticObjective& obj;

    void add(const std::vector<std::pair<Index, double>>& d, double e, double coeff) {
        if (coeff == 0.0) {
            return;
        }
        for (const auto& [i, di] : d) {
            for (const auto& [k, dk] : d) {
                obj.hessian(i, k) += 2.0 * coeff * di * dk;
            }
            obj.gradient(i) += 2.0 * coeff * e * di;
        }
        obj.constant += coeff * e * e;
    }
};

}  // namespace

void validate(const RegressionDataset& data) {
    check_inputs(data.inputs, data.outputs.size());
    for (const auto& t : data.outputs) {
        validate(t);
    }
}

void validate(const It2Dataset& data) {
    check_inputs(data.inputs, data.outputs.size());
    for (const auto& f : data.outputs) {
        validate(f);
    }
}

std::string_view to_string(ObjectiveMode m) {
    return m == ObjectiveMode::paper_literal ? "paper_literal" : "text_consistent";
}

ObjectiveMode objective_mode_from_string(std::string_view s) {
    if (s == "paper_literal") {
        return ObjectiveMode::paper_literal;
    }
    if (s == "text_consistent") {
        return ObjectiveMode::text_consistent;
    }
    throw std::invalid_argument("unknown objective mode '" + std::string(s) +
                                "' (expected paper_literal or text_consistent)");
}

void validate(const FitConfig& config) {
    if (!(config.h >= 0.0 && config.h < 1.0)) {
        throw std::invalid_argument("h must lie in [0, 1), got " + std::to_string(config.h));
    }
    for (double w : config.term_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::invalid_argument("term weights must be finite and nonnegative");
        }
    }
}

VectorXd pack(const CoefficientSet& c) {
    VectorXd x(layout::kWidth * static_cast<Index>(c.size()));
    for (std::size_t j = 0; j < c.size(); ++j) {
        const auto& t = c.terms[j];
        const auto jj = static_cast<Index>(j);
        x(layout::index(jj, layout::kALow)) = t.a_low;
        x(layout::index(jj, layout::kAUp)) = t.a_up;
        x(layout::index(jj, layout::kPeak)) = t.peak;
        x(layout::index(jj, layout::kCLow)) = t.c_low;
        x(layout::index(jj, layout::kCUp)) = t.c_up;
    }
    return x;
}

CoefficientSet unpack(const VectorXd& x) {
    CoefficientSet c;
    const Index q = x.size() / layout::kWidth;
    for (Index j = 0; j < q; ++j) {
        c.terms.push_back({x(layout::index(j, layout::kALow)), x(layout::index(j, layout::kAUp)),
                           x(layout::index(j, layout::kPeak)), x(layout::index(j, layout::kCLow)),
                           x(layout::index(j, layout::kCUp))});
    }
    return c;
}

QuadraticObjective objective_terms(const MatrixXd& inputs, std::span<const double> peaks,
                                   const FitConfig& config) {
    using namespace layout;
    const Index n = inputs.rows();
    const Index q = inputs.cols();
    const Index dim = kWidth * q;
    if (static_cast<std::size_t>(n) != peaks.size()) {
        throw std::invalid_argument("objective_terms: one observed peak per row required");
    }

    QuadraticObjective obj{MatrixXd::Zero(dim, dim), VectorXd::Zero(dim), 0.0};
    SquareAccumulator acc{obj};

    const auto& w = config.term_weights;
    const bool literal = config.objective_mode == ObjectiveMode::paper_literal;
    const double s3 = literal ? -1.0 : 1.0;
    const double s4 = literal ? 1.0 : -1.0;

    for (Index j = 0; j < q; ++j) {
        // Spread terms are sums over i of (X_ij * difference)^2.
        const double sq = inputs.col(j).squaredNorm();
        // I1: secondary ambiguity on both sides.
        acc.add({{index(j, kAUp), 1.0}, {index(j, kALow), -1.0}}, 0.0, w[0] * sq);
        acc.add({{index(j, kCUp), 1.0}, {index(j, kCLow), -1.0}}, 0.0, w[0] * sq);
        // I2: lower-membership support width.
        acc.add({{index(j, kCLow), 1.0}, {index(j, kAUp), -1.0}}, 0.0, w[1] * sq);
        // I4: necessity spread.
        acc.add({{index(j, kCLow), 1.0}, {index(j, kALow), -1.0}}, 0.0, s4 * w[3] * sq);
    }

    // I3: distance between predicted and observed peaks.
    for (Index i = 0; i < n; ++i) {
        std::vector<std::pair<Index, double>> d;
        d.reserve(static_cast<std::size_t>(q));
        for (Index j = 0; j < q; ++j) {
            d.emplace_back(index(j, kPeak), -inputs(i, j));
        }
        acc.add(d, peaks[static_cast<std::size_t>(i)], s3 * w[2]);
    }
    return obj;
}

ConstraintRows inclusion_constraints_it2(const It2Dataset& data, double h,
                                         NecessityRhs necessity_rhs) {
    using namespace layout;
    const Index n = data.inputs.rows();
    const Index q = data.inputs.cols();
    const Index dim = kWidth * q;
    const double g = 1.0 - h;

    ConstraintRows rows{MatrixXd::Zero(4 * n + kWidth * q, dim), VectorXd::Zero(4 * n + kWidth * q)};
    for (Index i = 0; i < n; ++i) {
        const auto& y = data.outputs[static_cast<std::size_t>(i)];
        const double qi = y.peak;
        for (Index j = 0; j < q; ++j) {
            const double x = data.inputs(i, j);
            // B - (1-h)(B - A_low) = hB + (1-h)A_low, and similarly below.
            rows.matrix(4 * i + 0, index(j, kPeak)) = h * x;
            rows.matrix(4 * i + 0, index(j, kALow)) = g * x;
            rows.matrix(4 * i + 1, index(j, kPeak)) = -h * x;
            rows.matrix(4 * i + 1, index(j, kCUp)) = -g * x;
            rows.matrix(4 * i + 2, index(j, kPeak)) = -h * x;
            rows.matrix(4 * i + 2, index(j, kAUp)) = -g * x;
            rows.matrix(4 * i + 3, index(j, kPeak)) = h * x;
            rows.matrix(4 * i + 3, index(j, kCLow)) = g * x;
        }
        rows.rhs(4 * i + 0) = qi - g * (qi - y.a_low);
        rows.rhs(4 * i + 1) = -(qi + g * (y.c_up - qi));
        rows.rhs(4 * i + 2) = -(qi - g * (qi - y.a_up));
        rows.rhs(4 * i + 3) = necessity_rhs == NecessityRhs::corrected ? qi + g * (y.c_low - qi)
                                                                       : qi - g * (y.c_low - qi);
    }

    const Index base = 4 * n;
    for (Index j = 0; j < q; ++j) {
        const Index r = base + kWidth * j;
        rows.matrix(r + 0, index(j, kALow)) = -1.0;
        rows.matrix(r + 1, index(j, kALow)) = 1.0;
        rows.matrix(r + 1, index(j, kAUp)) = -1.0;
        rows.matrix(r + 2, index(j, kAUp)) = 1.0;
        rows.matrix(r + 2, index(j, kPeak)) = -1.0;
        rows.matrix(r + 3, index(j, kPeak)) = 1.0;
        rows.matrix(r + 3, index(j, kCLow)) = -1.0;
        rows.matrix(r + 4, index(j, kCLow)) = 1.0;
        rows.matrix(r + 4, index(j, kCUp)) = -1.0;
    }
    return rows;
}

QpProblem assemble_it2fr(const It2Dataset& data, const FitConfig& config) {
    validate(data);
    validate(config);
    std::vector<double> peaks;
    peaks.reserve(data.outputs.size());
    for (const auto& y : data.outputs) {
        peaks.push_back(y.peak);
    }
    auto obj = objective_terms(data.inputs, peaks, config);
    auto rows = inclusion_constraints_it2(data, config.h, config.necessity_rhs);
    return QpProblem(std::move(obj.hessian), std::move(obj.gradient), obj.constant,
                     std::move(rows.matrix), std::move(rows.rhs));
}

FitResult fit_it2fr(const It2Dataset& data, const FitConfig& config) {
    const QpProblem problem = assemble_it2fr(data, config);
    FitResult result;
    result.solution = solve(problem, config.solver);
    switch (result.solution.status) {
        case QpStatus::infeasible: {
            const int idx = result.solution.active_set.empty() ? -1 : result.solution.active_set[0];
            throw FitError("fit is infeasible: constraint " + std::to_string(idx) +
                               " cannot be satisfied",
                           QpStatus::infeasible, idx);
        }
        case QpStatus::unbounded:
            throw FitError("fit objective is unbounded below on the feasible set",
                           QpStatus::unbounded, -1);
        default:
            break;
    }
    // The solver meets the ordering rows to within its tolerance; make it exact
    // so downstream arithmetic sees valid footprints.
    for (Index j = 0; j < data.inputs.cols(); ++j) {
        auto& x = result.solution.point;
        using namespace layout;
        x(index(j, kALow)) = std::max(x(index(j, kALow)), 0.0);
        for (Index f = kAUp; f <= kCUp; ++f) {
            x(index(j, f)) = std::max(x(index(j, f)), x(index(j, f - 1)));
        }
    }
    result.coefficients = unpack(result.solution.point);
    return result;
}

It2Dataset reduce_dataset(const RegressionDataset& data, double h) {
    validate(data);
    const auto reduced = reduce_all(data.outputs, h);
    It2Dataset out{data.inputs, {}};
    out.outputs.reserve(reduced.size());
    for (const auto& r : reduced) {
        out.outputs.push_back(r.to_fou());
    }
    return out;
}

FitResult fit_tt2fr(const RegressionDataset& data, const FitConfig& config) {
    validate(config);
    return fit_it2fr(reduce_dataset(data, config.h), config);
}

It2TriFou predict(const CoefficientSet& coeffs, std::span<const double> x_row) {
    return linear_combination(coeffs, x_row);
}

ReducedFou predicted_reduction(const It2TriFou& predicted, double h, double apex_fraction) {
    return reduce(Tt2Number{predicted, apex_fraction}, h);
}

double defuzzify(const It2TriFou& fou) {
    return fou.peak;
}

double centroid(const It2TriFou& fou) {
    const double upper = (fou.a_low + fou.peak + fou.c_up) / 3.0;
    const double lower = (fou.a_up + fou.peak + fou.c_low) / 3.0;
    return 0.5 * (upper + lower);
}

double max_constraint_violation(const It2Dataset& data, const CoefficientSet& coeffs, double h,
                                NecessityRhs necessity_rhs) {
    const auto rows = inclusion_constraints_it2(data, h, necessity_rhs);
    const VectorXd r = rows.matrix * pack(coeffs) - rows.rhs;
    return std::max(0.0, r.maxCoeff());
}

}  // namespace tt2fr
