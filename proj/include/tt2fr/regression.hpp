#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tt2fr/fuzzy_number.hpp"
#include "tt2fr/hcut.hpp"
#include "tt2fr/qp.hpp"

namespace tt2fr {

/// Crisp positive inputs (n x q) with one triangular type-2 output per row.
struct RegressionDataset {
    Eigen::MatrixXd inputs;
    std::vector<Tt2Number> outputs;

    Eigen::Index rows() const { return inputs.rows(); }
    Eigen::Index regressors() const { return inputs.cols(); }
};

/// Same inputs with interval type-2 outputs (p_low, p_up, q, r_low, r_up).
struct It2Dataset {
    Eigen::MatrixXd inputs;
    std::vector<It2TriFou> outputs;
};

/// Throws std::invalid_argument on empty data, nonpositive inputs, size
/// mismatch or invalid outputs.
void validate(const RegressionDataset& data);
void validate(const It2Dataset& data);

/// How the four objective terms are combined.
///
/// paper_literal:   +I1 +I2 -I3 +I4
/// text_consistent: +I1 +I2 +I3 -I4 (peak distance minimized, necessity
///                  spread maximized)
enum class ObjectiveMode { paper_literal, text_consistent };

/// Right-hand side of the lower-membership right-side necessity row.
///
/// corrected: B + (1-h)(C_low - B) <= q + (1-h)(r_low - q), which reduces to
///            C_low <= r_low at h = 0.
/// literal:   ... <= q - (1-h)(r_low - q) as originally printed.
enum class NecessityRhs { corrected, literal };

std::string_view to_string(ObjectiveMode m);
ObjectiveMode objective_mode_from_string(std::string_view s);

struct FitConfig {
    double h = 0.4;
    /// Weights of I1..I4.
    std::array<double, 4> term_weights{1.0, 1.0, 1.0, 1.0};
    ObjectiveMode objective_mode = ObjectiveMode::text_consistent;
    NecessityRhs necessity_rhs = NecessityRhs::corrected;
    SolverConfig solver;
};

/// Throws std::invalid_argument unless 0 <= h < 1 and all weights are >= 0.
void validate(const FitConfig& config);

/// Coefficient vector layout: regressor j owns entries 5j..5j+4 in the order
/// (a_low, a_up, b, c_low, c_up).
namespace layout {
inline constexpr Eigen::Index kALow = 0;
inline constexpr Eigen::Index kAUp = 1;
inline constexpr Eigen::Index kPeak = 2;
inline constexpr Eigen::Index kCLow = 3;
inline constexpr Eigen::Index kCUp = 4;
inline constexpr Eigen::Index kWidth = 5;
inline Eigen::Index index(Eigen::Index j, Eigen::Index field) { return kWidth * j + field; }
}  // namespace layout

Eigen::VectorXd pack(const CoefficientSet& c);
CoefficientSet unpack(const Eigen::VectorXd& x);

/// Quadratic part (H, g, c) of the fitting objective.
struct QuadraticObjective {
    Eigen::MatrixXd hessian;
    Eigen::VectorXd gradient;
    double constant = 0.0;

    double value(const Eigen::VectorXd& x) const {
        return 0.5 * x.dot(hessian * x) + gradient.dot(x) + constant;
    }
};

/// Builds lambda1*I1 + lambda2*I2 +/- lambda3*I3 -/+ lambda4*I4 over the 5q
/// coefficient vector. `peaks` are the observed peaks q_i.
QuadraticObjective objective_terms(const Eigen::MatrixXd& inputs, std::span<const double> peaks,
                                   const FitConfig& config);

/// Linear rows A x <= b.
struct ConstraintRows {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};

/// Four h-level inclusion rows per observation (possibility on the upper
/// membership, necessity on the lower), in the order
///   4i+0  possibility, left   4i+1  possibility, right
///   4i+2  necessity, left     4i+3  necessity, right
/// followed by the 5q ordering rows 0 <= a_low <= a_up <= b <= c_low <= c_up.
ConstraintRows inclusion_constraints_it2(const It2Dataset& data, double h,
                                         NecessityRhs necessity_rhs = NecessityRhs::corrected);

/// Full QP for an interval type-2 dataset.
QpProblem assemble_it2fr(const It2Dataset& data, const FitConfig& config);

struct FitResult {
    CoefficientSet coefficients;
    QpSolution solution;
};

/// Thrown when a fit has no acceptable solution.
class FitError : public std::runtime_error {
public:
    FitError(const std::string& what, QpStatus status, int constraint_index)
        : std::runtime_error(what), status_(status), constraint_index_(constraint_index) {}

    QpStatus status() const { return status_; }
    /// First constraint violated at the best point found (infeasible only).
    int constraint_index() const { return constraint_index_; }

private:
    QpStatus status_;
    int constraint_index_;
};

/// Fits interval type-2 coefficients. The returned ordering holds exactly
/// (the solver point is clipped by at most its feasibility tolerance). Throws
/// FitError when the QP is infeasible or unbounded.
FitResult fit_it2fr(const It2Dataset& data, const FitConfig& config);

/// Replaces every observed output by its h-cut reduction at config.h.
It2Dataset reduce_dataset(const RegressionDataset& data, double h);

/// Reduces each observed output at config.h and fits the resulting interval
/// type-2 problem.
FitResult fit_tt2fr(const RegressionDataset& data, const FitConfig& config);

It2TriFou predict(const CoefficientSet& coeffs, std::span<const double> x_row);

/// h-cut of a predicted footprint with the given secondary apex fraction,
/// anchored at its peak. Used for reporting the predicted band only.
ReducedFou predicted_reduction(const It2TriFou& predicted, double h, double apex_fraction = 0.5);

/// Peak of the footprint.
double defuzzify(const It2TriFou& fou);

/// Mean of the upper and lower triangle centroids.
double centroid(const It2TriFou& fou);

/// Largest violation of the inclusion and ordering rows by `coeffs`.
double max_constraint_violation(const It2Dataset& data, const CoefficientSet& coeffs, double h,
                                NecessityRhs necessity_rhs = NecessityRhs::corrected);

}  // namespace tt2fr
