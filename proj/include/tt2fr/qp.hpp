#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace tt2fr {

/// Dense quadratic program
///
///     minimize   1/2 x'Hx + g'x + c
///     subject to A x <= b
///
/// H may be indefinite. The Hessian is symmetrized on construction.
class QpProblem {
public:
    QpProblem() = default;
    QpProblem(Eigen::MatrixXd hessian, Eigen::VectorXd gradient, double constant,
              Eigen::MatrixXd constraint_matrix, Eigen::VectorXd constraint_rhs);

    /// Unconstrained problem of dimension `dim` with zero objective.
    static QpProblem zeros(Eigen::Index dim);

    Eigen::Index dim() const { return gradient_.size(); }
    Eigen::Index num_constraints() const { return constraint_rhs_.size(); }

    const Eigen::MatrixXd& hessian() const { return hessian_; }
    const Eigen::VectorXd& gradient_vec() const { return gradient_; }
    double constant() const { return constant_; }
    const Eigen::MatrixXd& constraint_matrix() const { return constraint_matrix_; }
    const Eigen::VectorXd& constraint_rhs() const { return constraint_rhs_; }

    double objective(const Eigen::VectorXd& x) const;
    Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x) const;
    /// Largest constraint violation max_i (a_i x - b_i)_+.
    double max_violation(const Eigen::VectorXd& x) const;

private:
    Eigen::MatrixXd hessian_;
    Eigen::VectorXd gradient_;
    double constant_ = 0.0;
    Eigen::MatrixXd constraint_matrix_;
    Eigen::VectorXd constraint_rhs_;
};

enum class Curvature { convex, indefinite };

enum class QpStatus { optimal_convex, local_stationary, infeasible, unbounded };

std::string_view to_string(QpStatus s);

struct SolverConfig {
    double feasibility_tol = 1e-8;
    double stationarity_tol = 1e-6;
    int max_iterations = 10000;
    int starts = 16;
    std::uint64_t seed = 42;
    /// Artificial |x_i| <= box_bound guard added for indefinite problems.
    double box_bound = 1e9;
    /// Run the multi-start loop on OpenMP threads.
    bool parallel = true;
};

struct QpSolution {
    Eigen::VectorXd point;
    double objective_value = 0.0;
    double kkt_residual = 0.0;
    QpStatus status = QpStatus::infeasible;
    /// Indices of constraints in the final working set.
    std::vector<int> active_set;
    /// Nonnegative multipliers matching active_set.
    std::vector<double> multipliers;
    /// Index of the start that produced the point (0 for convex problems).
    int start_index = 0;
    int iterations = 0;
};

/// Convex iff the smallest Hessian eigenvalue is >= -1e-10 * spectral scale.
Curvature classify(const QpProblem& p);

/// Solves the problem.
///
/// Convex problems run one primal active-set solve from a Phase-1 feasible
/// point and report optimal_convex. Indefinite problems run config.starts
/// seeded starts (projections of random points and vertices of random
/// linear objectives), each descending to a second-order stationary point;
/// the lowest objective wins with ties broken by the lower start index. Such
/// points are certified stationary, not globally optimal.
QpSolution solve(const QpProblem& p, const SolverConfig& config = {});

/// Stationarity residual of `x` for the given working set, as used by solve:
/// || grad f(x) + A_W' lambda_+ ||_inf / (1 + ||grad f(x)||_inf), with lambda the
/// least-squares multipliers of the working set.
double kkt_residual(const QpProblem& p, const Eigen::VectorXd& x, const std::vector<int>& working);

/// Exhaustive grid search over a box, for checking solve on tiny problems.
struct GridOptimum {
    Eigen::VectorXd point;
    double objective_value = 0.0;
    std::vector<double> step;
};

/// Evaluates every grid point of `box` (per-dimension [lo, hi]) at
/// `resolution` points per axis and returns the best feasible one.
/// Throws std::invalid_argument for dim > 4 and std::runtime_error when no
/// grid point is feasible.
GridOptimum brute_force_oracle(const QpProblem& p,
                               const std::vector<std::pair<double, double>>& box,
                               int resolution, double feasibility_tol = 1e-12);

}  // namespace tt2fr
