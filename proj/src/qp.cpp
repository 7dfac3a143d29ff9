#include "tt2fr/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace tt2fr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

QpProblem::QpProblem(MatrixXd hessian, VectorXd gradient, double constant,
                     MatrixXd constraint_matrix, VectorXd constraint_rhs)
    : hessian_(std::move(hessian)),
      gradient_(std::move(gradient)),
      constant_(constant),
      constraint_matrix_(std::move(constraint_matrix)),
      constraint_rhs_(std::move(constraint_rhs)) {
    const Index n = gradient_.size();
    if (n == 0) {
        throw std::invalid_argument("QpProblem: dimension must be positive");
    }
    if (hessian_.rows() != n || hessian_.cols() != n) {
        throw std::invalid_argument("QpProblem: hessian must be " + std::to_string(n) + "x" +
                                    std::to_string(n));
    }
    if (constraint_matrix_.rows() != constraint_rhs_.size()) {
        throw std::invalid_argument("QpProblem: constraint rows and rhs length differ");
    }
    if (constraint_matrix_.rows() > 0 && constraint_matrix_.cols() != n) {
        throw std::invalid_argument("QpProblem: constraint matrix must have " +
                                    std::to_string(n) + " columns");
    }
    if (constraint_matrix_.rows() == 0) {
        constraint_matrix_.resize(0, n);
    }
    hessian_ = (0.5 * (hessian_ + hessian_.transpose())).eval();
}

QpProblem QpProblem::zeros(Index dim) {
    return QpProblem(MatrixXd::Zero(dim, dim), VectorXd::Zero(dim), 0.0, MatrixXd(0, dim),
                     VectorXd(0));
}

double QpProblem::objective(const VectorXd& x) const {
    return 0.5 * x.dot(hessian_ * x) + gradient_.dot(x) + constant_;
}

VectorXd QpProblem::objective_gradient(const VectorXd& x) const {
    return hessian_ * x + gradient_;
}

double QpProblem::max_violation(const VectorXd& x) const {
    if (num_constraints() == 0) {
        return 0.0;
    }
    return std::max(0.0, (constraint_matrix_ * x - constraint_rhs_).maxCoeff());
}

std::string_view to_string(QpStatus s) {
    switch (s) {
        case QpStatus::optimal_convex:
            return "optimal_convex";
        case QpStatus::local_stationary:
            return "local_stationary";
        case QpStatus::infeasible:
            return "infeasible";
        case QpStatus::unbounded:
            return "unbounded";
    }
    return "unknown";
}

Curvature classify(const QpProblem& p) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(p.hessian(), Eigen::EigenvaluesOnly);
    const VectorXd& mu = eig.eigenvalues();
    const double scale = mu.cwiseAbs().maxCoeff();
    return mu.minCoeff() >= -1e-10 * scale ? Curvature::convex : Curvature::indefinite;
}

namespace {

enum class Outcome { converged, unbounded, iteration_limit };

struct ActiveSetResult {
    VectorXd x;
    std::vector<int> working;
    Outcome outcome = Outcome::converged;
    int iterations = 0;
};

MatrixXd rows_of(const MatrixXd& a, const std::vector<int>& idx) {
    MatrixXd out(static_cast<Index>(idx.size()), a.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.row(static_cast<Index>(k)) = a.row(idx[k]);
    }
    return out;
}

// Primal active-set method for min 1/2 x'Hx + g'x s.t. Ax <= b from a
// feasible x with a linearly independent working set of constraints that are
// tight at x. Works for indefinite H: negative or zero curvature in the
// null space of the working set is followed as a ray up to the first
// blocking constraint. Terminates at a point satisfying the first-order KKT
// conditions with a positive semidefinite reduced Hessian.
ActiveSetResult active_set(const MatrixXd& H, const VectorXd& g, const MatrixXd& A,
                           const VectorXd& b, VectorXd x, std::vector<int> working,
                           int max_iterations) {
    const Index n = g.size();
    const Index m_total = A.rows();
    const double h_scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    const double curv_tol = 1e-10 * h_scale;

    VectorXd row_norm(m_total);
    for (Index i = 0; i < m_total; ++i) {
        row_norm(i) = std::max(A.row(i).norm(), std::numeric_limits<double>::min());
    }

    std::vector<char> in_working(static_cast<std::size_t>(m_total), 0);
    for (int i : working) {
        in_working[static_cast<std::size_t>(i)] = 1;
    }

    ActiveSetResult res;
    int zero_steps = 0;

    for (int iter = 0; iter < max_iterations; ++iter) {
        res.iterations = iter + 1;
        const VectorXd gk = H * x + g;
        const double g_scale = 1.0 + gk.cwiseAbs().maxCoeff() + h_scale * x.cwiseAbs().maxCoeff();
        const double grad_tol = 1e-11 * g_scale;
        const bool bland = zero_steps > 25;

        const auto m = static_cast<Index>(working.size());
        MatrixXd Z;
        MatrixXd Q;
        MatrixXd R;
        if (m == 0) {
            Z = MatrixXd::Identity(n, n);
        } else {
            const MatrixXd At = rows_of(A, working).transpose();
            Eigen::HouseholderQR<MatrixXd> qr(At);
            Q = qr.householderQ() * MatrixXd::Identity(n, n);
            R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
            Z = Q.rightCols(n - m);
        }

        VectorXd direction;
        bool is_ray = false;
        if (Z.cols() > 0) {
            const VectorXd rg = Z.transpose() * gk;
            MatrixXd M = Z.transpose() * H * Z;
            M = (0.5 * (M + M.transpose())).eval();
            Eigen::SelfAdjointEigenSolver<MatrixXd> eig(M);
            const VectorXd& mu = eig.eigenvalues();
            const MatrixXd& V = eig.eigenvectors();
            const VectorXd r = V.transpose() * rg;

            if (mu(0) < -curv_tol) {
                VectorXd d = V.col(0);
                if (r(0) > 0.0) {
                    d = -d;
                }
                direction = Z * d;
                is_ray = true;
            } else {
                VectorXd flat = VectorXd::Zero(mu.size());
                VectorXd newton = VectorXd::Zero(mu.size());
                for (Index k = 0; k < mu.size(); ++k) {
                    if (mu(k) <= curv_tol) {
                        flat(k) = -r(k);
                    } else {
                        newton(k) = -r(k) / mu(k);
                    }
                }
                if (flat.cwiseAbs().maxCoeff() > grad_tol) {
                    direction = Z * (V * flat);
                    is_ray = true;
                } else if (rg.cwiseAbs().maxCoeff() > grad_tol) {
                    direction = Z * (V * newton);
                    if (direction.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + x.cwiseAbs().maxCoeff())) {
                        direction.resize(0);
                    }
                }
            }
        }

        if (direction.size() == 0) {
            // Stationary on the working manifold: check multiplier signs.
            if (m == 0) {
                res.outcome = Outcome::converged;
                break;
            }
            const VectorXd lambda =
                -R.triangularView<Eigen::Upper>().solve(Q.leftCols(m).transpose() * gk);
            const double lambda_tol = 1e-10 * (1.0 + gk.cwiseAbs().maxCoeff());
            Index drop = -1;
            double worst = 0.0;
            for (Index k = 0; k < m; ++k) {
                const double scaled = lambda(k) * row_norm(working[static_cast<std::size_t>(k)]);
                if (scaled >= -lambda_tol) {
                    continue;
                }
                if (bland) {
                    if (drop < 0 || working[static_cast<std::size_t>(k)] <
                                        working[static_cast<std::size_t>(drop)]) {
                        drop = k;
                    }
                } else if (scaled < worst) {
                    worst = scaled;
                    drop = k;
                }
            }
            if (drop < 0) {
                res.outcome = Outcome::converged;
                break;
            }
            in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)])] = 0;
            working.erase(working.begin() + drop);
            continue;
        }

        // Ratio test.
        const double d_norm = direction.norm();
        double alpha = is_ray ? std::numeric_limits<double>::infinity() : 1.0;
        Index blocking = -1;
        for (Index i = 0; i < m_total; ++i) {
            if (in_working[static_cast<std::size_t>(i)]) {
                continue;
            }
            const double ad = A.row(i).dot(direction);
            if (ad <= 1e-15 * row_norm(i) * d_norm) {
                continue;
            }
            const double slack = std::max(0.0, b(i) - A.row(i).dot(x));
            const double step = slack / ad;
            if (step < alpha) {
                alpha = step;
                blocking = i;
            }
        }

        if (blocking < 0 && is_ray) {
            res.outcome = Outcome::unbounded;
            res.x = x;
            res.working = working;
            return res;
        }

        x += alpha * direction;
        zero_steps = alpha == 0.0 ? zero_steps + 1 : 0;
        if (blocking >= 0) {
            working.push_back(static_cast<int>(blocking));
            in_working[static_cast<std::size_t>(blocking)] = 1;
        }
        if (iter + 1 == max_iterations) {
            res.outcome = Outcome::iteration_limit;
        }
    }

    res.x = std::move(x);
    res.working = std::move(working);
    return res;
}

struct PhaseOne {
    bool feasible = false;
    VectorXd x;
    int first_violated = -1;
};

// Minimizes the largest violation t over (x, t) with A x - t <= b, t >= 0,
// starting from x0.
PhaseOne phase_one(const MatrixXd& A, const VectorXd& b, const VectorXd& x0, double tol,
                   int max_iterations) {
    const Index n = x0.size();
    const Index m = A.rows();
    PhaseOne out;
    const double initial = m == 0 ? 0.0 : (A * x0 - b).maxCoeff();
    if (initial <= 0.0) {
        out.feasible = true;
        out.x = x0;
        return out;
    }

    MatrixXd A1 = MatrixXd::Zero(m + 1, n + 1);
    A1.topLeftCorner(m, n) = A;
    A1.col(n).head(m).setConstant(-1.0);
    A1(m, n) = -1.0;
    VectorXd b1(m + 1);
    b1.head(m) = b;
    b1(m) = 0.0;

    VectorXd z(n + 1);
    z.head(n) = x0;
    z(n) = initial;
    VectorXd g1 = VectorXd::Zero(n + 1);
    g1(n) = 1.0;

    const auto r = active_set(MatrixXd::Zero(n + 1, n + 1), g1, A1, b1, z, {}, max_iterations);
    out.x = r.x.head(n);
    const VectorXd viol = A * out.x - b;
    out.feasible = viol.maxCoeff() <= tol;
    if (!out.feasible) {
        for (Index i = 0; i < m; ++i) {
            if (viol(i) > tol) {
                out.first_violated = static_cast<int>(i);
                break;
            }
        }
    }
    return out;
}

std::vector<int> tight_set(const MatrixXd& A, const VectorXd& b, const VectorXd& x,
                           const std::vector<int>& candidates) {
    // Keep only constraints that are still tight; they remain independent.
    std::vector<int> out;
    for (int i : candidates) {
        const double slack = b(i) - A.row(i).dot(x);
        if (std::abs(slack) <= 1e-9 * (1.0 + std::abs(b(i)))) {
            out.push_back(i);
        }
    }
    return out;
}

struct StartResult {
    VectorXd x;
    std::vector<int> working;
    double objective = std::numeric_limits<double>::infinity();
    Outcome outcome = Outcome::iteration_limit;
    int iterations = 0;
    bool ok = false;
};

std::uint64_t start_seed(std::uint64_t seed, int k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

StartResult run_start(const QpProblem& p, const MatrixXd& A, const VectorXd& b,
                      const VectorXd& x_feas, int k, const SolverConfig& cfg) {
    const Index n = p.dim();
    VectorXd x0 = x_feas;
    std::vector<int> working;

    if (k > 0) {
        std::mt19937_64 rng(start_seed(cfg.seed, k));
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        const double radius = 1.0 + x_feas.cwiseAbs().maxCoeff();
        const bool vertex_start = n <= 12 && k % 2 == 1;
        if (vertex_start) {
            VectorXd c(n);
            for (Index i = 0; i < n; ++i) {
                c(i) = unit(rng);
            }
            // Vertices of a local box around the feasible point; an open
            // feasible direction must not send the start to the artificial box.
            const Index m = A.rows();
            MatrixXd Av(m + 2 * n, n);
            VectorXd bv(m + 2 * n);
            Av.topRows(m) = A;
            Av.middleRows(m, n) = MatrixXd::Identity(n, n);
            Av.bottomRows(n) = -MatrixXd::Identity(n, n);
            bv.head(m) = b;
            bv.segment(m, n) = x_feas.array() + 4.0 * radius;
            bv.tail(n) = -(x_feas.array() - 4.0 * radius);
            const auto r = active_set(MatrixXd::Zero(n, n), c, Av, bv, x_feas, {}, cfg.max_iterations);
            x0 = r.x;
            for (int i : r.working) {
                if (i < m) {
                    working.push_back(i);
                }
            }
        } else {
            VectorXd target(n);
            for (Index i = 0; i < n; ++i) {
                target(i) = x_feas(i) + radius * unit(rng);
            }
            const auto r = active_set(MatrixXd::Identity(n, n), -target, A, b, x_feas, {},
                                      cfg.max_iterations);
            x0 = r.x;
            working = r.working;
        }
        working = tight_set(A, b, x0, working);
    }

    StartResult out;
    const auto r =
        active_set(p.hessian(), p.gradient_vec(), A, b, x0, working, cfg.max_iterations);
    out.x = r.x;
    out.working = r.working;
    out.outcome = r.outcome;
    out.iterations = r.iterations;
    out.objective = p.objective(r.x);
    out.ok = r.outcome != Outcome::unbounded && std::isfinite(out.objective);
    return out;
}

}  // namespace

double kkt_residual(const QpProblem& p, const VectorXd& x, const std::vector<int>& working) {
    const VectorXd gk = p.objective_gradient(x);
    const double denom = 1.0 + gk.cwiseAbs().maxCoeff();
    if (working.empty()) {
        return gk.cwiseAbs().maxCoeff() / denom;
    }
    const MatrixXd At = rows_of(p.constraint_matrix(), working).transpose();
    VectorXd lambda = At.colPivHouseholderQr().solve(-gk);
    lambda = lambda.cwiseMax(0.0);
    return (gk + At * lambda).cwiseAbs().maxCoeff() / denom;
}

QpSolution solve(const QpProblem& p, const SolverConfig& config) {
    const Index n = p.dim();
    const Index m = p.num_constraints();
    const Curvature curvature = classify(p);

    QpSolution sol;

    // Indefinite problems get an artificial box so every descent terminates.
    MatrixXd A = p.constraint_matrix();
    VectorXd b = p.constraint_rhs();
    if (curvature == Curvature::indefinite) {
        A.conservativeResize(m + 2 * n, n);
        b.conservativeResize(m + 2 * n);
        A.bottomRows(2 * n).setZero();
        for (Index i = 0; i < n; ++i) {
            A(m + i, i) = 1.0;
            A(m + n + i, i) = -1.0;
            b(m + i) = config.box_bound;
            b(m + n + i) = config.box_bound;
        }
    }

    const PhaseOne p1 =
        phase_one(A, b, VectorXd::Zero(n), config.feasibility_tol, config.max_iterations);
    if (!p1.feasible) {
        sol.status = QpStatus::infeasible;
        sol.point = p1.x;
        sol.objective_value = p.objective(p1.x);
        sol.active_set = {p1.first_violated};
        return sol;
    }

    const int starts = curvature == Curvature::convex ? 1 : std::max(1, config.starts);
    std::vector<StartResult> results(static_cast<std::size_t>(starts));

#pragma omp parallel for schedule(dynamic, 1) if (config.parallel && starts > 1)
    for (int k = 0; k < starts; ++k) {
        results[static_cast<std::size_t>(k)] = run_start(p, A, b, p1.x, k, config);
    }

    int best = -1;
    for (int k = 0; k < starts; ++k) {
        const auto& r = results[static_cast<std::size_t>(k)];
        if (!r.ok) {
            continue;
        }
        if (best < 0 || r.objective < results[static_cast<std::size_t>(best)].objective) {
            best = k;
        }
    }

    if (best < 0) {
        sol.status = QpStatus::unbounded;
        sol.point = results.front().x;
        sol.objective_value = -std::numeric_limits<double>::infinity();
        sol.iterations = results.front().iterations;
        return sol;
    }

    const auto& r = results[static_cast<std::size_t>(best)];
    sol.point = r.x;
    sol.objective_value = r.objective;
    sol.start_index = best;
    sol.iterations = r.iterations;

    bool on_box = false;
    for (int i : r.working) {
        if (i >= m) {
            on_box = true;
        } else {
            sol.active_set.push_back(i);
        }
    }
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.kkt_residual = kkt_residual(p, sol.point, sol.active_set);

    if (!sol.active_set.empty()) {
        const MatrixXd At = rows_of(p.constraint_matrix(), sol.active_set).transpose();
        const VectorXd lambda =
            At.colPivHouseholderQr().solve(-p.objective_gradient(sol.point)).cwiseMax(0.0);
        sol.multipliers.assign(lambda.data(), lambda.data() + lambda.size());
    }

    if (on_box) {
        sol.status = QpStatus::unbounded;
    } else {
        sol.status = curvature == Curvature::convex ? QpStatus::optimal_convex
                                                    : QpStatus::local_stationary;
    }
    return sol;
}

}  // namespace tt2fr
