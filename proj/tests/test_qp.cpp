#include <cmath>
#include <cstring>
#include <stdexcept>

#include "doctest.h"
#include "generators.hpp"
#include "tt2fr/qp.hpp"

using namespace tt2fr;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

QpProblem make(std::initializer_list<std::initializer_list<double>> h, std::initializer_list<double> g,
               std::initializer_list<std::initializer_list<double>> a, std::initializer_list<double> b,
               double c = 0.0) {
    const auto n = static_cast<Eigen::Index>(g.size());
    MatrixXd H(n, n);
    Eigen::Index i = 0;
    for (const auto& row : h) {
        Eigen::Index j = 0;
        for (double v : row) {
            H(i, j++) = v;
        }
        ++i;
    }
    VectorXd gv(n);
    i = 0;
    for (double v : g) {
        gv(i++) = v;
    }
    MatrixXd A(static_cast<Eigen::Index>(b.size()), n);
    i = 0;
    for (const auto& row : a) {
        Eigen::Index j = 0;
        for (double v : row) {
            A(i, j++) = v;
        }
        ++i;
    }
    VectorXd bv(static_cast<Eigen::Index>(b.size()));
    i = 0;
    for (double v : b) {
        bv(i++) = v;
    }
    return QpProblem(H, gv, c, A, bv);
}

}  // namespace

TEST_CASE("construction symmetrizes and validates") {
    MatrixXd H(2, 2);
    H << 2, 1, 3, 2;
    const QpProblem p(H, VectorXd::Zero(2), 0.0, MatrixXd(0, 2), VectorXd(0));
    CHECK(p.hessian()(0, 1) == 2.0);
    CHECK(p.hessian()(1, 0) == 2.0);
    CHECK_THROWS_AS(QpProblem(MatrixXd::Zero(3, 3), VectorXd::Zero(2), 0, MatrixXd(0, 2), VectorXd(0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(QpProblem(MatrixXd::Zero(2, 2), VectorXd::Zero(2), 0, MatrixXd::Zero(1, 2), VectorXd(2)),
                    std::invalid_argument);
}

TEST_CASE("classify") {
    CHECK(classify(QpProblem(MatrixXd::Identity(3, 3), VectorXd::Zero(3), 0, MatrixXd(0, 3), VectorXd(0))) ==
          Curvature::convex);
    CHECK(classify(QpProblem(-MatrixXd::Identity(3, 3), VectorXd::Zero(3), 0, MatrixXd(0, 3), VectorXd(0))) ==
          Curvature::indefinite);
    CHECK(classify(make({{1, 0}, {0, -1}}, {0, 0}, {}, {})) == Curvature::indefinite);
    CHECK(classify(QpProblem::zeros(2)) == Curvature::convex);
}

TEST_CASE("solve small closed-form problems") {
    SUBCASE("projection onto a half-line") {
        // min x^2 s.t. x >= 1, written as -x <= -1. 1/2 * 2 x^2 = x^2.
        const auto p = make({{2}}, {0}, {{-1}}, {-1});
        const auto s = solve(p);
        CHECK(s.status == QpStatus::optimal_convex);
        CHECK(s.point(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.kkt_residual <= 1e-6);
        REQUIRE(s.active_set.size() == 1);
        CHECK(s.multipliers[0] == doctest::Approx(2.0));
    }
    SUBCASE("projection onto a half-plane") {
        // (x-2)^2 + (y-3)^2 = x^2 + y^2 - 4x - 6y + 13.
        const auto p = make({{2, 0}, {0, 2}}, {-4, -6}, {{1, 1}}, {4}, 13.0);
        const auto s = solve(p);
        CHECK(s.status == QpStatus::optimal_convex);
        CHECK(s.point(0) == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(s.point(1) == doctest::Approx(2.5).epsilon(1e-12));
        CHECK(s.objective_value == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("concave objective on an interval picks the better vertex") {
        // min -x^2 on [0, 1].
        const auto p = make({{-2}}, {0}, {{1}, {-1}}, {1, 0});
        const auto s = solve(p);
        CHECK(s.status == QpStatus::local_stationary);
        CHECK(s.point(0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(s.objective_value == doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("asymmetric concave objective needs multi-start") {
        // min -(x - 0.3)^2 on [0, 1]: the far vertex x = 1 wins (-0.49 vs -0.09).
        const auto p = make({{-2}}, {0.6}, {{1}, {-1}}, {1, 0}, -0.09);
        const auto s = solve(p);
        CHECK(s.point(0) == doctest::Approx(1.0));
        CHECK(s.objective_value == doctest::Approx(-0.49));
    }
    SUBCASE("unconstrained convex") {
        const auto p = make({{4, 1}, {1, 3}}, {1, 2}, {}, {});
        const auto s = solve(p);
        CHECK(s.status == QpStatus::optimal_convex);
        const VectorXd expected = -MatrixXd(p.hessian()).ldlt().solve(p.gradient_vec());
        CHECK((s.point - expected).norm() <= 1e-12);
    }
}

TEST_CASE("infeasible and unbounded problems") {
    SUBCASE("contradictory bounds") {
        const auto p = make({{2}}, {0}, {{1}, {-1}}, {0, -1});
        const auto s = solve(p);
        CHECK(s.status == QpStatus::infeasible);
        REQUIRE_FALSE(s.active_set.empty());
        CHECK(s.active_set[0] >= 0);
    }
    SUBCASE("linear objective with an open direction") {
        const auto p = make({{0, 0}, {0, 0}}, {-1, 0}, {{0, 1}}, {1});
        CHECK(solve(p).status == QpStatus::unbounded);
    }
    SUBCASE("concave objective without bounds hits the artificial box") {
        const auto p = make({{-2}}, {0}, {{-1}}, {0});
        CHECK(solve(p).status == QpStatus::unbounded);
    }
}

TEST_CASE("brute force oracle") {
    const auto p = make({{2}}, {0}, {{-1}}, {-1});
    const auto best = brute_force_oracle(p, {{0.0, 2.0}}, 201);
    CHECK(std::abs(best.point(0) - 1.0) <= best.step[0]);

    const auto bad = make({{2}}, {0}, {{1}, {-1}}, {0, -1});
    CHECK_THROWS_AS(brute_force_oracle(bad, {{0.0, 1.0}}, 11), std::runtime_error);
    CHECK_THROWS_AS(brute_force_oracle(QpProblem::zeros(5), std::vector<std::pair<double, double>>(5, {0, 1}), 3),
                    std::invalid_argument);
}

namespace {

// Random convex problem with a feasible interior point near the origin.
QpProblem random_convex(testing::Gen& gen, int n, int m) {
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
    return QpProblem(H, g, 0.0, A, b);
}

}  // namespace

TEST_CASE("convex solve matches the brute-force oracle") {
    testing::Gen gen(17);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = gen.integer(2, 3);
        const auto p = random_convex(gen, n, gen.integer(1, 5));
        const auto s = solve(p);
        REQUIRE(s.status == QpStatus::optimal_convex);
        REQUIRE(s.kkt_residual <= 1e-6);
        REQUIRE(p.max_violation(s.point) <= 1e-8);

        std::vector<std::pair<double, double>> box;
        for (int i = 0; i < n; ++i) {
            box.emplace_back(s.point(i) - 1.0, s.point(i) + 1.0);
        }
        const int res = n == 2 ? 401 : 81;
        const auto o = brute_force_oracle(p, box, res);
        REQUIRE(s.objective_value <= o.objective_value + 1e-12);
        for (int i = 0; i < n; ++i) {
            REQUIRE(std::abs(s.point(i) - o.point(i)) <= 2 * o.step[static_cast<std::size_t>(i)]);
        }
    }
}

TEST_CASE("indefinite solve returns a KKT point no worse than the grid on small boxes") {
    testing::Gen gen(23);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 2;
        MatrixXd H(n, n);
        H << gen.uniform(-2, 2), gen.uniform(-1, 1), 0, gen.uniform(-2, 2);
        H(1, 0) = H(0, 1);
        VectorXd g(n);
        g << gen.uniform(-1, 1), gen.uniform(-1, 1);
        MatrixXd A(4, n);
        A << 1, 0, -1, 0, 0, 1, 0, -1;
        VectorXd b(4);
        b << 1, 1, 1, 1;
        const QpProblem p(H, g, 0, A, b);
        const auto s = solve(p);
        REQUIRE(s.kkt_residual <= 1e-6);
        REQUIRE(p.max_violation(s.point) <= 1e-8);
        const auto o = brute_force_oracle(p, {{-1, 1}, {-1, 1}}, 201);
        // On a box every local minimum is reached by some start; the best
        // of 16 should match the global grid optimum.
        REQUIRE(s.objective_value <= o.objective_value + 1e-9);
    }
}

TEST_CASE("determinism and parallel/serial agreement") {
    const auto p = make({{-2, 0.5}, {0.5, 1}}, {0.3, -0.2}, {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}},
                        {1, 1, 1, 1, 1.5});
    SolverConfig par;
    par.parallel = true;
    SolverConfig ser = par;
    ser.parallel = false;
    const auto a = solve(p, par);
    const auto b = solve(p, par);
    const auto c = solve(p, ser);
    REQUIRE(a.point.size() == c.point.size());
    CHECK(std::memcmp(a.point.data(), b.point.data(), sizeof(double) * 2) == 0);
    CHECK(std::memcmp(a.point.data(), c.point.data(), sizeof(double) * 2) == 0);
    CHECK(a.start_index == c.start_index);
}

TEST_CASE("scaling the objective keeps the argmin on convex problems") {
    testing::Gen gen(31);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_convex(gen, 3, 4);
        const double lambda = gen.uniform(0.1, 50);
        const QpProblem scaled(lambda * p.hessian(), lambda * p.gradient_vec(), lambda * p.constant(),
                               p.constraint_matrix(), p.constraint_rhs());
        const auto s1 = solve(p);
        const auto s2 = solve(scaled);
        REQUIRE((s1.point - s2.point).norm() <= 1e-8);
    }
}

TEST_CASE("degenerate vertex with redundant constraints") {
    // Many constraints tight at the optimum (0, 0).
    const auto p = make({{2, 0}, {0, 2}}, {2, 2},
                        {{-1, 0}, {0, -1}, {-1, -1}, {-2, -1}, {-1, -2}, {-1, -1}}, {0, 0, 0, 0, 0, 0});
    const auto s = solve(p);
    CHECK(s.status == QpStatus::optimal_convex);
    CHECK(s.point.norm() <= 1e-12);
    CHECK(s.kkt_residual <= 1e-6);
}
