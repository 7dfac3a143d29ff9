#include <limits>
#include <stdexcept>
#include <string>

#include "tt2fr/qp.hpp"

namespace tt2fr {

GridOptimum brute_force_oracle(const QpProblem& p,
                               const std::vector<std::pair<double, double>>& box,
                               int resolution, double feasibility_tol) {
    const auto n = static_cast<std::size_t>(p.dim());
    if (n > 4) {
        throw std::invalid_argument("brute_force_oracle: dimension " + std::to_string(n) +
                                    " exceeds 4");
    }
    if (box.size() != n || resolution < 2) {
        throw std::invalid_argument("brute_force_oracle: need one bound pair per dimension and "
                                    "resolution >= 2");
    }

    GridOptimum best;
    best.step.resize(n);
    for (std::size_t d = 0; d < n; ++d) {
        best.step[d] = (box[d].second - box[d].first) / (resolution - 1);
    }
    best.objective_value = std::numeric_limits<double>::infinity();

    std::vector<int> idx(n, 0);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    bool found = false;
    while (true) {
        for (std::size_t d = 0; d < n; ++d) {
            x(static_cast<Eigen::Index>(d)) = box[d].first + idx[d] * best.step[d];
        }
        if (p.max_violation(x) <= feasibility_tol) {
            const double f = p.objective(x);
            if (f < best.objective_value) {
                best.objective_value = f;
                best.point = x;
                found = true;
            }
        }
        std::size_t d = 0;
        while (d < n && ++idx[d] == resolution) {
            idx[d] = 0;
            ++d;
        }
        if (d == n) {
            break;
        }
    }
    if (!found) {
        throw std::runtime_error("brute_force_oracle: no feasible grid point");
    }
    return best;
}

}  // namespace tt2fr
