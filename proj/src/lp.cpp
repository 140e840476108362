#include "elimtas/lp.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace elimtas::lp {

Result maximize(const std::vector<std::vector<double>>& a, std::span<const double> b,
                std::span<const double> c, double tolerance) {
    const std::size_t m = b.size();
    const std::size_t n = c.size();
    if (a.size() != m) throw std::invalid_argument("lp: constraint row count mismatch");
    for (const auto& row : a) {
        if (row.size() != n) throw std::invalid_argument("lp: constraint row length mismatch");
    }
    for (double bi : b) {
        if (bi < 0.0) throw std::invalid_argument("lp: right-hand side must be nonnegative");
    }

    // Tableau rows 0..m-1 are constraints, row m is the objective in the
    // form z - c^T x = 0. Columns: n structural, m slack, one rhs.
    const std::size_t cols = n + m + 1;
    const std::size_t rhs = n + m;
    std::vector<double> t((m + 1) * cols, 0.0);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return t[i * cols + j]; };

    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) at(i, j) = a[i][j];
        at(i, n + i) = 1.0;
        at(i, rhs) = b[i];
        basis[i] = n + i;
    }
    for (std::size_t j = 0; j < n; ++j) at(m, j) = -c[j];

    Result result;
    const std::size_t max_pivots = 50 * (n + m + 1) * (n + m + 1);
    while (true) {
        std::size_t enter = cols;
        for (std::size_t j = 0; j < rhs; ++j) {
            if (at(m, j) < -tolerance) {
                enter = j;
                break;
            }
        }
        if (enter == cols) break;

        std::size_t leave = m;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i) {
            const double coef = at(i, enter);
            if (coef <= tolerance) continue;
            const double ratio = at(i, rhs) / coef;
            const bool strictly_better = leave == m || ratio < best_ratio - tolerance;
            const bool tie_lower_index =
                !strictly_better && ratio <= best_ratio + tolerance && basis[i] < basis[leave];
            if (strictly_better || tie_lower_index) {
                best_ratio = strictly_better ? ratio : std::min(best_ratio, ratio);
                leave = i;
            }
        }
        if (leave == m) {
            result.status = Status::kUnbounded;
            return result;
        }

        const double pivot = at(leave, enter);
        for (std::size_t j = 0; j < cols; ++j) at(leave, j) /= pivot;
        for (std::size_t i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = at(i, enter);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j < cols; ++j) at(i, j) -= f * at(leave, j);
            at(i, enter) = 0.0;
        }
        basis[leave] = enter;
        if (++result.pivots > max_pivots) {
            throw std::runtime_error("lp: pivot limit exceeded");
        }
    }

    result.x.assign(n, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        if (basis[i] < n) result.x[basis[i]] = at(i, rhs);
    }
    result.objective = at(m, rhs);
    return result;
}

}  // namespace elimtas::lp
