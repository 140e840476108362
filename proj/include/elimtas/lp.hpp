// lp.hpp
//
// Dense primal simplex for small origin-feasible programs
//     maximize c^T x  subject to  A x <= b,  x >= 0,  b >= 0.
// Pivoting follows Bland's rule (lowest eligible index for both the entering
// and the leaving variable), so the solver never cycles and the returned
// vertex is a deterministic function of the input.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace elimtas::lp {

enum class Status { kOptimal, kUnbounded };

struct Result {
    Status status = Status::kOptimal;
    std::vector<double> x;
    double objective = 0.0;
    std::size_t pivots = 0;
};

// `a` is row-major with rows() == b.size() and each row of length c.size().
Result maximize(const std::vector<std::vector<double>>& a, std::span<const double> b,
                std::span<const double> c, double tolerance = 1e-9);

}  // namespace elimtas::lp
