#include "elimtas/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "elimtas/lp.hpp"

namespace elimtas {

Allocation::Allocation(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw std::invalid_argument("allocation over zero actions");
    double sum = 0.0;
    for (double& w : weights_) {
        if (!std::isfinite(w)) throw std::invalid_argument("allocation weight is not finite");
        if (w < -1e-12) {
            throw std::invalid_argument("allocation weight " + std::to_string(w) + " is negative");
        }
        if (w < 0.0) w = 0.0;
        sum += w;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw std::invalid_argument("allocation weights sum to " + std::to_string(sum));
    }
}

Allocation Allocation::uniform(std::size_t num_actions) {
    return Allocation(std::vector<double>(num_actions, 1.0 / static_cast<double>(num_actions)));
}

Allocation Allocation::unit(std::size_t num_actions, ActionIndex a) {
    std::vector<double> w(num_actions, 0.0);
    w.at(a) = 1.0;
    return Allocation(std::move(w));
}

namespace {

void check_opponents(const Environment& env, HypothesisIndex h, HypothesisSet opponents) {
    if (h >= env.num_hypotheses()) throw std::out_of_range("hypothesis index out of range");
    if (opponents.empty()) throw std::invalid_argument("opponent set is empty");
    if (opponents.contains(h)) throw std::invalid_argument("opponent set contains the candidate");
    if (!opponents.is_subset_of(HypothesisSet::all_but(env.num_hypotheses(), h))) {
        throw std::out_of_range("opponent index out of range");
    }
}

void check_rows(const DivergenceRows& rows) {
    if (rows.empty()) throw std::invalid_argument("opponent set is empty");
    const std::size_t n = rows.front().size();
    if (n == 0) throw std::invalid_argument("no actions");
    for (const auto& r : rows) {
        if (r.size() != n) throw std::invalid_argument("ragged divergence rows");
    }
}

}  // namespace

DivergenceRows divergence_rows(const Environment& env, HypothesisIndex h, HypothesisSet opponents) {
    check_opponents(env, h, opponents);
    const auto& kl = env.kl_table();
    DivergenceRows rows;
    rows.reserve(opponents.size());
    opponents.for_each([&](std::size_t g) {
        std::vector<double> r(env.num_actions());
        for (std::size_t a = 0; a < env.num_actions(); ++a) r[a] = kl(a, h, g);
        rows.push_back(std::move(r));
    });
    return rows;
}

double worst_case_rate(const DivergenceRows& rows, std::span<const double> w) {
    check_rows(rows);
    if (w.size() != rows.front().size()) throw std::invalid_argument("allocation size mismatch");
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
        double s = 0.0;
        for (std::size_t a = 0; a < w.size(); ++a) s += w[a] * r[a];
        best = std::min(best, s);
    }
    return best;
}

double worst_case_rate(const Environment& env, HypothesisIndex h, HypothesisSet opponents,
                       const Allocation& w) {
    return worst_case_rate(divergence_rows(env, h, opponents), w.weights());
}

double lipschitz_constant(const DivergenceRows& rows) {
    double l = 0.0;
    for (const auto& r : rows) {
        for (double d : r) l = std::max(l, d);
    }
    return l;
}

OracleSolution solve_max_min(const DivergenceRows& rows) {
    check_rows(rows);
    const std::size_t n = rows.front().size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (std::all_of(rows[i].begin(), rows[i].end(), [](double d) { return d <= 0.0; })) {
            throw OracleError("opponent row " + std::to_string(i) +
                              " has zero divergence under every action");
        }
    }

    if (n == 1) {
        Allocation w = Allocation::unit(1, 0);
        return {w, worst_case_rate(rows, w.weights())};
    }
    if (rows.size() == 1) {
        const auto& r = rows.front();
        const auto best = static_cast<ActionIndex>(std::max_element(r.begin(), r.end()) - r.begin());
        return {Allocation::unit(n, best), r[best]};
    }

    // Variables (w_0, ..., w_{n-1}, z). Rows: z - sum_a d_a w_a <= 0 per
    // opponent, then sum_a w_a <= 1. With a positive optimum the simplex
    // constraint is tight, so the relaxation is exact.
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    a.reserve(rows.size() + 1);
    for (const auto& r : rows) {
        std::vector<double> row(n + 1);
        for (std::size_t j = 0; j < n; ++j) row[j] = -r[j];
        row[n] = 1.0;
        a.push_back(std::move(row));
        b.push_back(0.0);
    }
    std::vector<double> simplex_row(n + 1, 1.0);
    simplex_row[n] = 0.0;
    a.push_back(std::move(simplex_row));
    b.push_back(1.0);
    std::vector<double> c(n + 1, 0.0);
    c[n] = 1.0;

    const lp::Result lp_result = lp::maximize(a, b, c, kSimplexTolerance);
    if (lp_result.status != lp::Status::kOptimal) {
        throw std::logic_error("max-min program reported unbounded");
    }

    std::vector<double> w(lp_result.x.begin(), lp_result.x.begin() + static_cast<long>(n));
    for (double& v : w) {
        if (v < 0.0 && v >= -1e-12) v = 0.0;
    }
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(sum > 0.0)) throw OracleError("max-min program returned an empty allocation");
    for (double& v : w) v /= sum;

    Allocation alloc(std::move(w));
    const double rate = worst_case_rate(rows, alloc.weights());
    if (std::abs(rate - lp_result.objective) > kRateTolerance) {
        throw std::logic_error("max-min solution inconsistent: f(w) = " + std::to_string(rate) +
                               ", z = " + std::to_string(lp_result.objective));
    }
    if (!(rate > 0.0)) throw OracleError("max-min rate is zero");
    return {std::move(alloc), rate};
}

OracleSolution oracle_allocation(const Environment& env, HypothesisIndex h, HypothesisSet opponents) {
    return solve_max_min(divergence_rows(env, h, opponents));
}

OracleSolution grid_oracle(const DivergenceRows& rows, double step) {
    check_rows(rows);
    const std::size_t n = rows.front().size();
    if (n > 4) throw std::invalid_argument("grid oracle supports at most 4 actions");
    if (!(step > 0.0 && step <= 0.5)) throw std::invalid_argument("grid step must be in (0, 0.5]");

    const auto units = static_cast<int>(std::lround(1.0 / step));
    const double scale = 1.0 / units;
    std::vector<int> counts(n, 0);
    std::vector<double> w(n, 0.0);
    std::vector<double> best_w;
    double best_rate = -std::numeric_limits<double>::infinity();
    // Rounding in the weighted sums must not displace an earlier grid point.
    const double margin = 1e-14 * lipschitz_constant(rows);

    // Lexicographically descending compositions of `units` into n parts, so
    // e_0 is visited first and ties keep the earliest point.
    auto visit = [&](auto&& self, std::size_t pos, int remaining) -> void {
        if (pos + 1 == n) {
            counts[pos] = remaining;
            for (std::size_t j = 0; j < n; ++j) w[j] = counts[j] * scale;
            const double r = worst_case_rate(rows, w);
            if (r > best_rate + margin) {
                best_rate = r;
                best_w = w;
            }
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            counts[pos] = k;
            self(self, pos + 1, remaining - k);
        }
    };
    visit(visit, 0, units);

    // Grid weights are exact multiples of 1/units; renormalise away rounding.
    const double sum = std::accumulate(best_w.begin(), best_w.end(), 0.0);
    for (double& v : best_w) v /= sum;
    return {Allocation(std::move(best_w)), best_rate};
}

OracleSolution grid_oracle(const Environment& env, HypothesisIndex h, HypothesisSet opponents,
                           double step) {
    return grid_oracle(divergence_rows(env, h, opponents), step);
}

const OracleSolution& OracleCache::solve(HypothesisIndex h, HypothesisSet opponents) {
    if (last_ != nullptr && last_h_ == h && last_set_ == opponents) return *last_;
    auto& bucket = cache_.at(h);
    auto it = bucket.find(opponents.bits());
    if (it == bucket.end()) {
        it = bucket.emplace(opponents.bits(), oracle_allocation(*env_, h, opponents)).first;
    }
    last_h_ = h;
    last_set_ = opponents;
    last_ = &it->second;
    return *last_;
}

std::size_t OracleCache::size() const {
    std::size_t n = 0;
    for (const auto& bucket : cache_) n += bucket.size();
    return n;
}

}  // namespace elimtas
