// oracle.hpp
//
// Worst-case information rate f_S(w; h) = min_{g in S} sum_a w_a d_a(h, g)
// and its maximiser over the action simplex, solved as the linear program
//     maximize z  s.t.  sum_a w_a d_a(h, g) >= z  (g in S),  sum_a w_a = 1,  w >= 0.
#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "elimtas/hypothesis_set.hpp"
#include "elimtas/model.hpp"

namespace elimtas {

// Raised when an opponent has zero divergence under every action, so the
// max-min value is 0 and no allocation separates it.
class OracleError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

inline constexpr double kSimplexTolerance = 1e-9;
inline constexpr double kRateTolerance = 1e-8;

// A point on the action simplex.
class Allocation {
public:
    Allocation() = default;
    // Validates: entries >= -1e-12 (clamped to 0) and sum within 1e-9 of 1.
    explicit Allocation(std::vector<double> weights);

    static Allocation uniform(std::size_t num_actions);
    static Allocation unit(std::size_t num_actions, ActionIndex a);

    std::span<const double> weights() const { return weights_; }
    double operator[](ActionIndex a) const { return weights_[a]; }
    std::size_t size() const { return weights_.size(); }

private:
    std::vector<double> weights_;
};

struct OracleSolution {
    Allocation allocation;
    double rate = 0.0;  // nats per round
};

// Divergence rows for a fixed (h, S): rows[i][a] = d_a(h, g_i).
using DivergenceRows = std::vector<std::vector<double>>;

DivergenceRows divergence_rows(const Environment& env, HypothesisIndex h, HypothesisSet opponents);

double worst_case_rate(const DivergenceRows& rows, std::span<const double> w);
double worst_case_rate(const Environment& env, HypothesisIndex h, HypothesisSet opponents,
                       const Allocation& w);

// Lipschitz constant of f_S in the l1 norm: max_{g in S} max_a d_a(h, g).
double lipschitz_constant(const DivergenceRows& rows);

OracleSolution solve_max_min(const DivergenceRows& rows);
OracleSolution oracle_allocation(const Environment& env, HypothesisIndex h, HypothesisSet opponents);

// Exhaustive search over the simplex grid with spacing `step`; a test-side
// reference for oracle_allocation. Requires at most 4 actions.
OracleSolution grid_oracle(const DivergenceRows& rows, double step);
OracleSolution grid_oracle(const Environment& env, HypothesisIndex h, HypothesisSet opponents,
                           double step);

// Memoised oracle for one environment, keyed by (h, opponent set).
// Not thread-safe; intended to live inside one trial.
class OracleCache {
public:
    explicit OracleCache(const Environment& env)
        : env_(&env), cache_(env.num_hypotheses()) {}

    const OracleSolution& solve(HypothesisIndex h, HypothesisSet opponents);
    std::size_t size() const;

private:
    const Environment* env_;
    std::vector<std::unordered_map<std::uint64_t, OracleSolution>> cache_;
    HypothesisIndex last_h_ = 0;
    HypothesisSet last_set_;
    const OracleSolution* last_ = nullptr;
};

}  // namespace elimtas
