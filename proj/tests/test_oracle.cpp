#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "elimtas/lp.hpp"
#include "elimtas/oracle.hpp"

using namespace elimtas;

namespace {

DivergenceRows random_rows(std::mt19937_64& gen, std::size_t opponents, std::size_t actions) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DivergenceRows rows(opponents, std::vector<double>(actions));
    for (auto& r : rows) {
        for (auto& v : r) v = u(gen);
    }
    return rows;
}

std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t n) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(n);
    double s = 0.0;
    for (auto& v : w) s += (v = e(gen));
    for (auto& v : w) v /= s;
    return w;
}

// Direct evaluation, no library code.
double min_row_dot(const DivergenceRows& rows, const std::vector<double>& w) {
    double m = INFINITY;
    for (const auto& r : rows) {
        double s = 0.0;
        for (std::size_t a = 0; a < w.size(); ++a) s += r[a] * w[a];
        m = std::min(m, s);
    }
    return m;
}

}  // namespace

TEST_CASE("allocation validation") {
    CHECK_NOTHROW(Allocation({0.25, 0.75}));
    const Allocation clamped({-1e-13, 1.0});
    CHECK(clamped[0] == 0.0);
    CHECK_THROWS(Allocation({-0.1, 1.1}));
    CHECK_THROWS(Allocation({0.5, 0.4}));
    CHECK_THROWS(Allocation({NAN, 1.0}));
    CHECK_THROWS(Allocation(std::vector<double>{}));
    CHECK(Allocation::uniform(4)[3] == 0.25);
    CHECK(Allocation::unit(3, 2)[2] == 1.0);
}

TEST_CASE("worst_case_rate") {
    const DivergenceRows rows{{1.0, 0.0}, {0.0, 1.0}};
    CHECK(worst_case_rate(rows, std::vector<double>{0.5, 0.5}) == doctest::Approx(0.5));
    CHECK(worst_case_rate(rows, std::vector<double>{1.0, 0.0}) == 0.0);

    const Environment env = preset_environment("skewed");
    const HypothesisSet s{1, 2, 4};
    for (std::size_t a = 0; a < 5; ++a) {
        double expect = INFINITY;
        s.for_each([&](std::size_t g) { expect = std::min(expect, kl(env, a, 0, g)); });
        CHECK(worst_case_rate(env, 0, s, Allocation::unit(5, a)) == doctest::Approx(expect));
    }
    const Allocation w({0.1, 0.2, 0.3, 0.2, 0.2});
    CHECK(worst_case_rate(env, 0, HypothesisSet{1, 2}, w) >= worst_case_rate(env, 0, s, w));

    CHECK_THROWS(worst_case_rate(env, 0, HypothesisSet{}, w));
    CHECK_THROWS(worst_case_rate(env, 0, HypothesisSet{0, 1}, w));
}

TEST_CASE("oracle on the crossing instance") {
    const DivergenceRows rows{{1.0, 0.0}, {0.0, 1.0}};
    const OracleSolution lp = solve_max_min(rows);
    CHECK(lp.rate == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(lp.allocation[0] == doctest::Approx(0.5));
    const OracleSolution grid = grid_oracle(rows, 0.001);
    CHECK(std::abs(grid.rate - 0.5) <= 0.001);
}

TEST_CASE("oracle special cases") {
    SUBCASE("single opponent puts all weight on the best action") {
        const DivergenceRows rows{{0.2, 0.7, 0.7, 0.1}};
        const OracleSolution s = solve_max_min(rows);
        CHECK(s.rate == 0.7);
        CHECK(s.allocation[1] == 1.0);
        for (double step : {0.5, 0.1, 0.01}) CHECK(grid_oracle(rows, step).rate == 0.7);
    }
    SUBCASE("single action") {
        const DivergenceRows rows{{0.3}, {0.2}, {0.9}};
        const OracleSolution s = solve_max_min(rows);
        CHECK(s.rate == 0.2);
        CHECK(s.allocation[0] == 1.0);
    }
    SUBCASE("an unseparable opponent is an error") {
        CHECK_THROWS_AS(solve_max_min({{0.3, 0.1}, {0.0, 0.0}}), OracleError);
        const Environment deg = preset_environment("degenerate");
        CHECK_THROWS_AS(oracle_allocation(deg, 3, HypothesisSet{0, 4}), OracleError);
    }
    SUBCASE("bad sets") {
        const Environment env = preset_environment("skewed");
        CHECK_THROWS(oracle_allocation(env, 0, HypothesisSet{}));
        CHECK_THROWS(oracle_allocation(env, 0, HypothesisSet{0, 2}));
        CHECK_THROWS(grid_oracle(env, 0, HypothesisSet{1}, 0.1));  // 5 actions
        CHECK_THROWS(grid_oracle(DivergenceRows{{1.0, 0.0}}, 0.0));
        CHECK_THROWS(grid_oracle(DivergenceRows{{1.0, 0.0}}, 0.6));
    }
}

TEST_CASE("skewed full-set oracle") {
    const Environment env = preset_environment("skewed");
    const OracleSolution s = oracle_allocation(env, 0, HypothesisSet::all_but(5, 0));
    // Optimality against random simplex points.
    std::mt19937_64 gen(3);
    const DivergenceRows rows = divergence_rows(env, 0, HypothesisSet::all_but(5, 0));
    for (int i = 0; i < 2000; ++i) {
        CHECK(s.rate >= min_row_dot(rows, random_simplex(gen, 5)) - 1e-8);
    }
    std::vector<double> w(s.allocation.weights().begin(), s.allocation.weights().end());
    CHECK(min_row_dot(rows, w) == doctest::Approx(s.rate).epsilon(1e-10));
}

TEST_CASE("LP agrees with grid enumeration on small random instances") {
    std::mt19937_64 gen(11);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t na = 2 + trial % 2;
        const std::size_t ns = 1 + trial % 3;
        const DivergenceRows rows = random_rows(gen, ns, na);
        const OracleSolution lp = solve_max_min(rows);
        const OracleSolution grid = grid_oracle(rows, 0.01);
        const double lip = lipschitz_constant(rows);
        CHECK(lp.rate >= grid.rate - 1e-12);
        CHECK(lp.rate - grid.rate <= 0.01 * lip + 1e-12);
        std::vector<double> w(lp.allocation.weights().begin(), lp.allocation.weights().end());
        CHECK(std::abs(min_row_dot(rows, w) - lp.rate) <= kRateTolerance);
    }
}

TEST_CASE("oracle properties") {
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t na = 2 + trial % 4;
        const DivergenceRows full = random_rows(gen, 4, na);
        const DivergenceRows sub(full.begin(), full.begin() + 2);
        CHECK(solve_max_min(sub).rate >= solve_max_min(full).rate - 1e-12);

        const auto w = random_simplex(gen, na);
        const auto v = random_simplex(gen, na);
        std::vector<double> mid(na);
        double l1 = 0.0;
        for (std::size_t a = 0; a < na; ++a) {
            mid[a] = 0.5 * (w[a] + v[a]);
            l1 += std::abs(w[a] - v[a]);
        }
        const double fw = worst_case_rate(full, w), fv = worst_case_rate(full, v);
        CHECK(worst_case_rate(full, mid) >= 0.5 * (fw + fv) - 1e-12);
        CHECK(std::abs(fw - fv) <= lipschitz_constant(full) * l1 + 1e-12);
    }
}

TEST_CASE("oracle is deterministic and cached") {
    const Environment env = preset_environment("hard-weak");
    const HypothesisSet s{1, 3};
    const OracleSolution a = oracle_allocation(env, 0, s);
    const OracleSolution b = oracle_allocation(env, 0, s);
    CHECK(a.rate == b.rate);
    CHECK(std::equal(a.allocation.weights().begin(), a.allocation.weights().end(),
                     b.allocation.weights().begin()));

    OracleCache cache(env);
    const OracleSolution& c = cache.solve(0, s);
    CHECK(c.rate == a.rate);
    (void)cache.solve(0, s);
    (void)cache.solve(1, HypothesisSet{0});
    CHECK(cache.size() == 2);
}

TEST_CASE("lp::maximize") {
    SUBCASE("textbook instance") {
        // max 3x + 5y; x <= 4; 2y <= 12; 3x + 2y <= 18 -> (2, 6), 36
        const auto r = lp::maximize({{1, 0}, {0, 2}, {3, 2}}, std::vector<double>{4, 12, 18},
                                    std::vector<double>{3, 5});
        REQUIRE(r.status == lp::Status::kOptimal);
        CHECK(r.objective == doctest::Approx(36.0));
        CHECK(r.x[0] == doctest::Approx(2.0));
        CHECK(r.x[1] == doctest::Approx(6.0));
    }
    SUBCASE("unbounded") {
        const auto r = lp::maximize({{-1, 0}}, std::vector<double>{1}, std::vector<double>{1, 0});
        CHECK(r.status == lp::Status::kUnbounded);
    }
    SUBCASE("cycling example terminates") {
        // Beale's degenerate program; the textbook pivot rule cycles on it.
        const auto r = lp::maximize({{0.25, -8, -1, 9}, {0.5, -12, -0.5, 3}, {0, 0, 1, 0}},
                                    std::vector<double>{0, 0, 1},
                                    std::vector<double>{0.75, -20, 0.5, -6});
        REQUIRE(r.status == lp::Status::kOptimal);
        CHECK(r.objective == doctest::Approx(1.25));
    }
    SUBCASE("negative right-hand side is rejected") {
        CHECK_THROWS(lp::maximize({{1}}, std::vector<double>{-1}, std::vector<double>{1}));
    }
}
