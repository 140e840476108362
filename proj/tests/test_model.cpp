#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "elimtas/model.hpp"

using namespace elimtas;

namespace {

// Full Gaussian log-density including the normalising constant.
double gaussian_logpdf(double o, double mu, double sigma) {
    const double z = (o - mu) / sigma;
    return -0.5 * z * z - std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
}

}  // namespace

TEST_CASE("presets carry the published matrices") {
    const Environment skewed = preset_environment("skewed");
    REQUIRE(skewed.num_actions() == 5);
    REQUIRE(skewed.num_hypotheses() == 5);
    const std::vector<double> first_row{0.5, 0.9, 0.5, 0.3, 0.7};
    for (std::size_t h = 0; h < 5; ++h) CHECK(skewed.mean(0, h) == first_row[h]);
    CHECK(skewed.sigma() == 1.0);
    CHECK(skewed.indistinguishable_pairs().empty());

    CHECK_NOTHROW(preset_environment("hard-weak"));
    CHECK_THROWS_AS(preset_environment("nope"), InvalidEnvironment);
    CHECK(preset_names().size() == 3);
}

TEST_CASE("degenerate preset loads and reports its twin hypotheses") {
    const Environment env = preset_environment("degenerate");
    for (std::size_t h = 0; h < 5; ++h) {
        CHECK(env.mean(2, h) == 0.5);
        CHECK(env.mean(3, h) == 0.5);
    }
    // Pairwise column comparison, independent of the KL table.
    std::set<std::pair<std::size_t, std::size_t>> identical;
    for (std::size_t h = 0; h < 5; ++h) {
        for (std::size_t g = h + 1; g < 5; ++g) {
            bool same = true;
            for (std::size_t a = 0; a < 5; ++a) same = same && env.mean(a, h) == env.mean(a, g);
            if (same) identical.insert({h, g});
        }
    }
    const auto& reported = env.indistinguishable_pairs();
    CHECK(std::set(reported.begin(), reported.end()) == identical);
    CHECK(identical == std::set<std::pair<std::size_t, std::size_t>>{{3, 4}});
    CHECK_FALSE(env.distinguishable(3, 4));
    CHECK(env.distinguishable(0, 3));
}

TEST_CASE("identical columns are rejected under strict identifiability") {
    CHECK_THROWS_AS(Environment("twin", {{0.1, 0.1}, {0.3, 0.3}}), InvalidEnvironment);
    CHECK_NOTHROW(Environment("twin", {{0.1, 0.1}, {0.3, 0.3}}, 1.0, Identifiability::kReportOnly));
}

TEST_CASE("construction errors") {
    CHECK_THROWS_AS(Environment("e", {}), InvalidEnvironment);
    CHECK_THROWS_AS(Environment("e", {{0.0, 1.0}, {0.0}}), InvalidEnvironment);
    CHECK_THROWS_AS(Environment("e", {{0.0, 1.0}}, 0.0), InvalidEnvironment);
    CHECK_THROWS_AS(Environment("e", {{0.0, 1.0}}, -1.0), InvalidEnvironment);
    CHECK_THROWS_AS(Environment("e", {{0.0, NAN}}), InvalidEnvironment);
    CHECK_THROWS_AS(Environment("e", {{0.0, 1.0}}, INFINITY), InvalidEnvironment);
}

TEST_CASE("kl") {
    const Environment env = preset_environment("skewed");
    CHECK(kl(env, 0, 0, 1) == doctest::Approx(0.08).epsilon(1e-12));
    for (std::size_t a = 0; a < 5; ++a) {
        for (std::size_t h = 0; h < 5; ++h) {
            CHECK(kl(env, a, h, h) == 0.0);
            for (std::size_t g = 0; g < 5; ++g) {
                const double d = env.mean(a, h) - env.mean(a, g);
                CHECK(kl(env, a, h, g) == doctest::Approx(d * d / 2.0));
                CHECK(kl(env, a, h, g) == kl(env, a, g, h));
                CHECK(kl(env, a, h, g) >= 0.0);
            }
        }
    }
    const Environment deg = preset_environment("degenerate");
    for (std::size_t h = 0; h < 5; ++h)
        for (std::size_t g = 0; g < 5; ++g) CHECK(kl(deg, 2, h, g) == 0.0);

    CHECK_THROWS_AS(kl(env, 5, 0, 1), std::out_of_range);
    CHECK_THROWS_AS(kl(env, 0, 0, 7), std::out_of_range);
}

TEST_CASE("kl scales with sigma") {
    const Environment env("s", {{0.0, 1.0}}, 2.0);
    CHECK(kl(env, 0, 0, 1) == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("log_density") {
    const Environment env = preset_environment("skewed");
    CHECK(log_density(env, 0, 0, env.mean(0, 0)) == 0.0);
    CHECK(log_density(env, 0, 0, env.mean(0, 0) + 1.0) == doctest::Approx(-0.5));
    CHECK_THROWS(log_density(env, 0, 0, NAN));
    CHECK_THROWS(log_density(env, 0, 0, INFINITY));

    const Environment wide("w", {{0.2, -1.3, 4.0}}, 1.7);
    for (double o : {-3.0, 0.0, 0.2, 2.5, 11.0}) {
        for (std::size_t h = 0; h < 3; ++h) {
            for (std::size_t g = 0; g < 3; ++g) {
                const double ours = log_density(wide, 0, h, o) - log_density(wide, 0, g, o);
                const double exact = gaussian_logpdf(o, wide.mean(0, h), 1.7) -
                                     gaussian_logpdf(o, wide.mean(0, g), 1.7);
                CHECK(ours == doctest::Approx(exact).epsilon(1e-14));
            }
        }
    }
}

TEST_CASE("sampling is deterministic and has the right moments") {
    const Environment env = preset_environment("skewed");
    RandomStream a(42), b(42);
    for (int i = 0; i < 100; ++i) {
        CHECK(sample_observation(env, 1, 2, a) == sample_observation(env, 1, 2, b));
    }

    // One word per draw: after n draws the engines agree.
    RandomStream c(9), d(9);
    for (int i = 0; i < 10; ++i) (void)sample_observation(env, 0, 0, c);
    for (int i = 0; i < 10; ++i) (void)d.next_u64();
    CHECK(c.next_u64() == d.next_u64());

    RandomStream rng(2024);
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = sample_observation(env, 0, 0, rng);  // mu = 0.5
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = (sq - n * mean * mean) / (n - 1);
    CHECK(std::abs(mean - 0.5) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("parse_environment") {
    const Environment env = parse_environment(
        R"({"name":"x","means":[[0.0,1.0,2.0],[0.5,0.5,0.0]],"sigma":0.5})");
    CHECK(env.name() == "x");
    CHECK(env.num_actions() == 2);
    CHECK(env.num_hypotheses() == 3);
    CHECK(env.mean(1, 2) == 0.0);
    CHECK(env.sigma() == 0.5);

    const Environment flat = parse_environment(
        R"({"name":"f","num_actions":2,"num_hypotheses":2,"means":[0.0,1.0,2.0,3.0]})");
    CHECK(flat.mean(1, 0) == 2.0);
    CHECK(flat.sigma() == 1.0);

    const Environment round = parse_environment(environment_to_json(env));
    CHECK(round.mean_rows() == env.mean_rows());
    CHECK(round.sigma() == env.sigma());

    CHECK_THROWS_AS(parse_environment("{not json"), InvalidEnvironment);
    CHECK_THROWS_AS(parse_environment(R"({"name":"x"})"), InvalidEnvironment);
    CHECK_THROWS_AS(parse_environment(R"({"means":[[0,1]],"sigma":0})"), InvalidEnvironment);
    CHECK_THROWS_AS(parse_environment(R"({"means":[[0,1]],"num_hypotheses":3})"),
                    InvalidEnvironment);
    CHECK_THROWS_AS(parse_environment(R"({"means":[[0,0],[1,1]]})"), InvalidEnvironment);
    CHECK_NOTHROW(parse_environment(R"({"means":[[0,0],[1,1]],"require_identifiable":false})"));
    CHECK_THROWS_AS(parse_environment(R"({"means":[["a",1]]})"), InvalidEnvironment);
}

TEST_CASE("load_environment resolves presets and files") {
    CHECK(load_environment("skewed").name() == "skewed");
    CHECK_THROWS(load_environment("/nonexistent/env.json"));
}
