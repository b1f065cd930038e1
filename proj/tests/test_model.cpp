#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fidmc/model.hpp"
#include "fidmc/numerics.hpp"
#include "fidmc/rng.hpp"
#include "oracles.hpp"

using namespace fidmc;

TEST_CASE("scenario factories validate their arguments") {
    CHECK_NOTHROW(Scenario::binomial(1, 0));
    CHECK_NOTHROW(Scenario::binomial(10, 10));
    CHECK_THROWS_AS(Scenario::binomial(0, 0), DomainError);
    CHECK_THROWS_AS(Scenario::binomial(5, -1), DomainError);
    CHECK_THROWS_AS(Scenario::binomial(5, 6), DomainError);
    CHECK_NOTHROW(Scenario::poisson(0));
    CHECK_THROWS_AS(Scenario::poisson(-1), DomainError);

    const auto bdom = Scenario::binomial(3, 1).domain();
    CHECK(bdom.lo == 0.0);
    CHECK(bdom.hi == 1.0);
    CHECK_FALSE(bdom.lo_open);
    CHECK_FALSE(bdom.hi_open);
    CHECK(bdom.bounded());

    const auto pdom = Scenario::poisson(2).domain();
    CHECK(pdom.lo == 0.0);
    CHECK(pdom.lo_open);
    CHECK(pdom.hi_open);
    CHECK_FALSE(pdom.bounded());
    CHECK_FALSE(pdom.contains(0.0));
    CHECK(pdom.contains(1e-300));
}

TEST_CASE("pmf matches closed-form values") {
    const auto b10 = Scenario::binomial(10, 0);
    // 10 * 0.1 * 0.9^9
    CHECK(pmf(b10, 0.1, 1) == doctest::Approx(0.387420489).epsilon(1e-12));
    // Uniform-ish sanity: pmf sums to one.
    double total = 0.0;
    for (long y = 0; y <= 10; ++y) total += pmf(b10, 0.37, y);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-13));

    CHECK(pmf(b10, 0.1, -1) == 0.0);
    CHECK(pmf(b10, 0.1, 11) == 0.0);

    const auto po = Scenario::poisson(0);
    CHECK(pmf(po, 0.1, 0) == doctest::Approx(0.90483741803595957).epsilon(1e-14));
    CHECK(pmf(po, 2.0, 1) == doctest::Approx(2.0 * std::exp(-2.0)).epsilon(1e-13));
    CHECK(pmf(po, 2.0, -1) == 0.0);
}

TEST_CASE("pmf degenerate parameter values are exact") {
    const auto sc = Scenario::binomial(7, 3);
    CHECK(pmf(sc, 0.0, 0) == 1.0);
    CHECK(pmf(sc, 0.0, 1) == 0.0);
    CHECK(pmf(sc, 1.0, 7) == 1.0);
    CHECK(pmf(sc, 1.0, 6) == 0.0);
    CHECK(cdf(sc, 0.0, 0) == 1.0);
    CHECK(cdf(sc, 1.0, 6) == 0.0);
    CHECK(cdf(sc, 1.0, 7) == 1.0);
}

TEST_CASE("cdf matches frozen values and support edges") {
    const auto po = Scenario::poisson(1);
    // P(Y <= 1 | tau = 2) = 3 e^{-2}
    CHECK(cdf(po, 2.0, 1) == doctest::Approx(0.40600584970983808).epsilon(1e-13));

    const auto b = Scenario::binomial(10, 2);
    CHECK(cdf(b, 0.3, -1) == 0.0);
    CHECK(cdf(b, 0.3, 10) == 1.0);
    CHECK(cdf(b, 0.3, 42) == 1.0);
    CHECK(cdf(po, 5.0, -3) == 0.0);
}

TEST_CASE("binomial cdf agrees with the incomplete-beta route") {
    // Independent identity: P(Y <= z | n, p) = I_{1-p}(n - z, z + 1).
    // The left side sums pmf terms; the right side runs a continued
    // fraction. Shared code: none.
    const std::vector<int> ns = {1, 4, 10, 25, 60};
    auto g = oracle::rng(71);
    for (int n : ns) {
        const auto sc = Scenario::binomial(n, 0);
        for (int trial = 0; trial < 20; ++trial) {
            const double p = oracle::uniform(g, 0.01, 0.99);
            const long z = static_cast<long>(oracle::uniform(g, 0.0, n - 0.001));
            const double lhs = cdf(sc, p, z);
            const double rhs = reg_inc_beta(static_cast<double>(n - z),
                                            static_cast<double>(z + 1), 1.0 - p);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
        }
    }
}

TEST_CASE("poisson cdf agrees with the incomplete-gamma route") {
    // Independent identity: P(Y <= z | tau) = Q(z + 1, tau).
    auto g = oracle::rng(72);
    const auto sc = Scenario::poisson(0);
    for (int trial = 0; trial < 60; ++trial) {
        const double tau = oracle::uniform(g, 0.02, 35.0);
        const long z = static_cast<long>(oracle::uniform(g, 0.0, 50.0));
        const double lhs = cdf(sc, tau, z);
        const double rhs = reg_upper_gamma(static_cast<double>(z + 1), tau);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("cdf differences reproduce the pmf") {
    auto g = oracle::rng(73);
    const auto bin = Scenario::binomial(40, 0);
    for (int trial = 0; trial < 30; ++trial) {
        const double p = oracle::uniform(g, 0.02, 0.98);
        const long y = static_cast<long>(oracle::uniform(g, 0.0, 40.999));
        const double diff = cdf(bin, p, y) - cdf(bin, p, y - 1);
        CHECK(std::abs(diff - pmf(bin, p, y)) < 1e-14);
    }
    const auto po = Scenario::poisson(0);
    for (int trial = 0; trial < 30; ++trial) {
        const double tau = oracle::uniform(g, 0.05, 25.0);
        const long y = static_cast<long>(oracle::uniform(g, 0.0, 40.0));
        const double diff = cdf(po, tau, y) - cdf(po, tau, y - 1);
        CHECK(std::abs(diff - pmf(po, tau, y)) < 1e-14);
    }
}

TEST_CASE("cdf is strictly decreasing in the parameter at fixed z") {
    const auto bin = Scenario::binomial(12, 0);
    for (long z = 0; z < 12; ++z) {
        double prev = cdf(bin, 0.02, z);
        for (double p = 0.07; p < 0.99; p += 0.05) {
            const double cur = cdf(bin, p, z);
            CHECK(cur < prev);
            prev = cur;
        }
    }
    const auto po = Scenario::poisson(0);
    for (long z = 0; z < 8; ++z) {
        double prev = cdf(po, 0.05, z);
        for (double tau = 0.55; tau < 20.0; tau += 0.5) {
            const double cur = cdf(po, tau, z);
            CHECK(cur < prev);
            prev = cur;
        }
    }
}

TEST_CASE("forward_map worked examples") {
    const auto b1 = Scenario::binomial(1, 0);
    // F(0; p=0.5) = 0.5, so gamma below 0.5 stops at 0, above goes to 1.
    CHECK(forward_map(b1, 0.4, 0.5) == 0);
    CHECK(forward_map(b1, 0.6, 0.5) == 1);

    const auto b10 = Scenario::binomial(10, 0);
    CHECK(forward_map(b10, 0.99999, 1e-12) == 0);  // F(0) = (1-p)^10 ~ 1
    // At p = 1 - 1e-6: F(8) = 45e-12 < 1e-9 <= F(9) = 1e-5, so z = 9.
    CHECK(forward_map(b10, 1e-9, 0.999999) == 9);
    CHECK(forward_map(b10, 0.5, 1.0) == 10);       // p = 1 forces the top

    const auto po = Scenario::poisson(0);
    CHECK(forward_map(po, 0.5, 1e-9) == 0);
    // F(0; 2) = e^-2 = 0.1353, F(1; 2) = 0.406
    CHECK(forward_map(po, 0.2, 2.0) == 1);
    CHECK(forward_map(po, 0.41, 2.0) == 2);

    CHECK_THROWS_AS(forward_map(b1, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(forward_map(b1, 1.0, 0.5), DomainError);
    CHECK_THROWS_AS(forward_map(b1, -0.5, 0.5), DomainError);
}

TEST_CASE("forward_map returns the least z whose cdf exceeds gamma") {
    auto g = oracle::rng(74);
    const auto bin = Scenario::binomial(17, 0);
    for (int trial = 0; trial < 400; ++trial) {
        const double gamma = oracle::uniform(g, 1e-9, 1.0 - 1e-9);
        const double p = oracle::uniform(g, 0.001, 0.999);
        const long z = forward_map(bin, gamma, p);
        CHECK(cdf(bin, p, z) > gamma);
        if (z > 0) CHECK(cdf(bin, p, z - 1) <= gamma);
    }
    const auto po = Scenario::poisson(0);
    for (int trial = 0; trial < 400; ++trial) {
        const double gamma = oracle::uniform(g, 1e-9, 1.0 - 1e-9);
        const double tau = oracle::uniform(g, 0.01, 30.0);
        const long z = forward_map(po, gamma, tau);
        CHECK(cdf(po, tau, z) > gamma);
        if (z > 0) CHECK(cdf(po, tau, z - 1) <= gamma);
    }
}

namespace {

double chi_square_stat(const std::vector<long>& counts,
                       const std::vector<double>& expected) {
    double stat = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double d = counts[k] - expected[k];
        stat += d * d / expected[k];
    }
    return stat;
}

} // namespace

TEST_CASE("simulate_observation matches the binomial law (chi-square GOF)") {
    const auto sc = Scenario::binomial(10, 0);
    const double p = 0.5;
    const long draws = 200000;
    SplitStream rng(20240501);

    std::vector<long> counts(11, 0);
    double sum = 0.0;
    for (long i = 0; i < draws; ++i) {
        const long y = simulate_observation(sc, p, rng);
        REQUIRE(y >= 0);
        REQUIRE(y <= 10);
        ++counts[static_cast<std::size_t>(y)];
        sum += static_cast<double>(y);
    }

    std::vector<double> expected(11);
    for (long y = 0; y <= 10; ++y) expected[y] = draws * pmf(sc, p, y);

    // 11 cells -> 10 degrees of freedom; 0.001-level critical value.
    CHECK(chi_square_stat(counts, expected) < 29.5882984451);

    // Mean within 3 sigma of n p.
    const double se = std::sqrt(10 * p * (1 - p) / draws);
    CHECK(std::abs(sum / draws - 5.0) < 3.0 * se);
}

TEST_CASE("simulate_observation matches the poisson law (chi-square GOF)") {
    const auto sc = Scenario::poisson(0);
    const double tau = 4.0;
    const long draws = 200000;
    SplitStream rng(20240502);

    // Cells 0..11 plus a pooled tail at >= 12.
    std::vector<long> counts(13, 0);
    double sum = 0.0;
    for (long i = 0; i < draws; ++i) {
        const long y = simulate_observation(sc, tau, rng);
        REQUIRE(y >= 0);
        ++counts[static_cast<std::size_t>(std::min<long>(y, 12))];
        sum += static_cast<double>(y);
    }

    std::vector<double> expected(13);
    double head = 0.0;
    for (long y = 0; y <= 11; ++y) {
        expected[y] = draws * pmf(sc, tau, y);
        head += expected[y];
    }
    expected[12] = draws - head;

    // 13 cells -> 12 degrees of freedom; 0.001-level critical value.
    CHECK(chi_square_stat(counts, expected) < 32.9094904074);

    const double se = std::sqrt(tau / draws);
    CHECK(std::abs(sum / draws - tau) < 3.0 * se);
}

TEST_CASE("simulate_observation matches a wide poisson law (chi-square GOF)") {
    const auto sc = Scenario::poisson(0);
    const double tau = 10.0;
    const long draws = 200000;
    SplitStream rng(20240503);

    // Cells 0..19 plus a pooled tail at >= 20: 21 cells, 20 dof.
    std::vector<long> counts(21, 0);
    for (long i = 0; i < draws; ++i) {
        const long y = simulate_observation(sc, tau, rng);
        ++counts[static_cast<std::size_t>(std::min<long>(y, 20))];
    }

    std::vector<double> expected(21);
    double head = 0.0;
    for (long y = 0; y <= 19; ++y) {
        expected[y] = draws * pmf(sc, tau, y);
        head += expected[y];
    }
    expected[20] = draws - head;

    CHECK(chi_square_stat(counts, expected) < 45.3147466181);
}
