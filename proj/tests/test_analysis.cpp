#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fidmc/analysis.hpp"

using namespace fidmc;

namespace {

const ParameterDomain kUnit{0.0, 1.0, false, false};

FiducialSample make_sample(Scenario sc, std::vector<double> draws) {
    FiducialSample s;
    s.scenario = sc;
    s.lpd = LpdDescriptor::constant(1.0, sc.domain());
    s.seed = 0;
    s.draws = std::move(draws);
    return s;
}

} // namespace

TEST_CASE("histogram hand-checked example") {
    const auto s = make_sample(Scenario::binomial(1, 0), {0.1, 0.1, 0.6, 0.9});
    const auto h = histogram(s, 2);
    REQUIRE(h.edges.size() == 3);
    CHECK(h.edges[0] == doctest::Approx(0.0));
    CHECK(h.edges[1] == doctest::Approx(0.5));
    CHECK(h.edges[2] == doctest::Approx(1.0));
    REQUIRE(h.counts.size() == 2);
    CHECK(h.counts[0] == 2);
    CHECK(h.counts[1] == 2);
    CHECK(h.heights[0] == doctest::Approx(1.0));
    CHECK(h.heights[1] == doctest::Approx(1.0));
}

TEST_CASE("histogram clamps out-of-range draws into the outer bins") {
    const auto s = make_sample(Scenario::binomial(1, 0), {0.1, 0.5, 0.9, 0.79});
    const auto h = histogram(s, 2, Bracket{0.2, 0.8});
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == 4);

    double mass = 0.0;
    for (std::size_t i = 0; i < h.heights.size(); ++i)
        mass += h.heights[i] * (h.edges[i + 1] - h.edges[i]);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("histogram default range for rate draws covers the sample bulk") {
    const auto s = make_sample(Scenario::poisson(2), {0.5, 1.0, 6.0, 2.0, 3.0});
    const auto h = histogram(s, 4);
    CHECK(h.edges.front() == doctest::Approx(0.0));
    CHECK(h.edges.back() > 1.0);
    std::size_t total = 0;
    for (auto c : h.counts) total += c;
    CHECK(total == s.draws.size());
}

TEST_CASE("histogram input validation") {
    const auto s = make_sample(Scenario::binomial(1, 0), {0.5});
    CHECK_THROWS_AS(histogram(make_sample(Scenario::binomial(1, 0), {}), 2),
                    EmptySample);
    CHECK_THROWS_AS(histogram(s, 1), DomainError);
    CHECK_THROWS_AS(histogram(s, 4, Bracket{0.8, 0.2}), DomainError);
}

TEST_CASE("one-sample ks distance exact values") {
    auto uniform = [](double t) { return std::clamp(t, 0.0, 1.0); };
    CHECK(ks_distance({0.5}, uniform).statistic == doctest::Approx(0.5));
    CHECK(ks_distance({0.25, 0.75}, uniform).statistic == doctest::Approx(0.25));

    // Mid-bin grid has the minimal possible deviation 0.5/n.
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i) grid.push_back((i + 0.5) / 10.0);
    CHECK(ks_distance(grid, uniform).statistic == doctest::Approx(0.05));

    CHECK_THROWS_AS(ks_distance({}, uniform), EmptySample);
}

TEST_CASE("two-sample ks distance exact values") {
    CHECK(ks_distance({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}).statistic ==
          doctest::Approx(0.0));
    CHECK(ks_distance({0.1, 0.2}, {0.3, 0.4}).statistic == doctest::Approx(1.0));
    CHECK(ks_distance({0.1, 0.3}, {0.2, 0.4}).statistic == doctest::Approx(0.5));

    const std::vector<double> a = {0.11, 0.52, 0.74, 0.9};
    const std::vector<double> b = {0.2, 0.3, 0.61};
    CHECK(ks_distance(a, b).statistic == doctest::Approx(ks_distance(b, a).statistic));

    const auto rep = ks_distance(a, b);
    CHECK(rep.n_a == 4);
    CHECK(rep.n_b == 3);
}

TEST_CASE("cdf_sup_distance reproduces frozen conjugate distances") {
    const ReferencePosterior b1{ReferencePosterior::Family::Beta, 2.0, 10.0};
    const ReferencePosterior b2{ReferencePosterior::Family::Beta, 1.5, 9.5};
    const double d_beta = cdf_sup_distance(
        [&](double t) { return posterior_cdf(b1, t); },
        [&](double t) { return posterior_cdf(b2, t); }, Bracket{0.0, 1.0});
    CHECK(d_beta == doctest::Approx(0.13664343614718657).epsilon(1e-8));

    const ReferencePosterior g1{ReferencePosterior::Family::Gamma, 2.5, 1.0};
    const ReferencePosterior g2{ReferencePosterior::Family::Gamma, 3.0, 1.0};
    const double d_gamma = cdf_sup_distance(
        [&](double t) { return posterior_cdf(g1, t); },
        [&](double t) { return posterior_cdf(g2, t); }, Bracket{0.0, 30.0});
    CHECK(d_gamma == doctest::Approx(0.12946124202303949).epsilon(1e-8));

    const double d_same = cdf_sup_distance(
        [&](double t) { return posterior_cdf(b1, t); },
        [&](double t) { return posterior_cdf(b1, t); }, Bracket{0.0, 1.0});
    CHECK(d_same == doctest::Approx(0.0));

    CHECK_THROWS_AS(cdf_sup_distance([](double) { return 0.0; },
                                     [](double) { return 0.0; },
                                     Bracket{0.0, 1.0}, 4),
                    DomainError);
}

TEST_CASE("sensitivity_sweep keys duplicate shapes to identical streams") {
    const auto sc = Scenario::binomial(10, 1);
    const std::vector<LpdDescriptor> family = {
        LpdDescriptor::constant(1.0, kUnit),
        LpdDescriptor::jeffreys_binomial(),
        LpdDescriptor::constant(1.0, kUnit),
    };
    SamplerConfig cfg;
    cfg.n_draws = 20000;
    cfg.seed = 5;
    cfg.threads = 4;
    const auto rep = sensitivity_sweep(sc, family, cfg);

    REQUIRE(rep.labels.size() == 3);
    CHECK(rep.labels[0] == "constant");
    CHECK(rep.labels[1] == "jeffreys");

    // Duplicated members draw bit-identical samples: exact zero distance.
    CHECK(rep.fiducial_ks[0][2] == 0.0);
    CHECK(rep.fiducial_ks[0][1] > 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(rep.fiducial_ks[i][i] == 0.0);
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(rep.fiducial_ks[i][j] == rep.fiducial_ks[j][i]);
    }

    // Posterior comparison: constant-vs-jeffreys is the frozen Beta
    // distance, constant-vs-constant is zero.
    CHECK(rep.posterior_ks[0][1] == doctest::Approx(0.13664343614718657).epsilon(1e-6));
    CHECK(rep.posterior_ks[0][2] == doctest::Approx(0.0).epsilon(1e-9));

    // The fiducial density moves far less than the posterior.
    CHECK(rep.summary_ratio > 0.0);
    CHECK(rep.summary_ratio < 1.0);
}

TEST_CASE("sensitivity_sweep reports NaN where no conjugate posterior exists") {
    const auto sc = Scenario::binomial(10, 1);
    const std::vector<LpdDescriptor> family = {
        LpdDescriptor::constant(1.0, kUnit),
        LpdDescriptor::tabulated({{0.1, 1.0}, {0.5, 2.0}, {0.9, 1.0}}, kUnit),
    };
    SamplerConfig cfg;
    cfg.n_draws = 5000;
    cfg.seed = 5;
    cfg.threads = 2;
    const auto rep = sensitivity_sweep(sc, family, cfg);
    CHECK(std::isnan(rep.posterior_ks[0][1]));
    CHECK(std::isnan(rep.summary_ratio));
    CHECK(rep.fiducial_ks[0][1] >= 0.0);

    CHECK_THROWS_AS(
        sensitivity_sweep(sc, {LpdDescriptor::constant(1.0, kUnit)}, cfg),
        DomainError);
}

TEST_CASE("convergence_study tracks the fiducial-posterior gap downward") {
    SamplerConfig cfg;
    cfg.n_draws = 30000;
    cfg.seed = 3;
    cfg.threads = 4;
    const auto rep = convergence_study(0.1, {10, 20},
                                       LpdDescriptor::jeffreys_binomial(), cfg);
    REQUIRE(rep.n_values.size() == 2);
    REQUIRE(rep.ks_to_posterior.size() == 2);
    CHECK(rep.noise_tol == doctest::Approx(2.0 * 0.7 / std::sqrt(30000.0)));
    CHECK(rep.ks_to_posterior[0] > 0.0);
    CHECK(rep.ks_to_posterior[0] < 0.1);
    CHECK(rep.ks_to_posterior[1] < rep.ks_to_posterior[0]);
}

TEST_CASE("convergence_study input validation") {
    SamplerConfig cfg;
    cfg.n_draws = 100;
    const auto lpd = LpdDescriptor::jeffreys_binomial();
    CHECK_THROWS_AS(convergence_study(0.1, {}, lpd, cfg), DomainError);
    CHECK_THROWS_AS(convergence_study(0.0, {10}, lpd, cfg), DomainError);
    CHECK_THROWS_AS(convergence_study(1.0, {10}, lpd, cfg), DomainError);
    CHECK_THROWS_AS(convergence_study(0.1, {20, 10}, lpd, cfg), DomainError);
    CHECK_THROWS_AS(convergence_study(0.1, {10, 15}, lpd, cfg), DomainError);
}
