#include "fidmc/model.hpp"

#include <cmath>

#include "fidmc/numerics.hpp"

namespace fidmc {

namespace {

void require_in_domain(const Scenario& sc, double theta, const char* who) {
    if (!std::isfinite(theta) || !sc.domain().contains(theta))
        throw DomainError(std::string(who) + ": theta outside parameter domain for " +
                          sc.name());
}

double binomial_log_pmf(int n, double p, long y) {
    // Callers guarantee 0 <= y <= n and p in (0, 1).
    return log_gamma_fn(n + 1.0) - log_gamma_fn(y + 1.0) - log_gamma_fn(n - y + 1.0) +
           y * std::log(p) + (n - y) * std::log1p(-p);
}

// Incremental partial sums of pmf terms. Successive terms obey
// t_{y+1} = t_y * ratio(y), so the scan multiplies in linear space relative
// to the leading term and carries a log offset, rescaling whenever the
// scaled sum grows large. That keeps n ~ 1e4 with a leading term far below
// 1e-308 exact without per-term transcendentals.
struct PmfScan {
    double scaled_term = 1.0;
    double scaled_sum = 1.0;
    double log_offset;

    explicit PmfScan(double log_t0) : log_offset(log_t0) {}

    void advance(double ratio) {
        scaled_term *= ratio;
        scaled_sum += scaled_term;
        if (scaled_sum > 1e280) {
            log_offset += std::log(scaled_sum);
            scaled_term /= scaled_sum;
            scaled_sum = 1.0;
        }
    }

    double value() const {
        const double v = std::exp(log_offset + std::log(scaled_sum));
        return v < 1.0 ? v : 1.0;
    }
};

double binomial_ratio(int n, double odds, long y) {
    return (static_cast<double>(n - y) / static_cast<double>(y + 1)) * odds;
}

} // namespace

double pmf(const Scenario& sc, double theta, long y) {
    require_in_domain(sc, theta, "pmf");
    if (sc.kind == ScenarioKind::Binomial) {
        if (y < 0 || y > sc.n) return 0.0;
        if (theta == 0.0) return y == 0 ? 1.0 : 0.0;
        if (theta == 1.0) return y == sc.n ? 1.0 : 0.0;
        return std::exp(binomial_log_pmf(sc.n, theta, y));
    }
    if (y < 0) return 0.0;
    return std::exp(y * std::log(theta) - theta - log_gamma_fn(y + 1.0));
}

double cdf(const Scenario& sc, double theta, long z) {
    require_in_domain(sc, theta, "cdf");
    if (z < 0) return 0.0;
    if (sc.kind == ScenarioKind::Binomial) {
        if (z >= sc.n) return 1.0;
        if (theta == 0.0) return 1.0;
        if (theta == 1.0) return 0.0;
        const double odds = theta / (1.0 - theta);
        PmfScan scan(sc.n * std::log1p(-theta));
        for (long y = 0; y < z; ++y) scan.advance(binomial_ratio(sc.n, odds, y));
        return scan.value();
    }
    const double tau = theta;
    PmfScan scan(-tau);
    for (long y = 0; y < z; ++y) scan.advance(tau / static_cast<double>(y + 1));
    return scan.value();
}

long forward_map(const Scenario& sc, double gamma, double theta) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw DomainError("forward_map: gamma must lie in (0, 1)");
    require_in_domain(sc, theta, "forward_map");
    if (sc.kind == ScenarioKind::Binomial) {
        if (theta == 0.0) return 0;
        if (theta == 1.0) return sc.n;
        const double odds = theta / (1.0 - theta);
        PmfScan scan(sc.n * std::log1p(-theta));
        for (long z = 0; z < sc.n; ++z) {
            if (gamma < scan.value()) return z;
            scan.advance(binomial_ratio(sc.n, odds, z));
        }
        return sc.n;
    }
    // Poisson: the scan is capped far beyond where any representable
    // gamma < 1 can still exceed the cdf.
    const double tau = theta;
    const long cap = static_cast<long>(tau + 40.0 * std::sqrt(tau + 1.0) + 200.0);
    PmfScan scan(-tau);
    for (long z = 0; z <= cap; ++z) {
        if (gamma < scan.value()) return z;
        scan.advance(tau / static_cast<double>(z + 1));
    }
    throw SolverFailure("forward_map: poisson scan cap reached (gamma too close to 1)");
}

long simulate_observation(const Scenario& sc, double theta, SplitStream& rng) {
    return forward_map(sc, rng.next_unit(), theta);
}

} // namespace fidmc
