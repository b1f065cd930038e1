#pragma once

#include <limits>
#include <string>
#include <vector>

#include "fidmc/errors.hpp"
#include "fidmc/rng.hpp"

namespace fidmc {

enum class ScenarioKind { Binomial, Poisson };

// Parameter interval with open/closed edges. hi may be +infinity.
struct ParameterDomain {
    double lo = 0.0;
    double hi = 1.0;
    bool lo_open = false;
    bool hi_open = false;

    bool contains(double theta) const {
        if (theta < lo || theta > hi) return false;
        if (lo_open && theta == lo) return false;
        if (hi_open && theta == hi) return false;
        return true;
    }

    bool bounded() const { return hi < std::numeric_limits<double>::infinity(); }

    bool operator==(const ParameterDomain&) const = default;
};

// One observed count from a one-parameter discrete model: Binomial(n, p)
// with p in [0, 1], or Poisson(tau) with rate tau in (0, inf). x is the
// observed value the inference conditions on; pmf/cdf/forward_map ignore it.
struct Scenario {
    ScenarioKind kind;
    int n;  // Binomial trial count; unused for Poisson
    int x;  // observed count

    static Scenario binomial(int n, int x) {
        if (n < 1) throw DomainError("Scenario: binomial needs n >= 1");
        if (x < 0 || x > n)
            throw DomainError("Scenario: binomial needs 0 <= x <= n");
        return Scenario{ScenarioKind::Binomial, n, x};
    }

    static Scenario poisson(int x) {
        if (x < 0) throw DomainError("Scenario: poisson needs x >= 0");
        return Scenario{ScenarioKind::Poisson, 0, x};
    }

    ParameterDomain domain() const {
        if (kind == ScenarioKind::Binomial) return {0.0, 1.0, false, false};
        return {0.0, std::numeric_limits<double>::infinity(), true, true};
    }

    std::string name() const {
        if (kind == ScenarioKind::Binomial)
            return "binomial(n=" + std::to_string(n) + ",x=" + std::to_string(x) + ")";
        return "poisson(x=" + std::to_string(x) + ")";
    }
};

// P(Y = y | theta). Zero for y outside the support.
double pmf(const Scenario& sc, double theta, long y);

// P(Y <= z | theta); z = -1 gives 0, z >= n gives 1 for Binomial.
// Summed in a scaled linear space so that n ~ 1e4 with strongly
// underflowing leading terms still comes out right.
double cdf(const Scenario& sc, double theta, long z);

// The structural equation: smallest z with gamma < P(Y <= z | theta).
long forward_map(const Scenario& sc, double gamma, double theta);

// One simulated observation, implemented exactly as forward_map applied to
// a fresh uniform gamma so simulation and inference share one mechanism.
long simulate_observation(const Scenario& sc, double theta, SplitStream& rng);

} // namespace fidmc
