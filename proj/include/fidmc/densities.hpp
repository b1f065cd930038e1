#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fidmc/model.hpp"
#include "fidmc/numerics.hpp"
#include "fidmc/preimage.hpp"
#include "fidmc/rng.hpp"

namespace fidmc {

// Local prior density over the parameter, known up to a constant factor.
// Constant and the two Jeffreys shapes admit conjugate slice handling;
// PowerPair (theta^alpha * (1-theta)^beta, or tau^alpha on an unbounded
// domain) and Tabulated force the quadrature path.
struct LpdDescriptor {
    enum class Kind { Constant, JeffreysBinomial, JeffreysPoisson, PowerPair, Tabulated };

    Kind kind = Kind::Constant;
    double level = 1.0;                          // Constant
    double alpha = 0.0, beta = 0.0;              // PowerPair
    std::vector<std::pair<double, double>> table;  // Tabulated: (theta, weight)
    ParameterDomain domain;

    std::string label() const;

    static LpdDescriptor constant(double level, ParameterDomain domain);
    static LpdDescriptor jeffreys_binomial();
    static LpdDescriptor jeffreys_poisson();
    static LpdDescriptor power_pair(double alpha, double beta, ParameterDomain domain);
    static LpdDescriptor tabulated(std::vector<std::pair<double, double>> table,
                                   ParameterDomain domain);

    bool operator==(const LpdDescriptor&) const = default;
};

// Value of the local prior at theta, up to the descriptor's fixed scale.
// Singular Jeffreys edges return +infinity.
double lpd_eval(const LpdDescriptor& lpd, double theta);

// Log of the unnormalized slice kernel: likelihood kernel times local
// prior. May be -inf where the kernel vanishes and +inf at singular edges.
double log_slice_kernel(const Scenario& sc, const LpdDescriptor& lpd, double theta);

enum class SlicePath { ConjugateBeta, ConjugateGamma, GenericQuadrature };
enum class PathOverride { None, ForceGeneric, ForceConjugate };

// The conditional density of theta given one gamma: the likelihood times
// the local prior, truncated to the preimage interval and normalized.
// Conjugate cases carry truncated Beta/Gamma bookkeeping; everything else
// keeps enough state to integrate the kernel on demand.
struct SliceDensity {
    Scenario scenario;
    LpdDescriptor lpd;
    double gamma;
    PreimageInterval interval;
    SlicePath path;
    Tolerance tol;

    double log_normalizer;  // log of 1 / (unnormalized kernel mass)

    // Conjugate path: shape parameters and the distribution function at
    // the interval edges, kept in whichever of the direct/complement
    // representations preserves relative precision (use_complement).
    double shape_a = 0.0, shape_b = 0.0;
    double inc_lo = 0.0, inc_hi = 1.0;
    bool use_complement = false;

    // Quadrature path: the kernel is integrated from each interval edge in
    // a powered distance variable theta = edge +/- t^k, with k chosen per
    // edge so the transformed integrand stays bounded and twice continuously
    // differentiable even where the local prior diverges.
    double mid = 0.0;
    double mass_left = 0.0, mass_right = 0.0;  // scaled kernel mass per half
    double log_kernel_scale = 0.0;             // scaling used by the masses
    int sub_k_lo = 2, sub_k_hi = 2;            // substitution order per edge
    double edge_expo_lo = 0.0, edge_expo_hi = 0.0;  // kernel edge power
};

SliceDensity build_slice(const Scenario& sc, double gamma, const LpdDescriptor& lpd,
                         const Tolerance& tol = kRootTol,
                         PathOverride override_path = PathOverride::None);

// Normalized density of the slice at theta; zero outside the interval.
double slice_pdf(const SliceDensity& slice, double theta);

// Inverse distribution function of the slice; u = 0 and u = 1 return the
// interval edges.
double slice_quantile(const SliceDensity& slice, double u,
                      const Tolerance& tol = kRootTol);

double slice_sample(const SliceDensity& slice, SplitStream& rng);

// Conjugate Bayesian posterior used as the comparison baseline.
struct ReferencePosterior {
    enum class Family { Beta, Gamma } family;
    double a;  // Beta(a, b) or Gamma(shape a, unit rate)
    double b;

    std::string label() const;
};

enum class PriorKind { UniformPrior, JeffreysPrior, ConstantImproper };

ReferencePosterior reference_posterior(const Scenario& sc, PriorKind prior);

// Posterior implied by a local prior shape, when one exists in the
// conjugate family (Constant, Jeffreys, PowerPair with admissible
// exponents). Tabulated shapes have none.
std::optional<ReferencePosterior> reference_posterior_for_lpd(
    const Scenario& sc, const LpdDescriptor& lpd);

double posterior_pdf(const ReferencePosterior& post, double theta);
double posterior_cdf(const ReferencePosterior& post, double theta);

} // namespace fidmc
