#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fidmc/densities.hpp"
#include "fidmc/sampler.hpp"

namespace fidmc {

struct Histogram {
    std::vector<double> edges;    // bin_count + 1 ascending edges
    std::vector<std::size_t> counts;
    std::vector<double> heights;  // counts / (n * bin width); integrates to 1
};

// Equal-width histogram over [range.lo, range.hi]. Draws beyond the range
// land in the outermost bins so the counts always sum to the sample size.
// The default range is the bounded domain, or [0, upper whisker] for rate
// draws.
Histogram histogram(const FiducialSample& sample, int bin_count,
                    std::optional<Bracket> range = std::nullopt);

struct KsReport {
    double statistic = 0.0;
    std::size_t n_a = 0;
    std::size_t n_b = 0;  // 0 for the one-sample form
};

// One-sample Kolmogorov-Smirnov distance between a sample and a cdf,
// evaluated exactly at the jump points of the empirical cdf.
KsReport ks_distance(std::vector<double> sample,
                     const std::function<double(double)>& cdf_fn);

// Two-sample form over the merged jump points.
KsReport ks_distance(std::vector<double> a, std::vector<double> b);

// Sup distance between two analytic cdfs on a probe range, by dense grid
// scan with local refinement.
double cdf_sup_distance(const std::function<double(double)>& cdf_a,
                        const std::function<double(double)>& cdf_b,
                        Bracket range, int grid = 4096);

struct SensitivityReport {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> fiducial_ks;   // pairwise, zero diagonal
    std::vector<std::vector<double>> posterior_ks;  // NaN where no posterior exists
    double summary_ratio = 0.0;  // max fiducial entry / max posterior entry
};

// Draws one fiducial sample per local-prior shape and compares all pairs,
// against the same comparison among the matching conjugate posteriors.
// Members get substreams keyed by the index of their first equal
// descriptor, so duplicated shapes reproduce each other exactly while
// distinct shapes never share gamma streams.
SensitivityReport sensitivity_sweep(const Scenario& sc,
                                    const std::vector<LpdDescriptor>& family,
                                    const SamplerConfig& config);

struct ConvergenceReport {
    std::vector<int> n_values;
    std::vector<double> ks_to_posterior;  // fiducial sample vs Jeffreys posterior
    double noise_tol = 0.0;               // two Monte Carlo sigmas at this draw count
};

// Fiducial-versus-Jeffreys-posterior distance along a sequence of binomial
// scenarios with x/n held at a fixed ratio, for watching the two coalesce
// as n grows.
ConvergenceReport convergence_study(double ratio, const std::vector<int>& n_values,
                                    const LpdDescriptor& lpd,
                                    const SamplerConfig& config);

} // namespace fidmc
