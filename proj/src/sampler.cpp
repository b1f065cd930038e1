#include "fidmc/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fidmc {

namespace {

constexpr double kGammaInset = 1e-12;  // keeps quadrature nodes off gamma = 0, 1

// Relative budget for band integrals: normalizer values span many orders
// across a band, so an absolute floor would erase the small end. 1e-9 is
// three orders below anything the density consumers resolve and keeps the
// refinement depth short of the roots' own relative accuracy.
constexpr Tolerance kBandTol{1e-300, 1e-9, 200};

unsigned resolve_threads(unsigned requested, std::size_t work_items) {
    unsigned t = requested == 0 ? std::thread::hardware_concurrency() : requested;
    if (t == 0) t = 1;
    return static_cast<unsigned>(
        std::min<std::size_t>(t, std::max<std::size_t>(1, work_items)));
}

// Runs fn(i) for i in [0, count) across contiguous chunks. Results must be
// written by index; the first exception is reported with its index.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                throw SolverFailure("draw " + std::to_string(i) +
                                    " failed: " + e.what());
            }
        }
        return;
    }
    std::mutex mu;
    std::string first_error;
    std::size_t first_error_index = 0;
    bool failed = false;

    std::vector<std::jthread> pool;
    pool.reserve(threads);
    const std::size_t chunk = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            for (std::size_t i = begin; i < end; ++i) {
                try {
                    fn(i);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!failed || i < first_error_index) {
                        failed = true;
                        first_error_index = i;
                        first_error = e.what();
                    }
                    return;
                }
            }
        });
    }
    pool.clear();  // join
    if (failed)
        throw SolverFailure("draw " + std::to_string(first_error_index) +
                            " failed: " + first_error);
}

// Maps a raw uniform onto the support intervals, uniformly by length. With
// the full support this is the identity, bit for bit.
struct SupportMap {
    std::vector<double> cumulative;  // cumulative lengths
    const PostDataSupport* support;
    double total;
    bool identity;

    explicit SupportMap(const PostDataSupport& s) : support(&s) {
        identity = s.intervals.size() == 1 && s.intervals.front().first == 0.0 &&
                   s.intervals.front().second == 1.0;
        total = 0.0;
        for (const auto& [lo, hi] : s.intervals) {
            total += hi - lo;
            cumulative.push_back(total);
        }
    }

    double operator()(double u) const {
        if (identity) return u;
        const double target = u * total;
        const auto it =
            std::upper_bound(cumulative.begin(), cumulative.end(), target);
        const std::size_t k = std::min<std::size_t>(
            static_cast<std::size_t>(it - cumulative.begin()),
            support->intervals.size() - 1);
        const double below = k == 0 ? 0.0 : cumulative[k - 1];
        const double g = support->intervals[k].first + (target - below);
        return std::min(g, support->intervals[k].second);
    }
};

void verify_conditions(const Scenario& sc, const PostDataSupport& support,
                       const Tolerance& tol) {
    if (support.intervals.empty())
        throw EmptySupport("draw_fiducial: empty post-data support");
    const auto grid = make_check_grid(257, support);
    const auto rep_2a = check_condition_2a(sc, grid, tol, support);
    if (!rep_2a.covered)
        throw ConditionViolated(
            "draw_fiducial: preimage intervals do not cover the post-data region");
    const GpdDescriptor flat{1.0, sc.domain(), nullptr};
    if (!check_condition_2b(flat, post_data_region(sc)).constant)
        throw ConditionViolated("draw_fiducial: generalized prior is not constant");
}

} // namespace

FiducialSample draw_fiducial(const Scenario& sc, const LpdDescriptor& lpd,
                             const PostDataSupport& support,
                             const SamplerConfig& config) {
    if (config.n_draws == 0) throw DomainError("draw_fiducial: n_draws must be >= 1");
    verify_conditions(sc, support, config.tol);

    FiducialSample out;
    out.scenario = sc;
    out.lpd = lpd;
    out.seed = config.seed;
    out.draws.resize(config.n_draws);
    if (config.retain_gamma) out.gamma_draws.resize(config.n_draws);

    const SupportMap to_support(support);
    const unsigned threads = resolve_threads(config.threads, config.n_draws);

    parallel_for(config.n_draws, threads, [&](std::size_t i) {
        SplitStream stream(config.seed, i);
        const double gamma = to_support(stream.next_unit());
        const double u = stream.next_unit();
        try {
            const SliceDensity slice =
                build_slice(sc, gamma, lpd, config.tol, config.path_override);
            out.draws[i] = slice_quantile(slice, u, config.tol);
        } catch (const Error& e) {
            throw SolverFailure("gamma=" + std::to_string(gamma) + ": " + e.what());
        }
        if (config.retain_gamma) out.gamma_draws[i] = gamma;
    });
    return out;
}

std::vector<double> fiducial_pdf_numeric(const Scenario& sc, const LpdDescriptor& lpd,
                                         const std::vector<double>& theta_grid,
                                         int gamma_nodes,
                                         const PostDataSupport& support,
                                         unsigned threads) {
    if (gamma_nodes < 64)
        throw DomainError("fiducial_pdf_numeric: gamma_nodes must be >= 64");
    if (gamma_nodes % 2 != 0) ++gamma_nodes;
    const ParameterDomain dom = sc.domain();
    for (double theta : theta_grid)
        if (!dom.contains(theta) && theta != dom.lo && theta != dom.hi)
            throw DomainError("fiducial_pdf_numeric: grid point outside the domain");
    if (support.intervals.empty())
        throw EmptySupport("fiducial_pdf_numeric: empty post-data support");

    // The density at theta is the likelihood-prior kernel there times the
    // slice normalizer integrated over the gamma band that keeps theta
    // inside its preimage interval (the band is where all gamma dependence
    // lives; the kernel factor is constant in gamma and pulls out).
    std::vector<double> pdf(theta_grid.size(), 0.0);

    parallel_for(theta_grid.size(), resolve_threads(threads, theta_grid.size()),
                 [&](std::size_t j) {
        const double theta = theta_grid[j];
        if (theta == dom.lo && dom.lo_open) return;    // density 0 toward open edges
        if (theta == dom.hi && !dom.bounded()) return;
        const double band_lo = cdf(sc, theta, sc.x - 1);
        const double band_hi = cdf(sc, theta, sc.x);
        double acc = 0.0;
        auto normalizer = [&](double g) {
            return std::exp(build_slice(sc, g, lpd, kRootTol).log_normalizer);
        };
        for (const auto& [sup_lo, sup_hi] : support.intervals) {
            const double lo = std::max(std::max(band_lo, sup_lo), kGammaInset);
            const double hi = std::min(std::min(band_hi, sup_hi), 1.0 - kGammaInset);
            if (!(hi > lo)) continue;
            // Base panels from gamma_nodes, each integrated adaptively on a
            // relative budget. The adaptivity is what counts: normalizers
            // steepen like an inverse power toward the gamma = 0, 1 interval
            // degeneracies, and bands for theta near a domain edge hug those
            // points, where any fixed-step rule drops several digits.
            const int chunks = std::max(2, gamma_nodes / 32);
            const double h = (hi - lo) / chunks;
            for (int c = 0; c < chunks; ++c) {
                const double a = lo + c * h;
                const double b = c + 1 == chunks ? hi : lo + (c + 1) * h;
                acc += integrate_adaptive(normalizer, Bracket{a, b}, kBandTol);
            }
        }
        if (acc == 0.0) return;
        pdf[j] = support.normalizer * std::exp(log_slice_kernel(sc, lpd, theta)) * acc;
    });
    return pdf;
}

} // namespace fidmc
