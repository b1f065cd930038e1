#include "fidmc/preimage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fidmc {

namespace {

constexpr double kEdgeCoverTol = 1e-5;   // gamma mass allowed past the grid ends
constexpr double kGapRefineFloor = 4e-16;  // gamma spacing below which a gap is real
constexpr double kStrongMassTol = 1e-12;

// cdf extended by continuity to the closed lower domain edge, where the
// public cdf would refuse the argument (Poisson tau = 0 is outside the open
// domain but F -> 1 there). Root brackets need that closure.
double cdf_closure(const Scenario& sc, double theta, long z) {
    if (sc.kind == ScenarioKind::Poisson && theta <= 0.0)
        return z >= 0 ? 1.0 : 0.0;
    return cdf(sc, theta, z);
}

// Solves F(z; theta) = gamma for theta; F(z; .) is strictly decreasing on
// the interior wherever it is not pinned at 0 or 1. The root is resolved
// to pure relative accuracy: for gamma close to an endpoint the root can
// sit many orders below one, where an absolute width cutoff would leave a
// huge relative error and everything derived from the interval (slice
// masses above all) would inherit it as step noise in gamma.
double solve_cdf_level(const Scenario& sc, long z, double gamma,
                       const Tolerance& tol) {
    const Tolerance root_tol{0.0, tol.rel_tol, std::max(tol.max_iter, 1200)};
    auto f = [&](double theta) { return cdf_closure(sc, theta, z); };
    if (sc.kind == ScenarioKind::Binomial)
        return bisect_monotone(f, gamma, Bracket{0.0, 1.0}, root_tol);
    double hi = static_cast<double>(z + 1);
    for (int grow = 0; grow < 1100; ++grow) {
        if (f(hi) < gamma)
            return bisect_monotone(f, gamma, Bracket{0.0, hi}, root_tol);
        hi *= 2.0;
    }
    throw SolverFailure("preimage_interval: poisson bracket growth failed");
}

double uniform_mass(const PrimaryRvSpec& pi0, double lo, double hi) {
    if (!pi0.density) return hi - lo;
    auto f = [&](double g) { return pi0.density(g); };
    return integrate_adaptive(f, Bracket{lo, hi});
}

struct Endpoints {
    double lo;
    double hi;
};

Endpoints endpoints_at(const Scenario& sc, double gamma, const Tolerance& tol) {
    const PreimageInterval iv = preimage_interval(sc, gamma, tol);
    return {iv.lo, iv.hi};
}

} // namespace

PreimageInterval preimage_interval(const Scenario& sc, double gamma,
                                   const Tolerance& tol) {
    if (!(gamma > 0.0) || !(gamma < 1.0))
        throw DomainError("preimage_interval: gamma must lie in (0, 1)");

    PreimageInterval iv{};
    if (sc.kind == ScenarioKind::Binomial) {
        if (sc.x == 0) {
            iv.lo = 0.0;
            iv.lo_closed = true;
        } else {
            iv.lo = solve_cdf_level(sc, sc.x - 1, gamma, tol);
            iv.lo_closed = true;
        }
        if (sc.x == sc.n) {
            iv.hi = 1.0;
            iv.hi_closed = true;
        } else {
            iv.hi = solve_cdf_level(sc, sc.x, gamma, tol);
            iv.hi_closed = false;
        }
    } else {
        if (sc.x == 0) {
            iv.lo = 0.0;
            iv.lo_closed = false;  // the Poisson domain is open at 0
        } else {
            iv.lo = solve_cdf_level(sc, sc.x - 1, gamma, tol);
            iv.lo_closed = true;
        }
        iv.hi = solve_cdf_level(sc, sc.x, gamma, tol);
        iv.hi_closed = false;
    }
    if (!(iv.lo < iv.hi))
        throw SolverFailure("preimage_interval: degenerate interval from solver");
    return iv;
}

ParameterDomain post_data_region(const Scenario& sc) {
    ParameterDomain region = sc.domain();
    if (sc.kind == ScenarioKind::Binomial) {
        region.lo_open = sc.x > 0;   // p = 0 only reachable when x = 0
        region.hi_open = sc.x < sc.n;
    }
    return region;
}

PostDataSupport full_support() {
    return PostDataSupport{{{0.0, 1.0}}, 1.0};
}

PostDataSupport post_data_support(const Scenario&, const PrimaryRvSpec& pi0) {
    PostDataSupport s = full_support();
    if (pi0.density) s.normalizer = 1.0 / uniform_mass(pi0, 0.0, 1.0);
    return s;
}

PostDataSupport restrict_support(
    const PrimaryRvSpec& pi0,
    const std::vector<std::pair<double, double>>& intervals) {
    if (intervals.empty()) throw EmptySupport("restrict_support: no intervals");
    double prev_hi = 0.0;
    double mass = 0.0;
    for (const auto& [lo, hi] : intervals) {
        if (!(lo >= 0.0) || !(hi <= 1.0) || !(lo < hi))
            throw DomainError("restrict_support: intervals must be ordered subintervals of (0, 1)");
        if (lo < prev_hi)
            throw DomainError("restrict_support: intervals overlap");
        const double m = uniform_mass(pi0, lo, hi);
        if (!(m > 0.0))
            throw EmptySupport("restrict_support: interval carries no mass");
        mass += m;
        prev_hi = hi;
    }
    if (!(mass > 0.0)) throw EmptySupport("restrict_support: zero total mass");
    return PostDataSupport{intervals, 1.0 / mass};
}

ArgumentKind classify_argument(const PostDataSupport& support) {
    return std::abs(support.total_mass() - 1.0) <= kStrongMassTol
               ? ArgumentKind::Strong
               : ArgumentKind::Moderate;
}

std::vector<double> make_check_grid(std::size_t count,
                                    const PostDataSupport& support) {
    if (count < 16) throw DomainError("make_check_grid: count too small");
    std::vector<double> grid;
    grid.reserve(count);
    const std::size_t per_interval =
        std::max<std::size_t>(16, count / support.intervals.size());
    for (const auto& [lo, hi] : support.intervals) {
        // 60% uniform core, 20% geometric toward each end down to 1e-7 of
        // the interval width: preimage endpoints move on a log scale near
        // the gamma edges, so uniform spacing alone leaves holes there.
        const std::size_t tail = per_interval / 5;
        const std::size_t core = per_interval - 2 * tail;
        const double w = hi - lo;
        const double edge = 1e-7 * w;
        for (std::size_t i = 0; i < tail; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(tail);
            const double d = edge * std::pow(0.2 * w / edge, t);
            grid.push_back(lo + d);
            grid.push_back(hi - d);
        }
        for (std::size_t i = 0; i < core; ++i)
            grid.push_back(lo + w * (0.2 + 0.6 * (static_cast<double>(i) + 0.5) /
                                               static_cast<double>(core)));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

Condition2aReport check_condition_2a(const Scenario& sc,
                                     const std::vector<double>& gamma_grid,
                                     const Tolerance& tol,
                                     const PostDataSupport& support) {
    if (gamma_grid.size() < 2)
        throw DomainError("check_condition_2a: grid needs at least two points");
    for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
        const double g = gamma_grid[i];
        if (!(g > 0.0) || !(g < 1.0))
            throw DomainError("check_condition_2a: grid values must lie in (0, 1)");
        if (i > 0 && !(g > gamma_grid[i - 1]))
            throw DomainError("check_condition_2a: grid must be strictly increasing");
    }

    Condition2aReport report;
    const double slack = 10.0 * tol.abs_tol;

    // Interior holes: both endpoints shift left as gamma grows, so the
    // union is hole-free iff each interval overlaps its successor. An
    // apparent hole between neighbours is bisected in gamma until every
    // sub-pair overlaps; a hole that survives down to fp-adjacent gammas
    // is real and gets recorded.
    const std::function<void(double, const Endpoints&, double, const Endpoints&)>
        check_pair = [&](double g_left, const Endpoints& e_left, double g_right,
                         const Endpoints& e_right) {
            if (e_right.hi + slack >= e_left.lo) return;  // overlap or touch
            if (g_right - g_left <= kGapRefineFloor * std::max(1.0, g_right)) {
                report.gaps.push_back({e_right.hi, e_left.lo, g_right - g_left});
                return;
            }
            const double g_mid = 0.5 * (g_left + g_right);
            const Endpoints e_mid = endpoints_at(sc, g_mid, tol);
            check_pair(g_left, e_left, g_mid, e_mid);
            check_pair(g_mid, e_mid, g_right, e_right);
        };

    // x = 0 pins every interval's lower edge at the domain edge and x = n
    // the upper edge; intervals at gammas beyond the grid then nest inside
    // the extreme gridded one, so that edge remainder is exactly zero.
    const bool skip_low_remainder =
        sc.kind == ScenarioKind::Binomial && sc.x == sc.n;  // hi pinned at 1
    const bool skip_high_remainder = sc.x == 0;             // lo pinned at 0

    double edge = 0.0;
    for (const auto& [sup_lo, sup_hi] : support.intervals) {
        auto first = std::lower_bound(gamma_grid.begin(), gamma_grid.end(), sup_lo);
        auto last = std::upper_bound(gamma_grid.begin(), gamma_grid.end(), sup_hi);
        if (last - first < 2)
            throw DomainError("check_condition_2a: grid too sparse for a support interval");

        std::vector<Endpoints> ends(static_cast<std::size_t>(last - first));
        for (auto it = first; it != last; ++it)
            ends[static_cast<std::size_t>(it - first)] = endpoints_at(sc, *it, tol);
        for (std::size_t i = 0; i + 1 < ends.size(); ++i)
            check_pair(first[i], ends[i], first[i + 1], ends[i + 1]);

        // Unexamined remainders between the support edges and the extreme
        // grid points, on the gamma scale.
        if (!skip_low_remainder) edge += *first - sup_lo;
        if (!skip_high_remainder) edge += sup_hi - last[-1];
    }
    report.edge_gamma_measure = edge;
    report.covered = report.gaps.empty() && edge <= kEdgeCoverTol;
    return report;
}

Condition2bReport check_condition_2b(const GpdDescriptor& gpd,
                                     const ParameterDomain& region,
                                     std::size_t probe_count) {
    if (probe_count < 3)
        throw DomainError("check_condition_2b: needs at least three probes");
    Condition2bReport report;
    report.min_value = std::numeric_limits<double>::infinity();
    report.max_value = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < probe_count; ++i) {
        const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(probe_count);
        // Bounded regions probe uniformly; unbounded ones through u/(1-u)
        // so the tail is exercised too.
        const double theta = region.bounded()
                                 ? region.lo + u * (region.hi - region.lo)
                                 : region.lo + u / (1.0 - u);
        const double v = gpd.eval(theta);
        report.min_value = std::min(report.min_value, v);
        report.max_value = std::max(report.max_value, v);
    }
    report.constant = report.min_value > 0.0 &&
                      (report.max_value - report.min_value) <=
                          1e-12 * std::max(1.0, std::abs(report.max_value));
    return report;
}

} // namespace fidmc
