#include "fidmc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fidmc {

namespace {

// 2 sigma of the one-sample KS statistic's sampling noise around a nonzero
// population distance; the fluctuation of an ecdf at a fixed point is at
// most 0.5/sqrt(n), padded a little for the sup over points.
constexpr double kKsNoiseSigma = 0.7;

Bracket default_range(const FiducialSample& sample) {
    if (sample.scenario.kind == ScenarioKind::Binomial) return {0.0, 1.0};
    // Rate draws are unbounded; cover the bulk with headroom so the tail
    // spill into the last bin stays negligible.
    std::vector<double> sorted = sample.draws;
    std::sort(sorted.begin(), sorted.end());
    const double q = sorted[static_cast<std::size_t>(
        0.9999 * static_cast<double>(sorted.size() - 1))];
    return {0.0, std::max(1.0, q * 1.2)};
}

} // namespace

Histogram histogram(const FiducialSample& sample, int bin_count,
                    std::optional<Bracket> range) {
    if (sample.draws.empty()) throw EmptySample("histogram: no draws");
    if (bin_count < 2) throw DomainError("histogram: bin_count must be >= 2");
    const Bracket r = range ? *range : default_range(sample);
    if (!(r.lo < r.hi)) throw DomainError("histogram: range lo >= hi");

    Histogram h;
    h.edges.resize(bin_count + 1);
    for (int i = 0; i <= bin_count; ++i)
        h.edges[i] = r.lo + (r.hi - r.lo) * i / bin_count;
    h.counts.assign(bin_count, 0);

    const double scale = bin_count / (r.hi - r.lo);
    for (double v : sample.draws) {
        int k = static_cast<int>((v - r.lo) * scale);
        k = std::clamp(k, 0, bin_count - 1);
        ++h.counts[static_cast<std::size_t>(k)];
    }

    const double width = (r.hi - r.lo) / bin_count;
    const double norm = 1.0 / (static_cast<double>(sample.draws.size()) * width);
    h.heights.resize(bin_count);
    for (int i = 0; i < bin_count; ++i)
        h.heights[i] = static_cast<double>(h.counts[i]) * norm;
    return h;
}

KsReport ks_distance(std::vector<double> sample,
                     const std::function<double(double)>& cdf_fn) {
    if (sample.empty()) throw EmptySample("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double c = cdf_fn(sample[i]);
        sup = std::max(sup, std::abs(c - static_cast<double>(i) / n));
        sup = std::max(sup, std::abs(static_cast<double>(i + 1) / n - c));
    }
    return {sup, sample.size(), 0};
}

KsReport ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw EmptySample("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double sup = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const double v = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= v) ++i;
        while (j < b.size() && b[j] <= v) ++j;
        sup = std::max(sup, std::abs(static_cast<double>(i) / na -
                                     static_cast<double>(j) / nb));
    }
    return {sup, a.size(), b.size()};
}

double cdf_sup_distance(const std::function<double(double)>& cdf_a,
                        const std::function<double(double)>& cdf_b,
                        Bracket range, int grid) {
    if (grid < 16) throw DomainError("cdf_sup_distance: grid too small");
    auto diff = [&](double t) { return std::abs(cdf_a(t) - cdf_b(t)); };
    double best = 0.0, best_t = range.lo;
    for (int i = 0; i <= grid; ++i) {
        const double t = range.lo + (range.hi - range.lo) * i / grid;
        const double d = diff(t);
        if (d > best) {
            best = d;
            best_t = t;
        }
    }
    // Ternary refinement around the best grid point.
    double lo = std::max(range.lo, best_t - (range.hi - range.lo) / grid);
    double hi = std::min(range.hi, best_t + (range.hi - range.lo) / grid);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (range.hi - range.lo); ++it) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (diff(m1) < diff(m2)) lo = m1; else hi = m2;
    }
    return std::max(best, diff(0.5 * (lo + hi)));
}

SensitivityReport sensitivity_sweep(const Scenario& sc,
                                    const std::vector<LpdDescriptor>& family,
                                    const SamplerConfig& config) {
    if (family.size() < 2)
        throw DomainError("sensitivity_sweep: family needs at least two members");

    const std::size_t m = family.size();
    SensitivityReport report;
    report.labels.reserve(m);

    std::vector<FiducialSample> samples(m);
    std::vector<std::optional<ReferencePosterior>> posts(m);
    for (std::size_t i = 0; i < m; ++i) {
        report.labels.push_back(family[i].label());
        // Key the substream by the first equal descriptor: duplicates then
        // reproduce bit-identically, distinct members decouple.
        std::size_t key = i;
        for (std::size_t j = 0; j < i; ++j)
            if (family[j] == family[i]) {
                key = j;
                break;
            }
        SamplerConfig c = config;
        c.seed = config.seed + key;
        samples[i] = draw_fiducial(sc, family[i], full_support(), c);
        posts[i] = reference_posterior_for_lpd(sc, family[i]);
    }

    const double nan = std::numeric_limits<double>::quiet_NaN();
    report.fiducial_ks.assign(m, std::vector<double>(m, 0.0));
    report.posterior_ks.assign(m, std::vector<double>(m, 0.0));

    Bracket range{0.0, 1.0};
    if (sc.kind == ScenarioKind::Poisson) {
        double hi = 1.0;
        for (const auto& s : samples)
            for (double v : s.draws) hi = std::max(hi, v);
        range.hi = hi * 1.1;
    }

    double max_fid = 0.0, max_post = 0.0;
    bool any_post = false;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double fid = ks_distance(samples[i].draws, samples[j].draws).statistic;
            report.fiducial_ks[i][j] = report.fiducial_ks[j][i] = fid;
            max_fid = std::max(max_fid, fid);
            double post = nan;
            if (posts[i] && posts[j]) {
                post = cdf_sup_distance(
                    [&](double t) { return posterior_cdf(*posts[i], t); },
                    [&](double t) { return posterior_cdf(*posts[j], t); }, range);
                max_post = std::max(max_post, post);
                any_post = true;
            }
            report.posterior_ks[i][j] = report.posterior_ks[j][i] = post;
        }
    }
    report.summary_ratio = any_post && max_post > 0.0 ? max_fid / max_post : nan;
    return report;
}

ConvergenceReport convergence_study(double ratio, const std::vector<int>& n_values,
                                    const LpdDescriptor& lpd,
                                    const SamplerConfig& config) {
    if (n_values.empty()) throw DomainError("convergence_study: empty n list");
    if (!(ratio > 0.0) || !(ratio < 1.0))
        throw DomainError("convergence_study: ratio must lie in (0, 1)");

    ConvergenceReport report;
    report.n_values = n_values;
    report.noise_tol =
        2.0 * kKsNoiseSigma / std::sqrt(static_cast<double>(config.n_draws));

    int prev_n = 0;
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        const int n = n_values[i];
        if (n <= prev_n)
            throw DomainError("convergence_study: n values must be strictly increasing");
        prev_n = n;
        const double xr = ratio * n;
        const double x = std::round(xr);
        if (std::abs(xr - x) > 1e-9)
            throw DomainError("convergence_study: ratio * n must be an integer (n=" +
                              std::to_string(n) + ")");
        const Scenario sc = Scenario::binomial(n, static_cast<int>(x));

        SamplerConfig c = config;
        c.seed = config.seed + i;
        const FiducialSample sample = draw_fiducial(sc, lpd, full_support(), c);
        const ReferencePosterior post = reference_posterior(sc, PriorKind::JeffreysPrior);
        report.ks_to_posterior.push_back(
            ks_distance(sample.draws, [&](double t) { return posterior_cdf(post, t); })
                .statistic);
    }
    return report;
}

} // namespace fidmc
