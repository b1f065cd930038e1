#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fidmc/errors.hpp"

namespace fidmc {

// A closed interval [lo, hi] with lo < hi used to bracket roots and
// integration ranges.
struct Bracket {
    double lo;
    double hi;

    double width() const { return hi - lo; }
};

struct Tolerance {
    double abs_tol;
    double rel_tol;
    int max_iter;
};

// Defaults shared across the library: root solves stop when the bracket
// width falls below max(abs_tol, rel_tol * |mid|); quadrature refines a
// panel until its local error estimate is below a fixed per-panel budget
// derived from abs_tol / rel_tol, with max_iter bounding recursion depth.
inline constexpr Tolerance kRootTol{1e-10, 1e-10, 200};
inline constexpr Tolerance kQuadTol{1e-10, 1e-9, 200};

double log_gamma_fn(double z);
double log_beta_fn(double a, double b);

// Regularized incomplete beta I_x(a, b) and its complement 1 - I_x(a, b).
// The complement is computed as I_{1-x}(b, a) so it keeps full relative
// precision when I_x is close to 1.
double reg_inc_beta(double a, double b, double x);
double reg_inc_beta_comp(double a, double b, double x);

// Regularized lower/upper incomplete gamma P(s, x) and Q(s, x) = 1 - P(s, x).
double reg_lower_gamma(double s, double x);
double reg_upper_gamma(double s, double x);

namespace detail {

[[noreturn]] void throw_non_bracketing(double flo, double fhi, double target);

}

// Finds theta in [bracket.lo, bracket.hi] with f(theta) == target for a
// monotone f (either direction). Bisection: robust against the flat spots
// and kinks the tail-probability curves develop near domain edges. Stops
// when the bracket width is below max(abs_tol, rel_tol * |mid|).
template <typename F>
double bisect_monotone(F&& f, double target, Bracket bracket,
                       const Tolerance& tol = kRootTol) {
    double lo = bracket.lo, hi = bracket.hi;
    if (!(lo < hi)) throw DomainError("bisect_monotone: bracket lo >= hi");
    double flo = f(lo), fhi = f(hi);
    if (!std::isfinite(flo) || !std::isfinite(fhi))
        throw NonFinite("bisect_monotone: non-finite value at bracket endpoint");
    const bool increasing = flo <= fhi;
    if (increasing) {
        if (target < flo || target > fhi) detail::throw_non_bracketing(flo, fhi, target);
    } else {
        if (target > flo || target < fhi) detail::throw_non_bracketing(flo, fhi, target);
    }
    for (int it = 0; it < tol.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= std::max(tol.abs_tol, tol.rel_tol * std::abs(mid)))
            return mid;
        const double fm = f(mid);
        if (!std::isfinite(fm))
            throw NonFinite("bisect_monotone: non-finite value at midpoint");
        const bool go_right = increasing ? (fm < target) : (fm > target);
        if (go_right) lo = mid; else hi = mid;
    }
    throw MaxIterExceeded("bisect_monotone: no convergence after " +
                          std::to_string(tol.max_iter) + " iterations");
}

namespace detail {

inline constexpr double kEndpointOffset = 1e-10;

// One evaluation that tolerates an integrable singularity at a panel
// endpoint: a non-finite value is replaced by the value a hair inside the
// panel. 'inward' is the opposite panel end.
template <typename F>
double eval_with_offset(F& f, double x, double inward, bool& offset_used) {
    const double v = f(x);
    if (std::isfinite(v)) {
        offset_used = false;
        return v;
    }
    offset_used = true;
    const double vo = f(x + kEndpointOffset * (inward - x));
    if (!std::isfinite(vo))
        throw NonFinite("integrate_adaptive: non-finite value persists near endpoint");
    return vo;
}

template <typename F>
struct AdaptiveSimpson {
    F& f;
    double panel_tol;  // fixed per-panel error budget, not halved on split
    int max_depth;

    // Panels whose endpoint value came from an offset re-evaluate that
    // endpoint at their own (smaller) offset when split, so the proxy value
    // tracks the shrinking panel instead of freezing at the first offset.
    double run(double a, double b, double fa, double fm, double fb,
               double whole, bool sing_lo, bool sing_hi, int depth) {
        const double m = 0.5 * (a + b);
        double flm = f(0.25 * (3.0 * a + b));
        double frm = f(0.25 * (a + 3.0 * b));
        if (!std::isfinite(flm) || !std::isfinite(frm))
            throw NonFinite("integrate_adaptive: non-finite value at interior node");
        double fa_l = fa;
        bool sing_lo_l = false;
        if (sing_lo) fa_l = eval_with_offset(f, a, m, sing_lo_l);
        double fb_r = fb;
        bool sing_hi_r = false;
        if (sing_hi) fb_r = eval_with_offset(f, b, m, sing_hi_r);
        const double h12 = (b - a) / 12.0;
        const double left = h12 * (fa_l + 4.0 * flm + fm);
        const double right = h12 * (fm + 4.0 * frm + fb_r);
        const double delta = left + right - whole;
        if (std::abs(delta) <= 15.0 * panel_tol)
            return left + right + delta / 15.0;
        // Roundoff guard: a panel at the floating-point resolution of its
        // endpoints cannot be split meaningfully; whatever discrepancy is
        // left there is the integrand's own granularity in double, not
        // quadrature error, so the panel is accepted as-is.
        const double width_floor = 4.0 * std::numeric_limits<double>::epsilon() *
                                   std::max(std::abs(a), std::abs(b));
        if (b - a <= width_floor || !(a < m && m < b))
            return left + right + delta / 15.0;
        if (depth >= max_depth)
            throw MaxIterExceeded("integrate_adaptive: max depth reached");
        return run(a, m, fa_l, flm, fm, left, sing_lo_l, false, depth + 1) +
               run(m, b, fm, frm, fb_r, right, false, sing_hi_r, depth + 1);
    }
};

} // namespace detail

// Adaptive Simpson quadrature of f over [interval.lo, interval.hi].
// Integrable endpoint singularities are handled by offset evaluation; a
// non-finite value at an interior node raises NonFinite. The per-panel
// error budget is max(abs_tol, rel_tol * |coarse estimate|) / 8; panels keep
// the full budget when split, which is what makes endpoint singularities
// terminate (a halving budget shrinks faster than the local error does).
template <typename F>
double integrate_adaptive(F&& f, Bracket interval,
                          const Tolerance& tol = kQuadTol) {
    const double a = interval.lo, b = interval.hi;
    if (!(a < b)) throw DomainError("integrate_adaptive: interval lo >= hi");
    bool sing_lo = false, sing_hi = false;
    const double fa = detail::eval_with_offset(f, a, b, sing_lo);
    const double fb = detail::eval_with_offset(f, b, a, sing_hi);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (!std::isfinite(fm))
        throw NonFinite("integrate_adaptive: non-finite value at interior node");
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // The budget's scale reference swaps any offset-proxy endpoint value for
    // the midpoint value: a proxy next to a singularity can exceed the true
    // integral by orders of magnitude, which would inflate the relative
    // budget exactly where refinement matters most.
    const double whole_budget =
        (b - a) / 6.0 * ((sing_lo ? fm : fa) + 4.0 * fm + (sing_hi ? fm : fb));
    const double panel_tol =
        std::max(tol.abs_tol, tol.rel_tol * std::abs(whole_budget)) / 8.0;
    detail::AdaptiveSimpson<std::remove_reference_t<F>> solver{
        f, panel_tol, tol.max_iter};
    return solver.run(a, b, fa, fm, fb, whole, sing_lo, sing_hi, 0);
}

} // namespace fidmc
