// Analytic power machinery: the two-sided normal-means p-value law F and its
// density f, the mixture marginals G (raw p) and D (weighted p), the renewal
// lower-bound series, the a0 threshold, and the power-separation checks.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "fdrstream/core.hpp"
#include "fdrstream/gamma_schedule.hpp"
#include "fdrstream/normal.hpp"
#include "fdrstream/sim.hpp"

namespace fdrstream {

// F(a; mu) = Pr[P <= a | mean mu] = Phi(mu - z) + Phi(-mu - z), z = Phi^-1(1 - a/2).
inline double normal_means_F(double a, double mu) {
    if (a <= 0.0) return 0.0;
    if (a >= 1.0) return 1.0;
    const double z = normal_quantile(1.0 - a / 2.0);
    return normal_cdf(mu - z) + normal_cdf(-mu - z);
}

// Density f(a; mu) = dF/da = (phi(z - mu) + phi(z + mu)) / (2 phi(z))
//                  = exp(-mu^2/2) cosh(mu z), evaluated overflow-safely.
inline double normal_means_f(double a, double mu) {
    if (!(a > 0.0 && a < 1.0))
        throw ValidationError("normal_means_f: a must lie in (0,1)");
    const double z = normal_quantile(1.0 - a / 2.0);
    const double t = std::abs(mu) * z;
    // 0.5 (e^{t - mu^2/2} + e^{-t - mu^2/2}); the first term dominates for z >= 0
    return 0.5 * std::exp(t - 0.5 * mu * mu) * (1.0 + std::exp(-2.0 * t));
}

inline double marginal_G(double a, double pi1, const std::function<double(double)>& F) {
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("marginal_G: a must lie in [0,1]");
    return (1.0 - pi1) * a + pi1 * F(a);
}

namespace detail {
inline double simpson(double lo, double hi, double flo, double fmid, double fhi) {
    return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
}

inline double adaptive_simpson(const std::function<double(double)>& g, double lo, double hi,
                               double flo, double fmid, double fhi, double whole, double tol,
                               int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid), rmid = 0.5 * (mid + hi);
    const double flm = g(lmid), frm = g(rmid);
    const double left = simpson(lo, mid, flo, flm, fmid);
    const double right = simpson(mid, hi, fmid, frm, fhi);
    if (depth <= 0) throw ValidationError("quadrature: refinement limit reached");
    if (std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(g, lo, mid, flo, flm, fmid, left, tol / 2.0, depth - 1) +
           adaptive_simpson(g, mid, hi, fmid, frm, fhi, right, tol / 2.0, depth - 1);
}

inline double integrate(const std::function<double(double)>& g, double lo, double hi,
                        double tol) {
    const double mid = 0.5 * (lo + hi);
    const double flo = g(lo), fmid = g(mid), fhi = g(hi);
    const double whole = simpson(lo, hi, flo, fmid, fhi);
    return adaptive_simpson(g, lo, hi, flo, fmid, fhi, whole, tol, 48);
}
}  // namespace detail

// D(a) = (1 - pi1) u0 a + pi1 * E_{Q1}[F(a w)]; the expectation is exact for
// discrete Q1 and adaptive-Simpson quadrature (tol 1e-8) for the uniform
// family. F's argument is clamped to [0,1] inside normal_means_F-style CDFs.
inline double marginal_D(double a, double pi1, double u0,
                         const std::function<double(double)>& F, const WeightDist& q1) {
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("marginal_D: a must lie in [0,1]");
    double alt = 0.0;
    switch (q1.kind) {
        case WeightDist::Kind::point_mass:
            alt = F(a * q1.a);
            break;
        case WeightDist::Kind::two_point:
            alt = (1.0 - q1.prob_b) * F(a * q1.a) + q1.prob_b * F(a * q1.b);
            break;
        case WeightDist::Kind::uniform: {
            auto g = [&](double w) { return F(a * w); };
            alt = detail::integrate(g, q1.a, q1.b, 1e-8) / (q1.b - q1.a);
            break;
        }
    }
    return (1.0 - pi1) * u0 * a + pi1 * alt;
}

struct PowerBound {
    double series = 0.0;     // S = sum_m prod_{j<=m} (1 - D(b0 gamma_j))
    double as_stated = 0.0;  // 1/S, clamped to [0,1]
    double corrected = 0.0;  // 1/(1+S), clamped to [0,1]
    bool zero_series = false;
    bool divergent = false;
    double tail_bound = 0.0;
    long terms_used = 0;
};

// Evaluates the renewal series with truncation M, early stop when the running
// product drops below `product_floor`, and a geometric tail estimate based on
// the last evaluated D value. Both reciprocal conventions are reported; the
// caller decides which to headline.
inline PowerBound power_lower_bound(const std::function<double(double)>& D, double b0,
                                    const GammaSchedule& gamma, long M = 1000000,
                                    double product_floor = 1e-12) {
    if (!(b0 > 0.0)) throw ValidationError("power_lower_bound: b0 must be positive");
    PowerBound out;
    double prod = 1.0;
    double last_d = 0.0;
    bool stopped_early = false;
    for (long m = 1; m <= M; ++m) {
        const double g = gamma.at(m);
        const double a = b0 * g;
        if (!(a > 0.0)) {  // schedule exhausted: all later terms repeat `prod`
            out.divergent = prod > product_floor;
            out.tail_bound = out.divergent ? std::numeric_limits<double>::infinity() : 0.0;
            stopped_early = true;
            break;
        }
        const double d = std::min(D(std::min(a, 1.0)), 1.0);
        if (!(d >= 0.0))
            throw ValidationError("power_lower_bound: D must be non-negative");
        last_d = d;
        prod *= (1.0 - d);
        out.series += prod;
        ++out.terms_used;
        if (prod < product_floor) {
            out.tail_bound = last_d > 0.0 ? prod * (1.0 - last_d) / last_d
                                          : std::numeric_limits<double>::infinity();
            stopped_early = true;
            break;
        }
    }
    if (!stopped_early) {
        out.tail_bound = last_d > 0.0 ? prod * (1.0 - last_d) / last_d
                                      : std::numeric_limits<double>::infinity();
        if (!(out.tail_bound <= 1e-6 * std::max(out.series, 1.0))) out.divergent = true;
    }
    out.zero_series = out.series == 0.0;
    out.as_stated = out.zero_series ? 1.0 : std::clamp(1.0 / out.series, 0.0, 1.0);
    out.corrected = std::clamp(1.0 / (1.0 + out.series), 0.0, 1.0);
    return out;
}

// Root of f(a) = 1 on (lo, hi) by bisection; f must be > 1 at lo and < 1 at
// hi (continuous, decreasing through the root).
inline double compute_a0(const std::function<double(double)>& f, double lo = 1e-12,
                         double hi = 1.0 - 1e-12, double tol = 1e-9) {
    if (!(lo > 0.0 && hi < 1.0 && lo < hi))
        throw ValidationError("compute_a0: need 0 < lo < hi < 1");
    double glo = f(lo) - 1.0, ghi = f(hi) - 1.0;
    if (!(glo > 0.0) || !(ghi < 0.0))
        throw ValidationError("compute_a0: no sign change of f - 1 on the search interval");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        const double gm = f(mid) - 1.0;
        if (gm > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

inline double compute_a0_normal_means(double mu) {
    return compute_a0([mu](double a) { return normal_means_f(a, mu); });
}

inline bool validate_informative(double u0, double u1, double pi1) {
    const double mean = (1.0 - pi1) * u0 + pi1 * u1;
    return u0 < 1.0 && u1 > 1.0 && std::abs(mean - 1.0) <= 1e-9;
}

struct SeparationReport {
    bool informative = false;
    bool level_condition = false;    // b0 gamma_1 < a0
    bool support_condition = false;  // Q1 support lies strictly below a0 / (b0 gamma_1)
    bool pass = false;
    double a0 = 0.0;
    double bound = 0.0;              // a0 / (b0 gamma_1)
};

inline SeparationReport check_separation(double pi1, const std::function<double(double)>& f,
                                         double b0, const GammaSchedule& gamma,
                                         const WeightDist& q0, const WeightDist& q1) {
    SeparationReport rep;
    rep.a0 = compute_a0(f);
    const double bg1 = b0 * gamma.at(1);
    if (!(bg1 > 0.0)) throw ValidationError("check_separation: b0 * gamma_1 must be positive");
    rep.bound = rep.a0 / bg1;
    rep.level_condition = bg1 < rep.a0;
    rep.support_condition = q1.support_max() < rep.bound;
    rep.informative = validate_informative(q0.mean(), q1.mean(), pi1);
    rep.pass = rep.informative && rep.level_condition && rep.support_condition;
    return rep;
}

}  // namespace fdrstream
