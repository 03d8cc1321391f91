// Discovery-spacing schedules gamma_t: the log-decay default in infinite and
// finite-horizon normalizations, a dependence-safe scaled variant, and custom
// sequences.
#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "fdrstream/core.hpp"

namespace fdrstream {

// log(t v 2) / (t * exp(sqrt(log t))), the unnormalized default shape.
inline double gamma_raw(long t) {
    if (t < 1) throw ValidationError("gamma: t must be >= 1");
    const double td = static_cast<double>(t);
    const double lt = std::log(td);
    return std::log(std::max(td, 2.0)) / (td * std::exp(std::sqrt(lt)));
}

namespace detail {

// Upper bound on sum_{t>M} raw(t) via the integral of u*exp(-sqrt(u)) du
// from log M: substituting v = sqrt(u) gives 2*Gamma(4, v0) in the upper
// incomplete gamma, which has a finite closed form for integer order.
inline double upper_incomplete_gamma_int(int n, double x) {
    double fact = 1.0, series = 0.0, pow_term = 1.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) {
            fact *= k;
            pow_term *= x / static_cast<double>(k);
        }
        series += pow_term;
    }
    double full_fact = 1.0;  // (n-1)!
    for (int k = 2; k < n; ++k) full_fact *= k;
    return full_fact * std::exp(-x) * series;
}

inline double gamma_raw_tail_bound(long M) {
    const double v0 = std::sqrt(std::log(static_cast<double>(M)));
    return 2.0 * upper_incomplete_gamma_int(4, v0);
}

// Tail of sum raw(t)*(1+log t): integral of u(1+u)e^{-sqrt u} du
// = 2*[Gamma(4,v0) + Gamma(6,v0)].
inline double gamma_weighted_tail_bound(long M) {
    const double v0 = std::sqrt(std::log(static_cast<double>(M)));
    return 2.0 * (upper_incomplete_gamma_int(4, v0) + upper_incomplete_gamma_int(6, v0));
}

}  // namespace detail

class GammaSchedule {
  public:
    enum class Kind { javanmard_default, dependent_safe, custom };

    // Infinite-horizon mode with the conventional 0.0722 constant. That
    // constant under-normalizes slightly (the series sums to ~0.913), which
    // only makes wealth guarantees conservative.
    static GammaSchedule javanmard_infinite() {
        GammaSchedule g;
        g.kind_ = Kind::javanmard_default;
        g.normalization_ = 0.0722;
        return g;
    }

    static GammaSchedule javanmard_finite(long horizon) {
        if (horizon < 1) throw ValidationError("gamma: horizon must be >= 1");
        GammaSchedule g;
        g.kind_ = Kind::javanmard_default;
        g.horizon_ = horizon;
        double sum = 0.0;
        g.values_.reserve(static_cast<std::size_t>(horizon));
        for (long t = 1; t <= horizon; ++t) g.values_.push_back(gamma_raw(t));
        for (double v : g.values_) sum += v;
        g.normalization_ = 1.0 / sum;
        for (double& v : g.values_) v *= g.normalization_;
        return g;
    }

    // The infinite default scaled so sum gamma_t*(1+log t) = alpha/b0 - margin
    // (evaluated to 1e7 terms plus an analytic tail bound), additionally
    // capped so sum gamma_t <= 1, which the wealth recursion needs.
    static GammaSchedule dependent_safe(double alpha, double b0, double margin = 1e-6) {
        if (!(alpha > 0.0 && b0 > 0.0 && alpha / b0 > margin))
            throw ValidationError("gamma dependent_safe: need alpha, b0 > 0");
        GammaSchedule base = javanmard_infinite();
        const double weighted = weighted_series_upper_bound(base);
        const double total = plain_series_upper_bound(base);
        double scale = (alpha / b0 - margin) / weighted;
        scale = std::min(scale, (1.0 - 1e-12) / total);
        GammaSchedule g;
        g.kind_ = Kind::dependent_safe;
        g.normalization_ = base.normalization_ * scale;
        return g;
    }

    static GammaSchedule custom(std::vector<double> values) {
        if (values.empty()) throw ValidationError("gamma custom: empty sequence");
        double prev = values.front(), sum = 0.0;
        for (double v : values) {
            if (!(v >= 0.0)) throw ValidationError("gamma custom: negative entry");
            if (v > prev + 1e-15) throw ValidationError("gamma custom: not non-increasing");
            prev = v;
            sum += v;
        }
        if (sum > 1.0 + 1e-9) throw ValidationError("gamma custom: sum exceeds 1");
        GammaSchedule g;
        g.kind_ = Kind::custom;
        g.horizon_ = static_cast<long>(values.size());
        g.values_ = std::move(values);
        g.normalization_ = 1.0;
        return g;
    }

    // 1-based. Beyond a finite horizon the schedule is exhausted: 0 budget.
    double at(long t) const {
        if (t < 1) throw ValidationError("gamma: t must be >= 1");
        if (!values_.empty())
            return t <= static_cast<long>(values_.size())
                       ? values_[static_cast<std::size_t>(t - 1)]
                       : 0.0;
        return normalization_ * gamma_raw(t);
    }

    Kind kind() const { return kind_; }
    std::optional<long> horizon() const { return horizon_; }
    double normalization() const { return normalization_; }

    // Conservative upper bound on sum_t gamma_t (exact for finite kinds).
    static double plain_series_upper_bound(const GammaSchedule& g, long terms = 10'000'000) {
        if (!g.values_.empty()) {
            double s = 0.0;
            for (double v : g.values_) s += v;
            return s;
        }
        double s = 0.0;
        for (long t = 1; t <= terms; ++t) s += gamma_raw(t);
        s += detail::gamma_raw_tail_bound(terms);
        return g.normalization_ * s;
    }

    static double weighted_series_upper_bound(const GammaSchedule& g, long terms = 10'000'000) {
        double s = 0.0;
        if (!g.values_.empty()) {
            for (std::size_t i = 0; i < g.values_.size(); ++i)
                s += g.values_[i] * (1.0 + std::log(static_cast<double>(i + 1)));
            return s;
        }
        for (long t = 1; t <= terms; ++t)
            s += gamma_raw(t) * (1.0 + std::log(static_cast<double>(t)));
        s += detail::gamma_weighted_tail_bound(terms);
        return g.normalization_ * s;
    }

  private:
    Kind kind_ = Kind::javanmard_default;
    std::optional<long> horizon_;
    std::vector<double> values_;   // empty => evaluate lazily from normalization_
    double normalization_ = 0.0722;
};

// Spec-level convenience: one gamma value in either normalization mode.
inline double gamma_javanmard(long t, std::optional<long> horizon = std::nullopt) {
    if (!horizon) return 0.0722 * gamma_raw(t);
    static thread_local std::optional<long> cached_T;
    static thread_local GammaSchedule cached = GammaSchedule::javanmard_infinite();
    if (cached_T != horizon) {
        cached = GammaSchedule::javanmard_finite(*horizon);
        cached_T = horizon;
    }
    return cached.at(t);
}

struct DependentSafeReport {
    bool pass = false;
    double weighted_sum = 0.0;  // sum gamma_t (1 + log t), upper-bounded tail
    double budget = 0.0;        // alpha / b0
};

inline DependentSafeReport check_dependent_safe(const GammaSchedule& g, double alpha, double b0) {
    DependentSafeReport rep;
    rep.budget = alpha / b0;
    rep.weighted_sum = GammaSchedule::weighted_series_upper_bound(g);
    rep.pass = rep.weighted_sum <= rep.budget;
    return rep;
}

}  // namespace fdrstream
