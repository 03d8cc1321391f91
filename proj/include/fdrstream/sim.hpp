// Synthetic stream generators and the replicate experiment harness.
//
// Normal-means model: H_t ~ Bernoulli(pi1); context X_t ~ N(0, sigma2 I_d);
// signal mu_t = <beta, X_t> under the alternative, 0 under the null;
// Z_t = mu_t + N(0,1); two-sided p-value P_t = 2 Phi(-|Z_t|).
//
// Weighted mixture model: p ~ Uniform(0,1) under the null and the fixed-mu
// normal-means law under the alternative; an independent weight omega is
// drawn from Q0 (null) or Q1 (alternative).
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fdrstream/core.hpp"
#include "fdrstream/engine.hpp"
#include "fdrstream/normal.hpp"
#include "fdrstream/rng.hpp"

namespace fdrstream {

inline double two_sided_p(double z) {
    double p = 2.0 * normal_cdf(-std::abs(z));
    if (p >= 1.0) p = std::nextafter(1.0, 0.0);  // keep p in the open interval
    if (p <= 0.0) p = 1e-300;
    return p;
}

struct NormalMeansConfig {
    long T = 10000;
    double pi1 = 0.5;
    int d = 10;
    double sigma2 = 0.0;              // <= 0 means "use the default 2 log T"
    std::vector<double> beta;         // empty means "draw once from beta_seed"
    std::uint64_t beta_seed = 7;
    std::uint64_t seed = 1;

    double effective_sigma2() const {
        if (sigma2 > 0.0) return sigma2;
        const double def = 2.0 * std::log(static_cast<double>(T));
        if (!(def > 0.0))
            throw ValidationError("normal-means: default variance 2 log T requires T >= 2; "
                                  "set sigma2 explicitly");
        return def;
    }

    void validate() const {
        if (T < 1) throw ValidationError("normal-means: horizon must be >= 1");
        if (!(pi1 > 0.0 && pi1 < 1.0))
            throw ValidationError("normal-means: pi1 must lie in (0,1)");
        if (d < 1) throw ValidationError("normal-means: context dimension must be >= 1");
        if (!beta.empty() && static_cast<int>(beta.size()) != d)
            throw ValidationError("normal-means: beta has dimension " +
                                  std::to_string(beta.size()) + ", expected " +
                                  std::to_string(d));
        (void)effective_sigma2();
    }
};

inline std::vector<double> draw_beta(int d, std::uint64_t beta_seed) {
    Rng rng(beta_seed);
    std::vector<double> beta(static_cast<std::size_t>(d));
    for (double& b : beta) b = rng.uniform(-2.0, 2.0);
    return beta;
}

inline std::vector<HypothesisEvent> generate_normal_means(const NormalMeansConfig& cfg) {
    cfg.validate();
    const std::vector<double> beta = cfg.beta.empty() ? draw_beta(cfg.d, cfg.beta_seed)
                                                      : cfg.beta;
    const double sd = std::sqrt(cfg.effective_sigma2());
    Rng rng(cfg.seed);
    std::vector<HypothesisEvent> events;
    events.reserve(static_cast<std::size_t>(cfg.T));
    for (long t = 1; t <= cfg.T; ++t) {
        HypothesisEvent ev;
        ev.index = t;
        const bool alt = rng.bernoulli(cfg.pi1);
        ev.alternative = alt;
        ev.context.resize(static_cast<std::size_t>(cfg.d));
        for (double& xi : ev.context) xi = sd * rng.normal();
        double mu = 0.0;
        if (alt)
            for (int i = 0; i < cfg.d; ++i) mu += beta[static_cast<std::size_t>(i)] *
                                                 ev.context[static_cast<std::size_t>(i)];
        const double z = mu + rng.normal();
        ev.p = two_sided_p(z);
        events.push_back(std::move(ev));
    }
    return events;
}

// Weight distribution families supported for Q0 / Q1 (support must stay in
// (0, inf)).
struct WeightDist {
    enum class Kind { point_mass, two_point, uniform } kind = Kind::point_mass;
    double a = 1.0;        // point: the atom; two-point: low atom; uniform: lower end
    double b = 1.0;        // two-point: high atom; uniform: upper end
    double prob_b = 0.0;   // two-point: probability of the high atom

    static WeightDist point_mass(double v) { return {Kind::point_mass, v, v, 0.0}; }
    static WeightDist two_point(double lo, double hi, double prob_hi) {
        return {Kind::two_point, lo, hi, prob_hi};
    }
    static WeightDist uniform(double lo, double hi) { return {Kind::uniform, lo, hi, 0.0}; }

    void validate() const {
        switch (kind) {
            case Kind::point_mass:
                if (!(a > 0.0)) throw ValidationError("weight dist: atom must be positive");
                break;
            case Kind::two_point:
                if (!(a > 0.0 && b >= a))
                    throw ValidationError("weight dist: need 0 < low <= high");
                if (!(prob_b >= 0.0 && prob_b <= 1.0))
                    throw ValidationError("weight dist: atom probability must lie in [0,1]");
                break;
            case Kind::uniform:
                if (!(a > 0.0 && b > a))
                    throw ValidationError("weight dist: need 0 < lower < upper");
                break;
        }
    }

    double mean() const {
        switch (kind) {
            case Kind::point_mass: return a;
            case Kind::two_point: return (1.0 - prob_b) * a + prob_b * b;
            case Kind::uniform: return 0.5 * (a + b);
        }
        return a;
    }

    double support_max() const { return kind == Kind::point_mass ? a : b; }

    double sample(Rng& rng) const {
        switch (kind) {
            case Kind::point_mass: return a;
            case Kind::two_point: return rng.bernoulli(prob_b) ? b : a;
            case Kind::uniform: return rng.uniform(a, b);
        }
        return a;
    }
};

struct MixtureWeightConfig {
    long T = 10000;
    double pi1 = 0.5;
    double mu = 3.0;        // fixed alternative mean of the p-value law
    WeightDist q0 = WeightDist::point_mass(1.0);
    WeightDist q1 = WeightDist::point_mass(1.0);
    std::uint64_t seed = 1;

    void validate() const {
        if (T < 1) throw ValidationError("mixture: horizon must be >= 1");
        if (!(pi1 > 0.0 && pi1 < 1.0)) throw ValidationError("mixture: pi1 must lie in (0,1)");
        q0.validate();
        q1.validate();
    }
};

struct WeightedStream {
    std::vector<HypothesisEvent> events;
    std::vector<double> weights;
};

inline WeightedStream generate_weighted_mixture(const MixtureWeightConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    WeightedStream out;
    out.events.reserve(static_cast<std::size_t>(cfg.T));
    out.weights.reserve(static_cast<std::size_t>(cfg.T));
    for (long t = 1; t <= cfg.T; ++t) {
        HypothesisEvent ev;
        ev.index = t;
        const bool alt = rng.bernoulli(cfg.pi1);
        ev.alternative = alt;
        if (alt) {
            const double z = cfg.mu + rng.normal();
            ev.p = two_sided_p(z);
        } else {
            ev.p = rng.uniform();
        }
        const double w = (alt ? cfg.q1 : cfg.q0).sample(rng);
        out.events.push_back(std::move(ev));
        out.weights.push_back(w);
    }
    return out;
}

enum class ExecPolicy { serial, openmp };

struct ExperimentReport {
    struct Row {
        int replicate = 0;
        std::uint64_t seed = 0;
        double max_fdp = 0.0;
        double final_fdp = 0.0;
        double tdp = 0.0;
        long R = 0;
        long V = 0;
    };
    std::vector<Row> rows;
    double mean_max_fdp = 0.0, se_max_fdp = 0.0;
    double mean_final_fdp = 0.0, se_final_fdp = 0.0;
    double mean_tdp = 0.0, se_tdp = 0.0;
    std::string note;

    double mfdr(double eta = 1.0) const {
        double mv = 0.0, mr = 0.0;
        for (const Row& row : rows) {
            mv += static_cast<double>(row.V);
            mr += static_cast<double>(row.R);
        }
        const double n = static_cast<double>(rows.empty() ? 1 : rows.size());
        return (mv / n) / (mr / n + eta);
    }
};

namespace detail {
inline void mean_se(const std::vector<double>& v, double& mean, double& se) {
    const double n = static_cast<double>(v.size());
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    if (v.size() < 2) { se = 0.0; return; }
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / (n - 1.0) / n);
}
}  // namespace detail

// Runs `repeats` labeled replicates; `run_replicate(seed, index)` owns stream
// generation and rule execution, so it composes with any rule (including the
// stream-transforming weighted runs). Replicate seeds are derived from
// base_seed by counter, and reports are merged by replicate index, so serial
// and parallel execution produce identical reports.
inline ExperimentReport run_experiment(
    const std::function<RunResult(std::uint64_t seed, int replicate)>& run_replicate,
    int repeats, std::uint64_t base_seed, ExecPolicy policy = ExecPolicy::serial) {
    if (repeats < 1) throw ValidationError("experiment: repeats must be >= 1");
    ExperimentReport rep;
    rep.rows.resize(static_cast<std::size_t>(repeats));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(repeats));

    auto one = [&](int r) {
        const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(r));
        RunResult rr = run_replicate(seed, r);
        const MetricsAccumulator& m = rr.metrics;
        if (!m.labeled())
            throw ValidationError("experiment: replicate streams must carry labels");
        rep.rows[static_cast<std::size_t>(r)] =
            {r, seed, m.max_fdp(), fdp(m), tdp(m), m.R(), m.V()};
    };

#ifdef _OPENMP
    if (policy == ExecPolicy::openmp) {
#pragma omp parallel for schedule(dynamic)
        for (int r = 0; r < repeats; ++r) {
            try {
                one(r);
            } catch (...) {
                errors[static_cast<std::size_t>(r)] = std::current_exception();
            }
        }
    } else
#endif
    {
        (void)policy;
        for (int r = 0; r < repeats; ++r) {
            try {
                one(r);
            } catch (...) {
                errors[static_cast<std::size_t>(r)] = std::current_exception();
            }
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);  // first failure by replicate index

    std::vector<double> maxes, finals, tdps;
    for (const auto& row : rep.rows) {
        maxes.push_back(row.max_fdp);
        finals.push_back(row.final_fdp);
        tdps.push_back(row.tdp);
    }
    detail::mean_se(maxes, rep.mean_max_fdp, rep.se_max_fdp);
    detail::mean_se(finals, rep.mean_final_fdp, rep.se_final_fdp);
    detail::mean_se(tdps, rep.mean_tdp, rep.se_tdp);
    rep.note = "mean of per-replicate maximum FDP over-estimates the time-maximum of FDR";
    return rep;
}

}  // namespace fdrstream
