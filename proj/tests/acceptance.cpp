// Integration acceptance checks for the streaming FDR engine.
//
// Each criterion prints exactly one [PASS]/[FAIL] line (indented lines are
// supporting detail). Checks A4, A5, and A6 pin external numeric targets the
// implemented formulas do not reproduce; they are intentionally left red with
// full diagnostics rather than loosened. Exit code is the number of failures.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fdrstream/baselines.hpp"
#include "fdrstream/csv.hpp"
#include "fdrstream/power.hpp"
#include "fdrstream/rng.hpp"
#include "fdrstream/rules.hpp"
#include "fdrstream/sim.hpp"
#include "fdrstream/snapshot.hpp"
#include "fdrstream/weightnet.hpp"

using namespace fdrstream;

namespace {

int g_failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "[PASS]" : "[FAIL]", id.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

void info(const std::string& line) { std::printf("       %s\n", line.c_str()); }

std::string num(double v, const char* spec = "%.4g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// One-sided sign test: probability of >= k heads in n fair flips.
double sign_test_p(int k, int n) {
    if (n <= 0) return 1.0;
    double total = 0.0;
    for (int j = k; j <= n; ++j)
        total += std::exp(std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                          std::lgamma(n - j + 1.0) - n * std::log(2.0));
    return std::min(total, 1.0);
}

// ---------------------------------------------------------------------------
// A1: the level-sum estimator sum(alpha_t)/max(R,1) never exceeds alpha, at
// any prefix, on adversarial streams. Exact comparison, no tolerance.
void criterion_1() {
    const auto gamma = GammaSchedule::javanmard_finite(10000);
    const double alpha = 0.1, w0 = 0.05;
    Rng rng(20260815);
    long checks = 0;
    double worst = 0.0;
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
        const double u = rng.uniform();
        long len = static_cast<long>(std::llround(std::pow(10.0, 1.0 + 3.0 * u)));
        len = std::max<long>(10, std::min<long>(10000, len));
        std::vector<HypothesisEvent> ev(static_cast<std::size_t>(len));
        for (long t = 0; t < len; ++t) {
            ev[static_cast<std::size_t>(t)].index = t + 1;
            double p;
            if (i % 10 == 0) {
                p = 0.0;  // every test rejects
            } else if (i % 10 == 1) {
                p = std::nextafter(1.0, 0.0);  // no test ever rejects
            } else {
                p = rng.uniform();
                if (rng.uniform() < 0.2) p *= 0.01;
                if (rng.uniform() < 0.05) p = 0.0;
            }
            ev[static_cast<std::size_t>(t)].p = p;
        }
        LordPPRule rule(alpha, w0, gamma);
        const RunResult res = run_stream(rule, alpha, w0, ev, false);
        double sum = 0.0;
        long R = 0;
        for (const Decision& d : res.decisions) {
            sum += d.alpha;
            if (d.rejected) ++R;
            const double est = sum / static_cast<double>(std::max<long>(R, 1));
            worst = std::max(worst, est);
            if (est > alpha) ok = false;
            ++checks;
        }
    }
    report("A1 estimator bound sup_t sum(alpha)/max(R,1) <= alpha (exact)", ok,
           "1000 streams, " + std::to_string(checks) + " prefix checks, worst estimate " +
               num(worst, "%.6f") + " vs alpha " + num(alpha, "%.2f"));
}

// ---------------------------------------------------------------------------
// A2/A3 share paired runs: same replicate seeds for the plain and the trained
// contextual rule on the normal-means model (T = 1e4, d = 10, alpha = 0.1).
struct PairedReports {
    ExperimentReport base;  // lordpp
    ExperimentReport ctx;   // trained cwlordpp
};

PairedReports paired_runs(double pi1, int reps, std::uint64_t base_seed,
                          const GammaSchedule& gamma) {
    auto make_events = [pi1](std::uint64_t seed) {
        NormalMeansConfig cfg;
        cfg.T = 10000;
        cfg.pi1 = pi1;
        cfg.d = 10;
        cfg.seed = seed;
        return generate_normal_means(cfg);
    };
    PairedReports out;
    out.base = run_experiment(
        [&](std::uint64_t seed, int) {
            const auto ev = make_events(seed);
            LordPPRule rule(0.1, 0.05, gamma);
            return run_stream(rule, 0.1, 0.05, ev, false);
        },
        reps, base_seed);
    out.ctx = run_experiment(
        [&](std::uint64_t seed, int) {
            const auto ev = make_events(seed);
            TrainConfig cfg;  // library defaults: 10x10 net, batch 100, lr 0.01
            return train_online(ev, 0.1, 0.05, gamma, cfg, false).run;
        },
        reps, base_seed);
    return out;
}

void criteria_2_and_3() {
    const auto gamma = GammaSchedule::javanmard_finite(10000);
    const int reps = 20;
    bool fdr_ok = true;
    PairedReports half;  // pi1 = 0.5, reused for the power comparison
    for (double pi1 : {0.3, 0.5, 0.7}) {
        const PairedReports pr =
            paired_runs(pi1, reps, 31000 + static_cast<std::uint64_t>(pi1 * 10), gamma);
        const bool ok_base =
            pr.base.mean_final_fdp <= 0.1 + 3.0 * pr.base.se_final_fdp;
        const bool ok_ctx = pr.ctx.mean_final_fdp <= 0.1 + 3.0 * pr.ctx.se_final_fdp;
        fdr_ok = fdr_ok && ok_base && ok_ctx;
        info("pi1=" + num(pi1, "%.1f") + "  lordpp final FDP " +
             num(pr.base.mean_final_fdp) + " (se " + num(pr.base.se_final_fdp) +
             ", max-FDP " + num(pr.base.mean_max_fdp) + ")  cwlordpp final FDP " +
             num(pr.ctx.mean_final_fdp) + " (se " + num(pr.ctx.se_final_fdp) +
             ", max-FDP " + num(pr.ctx.mean_max_fdp) + ")");
        if (pi1 == 0.5) half = pr;
    }
    report("A2 mean final FDP <= alpha + 3*SE for lordpp and trained cwlordpp", fdr_ok,
           "normal-means T=1e4 d=10 alpha=0.1, pi1 in {0.3,0.5,0.7}, 20 replicates each"
           " (details above)");

    // A3: paired power comparison at pi1 = 0.5.
    double mean_diff = 0.0;
    int wins = 0, losses = 0;
    for (int r = 0; r < reps; ++r) {
        const double d = half.ctx.rows[static_cast<std::size_t>(r)].tdp -
                         half.base.rows[static_cast<std::size_t>(r)].tdp;
        mean_diff += d / reps;
        if (d > 0.0) ++wins;
        if (d < 0.0) ++losses;
    }
    const double p_favor = sign_test_p(wins, wins + losses);
    const double p_adverse = sign_test_p(losses, wins + losses);
    const bool pass = mean_diff >= 0.0 && p_adverse >= 0.05;
    report("A3 trained cwlordpp does not lose power vs lordpp (paired, pi1=0.5)", pass,
           "mean paired TDP diff " + num(mean_diff, "%+.5f") + ", wins/losses " +
               std::to_string(wins) + "/" + std::to_string(losses) +
               ", one-sided sign test p(favorable)=" + num(p_favor) +
               " p(adverse)=" + num(p_adverse));
    info("cwlordpp mean TDP " + num(half.ctx.mean_tdp, "%.4f") + " (se " +
         num(half.ctx.se_tdp) + "), lordpp mean TDP " + num(half.base.mean_tdp, "%.4f") +
         " (se " + num(half.base.se_tdp) + ")");
}

// ---------------------------------------------------------------------------
// A4: density-threshold reproduction at mu = 4 against the pinned window.
double g_a0_mu4 = 0.0;  // shared with A5

void criterion_4() {
    const double a1 = compute_a0_normal_means(1.0);
    const double a2 = compute_a0_normal_means(2.0);
    const double a3 = compute_a0_normal_means(3.0);
    const double a4 = compute_a0_normal_means(4.0);
    g_a0_mu4 = a4;
    const bool in_window = a4 >= 0.020 && a4 <= 0.024;
    report("A4 a0(mu=4) within [0.020, 0.024]", in_window,
           "computed a0(4) = " + num(a4, "%.6f") +
               " (two-sided alternative density; bisection tol 1e-9)");
    info("one-sided-density variant Phi(-mu/2) = " + num(normal_cdf(-2.0), "%.6f") +
         " also misses the window");
    info("a0 by mu: " + num(a1, "%.6f") + " > " + num(a2, "%.6f") + " > " +
         num(a3, "%.6f") + " > " + num(a4, "%.6f") +
         " (monotone decreasing; min over mu in (0,4] = " + num(a4, "%.6f") +
         " stays above 0.022)");
    // Cross-check the bisection root via numerical differentiation of F.
    const double h = 1e-6;
    const double fd =
        (normal_means_F(a4 + h, 4.0) - normal_means_F(a4 - h, 4.0)) / (2.0 * h);
    info("density at the root via centered difference of F: " + num(fd, "%.6f") +
         " (should be 1)");
}

// A5: separation-ratio reproduction with alpha=0.05, b0=0.025, gamma1 := 0.117.
void criterion_5() {
    const double b0 = 0.025, gamma1 = 0.117;
    const double ratio = g_a0_mu4 / (b0 * gamma1);
    const bool pass = std::abs(ratio - 7.52) <= 0.15;
    report("A5 a0/(b0*gamma1) = 7.52 +/- 0.15 (b0=0.025, gamma1=0.117)", pass,
           "computed ratio " + num(ratio, "%.4f") + " from a0 = " + num(g_a0_mu4, "%.6f"));
    info("one-sided a0 gives " + num(normal_cdf(-2.0) / (b0 * gamma1), "%.4f") +
         "; only the rounded-down value 0.022 reproduces the target: " +
         num(0.022 / (b0 * gamma1), "%.4f"));
}

// ---------------------------------------------------------------------------
// A6: renewal-series prediction vs simulated TDP for the pre-reward variant of
// lord (w0 = b0 = alpha/2) on the iid mixture (mu = 3, pi1 = 0.2, T = 1e5).
void criterion_6() {
    const long T = 100000;
    const auto gamma = GammaSchedule::javanmard_finite(T);
    const auto rep = run_experiment(
        [&](std::uint64_t seed, int) {
            MixtureWeightConfig cfg;
            cfg.T = T;
            cfg.pi1 = 0.2;
            cfg.mu = 3.0;
            cfg.seed = seed;  // unit point-mass weights: plain mixture stream
            const auto ws = generate_weighted_mixture(cfg);
            LordRule rule(0.1, 0.05, gamma);
            return run_stream(rule, 0.1, 0.05, ws.events, false);
        },
        20, 46001);

    const auto F3 = [](double a) { return normal_means_F(a, 3.0); };
    const std::function<double(double)> G = [&](double a) {
        return marginal_G(a, 0.2, F3);
    };
    const PowerBound pb = power_lower_bound(G, 0.05, gamma);

    // Renewal rate with the rejected-index alternative fraction made explicit:
    // TDP -> sum_m prod_{l<m}(1-G_l) * F(b0 gamma_m) / (1 + S).
    double prod = 1.0, enriched = 0.0;
    for (long m = 1; m <= T; ++m) {
        const double lvl = 0.05 * gamma.at(m);
        if (lvl <= 0.0) break;
        enriched += prod * F3(lvl);
        prod *= 1.0 - G(lvl);
        if (prod < 1e-15) break;
    }
    enriched /= 1.0 + pb.series;

    double mean_rate = 0.0;
    for (const auto& row : rep.rows)
        mean_rate += static_cast<double>(row.R) / static_cast<double>(T) / 20.0;

    const double gap = std::min(std::abs(rep.mean_tdp - pb.as_stated),
                                std::abs(rep.mean_tdp - pb.corrected));
    report("A6 simulated TDP within 0.02 of the renewal-series prediction",
           gap <= 0.02,
           "simulated TDP " + num(rep.mean_tdp, "%.4f") + " (se " + num(rep.se_tdp) +
               "); series gives 1/S = " + num(pb.as_stated, "%.4f") + ", 1/(1+S) = " +
               num(pb.corrected, "%.4f") + " (S = " + num(pb.series, "%.4f") + ")");
    info("1/(1+S) instead tracks the per-step rejection rate R/T = " +
         num(mean_rate, "%.4f"));
    info("renewal rate with the alternative share of rejections made explicit: " +
         num(enriched, "%.4f") + " (matches simulation)");
}

// ---------------------------------------------------------------------------
// A7: informative two-point weights dominate the unweighted rule, empirically
// (paired) and at the formula level.
void criterion_7() {
    const long T = 5000;
    const auto gamma = GammaSchedule::javanmard_finite(T);
    const auto q0 = WeightDist::point_mass(0.5);
    const auto q1 = WeightDist::point_mass(1.5);
    const auto f3 = [](double a) { return normal_means_f(a, 3.0); };
    const auto sep = check_separation(0.5, f3, 0.05, gamma, q0, q1);

    double mean_diff = 0.0;
    int wins = 0, losses = 0;
    const int reps = 20;
    for (int r = 0; r < reps; ++r) {
        MixtureWeightConfig cfg;
        cfg.T = T;
        cfg.pi1 = 0.5;
        cfg.mu = 3.0;
        cfg.q0 = q0;
        cfg.q1 = q1;
        cfg.seed = derive_seed(47001, static_cast<std::uint64_t>(r));
        const auto ws = generate_weighted_mixture(cfg);
        const auto weighted =
            weighted_rule(BaseRuleKind::lord, ws.events, ws.weights, 0.1, 0.05, gamma, false);
        LordRule plain(0.1, 0.05, gamma);
        const auto unweighted = run_stream(plain, 0.1, 0.05, ws.events, false);
        const double d = tdp(weighted.metrics) - tdp(unweighted.metrics);
        mean_diff += d / reps;
        if (d > 0.0) ++wins;
        if (d < 0.0) ++losses;
    }
    const double p_adverse = sign_test_p(losses, wins + losses);

    const auto F3 = [](double a) { return normal_means_F(a, 3.0); };
    const std::function<double(double)> Dw = [&](double a) {
        return marginal_D(a, 0.5, 0.5, F3, q1);
    };
    const std::function<double(double)> Gm = [&](double a) {
        return marginal_G(a, 0.5, F3);
    };
    const PowerBound bw = power_lower_bound(Dw, 0.05, gamma);
    const PowerBound bu = power_lower_bound(Gm, 0.05, gamma);
    const bool formula_ok = bw.corrected >= bu.corrected && bw.series <= bu.series &&
                            bw.as_stated >= bu.as_stated;

    const bool pass = sep.pass && mean_diff >= 0.0 && p_adverse >= 0.05 && formula_ok;
    report("A7 informative weights (u0=0.5, u1=1.5) never hurt power", pass,
           "mean paired TDP diff " + num(mean_diff, "%+.5f") + ", wins/losses " +
               std::to_string(wins) + "/" + std::to_string(losses) +
               ", sign test p(adverse)=" + num(p_adverse) + "; formula bounds " +
               num(bw.corrected, "%.4f") + " >= " + num(bu.corrected, "%.4f"));
    info("separation check: a0 = " + num(sep.a0, "%.6f") + ", support bound " +
         num(sep.bound, "%.4f") + ", pass = " + (sep.pass ? std::string("yes") : "no"));
}

// ---------------------------------------------------------------------------
// A8: mFDR control for every shipped rule, mean(V)/(mean(R)+1) <= alpha+3*SE
// (delta-method SE over replicates).
struct MfdrResult {
    double mfdr = 0.0, se = 0.0, mean_R = 0.0, mean_V = 0.0;
    bool pass = false;
};

MfdrResult mfdr_check(const ExperimentReport& rep, double alpha) {
    const std::size_t n = rep.rows.size();
    double mv = 0.0, mr = 0.0;
    for (const auto& row : rep.rows) {
        mv += static_cast<double>(row.V) / static_cast<double>(n);
        mr += static_cast<double>(row.R) / static_cast<double>(n);
    }
    double svv = 0.0, srr = 0.0, svr = 0.0;
    for (const auto& row : rep.rows) {
        const double dv = static_cast<double>(row.V) - mv;
        const double dr = static_cast<double>(row.R) - mr;
        svv += dv * dv;
        srr += dr * dr;
        svr += dv * dr;
    }
    const double denom = static_cast<double>(n > 1 ? n - 1 : 1);
    svv /= denom;
    srr /= denom;
    svr /= denom;
    const double g1 = 1.0 / (mr + 1.0);
    const double g2 = -mv / ((mr + 1.0) * (mr + 1.0));
    const double var =
        (g1 * g1 * svv + 2.0 * g1 * g2 * svr + g2 * g2 * srr) / static_cast<double>(n);
    MfdrResult out;
    out.mfdr = mv / (mr + 1.0);
    out.se = std::sqrt(std::max(var, 0.0));
    out.mean_R = mr;
    out.mean_V = mv;
    out.pass = out.mfdr <= alpha + 3.0 * out.se;
    return out;
}

void criterion_8() {
    const long T = 5000;
    const int reps = 50;
    const double alpha = 0.1, w0 = 0.05;
    const auto gamma = GammaSchedule::javanmard_finite(T);
    const auto dep_gamma = GammaSchedule::dependent_safe(alpha, alpha - w0);

    auto contextual_events = [&](std::uint64_t seed) {
        NormalMeansConfig cfg;
        cfg.T = T;
        cfg.pi1 = 0.5;
        cfg.d = 10;
        cfg.seed = seed;
        return generate_normal_means(cfg);
    };
    using Runner = std::function<RunResult(std::uint64_t, int)>;
    std::vector<std::pair<std::string, Runner>> runners;
    runners.emplace_back("lord", [&](std::uint64_t seed, int) {
        LordRule rule(alpha, w0, gamma);
        return run_stream(rule, alpha, w0, contextual_events(seed), false);
    });
    runners.emplace_back("lordpp", [&](std::uint64_t seed, int) {
        LordPPRule rule(alpha, w0, gamma);
        return run_stream(rule, alpha, w0, contextual_events(seed), false);
    });
    runners.emplace_back("cwlordpp (trained)", [&](std::uint64_t seed, int) {
        TrainConfig cfg;
        return train_online(contextual_events(seed), alpha, w0, gamma, cfg, false).run;
    });
    runners.emplace_back("mlord_dep", [&](std::uint64_t seed, int) {
        ModifiedLordDependentRule rule(alpha, w0, dep_gamma);
        return run_stream(rule, alpha, w0, contextual_events(seed), false);
    });
    runners.emplace_back("saffron_est", [&](std::uint64_t seed, int) {
        SaffronEstimatorRule rule(alpha, w0);
        return run_stream(rule, alpha, w0, contextual_events(seed), false);
    });
    // p-value-reweighting wrappers, run where their mean-one premise holds.
    const auto q0 = WeightDist::point_mass(0.5);
    const auto q1 = WeightDist::point_mass(1.5);
    auto weighted_runner = [&](BaseRuleKind kind) {
        return [&, kind](std::uint64_t seed, int) {
            MixtureWeightConfig cfg;
            cfg.T = T;
            cfg.pi1 = 0.5;
            cfg.mu = 3.0;
            cfg.q0 = q0;
            cfg.q1 = q1;
            cfg.seed = seed;
            const auto ws = generate_weighted_mixture(cfg);
            return weighted_rule(kind, ws.events, ws.weights, alpha, w0, gamma, false);
        };
    };
    runners.emplace_back("wlord", weighted_runner(BaseRuleKind::lord));
    runners.emplace_back("wlordpp", weighted_runner(BaseRuleKind::lordpp));

    bool all_ok = true;
    for (const auto& [name, runner] : runners) {
        const auto rep = run_experiment(runner, reps, 48001);
        const MfdrResult m = mfdr_check(rep, alpha);
        all_ok = all_ok && m.pass;
        info(name + ": mFDR " + num(m.mfdr, "%.4f") + " (se " + num(m.se) + ", mean R " +
             num(m.mean_R, "%.1f") + ", mean V " + num(m.mean_V, "%.2f") + ") " +
             (m.pass ? "ok" : "exceeds"));
    }
    report("A8 mFDR = mean(V)/(mean(R)+1) <= alpha + 3*SE for all seven rules", all_ok,
           "mixture models, pi1=0.5, alpha=0.1, T=5e3, 50 replicates (details above)");
}

// ---------------------------------------------------------------------------
// A9: structural property suite (compact re-checks; full versions live in the
// unit tests).
void criterion_9() {
    std::vector<std::string> failures;

    // (a) wealth non-negativity across rules on a rough random stream.
    {
        Rng rng(904);
        std::vector<HypothesisEvent> ev(1500);
        for (std::size_t t = 0; t < ev.size(); ++t) {
            ev[t].index = static_cast<long>(t) + 1;
            double p = rng.uniform();
            if (rng.uniform() < 0.3) p *= 0.02;
            ev[t].p = std::max(p, 1e-12);
        }
        const auto gamma = GammaSchedule::javanmard_finite(1500);
        LordRule r1(0.1, 0.05, gamma);
        LordPPRule r2(0.1, 0.05, gamma);
        SaffronEstimatorRule r3(0.1, 0.05);
        for (Rule* rule : std::initializer_list<Rule*>{&r1, &r2, &r3}) {
            const auto res = run_stream(*rule, 0.1, 0.05, ev, false);
            for (const Decision& d : res.decisions)
                if (d.wealth_after < 0.0)
                    failures.push_back(std::string("wealth<0 under ") + rule->name());
        }
    }

    // (b) leave-one-out monotonicity: zeroing one p-value never removes
    // later rejections (cumulative dominance).
    {
        Rng rng(905);
        std::vector<HypothesisEvent> base(200);
        for (std::size_t t = 0; t < base.size(); ++t) {
            base[t].index = static_cast<long>(t) + 1;
            base[t].p = std::max(rng.uniform(), 1e-12);
            base[t].context = {rng.normal()};
        }
        auto boosted = base;
        boosted[60].p = 0.0;
        const auto gamma = GammaSchedule::javanmard_finite(200);
        auto run_counts = [&](const std::vector<HypothesisEvent>& ev, int which) {
            std::vector<long> cum;
            RunResult res;
            if (which == 0) {
                LordRule r(0.1, 0.05, gamma);
                res = run_stream(r, 0.1, 0.05, ev, false);
            } else if (which == 1) {
                LordPPRule r(0.1, 0.05, gamma);
                res = run_stream(r, 0.1, 0.05, ev, false);
            } else {
                CwLordPPRule r(0.1, 0.05, gamma,
                               [](const std::vector<double>&) { return 0.8; });
                res = run_stream(r, 0.1, 0.05, ev, false);
            }
            long c = 0;
            for (const Decision& d : res.decisions) cum.push_back(c += d.rejected ? 1 : 0);
            return cum;
        };
        for (int which : {0, 1, 2}) {
            const auto a = run_counts(base, which);
            const auto b = run_counts(boosted, which);
            for (std::size_t t = 0; t < a.size(); ++t)
                if (b[t] < a[t]) {
                    failures.push_back("leave-one-out dominance broken (rule kind " +
                                       std::to_string(which) + ")");
                    break;
                }
        }
    }

    // (c) cwlordpp with unit weights reproduces lordpp bit for bit.
    {
        Rng rng(906);
        std::vector<HypothesisEvent> ev(300);
        for (std::size_t t = 0; t < ev.size(); ++t) {
            ev[t].index = static_cast<long>(t) + 1;
            ev[t].p = std::max(rng.uniform(), 1e-12);
            ev[t].context = {rng.normal(), rng.normal()};
        }
        const auto gamma = GammaSchedule::javanmard_finite(300);
        LordPPRule plain(0.1, 0.05, gamma);
        CwLordPPRule unit(0.1, 0.05, gamma, nullptr);
        const auto a = run_stream(plain, 0.1, 0.05, ev, false);
        const auto b = run_stream(unit, 0.1, 0.05, ev, false);
        for (std::size_t t = 0; t < ev.size(); ++t)
            if (a.decisions[t].alpha != b.decisions[t].alpha ||
                a.decisions[t].rejected != b.decisions[t].rejected ||
                a.decisions[t].wealth_after != b.decisions[t].wealth_after) {
                failures.push_back("cwlordpp(omega=1) != lordpp");
                break;
            }
    }

    // (d) network gradient vs central finite differences.
    {
        WeightNet net = WeightNet::make(3, 2, 4, 101);
        Rng prng(907);
        for (double& w : net.params()) w = 0.4 * prng.normal();
        double max_rel = 0.0;
        std::vector<double> grad(net.param_count());
        for (int trial = 0; trial < 10; ++trial) {
            const std::vector<double> x{prng.normal(), prng.normal(), prng.normal()};
            net.omega_and_gradient(x, grad);
            for (std::size_t k = 0; k < net.param_count(); ++k) {
                const double h = 1e-5;
                const double orig = net.params()[k];
                net.params()[k] = orig + h;
                const double up = net(x);
                net.params()[k] = orig - h;
                const double dn = net(x);
                net.params()[k] = orig;
                const double fd = (up - dn) / (2.0 * h);
                const double rel = std::abs(grad[k] - fd) /
                                   std::max({std::abs(grad[k]), std::abs(fd), 1e-6});
                max_rel = std::max(max_rel, rel);
            }
        }
        if (max_rel >= 1e-4)
            failures.push_back("gradient mismatch, max relative error " + num(max_rel));
        info("gradient vs central differences: max relative error " + num(max_rel, "%.2e"));
    }

    // (e) offline baselines vs exhaustive-threshold brute force for n <= 12.
    {
        Rng rng(908);
        auto brute = [](const OfflineBatch& b, double scale) {
            const std::size_t n = b.p.size();
            double best = 0.0;
            for (double s : b.p) {
                long r = 0;
                for (double q : b.p)
                    if (q <= s) ++r;
                if (static_cast<double>(n) * s * scale /
                        static_cast<double>(std::max<long>(r, 1)) <=
                    b.alpha_level)
                    best = std::max(best, s);
            }
            std::vector<std::size_t> out;
            for (std::size_t i = 0; i < n; ++i)
                if (b.p[i] <= best && best > 0.0) out.push_back(i);
            return out;
        };
        for (int trial = 0; trial < 300; ++trial) {
            OfflineBatch b;
            b.alpha_level = 0.05 + 0.05 * (trial % 4);
            b.lambda = 0.5;
            const int n = 1 + static_cast<int>(rng.uniform() * 12.0);
            for (int i = 0; i < n; ++i) {
                double p = rng.uniform();
                if (rng.uniform() < 0.3) p = std::min(0.05 + 0.1 * std::floor(10.0 * p), 0.999);
                b.p.push_back(std::max(p, 1e-9));
            }
            if (bh(b) != brute(b, 1.0)) {
                failures.push_back("bh != brute force (trial " + std::to_string(trial) + ")");
                break;
            }
            if (storey_bh(b) != brute(b, storey_pi0(b))) {
                failures.push_back("storey_bh != brute force (trial " +
                                   std::to_string(trial) + ")");
                break;
            }
        }
    }

    // (f) snapshot round trip preserves the decision stream.
    {
        Rng rng(909);
        std::vector<HypothesisEvent> ev(90);
        for (std::size_t t = 0; t < ev.size(); ++t) {
            ev[t].index = static_cast<long>(t) + 1;
            double p = rng.uniform();
            if (rng.uniform() < 0.25) p *= 0.03;
            ev[t].p = std::max(p, 1e-12);
        }
        const auto gamma = GammaSchedule::javanmard_finite(90);
        SaffronEstimatorRule full_rule(0.1, 0.05);
        const auto full = run_stream(full_rule, 0.1, 0.05, ev, false);
        SaffronEstimatorRule pre_rule(0.1, 0.05);
        EngineState pre(0.1, 0.05);
        const std::vector<HypothesisEvent> head(ev.begin(), ev.begin() + 40);
        auto got = run_stream(pre_rule, pre, head, false);
        const Snapshot snap =
            SnapshotCodec::decode(SnapshotCodec::encode(SnapshotCodec::capture(pre, pre_rule)));
        EngineState post = SnapshotCodec::restore_state(snap);
        SaffronEstimatorRule post_rule(0.1, 0.05);
        post_rule.load_extras(snap.extras);
        const std::vector<HypothesisEvent> tail(ev.begin() + 40, ev.end());
        const auto rest = run_stream(post_rule, post, tail, false);
        got.decisions.insert(got.decisions.end(), rest.decisions.begin(),
                             rest.decisions.end());
        for (std::size_t t = 0; t < ev.size(); ++t)
            if (got.decisions[t].alpha != full.decisions[t].alpha ||
                got.decisions[t].rejected != full.decisions[t].rejected ||
                got.decisions[t].wealth_after != full.decisions[t].wealth_after) {
                failures.push_back("snapshot split-run decision mismatch");
                break;
            }
    }

    std::string detail = "wealth >= 0; leave-one-out dominance; cwlordpp(1) == lordpp; "
                         "gradient check; baselines vs brute force; snapshot equality";
    if (!failures.empty()) detail = failures.front();
    report("A9 structural property suite", failures.empty(), detail);
}

// ---------------------------------------------------------------------------
// A10: the file-backed workflow stands in for external data: write -> ingest
// round trip is exact and replays to identical decisions.
void criterion_10() {
    NormalMeansConfig cfg;
    cfg.T = 300;
    cfg.pi1 = 0.4;
    cfg.d = 3;
    cfg.seed = 10;
    const auto ev = generate_normal_means(cfg);
    std::ostringstream out;
    write_stream(ev, out);
    std::istringstream in(out.str());
    const auto back = ingest_stream(in, "memory.csv");
    bool same = back.size() == ev.size();
    for (std::size_t i = 0; same && i < ev.size(); ++i)
        same = back[i].index == ev[i].index && back[i].p == ev[i].p &&
               back[i].context == ev[i].context && back[i].alternative == ev[i].alternative;
    bool decisions_same = same;
    if (same) {
        const auto gamma = GammaSchedule::javanmard_finite(300);
        LordPPRule r1(0.1, 0.05, gamma), r2(0.1, 0.05, gamma);
        const auto a = run_stream(r1, 0.1, 0.05, ev, false);
        const auto b = run_stream(r2, 0.1, 0.05, back, false);
        for (std::size_t i = 0; i < ev.size(); ++i)
            if (a.decisions[i].alpha != b.decisions[i].alpha ||
                a.decisions[i].rejected != b.decisions[i].rejected)
                decisions_same = false;
    }
    report("A10 file-backed stream round trip (write -> ingest -> replay)",
           same && decisions_same,
           "300 labeled events with 3 context columns round trip bit-exactly and replay "
           "to identical decisions");
}

}  // namespace

int main() {
    std::printf("fdrstream acceptance checks (alpha targets are exact, stats use 3*SE)\n");
    criterion_1();
    criteria_2_and_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("summary: %d/10 criteria passed%s\n", 10 - g_failures,
                g_failures ? " (A4/A5/A6 pin targets the implemented formulas do not "
                             "reproduce; kept red deliberately with diagnostics above)"
                           : "");
    return g_failures == 0 ? 0 : 1;
}
