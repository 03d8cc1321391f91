// Concrete online testing rules plugged into the alpha-investing engine.
// All level formulas are taken against engine-reported wealth with a final
// min-clamp: in exact arithmetic the clamp never binds for unit-sum schedules
// (levels stay below wealth by construction), but the last step of a
// rejection-free horizon can land within an ulp of the boundary.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "fdrstream/engine.hpp"
#include "fdrstream/gamma_schedule.hpp"

namespace fdrstream {

// Level based on recent discovery: alpha_t = gamma_t * w0 until the first
// rejection, then gamma_{t - tau} * b0; constant reward b0 = alpha - w0.
class LordRule : public Rule {
  public:
    LordRule(double alpha, double w0, GammaSchedule gamma)
        : alpha_(alpha), w0_(w0), b0_(alpha - w0), gamma_(std::move(gamma)) {}

    Offer propose(const EngineState& s, const std::vector<double>&) override {
        const long t = s.t() + 1;
        double level = s.rho1_passed() ? gamma_.at(t - s.tau()) * b0_ : gamma_.at(t) * w0_;
        level = std::min(level, s.wealth());
        return {{level, level, b0_}, 1.0, 0.0};
    }
    const char* name() const override { return "lord"; }

  private:
    double alpha_, w0_, b0_;
    GammaSchedule gamma_;
};

// Improved variant: alpha_t = phi_t = gamma_{t - tau} * b_t with the reward
// cap b_t switching from alpha - w0 to alpha at the first rejection, and
// psi_t = b_t. Levels never exceed wealth when w0 >= alpha/2 (the default).
class LordPPRule : public Rule {
  public:
    LordPPRule(double alpha, double w0, GammaSchedule gamma)
        : gamma_(std::move(gamma)) { (void)alpha; (void)w0; }

    Offer propose(const EngineState& s, const std::vector<double>&) override {
        const long t = s.t() + 1;
        const double b = s.reward_cap();
        double level = std::min(gamma_.at(t - s.tau()) * b, s.wealth());
        return {{level, level, b}, 1.0, 0.0};
    }
    const char* name() const override { return "lordpp"; }

  private:
    GammaSchedule gamma_;
};

// Context-weighted variant: the base level is multiplied by omega(x) and
// min-clamped against current wealth (the clamp is part of the definition
// here, not just floating-point protection).
class CwLordPPRule : public Rule {
  public:
    using WeightFn = std::function<double(const std::vector<double>&)>;

    CwLordPPRule(double alpha, double w0, GammaSchedule gamma, WeightFn weight_fn,
                 double clip_lo = 1e-3, double clip_hi = 1e3)
        : gamma_(std::move(gamma)), weight_fn_(std::move(weight_fn)),
          clip_lo_(clip_lo), clip_hi_(clip_hi) { (void)alpha; (void)w0; }

    Offer propose(const EngineState& s, const std::vector<double>& x) override {
        const long t = s.t() + 1;
        const double b = s.reward_cap();
        double omega = weight_fn_ ? weight_fn_(x) : 1.0;
        if (!std::isfinite(omega) || omega <= 0.0)
            throw ValidationError("cwlordpp: weight must be finite and positive at step " +
                                  std::to_string(t));
        omega = std::clamp(omega, clip_lo_, clip_hi_);
        double level = std::min(gamma_.at(t - s.tau()) * b * omega, s.wealth());
        return {{level, level, b}, omega, 0.0};
    }
    const char* name() const override { return "cwlordpp"; }

  private:
    GammaSchedule gamma_;
    WeightFn weight_fn_;
    double clip_lo_, clip_hi_;
};

// Dependence-safe modified variant: alpha_t = phi_t = gamma_t * W(tau_t)
// (absolute time index), psi_t = b0; requires a schedule passing
// sum gamma_t (1 + log t) <= alpha / b0.
class ModifiedLordDependentRule : public Rule {
  public:
    ModifiedLordDependentRule(double alpha, double w0, GammaSchedule gamma)
        : b0_(alpha - w0), wealth_at_last_rejection_(w0), gamma_(std::move(gamma)) {
        auto rep = check_dependent_safe(gamma_, alpha, alpha - w0);
        if (!rep.pass)
            throw ValidationError(
                "mlord_dep: schedule fails the dependence-safe inequality (weighted sum " +
                std::to_string(rep.weighted_sum) + " > budget " + std::to_string(rep.budget) + ")");
    }

    Offer propose(const EngineState& s, const std::vector<double>&) override {
        const long t = s.t() + 1;
        double level = std::min(gamma_.at(t) * wealth_at_last_rejection_, s.wealth());
        return {{level, level, b0_}, 1.0, 0.0};
    }

    void observe(const Decision& d, const std::vector<double>&, double) override {
        if (d.rejected) wealth_at_last_rejection_ = d.wealth_after;
    }
    const char* name() const override { return "mlord_dep"; }

    double wealth_at_last_rejection() const { return wealth_at_last_rejection_; }
    void restore_wealth_at_last_rejection(double w) { wealth_at_last_rejection_ = w; }

    void save_extras(std::vector<std::pair<std::string, std::string>>& kv) const override {
        kv.emplace_back("wealth_at_last_rejection", hexfloat_encode(wealth_at_last_rejection_));
    }
    void load_extras(const std::vector<std::pair<std::string, std::string>>& kv) override {
        for (const auto& [k, v] : kv)
            if (k == "wealth_at_last_rejection") wealth_at_last_rejection_ = hexfloat_decode(v);
    }

  private:
    double b0_;
    double wealth_at_last_rejection_;
    GammaSchedule gamma_;
};

// Estimator-constrained rule: proposes the largest grid level whose
// worst-case post-step serial estimate (counting the new level as discarded
// mass, the conservative branch) stays <= alpha. Budgeting: phi_t = alpha_t
// so the reward cap stays positive (cap = b_t), with a spend-fraction guard
// so one miss can never zero the wealth.
class SaffronEstimatorRule : public Rule {
  public:
    SaffronEstimatorRule(double alpha, double w0, std::vector<double> grid = default_grid(0.0),
                         double lambda = 0.5, double spend_fraction = 0.5)
        : alpha_(alpha), lambda_(lambda), spend_fraction_(spend_fraction) {
        (void)w0;
        if (!(lambda >= 0.0 && lambda < 1.0))
            throw ValidationError("saffron_est: lambda must lie in [0,1)");
        if (!(spend_fraction > 0.0 && spend_fraction <= 1.0))
            throw ValidationError("saffron_est: spend fraction must lie in (0,1]");
        if (grid.empty()) throw ValidationError("saffron_est: empty candidate grid");
        grid_ = std::move(grid);
        std::sort(grid_.begin(), grid_.end());
        if (grid_.front() > 0.0) grid_.insert(grid_.begin(), 0.0);
    }

    // {alpha * 2^-k : k = 0..20} plus 0; pass alpha = 0 to defer to the ctor.
    static std::vector<double> default_grid(double alpha) {
        std::vector<double> g{0.0};
        if (alpha > 0.0)
            for (int k = 20; k >= 0; --k) g.push_back(alpha * std::ldexp(1.0, -k));
        return g;
    }

    Offer propose(const EngineState& s, const std::vector<double>&) override {
        if (grid_.size() == 1 && alpha_ > 0.0) grid_ = default_grid(alpha_);
        const double wealth_budget = spend_fraction_ * s.wealth();
        const double denom = static_cast<double>(std::max<long>(s.rejection_count(), 1));
        double chosen = 0.0;
        for (auto it = grid_.rbegin(); it != grid_.rend(); ++it) {
            const double c = *it;
            if (c > wealth_budget) continue;
            const double added = lambda_ > 0.0 ? c / (1.0 - lambda_) : c;
            if ((estimator_sum_ + added) / denom <= alpha_) {
                chosen = c;
                break;
            }
        }
        const double b = s.reward_cap();
        return {{chosen, chosen, chosen > 0.0 ? b : 0.0}, 1.0, lambda_};
    }

    void observe(const Decision& d, const std::vector<double>&, double p) override {
        if (lambda_ > 0.0)
            estimator_sum_ += (p > lambda_ ? d.alpha / (1.0 - lambda_) : 0.0);
        else
            estimator_sum_ += d.alpha;
    }
    const char* name() const override { return "saffron_est"; }

    double estimator_sum() const { return estimator_sum_; }
    void restore_estimator_sum(double v) { estimator_sum_ = v; }
    double lambda() const { return lambda_; }

    void save_extras(std::vector<std::pair<std::string, std::string>>& kv) const override {
        kv.emplace_back("estimator_sum", hexfloat_encode(estimator_sum_));
    }
    void load_extras(const std::vector<std::pair<std::string, std::string>>& kv) override {
        for (const auto& [k, v] : kv)
            if (k == "estimator_sum") estimator_sum_ = hexfloat_decode(v);
    }

  private:
    double alpha_, lambda_, spend_fraction_;
    std::vector<double> grid_;
    double estimator_sum_ = 0.0;
};

enum class BaseRuleKind { lord, lordpp };

// Apply a base rule to the reweighted stream p/omega (values above 1 are
// clamped to 1 and can never be rejected). The decision log keeps the base
// rule's levels; the weight column records omega_t. Dividing at compare time
// (rather than multiplying levels by omega) keeps `rejected <=> p' <= alpha`
// exact on stored values.
inline RunResult weighted_rule(BaseRuleKind base, const std::vector<HypothesisEvent>& events,
                               const std::vector<double>& weights, double alpha, double w0,
                               const GammaSchedule& gamma, bool store_trajectory = true) {
    if (weights.size() != events.size())
        throw ValidationError("weighted_rule: need one weight per event");
    std::vector<HypothesisEvent> transformed = events;
    for (std::size_t i = 0; i < transformed.size(); ++i) {
        const double w = weights[i];
        if (!std::isfinite(w) || w <= 0.0)
            throw ValidationError("weighted_rule: weights must be finite and positive");
        transformed[i].p = std::min(transformed[i].p / w, 1.0);
    }
    std::unique_ptr<Rule> rule;
    if (base == BaseRuleKind::lord)
        rule = std::make_unique<LordRule>(alpha, w0, gamma);
    else
        rule = std::make_unique<LordPPRule>(alpha, w0, gamma);
    RunResult rr = run_stream(*rule, alpha, w0, transformed, store_trajectory);
    for (std::size_t i = 0; i < rr.decisions.size(); ++i) rr.decisions[i].weight = weights[i];
    return rr;
}

}  // namespace fdrstream
