// The generalized alpha-investing state machine. Rules propose
// (alpha, phi, psi); the engine validates the investing constraints, applies
// the wealth update, and keeps discovery bookkeeping. Rules are never
// trusted: a violated constraint aborts the stream loudly.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fdrstream/core.hpp"

namespace fdrstream {

struct RuleProposal {
    double alpha = 0.0;
    double phi = 0.0;
    double psi = 0.0;
};

class EngineState {
  public:
    EngineState(double alpha_level, double w0, long history_cap = 10'000'000)
        : alpha_level_(alpha_level), w0_(w0), wealth_(w0), history_cap_(history_cap) {
        if (!(alpha_level > 0.0 && alpha_level < 1.0))
            throw ValidationError("engine: alpha level must lie in (0,1)");
        if (!(w0 > 0.0 && w0 < alpha_level))
            throw ValidationError("engine: initial wealth must satisfy 0 < w0 < alpha");
    }

    double alpha_level() const { return alpha_level_; }
    double w0() const { return w0_; }
    double wealth() const { return wealth_; }
    long t() const { return t_; }
    long tau() const { return tau_; }                 // last rejection step, 0 if none
    bool rho1_passed() const { return rho1_passed_; } // first rejection already happened
    long rejection_count() const { return rejection_count_; }
    const std::vector<std::uint8_t>& history() const { return history_; }

    // Reward cap b_t for the upcoming step: alpha - w0 until the first
    // rejection has happened strictly before this step, alpha afterwards.
    double reward_cap() const { return rho1_passed_ ? alpha_level_ : alpha_level_ - w0_; }

  private:
    friend Decision engine_step(EngineState&, const RuleProposal&, long, double, double);
    friend class SnapshotCodec;

    double alpha_level_;
    double w0_;
    double wealth_;
    long t_ = 0;
    long tau_ = 0;
    bool rho1_passed_ = false;
    long rejection_count_ = 0;
    long history_cap_;
    std::vector<std::uint8_t> history_;
};

// Validate one proposal against the investing constraints and apply it.
// Comparisons are exact (tolerance 0): rules must build proposals from the
// engine-reported wealth.
inline Decision engine_step(EngineState& s, const RuleProposal& prop, long event_index,
                            double p, double weight = 1.0) {
    const long step_index = s.t_ + 1;
    if (!(std::isfinite(prop.alpha) && std::isfinite(prop.phi) && std::isfinite(prop.psi)) ||
        prop.alpha < 0.0 || prop.phi < 0.0 || prop.psi < 0.0)
        throw ValidationError("engine: proposal fields must be finite and non-negative at step " +
                              std::to_string(step_index));
    const double b = s.reward_cap();
    if (s.wealth_ == 0.0 && (prop.alpha != 0.0 || prop.phi != 0.0))
        throw ConstraintViolation(6, step_index,
                                  "zero wealth requires alpha = 0 and phi = 0");
    if (prop.phi > s.wealth_)
        throw ConstraintViolation(7, step_index, "phi exceeds current wealth");
    if (prop.alpha > 0.0) {
        const double cap = std::min(prop.phi + b, prop.phi / prop.alpha + b - 1.0);
        if (prop.psi > cap)
            throw ConstraintViolation(8, step_index, "psi exceeds reward cap");
    } else if (prop.psi > prop.phi + b) {
        throw ConstraintViolation(8, step_index, "psi exceeds phi + b at alpha = 0");
    }

    Decision d;
    d.index = event_index;
    d.alpha = prop.alpha;
    d.phi = prop.phi;
    d.psi = prop.psi;
    d.weight = weight;
    d.rejected = (p <= prop.alpha);
    s.wealth_ = s.wealth_ - prop.phi + (d.rejected ? prop.psi : 0.0);
    d.wealth_after = s.wealth_;
    s.t_ = step_index;
    if (d.rejected) {
        s.tau_ = step_index;
        s.rho1_passed_ = true;
        ++s.rejection_count_;
    }
    if (static_cast<long>(s.history_.size()) < s.history_cap_)
        s.history_.push_back(d.rejected ? 1 : 0);
    return d;
}

// Rule interface. propose() sees the engine ledger and the current context
// only — never the current p-value — so one-sided information is enforced by
// shape. observe() runs after the decision (past p-values are history).
class Rule {
  public:
    virtual ~Rule() = default;
    struct Offer {
        RuleProposal proposal;
        double weight = 1.0;   // omega recorded in the decision log
        double lambda = 0.0;   // discard threshold used by the saffron estimator
    };
    virtual Offer propose(const EngineState& state, const std::vector<double>& context) = 0;
    virtual void observe(const Decision& /*decision*/, const std::vector<double>& /*context*/,
                         double /*p*/) {}
    virtual const char* name() const = 0;

    // Rule-internal state beyond the engine ledger, as key/value strings
    // (doubles in hexfloat), so snapshots can round-trip every shipped rule.
    virtual void save_extras(std::vector<std::pair<std::string, std::string>>&) const {}
    virtual void load_extras(const std::vector<std::pair<std::string, std::string>>&) {}
};

struct RunResult {
    std::vector<Decision> decisions;
    MetricsAccumulator metrics;
};

inline RunResult run_stream(Rule& rule, EngineState& state,
                            const std::vector<HypothesisEvent>& events,
                            bool store_trajectory = true) {
    RunResult out{{}, MetricsAccumulator(store_trajectory)};
    out.decisions.reserve(events.size());
    for (const auto& e : events) {
        Rule::Offer offer = rule.propose(state, e.context);
        Decision d = engine_step(state, offer.proposal, e.index, e.p, offer.weight);
        out.metrics.add_step(d.alpha, e.p, offer.lambda, d.rejected, e.alternative);
        rule.observe(d, e.context, e.p);
        out.decisions.push_back(d);
    }
    return out;
}

inline RunResult run_stream(Rule& rule, double alpha_level, double w0,
                            const std::vector<HypothesisEvent>& events,
                            bool store_trajectory = true) {
    EngineState state(alpha_level, w0);
    return run_stream(rule, state, events, store_trajectory);
}

}  // namespace fdrstream
