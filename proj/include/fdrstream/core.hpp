// Shared domain types and trajectory metrics for streaming hypothesis testing.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fdrstream {

// Bad input (files, configs, parameters). CLI maps this to exit code 1.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lossless double <-> text round trip (hexfloat) for snapshots and logs.
inline std::string hexfloat_encode(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

inline double hexfloat_decode(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw ValidationError("malformed numeric field: '" + s + "'");
    return v;
}

// A rule proposed something the alpha-investing constraints forbid. Loud by
// design: rule bugs must abort the stream, never be silently clipped.
struct ConstraintViolation : std::runtime_error {
    ConstraintViolation(int condition_, long index_, const std::string& what_)
        : std::runtime_error("constraint (" + std::to_string(condition_) +
                             ") violated at step " + std::to_string(index_) + ": " + what_),
          condition(condition_), index(index_) {}
    int condition;
    long index;
};

// One stream element. `p` is open-interval (0,1) for ingested/generated
// streams; property tests may drive the engine directly with boundary values.
struct HypothesisEvent {
    long index = 0;                        // 1-based time t
    double p = 0.5;
    std::vector<double> context;           // dimension d >= 0, constant per stream
    std::optional<bool> alternative;       // ground truth when known
};

// Per-step output of the engine.
struct Decision {
    long index = 0;
    double alpha = 0.0;   // significance level actually applied
    double phi = 0.0;     // wealth penalty
    double psi = 0.0;     // reward credited on rejection
    double weight = 1.0;  // contextual weight used (1 for unweighted rules)
    bool rejected = false;
    double wealth_after = 0.0;
};

// Validates a full stream at an ingestion/generation boundary.
inline void validate_stream(const std::vector<HypothesisEvent>& events) {
    long prev_index = 0;
    std::size_t dim = events.empty() ? 0 : events.front().context.size();
    bool labeled = events.empty() ? false : events.front().alternative.has_value();
    for (const auto& e : events) {
        if (e.index <= prev_index)
            throw ValidationError("event index " + std::to_string(e.index) +
                                  " not strictly increasing");
        if (!(e.p > 0.0 && e.p < 1.0))
            throw ValidationError("event " + std::to_string(e.index) +
                                  ": p must lie strictly inside (0,1)");
        if (e.context.size() != dim)
            throw ValidationError("event " + std::to_string(e.index) +
                                  ": context dimension changed mid-stream");
        if (e.alternative.has_value() != labeled)
            throw ValidationError("event " + std::to_string(e.index) +
                                  ": truth labels must be present for all events or none");
        prev_index = e.index;
    }
}

// Running counts and sums over one decision stream.
class MetricsAccumulator {
  public:
    explicit MetricsAccumulator(bool store_trajectory = true)
        : store_trajectory_(store_trajectory) {}

    void add_step(double alpha, double p, double lambda, bool rejected,
                  std::optional<bool> alternative) {
        if (steps_ == 0) labeled_ = alternative.has_value();
        else if (alternative.has_value() != labeled_)
            throw ValidationError("metrics: mixed labeled/unlabeled stream");
        ++steps_;
        alpha_sum_ += alpha;
        if (lambda > 0.0)
            saffron_sum_ += (p > lambda ? alpha / (1.0 - lambda) : 0.0);
        else
            saffron_sum_ += alpha;  // the lambda = 0 reduction
        if (rejected) {
            ++r_;
            if (labeled_) (*alternative ? s_ : v_) += 1;
        }
        if (labeled_ && alternative.value()) ++n1_;
        if (labeled_) {
            double cur = static_cast<double>(v_) / static_cast<double>(std::max<long>(r_, 1));
            max_fdp_ = std::max(max_fdp_, cur);
            if (store_trajectory_) fdp_trajectory_.push_back(cur);
        }
    }

    long steps() const { return steps_; }
    long R() const { return r_; }
    long V() const { return v_; }
    long S() const { return s_; }
    long N1() const { return n1_; }
    double alpha_sum() const { return alpha_sum_; }
    double saffron_sum() const { return saffron_sum_; }
    bool labeled() const { return labeled_; }
    double max_fdp() const { return max_fdp_; }
    const std::vector<double>& fdp_trajectory() const { return fdp_trajectory_; }

  private:
    bool store_trajectory_;
    bool labeled_ = false;
    long steps_ = 0, r_ = 0, v_ = 0, s_ = 0, n1_ = 0;
    double alpha_sum_ = 0.0, saffron_sum_ = 0.0, max_fdp_ = 0.0;
    std::vector<double> fdp_trajectory_;
};

inline double fdp(const MetricsAccumulator& acc) {
    if (!acc.labeled() && acc.steps() > 0)
        throw ValidationError("fdp: stream had no truth labels");
    return static_cast<double>(acc.V()) / static_cast<double>(std::max<long>(acc.R(), 1));
}

inline double tdp(const MetricsAccumulator& acc) {
    if (!acc.labeled() && acc.steps() > 0)
        throw ValidationError("tdp: stream had no truth labels");
    return static_cast<double>(acc.S()) / static_cast<double>(std::max<long>(acc.N1(), 1));
}

inline double fdp_hat_lord(const MetricsAccumulator& acc) {
    return acc.alpha_sum() / static_cast<double>(std::max<long>(acc.R(), 1));
}

inline double fdp_hat_saffron(const MetricsAccumulator& acc) {
    return acc.saffron_sum() / static_cast<double>(std::max<long>(acc.R(), 1));
}

template <typename Container>
inline double mfdr_estimate(const Container& replicates, double eta = 1.0) {
    if (replicates.empty()) throw ValidationError("mfdr_estimate: no replicates");
    double mean_v = 0.0, mean_r = 0.0;
    for (const auto& acc : replicates) {
        if (!acc.labeled() && acc.steps() > 0)
            throw ValidationError("mfdr_estimate: unlabeled replicate");
        mean_v += static_cast<double>(acc.V());
        mean_r += static_cast<double>(acc.R());
    }
    mean_v /= static_cast<double>(replicates.size());
    mean_r /= static_cast<double>(replicates.size());
    return mean_v / (mean_r + eta);
}

}  // namespace fdrstream
