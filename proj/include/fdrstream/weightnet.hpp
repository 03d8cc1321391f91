// Context-to-weight network omega(x; theta) and its online trainer.
//
// Architecture: fully connected, `depth` hidden layers of `width` ReLU units,
// scalar output passed through exp() so weights are always positive. The
// output layer starts at zero (weights and bias), making the initial network
// identically 1 regardless of the hidden-layer draw; hidden layers use
// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)).
//
// Training maximizes a smoothed discovery proxy over mini-batches collected
// while the rule runs:
//   EDR(theta) = (1/b) sum_i sigmoid(lambda * (a_i * omega(x_i; theta) - p_i))
// where a_i is the rule's base level before weighting. One plain (or
// momentum) gradient-ascent step is taken per full batch. Decision-time
// clipping of omega is applied outside this objective.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fdrstream/core.hpp"
#include "fdrstream/engine.hpp"
#include "fdrstream/gamma_schedule.hpp"
#include "fdrstream/rng.hpp"

namespace fdrstream {

inline double stable_sigmoid(double u) {
    if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
    const double e = std::exp(u);
    return e / (1.0 + e);
}

class WeightNet {
  public:
    static WeightNet make(int input_dim, int depth = 10, int width = 10,
                          std::uint64_t seed = 0) {
        if (input_dim < 1 || depth < 1 || width < 1)
            throw ValidationError("weightnet: dimensions must be positive");
        WeightNet net;
        net.input_dim_ = input_dim;
        net.depth_ = depth;
        net.width_ = width;
        net.build_layout();
        Rng rng(seed);
        for (int l = 0; l < depth; ++l) {
            const int fan_in = (l == 0) ? input_dim : width;
            const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
            double* w = net.params_.data() + net.weight_off_[l];
            for (int i = 0; i < width * fan_in; ++i) w[i] = rng.uniform(-bound, bound);
            // biases (already zero-initialized) stay zero
        }
        // output layer weights and bias stay exactly zero => omega == 1
        return net;
    }

    int input_dim() const { return input_dim_; }
    int depth() const { return depth_; }
    int width() const { return width_; }
    std::size_t param_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }
    std::size_t output_bias_index() const { return params_.size() - 1; }

    // Pre-exponential output z(x).
    double raw(const std::vector<double>& x) const {
        check_input(x);
        std::vector<std::vector<double>> acts;
        return forward_tape(x, acts);
    }

    // omega(x) = exp(z) with the exponent clamped to +-700 to avoid overflow.
    double operator()(const std::vector<double>& x) const {
        const double z = raw(x);
        return std::exp(std::clamp(z, -700.0, 700.0));
    }

    // Returns omega(x) and fills grad (same layout as params()) with
    // d omega / d theta. When the exponent clamp binds the gradient is zero.
    double omega_and_gradient(const std::vector<double>& x, std::vector<double>& grad) const {
        check_input(x);
        grad.assign(params_.size(), 0.0);
        std::vector<std::vector<double>> acts;  // acts[0] = x, acts[l+1] = hidden l output
        const double z = forward_tape(x, acts);
        const bool clamped = z < -700.0 || z > 700.0;
        const double omega = std::exp(std::clamp(z, -700.0, 700.0));
        if (clamped) return omega;

        // Output layer: z = w_out . h_last + b_out, d omega / d z = omega.
        const std::vector<double>& h_last = acts.back();
        const double* w_out = params_.data() + weight_off_[depth_];
        for (int i = 0; i < width_; ++i) grad[weight_off_[depth_] + i] = omega * h_last[i];
        grad[bias_off_[depth_]] = omega;

        std::vector<double> delta(width_);  // d omega / d h_current
        for (int i = 0; i < width_; ++i) delta[i] = omega * w_out[i];

        for (int l = depth_ - 1; l >= 0; --l) {
            const int fan_in = (l == 0) ? input_dim_ : width_;
            const std::vector<double>& in = acts[static_cast<std::size_t>(l)];
            const std::vector<double>& out = acts[static_cast<std::size_t>(l) + 1];
            const double* w = params_.data() + weight_off_[l];
            std::vector<double> delta_prev(fan_in, 0.0);
            for (int j = 0; j < width_; ++j) {
                if (out[j] <= 0.0) continue;  // ReLU gate (pre-activation <= 0)
                const double dj = delta[j];
                grad[bias_off_[l] + j] = dj;
                for (int i = 0; i < fan_in; ++i) {
                    grad[weight_off_[l] + j * fan_in + i] = dj * in[i];
                    delta_prev[i] += dj * w[j * fan_in + i];
                }
            }
            delta = std::move(delta_prev);
        }
        return omega;
    }

  private:
    void check_input(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != input_dim_)
            throw ValidationError("weightnet: context has dimension " +
                                  std::to_string(x.size()) + ", expected " +
                                  std::to_string(input_dim_));
    }

    void build_layout() {
        weight_off_.clear();
        bias_off_.clear();
        std::size_t off = 0;
        for (int l = 0; l < depth_; ++l) {
            const int fan_in = (l == 0) ? input_dim_ : width_;
            weight_off_.push_back(off);
            off += static_cast<std::size_t>(width_) * fan_in;
            bias_off_.push_back(off);
            off += static_cast<std::size_t>(width_);
        }
        weight_off_.push_back(off);
        off += static_cast<std::size_t>(width_);  // output weights
        bias_off_.push_back(off);
        off += 1;                                 // output bias
        params_.assign(off, 0.0);
    }

    // Runs the forward pass, filling acts with x and every post-ReLU layer.
    double forward_tape(const std::vector<double>& x,
                        std::vector<std::vector<double>>& acts) const {
        acts.clear();
        acts.push_back(x);
        std::vector<double> cur = x;
        for (int l = 0; l < depth_; ++l) {
            const int fan_in = (l == 0) ? input_dim_ : width_;
            std::vector<double> next(static_cast<std::size_t>(width_));
            const double* w = params_.data() + weight_off_[l];
            const double* b = params_.data() + bias_off_[l];
            for (int j = 0; j < width_; ++j) {
                double s = b[j];
                for (int i = 0; i < fan_in; ++i) s += w[j * fan_in + i] * cur[i];
                next[static_cast<std::size_t>(j)] = s > 0.0 ? s : 0.0;
            }
            cur = std::move(next);
            acts.push_back(cur);
        }
        const double* w = params_.data() + weight_off_[depth_];
        double z = params_[bias_off_[depth_]];
        for (int i = 0; i < width_; ++i) z += w[i] * cur[static_cast<std::size_t>(i)];
        return z;
    }

    int input_dim_ = 0, depth_ = 0, width_ = 0;
    std::vector<double> params_;
    std::vector<std::size_t> weight_off_, bias_off_;
};

struct BatchItem {
    double base_alpha;       // rule level before weighting / wealth clamp
    std::vector<double> x;
    double p;
};

inline double edr(const WeightNet& net, const std::vector<BatchItem>& batch,
                  double sharpness) {
    if (batch.empty()) return 0.0;
    double s = 0.0;
    for (const auto& item : batch)
        s += stable_sigmoid(sharpness * (item.base_alpha * net(item.x) - item.p));
    return s / static_cast<double>(batch.size());
}

inline std::vector<double> edr_gradient(const WeightNet& net,
                                        const std::vector<BatchItem>& batch,
                                        double sharpness) {
    std::vector<double> total(net.param_count(), 0.0);
    if (batch.empty()) return total;
    std::vector<double> gomega;
    for (const auto& item : batch) {
        const double omega = net.omega_and_gradient(item.x, gomega);
        const double u = sharpness * (item.base_alpha * omega - item.p);
        const double s = stable_sigmoid(u);
        const double coeff = s * (1.0 - s) * sharpness * item.base_alpha;
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += coeff * gomega[k];
    }
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    for (double& g : total) g *= inv_b;
    return total;
}

struct TrainConfig {
    int batch_size = 100;
    double learning_rate = 0.01;
    double sigmoid_sharpness = 50.0;
    enum class Optimizer { plain, momentum } optimizer = Optimizer::plain;
    double momentum_beta = 0.9;
    int depth = 10;
    int width = 10;
    std::uint64_t init_seed = 1;
    double clip_lo = 1e-3;
    double clip_hi = 1e3;

    void validate() const {
        if (batch_size < 1) throw ValidationError("train: batch size must be >= 1");
        if (!(learning_rate > 0.0)) throw ValidationError("train: learning rate must be > 0");
        if (!(sigmoid_sharpness > 0.0)) throw ValidationError("train: sharpness must be > 0");
        if (!(momentum_beta >= 0.0 && momentum_beta < 1.0))
            throw ValidationError("train: momentum beta must lie in [0,1)");
        if (!(clip_lo > 0.0 && clip_hi >= clip_lo))
            throw ValidationError("train: need 0 < clip_lo <= clip_hi");
    }
};

// Context-weighted rule whose weight comes from a live network; collects the
// (base level, context, p) triple of every step and takes one ascent step per
// full batch. EDR of each batch is recorded before its update is applied.
class TrainedCwRule : public Rule {
  public:
    TrainedCwRule(WeightNet& net, GammaSchedule gamma, TrainConfig cfg)
        : net_(net), gamma_(std::move(gamma)), cfg_(cfg) {
        cfg_.validate();
        velocity_.assign(net_.param_count(), 0.0);
    }

    Offer propose(const EngineState& s, const std::vector<double>& x) override {
        const long t = s.t() + 1;
        const double b = s.reward_cap();
        pending_base_ = gamma_.at(t - s.tau()) * b;
        const double omega = std::clamp(net_(x), cfg_.clip_lo, cfg_.clip_hi);
        double level = std::min(pending_base_ * omega, s.wealth());
        return {{level, level, b}, omega, 0.0};
    }

    void observe(const Decision&, const std::vector<double>& x, double p) override {
        batch_.push_back({pending_base_, x, p});
        if (static_cast<int>(batch_.size()) < cfg_.batch_size) return;
        edr_trace_.push_back(edr(net_, batch_, cfg_.sigmoid_sharpness));
        std::vector<double> g = edr_gradient(net_, batch_, cfg_.sigmoid_sharpness);
        auto& theta = net_.params();
        if (cfg_.optimizer == TrainConfig::Optimizer::momentum) {
            for (std::size_t k = 0; k < theta.size(); ++k) {
                velocity_[k] = cfg_.momentum_beta * velocity_[k] + g[k];
                theta[k] += cfg_.learning_rate * velocity_[k];
            }
        } else {
            for (std::size_t k = 0; k < theta.size(); ++k)
                theta[k] += cfg_.learning_rate * g[k];
        }
        batch_.clear();
    }

    const char* name() const override { return "cwlordpp"; }
    const std::vector<double>& edr_trace() const { return edr_trace_; }
    bool at_batch_boundary() const { return batch_.empty(); }

    // Snapshots are only valid between batches (updates are batch-atomic);
    // network parameters travel separately with the owning WeightNet.
    void save_extras(std::vector<std::pair<std::string, std::string>>& kv) const override {
        if (!batch_.empty())
            throw ValidationError("trained rule: snapshot only at batch boundaries");
        for (double v : velocity_) kv.emplace_back("velocity", hexfloat_encode(v));
    }
    void load_extras(const std::vector<std::pair<std::string, std::string>>& kv) override {
        std::vector<double> vel;
        for (const auto& [k, v] : kv)
            if (k == "velocity") vel.push_back(hexfloat_decode(v));
        if (!vel.empty()) {
            if (vel.size() != velocity_.size())
                throw ValidationError("trained rule: velocity blob has wrong length");
            velocity_ = std::move(vel);
        }
    }

  private:
    WeightNet& net_;
    GammaSchedule gamma_;
    TrainConfig cfg_;
    std::vector<BatchItem> batch_;
    std::vector<double> velocity_;
    std::vector<double> edr_trace_;
    double pending_base_ = 0.0;
};

struct TrainResult {
    RunResult run;
    WeightNet net;
    std::vector<double> edr_trace;
};

inline TrainResult train_online(const std::vector<HypothesisEvent>& events, double alpha,
                                double w0, const GammaSchedule& gamma, const TrainConfig& cfg,
                                bool store_trajectory = true) {
    cfg.validate();
    if (events.empty()) throw ValidationError("train: empty stream");
    const int d = static_cast<int>(events.front().context.size());
    WeightNet net = WeightNet::make(d, cfg.depth, cfg.width, cfg.init_seed);
    TrainedCwRule rule(net, gamma, cfg);
    RunResult run = run_stream(rule, alpha, w0, events, store_trajectory);
    return {std::move(run), std::move(net), rule.edr_trace()};
}

}  // namespace fdrstream
