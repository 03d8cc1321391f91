// Command-line front end: stream simulation, rule runs, online training,
// analytic power reports, offline baselines, and rule comparison.
//
// Exit codes: 0 success, 1 validation/config error, 2 runtime or
// alpha-investing constraint error.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fdrstream/baselines.hpp"
#include "fdrstream/csv.hpp"
#include "fdrstream/power.hpp"
#include "fdrstream/rules.hpp"
#include "fdrstream/sim.hpp"
#include "fdrstream/snapshot.hpp"
#include "fdrstream/weightnet.hpp"

using namespace fdrstream;

namespace {

// ---------------------------------------------------------------------------
// shared option bundles
// ---------------------------------------------------------------------------

struct StreamOpts {
    std::string input;                 // CSV path (exclusive with generator)
    std::string model;                 // "normal_means" | "weighted_mixture"
    long T = 10000;
    double pi1 = 0.5;
    int d = 10;
    double sigma2 = 0.0;               // 0 => default 2 log T
    double mu = 3.0;                   // mixture alternative mean
    std::string q0 = "point:1";
    std::string q1 = "point:1";
    std::uint64_t seed = 1;
    std::uint64_t beta_seed = 7;
};

struct RuleOpts {
    std::string rule = "lordpp";
    double alpha = 0.1;
    double w0 = -1.0;                  // <0 => alpha/2
    std::string gamma = "";            // finite | infinite | dependent_safe
    long horizon = 0;                  // 0 => stream length
    double lambda = 0.5;               // saffron_est discard threshold
    double spend_fraction = 0.5;       // saffron_est wealth guard
    std::string weights_file;          // per-event weights (t,w CSV)
    std::string net_file;              // snapshot with trained parameters
    double weight_const = 1.0;         // fallback cwlordpp weight
};

struct TrainOpts {
    TrainConfig cfg;
    std::string optimizer = "plain";
};

void add_stream_options(CLI::App* cmd, StreamOpts& so, bool generator_only) {
    if (!generator_only)
        cmd->add_option("--input", so.input, "input stream CSV (t,p,x1..xd[,h])");
    cmd->add_option("--model", so.model, "generator: normal_means | weighted_mixture");
    cmd->add_option("--T", so.T, "stream length");
    cmd->add_option("--pi1", so.pi1, "alternative fraction");
    cmd->add_option("--d", so.d, "context dimension (normal_means)");
    cmd->add_option("--sigma2", so.sigma2, "context variance (0 = default 2 log T)");
    cmd->add_option("--mu", so.mu, "alternative mean (weighted_mixture)");
    cmd->add_option("--q0", so.q0, "null weight dist: point:V | two_point:LO:HI:P | uniform:LO:HI");
    cmd->add_option("--q1", so.q1, "alternative weight dist (same grammar)");
    cmd->add_option("--seed", so.seed, "stream seed");
    cmd->add_option("--beta-seed", so.beta_seed, "seed of the fixed beta draw");
}

void add_rule_options(CLI::App* cmd, RuleOpts& ro) {
    cmd->add_option("--rule", ro.rule,
                    "lord | lordpp | cwlordpp | wlord | wlordpp | mlord_dep | saffron_est");
    cmd->add_option("--alpha", ro.alpha, "target FDR level");
    cmd->add_option("--w0", ro.w0, "initial wealth (< 0 means alpha/2)");
    cmd->add_option("--gamma", ro.gamma, "schedule: finite | infinite | dependent_safe");
    cmd->add_option("--horizon", ro.horizon, "finite-schedule horizon (0 = stream length)");
    cmd->add_option("--lambda", ro.lambda, "saffron_est discard threshold");
    cmd->add_option("--spend-fraction", ro.spend_fraction, "saffron_est wealth spend cap");
    cmd->add_option("--weights-file", ro.weights_file, "per-event weight CSV (t,w)");
    cmd->add_option("--net", ro.net_file, "snapshot file providing trained weight network");
    cmd->add_option("--weight-const", ro.weight_const, "constant cwlordpp weight fallback");
}

void add_train_options(CLI::App* cmd, TrainOpts& to) {
    cmd->add_option("--batch-size", to.cfg.batch_size, "training batch size");
    cmd->add_option("--lr", to.cfg.learning_rate, "gradient-ascent step size");
    cmd->add_option("--sharpness", to.cfg.sigmoid_sharpness, "sigmoid sharpness");
    cmd->add_option("--optimizer", to.optimizer, "plain | momentum");
    cmd->add_option("--momentum-beta", to.cfg.momentum_beta, "momentum coefficient");
    cmd->add_option("--depth", to.cfg.depth, "hidden layers");
    cmd->add_option("--width", to.cfg.width, "units per hidden layer");
    cmd->add_option("--init-seed", to.cfg.init_seed, "network initialization seed");
    cmd->add_option("--clip-lo", to.cfg.clip_lo, "decision-time weight clip (lower)");
    cmd->add_option("--clip-hi", to.cfg.clip_hi, "decision-time weight clip (upper)");
}

WeightDist parse_weight_dist(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    auto num = [&](std::size_t i) { return detail::parse_double(parts[i], "weight dist '" + s + "'"); };
    WeightDist w;
    if (parts[0] == "point" && parts.size() == 2) w = WeightDist::point_mass(num(1));
    else if (parts[0] == "two_point" && parts.size() == 4)
        w = WeightDist::two_point(num(1), num(2), num(3));
    else if (parts[0] == "uniform" && parts.size() == 3) w = WeightDist::uniform(num(1), num(2));
    else
        throw ValidationError("weight dist '" + s +
                              "': expected point:V, two_point:LO:HI:P, or uniform:LO:HI");
    w.validate();
    return w;
}

struct MaterializedStream {
    std::vector<HypothesisEvent> events;
    std::vector<double> weights;  // empty unless the generator produced them
};

MaterializedStream materialize(const StreamOpts& so, std::uint64_t seed_override = 0) {
    const std::uint64_t seed = seed_override ? seed_override : so.seed;
    if (!so.input.empty() && !so.model.empty())
        throw ValidationError("give exactly one of --input and --model");
    if (!so.input.empty()) return {ingest_stream(so.input), {}};
    if (so.model == "normal_means") {
        NormalMeansConfig cfg;
        cfg.T = so.T;
        cfg.pi1 = so.pi1;
        cfg.d = so.d;
        cfg.sigma2 = so.sigma2;
        cfg.beta_seed = so.beta_seed;
        cfg.seed = seed;
        return {generate_normal_means(cfg), {}};
    }
    if (so.model == "weighted_mixture") {
        MixtureWeightConfig cfg;
        cfg.T = so.T;
        cfg.pi1 = so.pi1;
        cfg.mu = so.mu;
        cfg.q0 = parse_weight_dist(so.q0);
        cfg.q1 = parse_weight_dist(so.q1);
        cfg.seed = seed;
        WeightedStream ws = generate_weighted_mixture(cfg);
        return {std::move(ws.events), std::move(ws.weights)};
    }
    if (so.model.empty())
        throw ValidationError("give exactly one of --input and --model");
    throw ValidationError("unknown model '" + so.model +
                          "' (expected normal_means or weighted_mixture)");
}

GammaSchedule make_gamma(const RuleOpts& ro, std::size_t stream_len) {
    const double w0 = ro.w0 < 0.0 ? ro.alpha / 2.0 : ro.w0;
    std::string mode = ro.gamma;
    if (mode.empty()) mode = ro.rule == "mlord_dep" ? "dependent_safe" : "finite";
    if (mode == "finite") {
        const long T = ro.horizon > 0 ? ro.horizon : static_cast<long>(stream_len);
        if (T < 1) throw ValidationError("gamma: finite schedule needs a positive horizon");
        return GammaSchedule::javanmard_finite(T);
    }
    if (mode == "infinite") return GammaSchedule::javanmard_infinite();
    if (mode == "dependent_safe") return GammaSchedule::dependent_safe(ro.alpha, ro.alpha - w0);
    throw ValidationError("unknown gamma mode '" + mode + "'");
}

std::vector<double> load_weights_file(const std::string& path,
                                      const std::vector<HypothesisEvent>& events) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open weights file: " + path);
    std::string line;
    if (!std::getline(in, line) || detail::split_csv(line) != std::vector<std::string>{"t", "w"})
        throw ValidationError(path + ":1: weights header must be 't,w'");
    std::vector<std::pair<long, double>> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        const std::string where = path + ":" + std::to_string(line_no);
        if (f.size() != 2) throw ValidationError(where + ": expected 2 fields");
        rows.emplace_back(detail::parse_long(f[0], where + ": field 't'"),
                          detail::parse_double(f[1], where + ": field 'w'"));
    }
    if (rows.size() != events.size())
        throw ValidationError(path + ": " + std::to_string(rows.size()) + " weights for " +
                              std::to_string(events.size()) + " events");
    std::vector<double> w(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (rows[i].first != events[i].index)
            throw ValidationError(path + ": weight index " + std::to_string(rows[i].first) +
                                  " does not match event index " +
                                  std::to_string(events[i].index));
        w[i] = rows[i].second;
    }
    return w;
}

void write_weights_file(const std::vector<HypothesisEvent>& events,
                        const std::vector<double>& weights, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file: " + path);
    out << "t,w\n";
    for (std::size_t i = 0; i < events.size(); ++i)
        out << events[i].index << "," << detail::fmt("%.17g", weights[i]) << "\n";
    if (!out) throw ValidationError("write failed: " + path);
}

std::vector<std::string> echo_lines(CLI::App* sub) {
    std::vector<std::string> lines{"subcommand: " + sub->get_name()};
    std::istringstream ss(sub->config_to_str(true, false));
    std::string line;
    while (std::getline(ss, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

WeightNet net_from_snapshot(const Snapshot& snap) {
    int d = 0, depth = 0, width = 0;
    std::uint64_t init_seed = 0;
    for (const auto& [k, v] : snap.extras) {
        if (k == "net_d") d = static_cast<int>(detail::parse_long(v, "snapshot net_d"));
        if (k == "net_depth") depth = static_cast<int>(detail::parse_long(v, "snapshot net_depth"));
        if (k == "net_width") width = static_cast<int>(detail::parse_long(v, "snapshot net_width"));
        if (k == "net_init_seed")
            init_seed = static_cast<std::uint64_t>(detail::parse_long(v, "snapshot net_init_seed"));
    }
    if (d == 0 || depth == 0 || width == 0)
        throw ValidationError("snapshot carries no network dimensions");
    WeightNet net = WeightNet::make(d, depth, width, init_seed);
    if (net.param_count() != snap.net_params.size())
        throw ValidationError("snapshot parameter blob does not match network dimensions");
    net.params() = snap.net_params;
    return net;
}

// ---------------------------------------------------------------------------
// subcommand payloads
// ---------------------------------------------------------------------------

struct SimulateCmd {
    StreamOpts stream;
    std::string out;
    std::string weights_out;

    int run(CLI::App* sub) const {
        (void)sub;
        MaterializedStream ms = materialize(stream);
        if (out.empty()) throw ValidationError("simulate: --out is required");
        write_stream(ms.events, out);
        if (!weights_out.empty()) {
            if (ms.weights.empty())
                throw ValidationError("simulate: --weights-out needs the weighted_mixture model");
            write_weights_file(ms.events, ms.weights, weights_out);
        }
        std::cout << "wrote " << ms.events.size() << " events to " << out << "\n";
        return 0;
    }
};

struct RunCmd {
    StreamOpts stream;
    RuleOpts rule_opts;
    std::string out;
    std::string restore;
    std::string snapshot_out;
    long snapshot_at = 0;

    int run(CLI::App* sub) const {
        MaterializedStream ms = materialize(stream);
        const double alpha = rule_opts.alpha;
        const double w0 = rule_opts.w0 < 0.0 ? alpha / 2.0 : rule_opts.w0;
        GammaSchedule gamma = make_gamma(rule_opts, ms.events.size());
        const std::string& name = rule_opts.rule;

        // Weighted rules transform the stream; handle them separately.
        if (name == "wlord" || name == "wlordpp") {
            if (!restore.empty() || snapshot_at > 0)
                throw ValidationError("run: snapshot/restore applies to stateful rules; "
                                      "weighted runs are single-shot");
            std::vector<double> weights = ms.weights;
            if (!rule_opts.weights_file.empty())
                weights = load_weights_file(rule_opts.weights_file, ms.events);
            if (weights.empty())
                throw ValidationError("run: " + name +
                                      " needs --weights-file or the weighted_mixture model");
            RunResult rr = weighted_rule(
                name == "wlord" ? BaseRuleKind::lord : BaseRuleKind::lordpp, ms.events, weights,
                alpha, w0, gamma);
            finish(rr, ms.events, sub, 0.0);
            return 0;
        }

        std::unique_ptr<Rule> rule;
        std::optional<WeightNet> net;
        double estimator_lambda = 0.0;
        if (name == "lord") {
            rule = std::make_unique<LordRule>(alpha, w0, gamma);
        } else if (name == "lordpp") {
            rule = std::make_unique<LordPPRule>(alpha, w0, gamma);
        } else if (name == "mlord_dep") {
            rule = std::make_unique<ModifiedLordDependentRule>(alpha, w0, gamma);
        } else if (name == "saffron_est") {
            rule = std::make_unique<SaffronEstimatorRule>(
                alpha, w0, SaffronEstimatorRule::default_grid(alpha), rule_opts.lambda,
                rule_opts.spend_fraction);
            estimator_lambda = rule_opts.lambda;
        } else if (name == "cwlordpp") {
            CwLordPPRule::WeightFn fn;
            if (!rule_opts.net_file.empty()) {
                net.emplace(net_from_snapshot(SnapshotCodec::load_file(rule_opts.net_file)));
                const WeightNet* np = &*net;
                fn = [np](const std::vector<double>& x) { return (*np)(x); };
            } else if (!rule_opts.weights_file.empty()) {
                throw ValidationError("run: cwlordpp takes --net or --weight-const, "
                                      "not --weights-file (use wlordpp for fixed weights)");
            } else {
                const double c = rule_opts.weight_const;
                fn = [c](const std::vector<double>&) { return c; };
            }
            rule = std::make_unique<CwLordPPRule>(alpha, w0, gamma, std::move(fn));
        } else {
            throw ValidationError("unknown rule '" + name + "'");
        }

        EngineState state(alpha, w0);
        std::vector<HypothesisEvent> todo = ms.events;
        if (!restore.empty()) {
            Snapshot snap = SnapshotCodec::load_file(restore);
            if (snap.rule_name != name)
                throw ValidationError("snapshot was taken by rule '" + snap.rule_name +
                                      "', not '" + name + "'");
            state = SnapshotCodec::restore_state(snap);
            rule->load_extras(snap.extras);
            std::vector<HypothesisEvent> rest;
            for (const auto& ev : todo)
                if (ev.index > snap.t) rest.push_back(ev);
            todo = std::move(rest);
        }
        if (snapshot_at > 0) {
            if (snapshot_out.empty())
                throw ValidationError("run: --snapshot-at needs --snapshot-out");
            std::vector<HypothesisEvent> prefix;
            for (const auto& ev : todo)
                if (ev.index <= snapshot_at) prefix.push_back(ev);
            RunResult rr = run_stream(*rule, state, prefix);
            SnapshotCodec::save_file(SnapshotCodec::capture(state, *rule), snapshot_out);
            finish(rr, prefix, sub, estimator_lambda);
            std::cout << "snapshot written to " << snapshot_out << " after t=" << state.t()
                      << "\n";
            return 0;
        }
        RunResult rr = run_stream(*rule, state, todo);
        finish(rr, todo, sub, estimator_lambda);
        return 0;
    }

    void finish(const RunResult& rr, const std::vector<HypothesisEvent>& events,
                CLI::App* sub, double estimator_lambda) const {
        if (!out.empty()) {
            emit_decisions(rr, events, out, echo_lines(sub), estimator_lambda);
        } else {
            std::ostringstream ss;
            emit_decisions(rr, events, ss, echo_lines(sub), estimator_lambda);
            std::cout << ss.str();
        }
    }
};

struct TrainCmd {
    StreamOpts stream;
    RuleOpts rule_opts;
    TrainOpts train;
    std::string out;
    std::string net_out;
    std::string edr_out;
    std::string restore;
    std::string snapshot_out;
    long snapshot_at = 0;

    int run(CLI::App* sub) {
        MaterializedStream ms = materialize(stream);
        if (ms.events.empty()) throw ValidationError("train: empty stream");
        const int d = static_cast<int>(ms.events.front().context.size());
        if (d < 1) throw ValidationError("train: stream carries no context columns");
        const double alpha = rule_opts.alpha;
        const double w0 = rule_opts.w0 < 0.0 ? alpha / 2.0 : rule_opts.w0;
        GammaSchedule gamma = make_gamma(rule_opts, ms.events.size());

        TrainConfig cfg = train.cfg;
        if (train.optimizer == "momentum")
            cfg.optimizer = TrainConfig::Optimizer::momentum;
        else if (train.optimizer != "plain")
            throw ValidationError("train: optimizer must be plain or momentum");
        cfg.validate();

        WeightNet net = WeightNet::make(d, cfg.depth, cfg.width, cfg.init_seed);
        TrainedCwRule rule(net, gamma, cfg);
        EngineState state(alpha, w0);
        std::vector<HypothesisEvent> todo = ms.events;
        if (!restore.empty()) {
            Snapshot snap = SnapshotCodec::load_file(restore);
            if (snap.rule_name != std::string("cwlordpp"))
                throw ValidationError("snapshot was taken by rule '" + snap.rule_name +
                                      "', not a trained run");
            WeightNet loaded = net_from_snapshot(snap);
            if (loaded.param_count() != net.param_count())
                throw ValidationError("train: snapshot network shape differs from options");
            net.params() = loaded.params();
            state = SnapshotCodec::restore_state(snap);
            rule.load_extras(snap.extras);
            std::vector<HypothesisEvent> rest;
            for (const auto& ev : todo)
                if (ev.index > snap.t) rest.push_back(ev);
            todo = std::move(rest);
        }

        if (snapshot_at > 0) {
            if (snapshot_out.empty())
                throw ValidationError("train: --snapshot-at needs --snapshot-out");
            std::vector<HypothesisEvent> prefix;
            for (const auto& ev : todo)
                if (ev.index <= snapshot_at) prefix.push_back(ev);
            RunResult rr = run_stream(rule, state, prefix);
            save_net_snapshot(state, rule, net, d, cfg, snapshot_out);
            emit(rr, prefix, sub);
            std::cout << "snapshot written to " << snapshot_out << " after t=" << state.t()
                      << "\n";
            return 0;
        }

        RunResult rr = run_stream(rule, state, todo);
        emit(rr, todo, sub);
        if (!net_out.empty()) save_net_snapshot(state, rule, net, d, cfg, net_out);
        if (!edr_out.empty()) {
            std::ofstream eout(edr_out, std::ios::binary);
            if (!eout) throw ValidationError("cannot open output file: " + edr_out);
            eout << "batch,edr\n";
            for (std::size_t i = 0; i < rule.edr_trace().size(); ++i)
                eout << (i + 1) << "," << detail::fmt("%.12g", rule.edr_trace()[i]) << "\n";
        }
        return 0;
    }

    static void save_net_snapshot(const EngineState& state, const TrainedCwRule& rule,
                                  const WeightNet& net, int d, const TrainConfig& cfg,
                                  const std::string& path) {
        Snapshot snap = SnapshotCodec::capture(state, rule);
        snap.net_params = net.params();
        snap.extras.emplace_back("net_d", std::to_string(d));
        snap.extras.emplace_back("net_depth", std::to_string(cfg.depth));
        snap.extras.emplace_back("net_width", std::to_string(cfg.width));
        snap.extras.emplace_back("net_init_seed", std::to_string(cfg.init_seed));
        SnapshotCodec::save_file(snap, path);
    }

    void emit(const RunResult& rr, const std::vector<HypothesisEvent>& events,
              CLI::App* sub) const {
        if (!out.empty()) {
            emit_decisions(rr, events, out, echo_lines(sub));
        } else {
            std::ostringstream ss;
            emit_decisions(rr, events, ss, echo_lines(sub));
            std::cout << ss.str();
        }
    }
};

struct PowerCmd {
    double pi1 = 0.5;
    double mu = 3.0;
    double b0 = 0.05;
    std::string q0 = "point:1";
    std::string q1 = "point:1";
    std::string gamma = "finite";
    long horizon = 100000;
    long truncation = 1000000;
    int grid_points = 50;
    std::string out;

    int run(CLI::App* sub) const {
        (void)sub;
        WeightDist wq0 = parse_weight_dist(q0);
        WeightDist wq1 = parse_weight_dist(q1);
        GammaSchedule sched = [&] {
            if (gamma == "finite") return GammaSchedule::javanmard_finite(horizon);
            if (gamma == "infinite") return GammaSchedule::javanmard_infinite();
            throw ValidationError("power: gamma must be finite or infinite");
        }();
        auto F = [&](double a) { return normal_means_F(a, mu); };
        auto G = [&](double a) { return marginal_G(a, pi1, F); };
        auto D = [&](double a) { return marginal_D(a, pi1, wq0.mean(), F, wq1); };

        if (!out.empty()) {
            std::ofstream gout(out, std::ios::binary);
            if (!gout) throw ValidationError("cannot open output file: " + out);
            gout << "a,G,D\n";
            const double lg_lo = -6.0, lg_hi = 0.0;
            for (int i = 0; i < grid_points; ++i) {
                const double a = std::pow(
                    10.0, lg_lo + (lg_hi - lg_lo) * i / std::max(grid_points - 1, 1));
                gout << detail::fmt("%.12g", a) << "," << detail::fmt("%.12g", G(a)) << ","
                     << detail::fmt("%.12g", D(a)) << "\n";
            }
        }

        std::cout << "model: pi1=" << pi1 << " mu=" << mu << " b0=" << b0 << " q0=" << q0
                  << " q1=" << q1 << "\n";
        try {
            SeparationReport rep = check_separation(
                pi1, [&](double a) { return normal_means_f(a, mu); }, b0, sched, wq0, wq1);
            std::cout << "a0 = " << detail::fmt("%.6f", rep.a0)
                      << "  bound a0/(b0*gamma1) = " << detail::fmt("%.4f", rep.bound) << "\n"
                      << "separation: informative=" << (rep.informative ? "yes" : "no")
                      << " level=" << (rep.level_condition ? "yes" : "no")
                      << " support=" << (rep.support_condition ? "yes" : "no")
                      << " pass=" << (rep.pass ? "yes" : "no") << "\n";
        } catch (const ValidationError& e) {
            std::cout << "a0: undefined (" << e.what() << ")\n";
        }
        auto report = [&](const char* label, const std::function<double(double)>& dist) {
            PowerBound pb = power_lower_bound(dist, b0, sched, truncation);
            std::cout << label << ": series=" << detail::fmt("%.6g", pb.series)
                      << " as_stated=" << detail::fmt("%.6g", pb.as_stated)
                      << " corrected=" << detail::fmt("%.6g", pb.corrected)
                      << " terms=" << pb.terms_used
                      << " tail=" << detail::fmt("%.3g", pb.tail_bound)
                      << (pb.divergent ? " [divergent]" : "")
                      << (pb.zero_series ? " [zero-series]" : "") << "\n";
        };
        report("renewal bound (unweighted, D=G)", G);
        report("renewal bound (weighted)", D);
        if (!out.empty()) std::cout << "grid written to " << out << "\n";
        return 0;
    }
};

struct OfflineCmd {
    std::string input;
    std::string method = "bh";
    double alpha = 0.1;
    double lambda = 0.5;
    bool cap_pi0 = false;

    int run(CLI::App* sub) const {
        (void)sub;
        if (input.empty()) throw ValidationError("offline: --input is required");
        std::ifstream in(input, std::ios::binary);
        if (!in) throw ValidationError("cannot open input file: " + input);
        OfflineBatch batch;
        batch.alpha_level = alpha;
        batch.lambda = lambda;
        std::string line;
        long line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty() || line[0] == '#') continue;
            batch.p.push_back(
                detail::parse_double(line, input + ":" + std::to_string(line_no)));
        }
        std::vector<std::size_t> rej;
        if (method == "bh") rej = bh(batch);
        else if (method == "storey") rej = storey_bh(batch, cap_pi0);
        else throw ValidationError("offline: method must be bh or storey");
        std::cout << "# method=" << method << " alpha=" << alpha << " n=" << batch.p.size();
        if (method == "storey")
            std::cout << " lambda=" << lambda
                      << " pi0_hat=" << detail::fmt("%.6g", storey_pi0(batch, cap_pi0));
        std::cout << "\n";
        for (std::size_t i : rej) std::cout << (i + 1) << "\n";
        std::cout << "# rejected=" << rej.size() << "\n";
        return 0;
    }
};

struct CompareCmd {
    StreamOpts stream;
    RuleOpts rule_opts;
    TrainOpts train;
    std::string rules = "lord,lordpp,cwlordpp,saffron_est";
    int repeats = 1;
    std::uint64_t base_seed = 42;
    bool parallel = false;

    int run(CLI::App* sub) {
        (void)sub;
        std::vector<std::string> names;
        std::string cur;
        for (char c : rules + ",") {
            if (c == ',') {
                if (!cur.empty()) names.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        if (names.empty()) throw ValidationError("compare: empty rule list");
        const double alpha = rule_opts.alpha;
        const double w0 = rule_opts.w0 < 0.0 ? alpha / 2.0 : rule_opts.w0;

        if (repeats == 1) {
            MaterializedStream ms = materialize(stream);
            GammaSchedule gamma = make_gamma(rule_opts, ms.events.size());
            std::printf("%-12s %8s %10s %10s %10s %12s\n", "rule", "R", "fdp_hat", "fdp", "tdp",
                        "wealth");
            for (const auto& name : names) {
                RunResult rr = run_one(name, ms, alpha, w0, gamma);
                const bool lab = rr.metrics.labeled();
                std::printf("%-12s %8ld %10.4f %10s %10s %12.6f\n", name.c_str(),
                            rr.metrics.R(),
                            name == "saffron_est" ? fdp_hat_saffron(rr.metrics)
                                                  : fdp_hat_lord(rr.metrics),
                            lab ? detail::fmt("%.4f", fdp(rr.metrics)).c_str() : "-",
                            lab ? detail::fmt("%.4f", tdp(rr.metrics)).c_str() : "-",
                            rr.decisions.empty() ? 0.0 : rr.decisions.back().wealth_after);
            }
            return 0;
        }

        if (!stream.input.empty())
            throw ValidationError("compare: --repeats > 1 needs a generator, not --input");
        std::printf("%-12s %12s %12s %12s %12s %12s\n", "rule", "mean_fdp", "se_fdp", "mean_tdp",
                    "se_tdp", "mfdr(1)");
        for (const auto& name : names) {
            auto run_fn = [&](std::uint64_t seed, int) {
                MaterializedStream ms = materialize(stream, seed);
                GammaSchedule gamma = make_gamma(rule_opts, ms.events.size());
                return run_one(name, ms, alpha, w0, gamma);
            };
            ExperimentReport rep = run_experiment(run_fn, repeats, base_seed,
                                                  parallel ? ExecPolicy::openmp
                                                           : ExecPolicy::serial);
            std::printf("%-12s %12.4f %12.4f %12.4f %12.4f %12.4f\n", name.c_str(),
                        rep.mean_final_fdp, rep.se_final_fdp, rep.mean_tdp, rep.se_tdp,
                        rep.mfdr(1.0));
        }
        return 0;
    }

    RunResult run_one(const std::string& name, const MaterializedStream& ms, double alpha,
                      double w0, const GammaSchedule& gamma) {
        if (name == "wlord" || name == "wlordpp") {
            if (ms.weights.empty())
                throw ValidationError("compare: " + name + " needs the weighted_mixture model");
            return weighted_rule(name == "wlord" ? BaseRuleKind::lord : BaseRuleKind::lordpp,
                                 ms.events, ms.weights, alpha, w0, gamma);
        }
        if (name == "cwlordpp") {
            // trained variant: fresh network, online updates
            const int d = static_cast<int>(ms.events.front().context.size());
            if (d >= 1) {
                TrainConfig cfg = train.cfg;
                WeightNet net = WeightNet::make(d, cfg.depth, cfg.width, cfg.init_seed);
                TrainedCwRule rule(net, gamma, cfg);
                return run_stream(rule, alpha, w0, ms.events);
            }
            CwLordPPRule rule(alpha, w0, gamma, {});
            return run_stream(rule, alpha, w0, ms.events);
        }
        std::unique_ptr<Rule> rule;
        if (name == "lord") rule = std::make_unique<LordRule>(alpha, w0, gamma);
        else if (name == "lordpp") rule = std::make_unique<LordPPRule>(alpha, w0, gamma);
        else if (name == "mlord_dep") {
            GammaSchedule safe = GammaSchedule::dependent_safe(alpha, alpha - w0);
            rule = std::make_unique<ModifiedLordDependentRule>(alpha, w0, safe);
        } else if (name == "saffron_est") {
            rule = std::make_unique<SaffronEstimatorRule>(
                alpha, w0, SaffronEstimatorRule::default_grid(alpha), rule_opts.lambda,
                rule_opts.spend_fraction);
        } else {
            throw ValidationError("unknown rule '" + name + "'");
        }
        return run_stream(*rule, alpha, w0, ms.events);
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming multiple-hypothesis testing with online FDR control"};
    app.require_subcommand(1);
    app.set_config("--config", "", "INI config file (sections per subcommand)");

    SimulateCmd sim_cmd;
    auto* sim_sub = app.add_subcommand("simulate", "generate a synthetic stream CSV");
    add_stream_options(sim_sub, sim_cmd.stream, /*generator_only=*/true);
    sim_sub->add_option("--out", sim_cmd.out, "output stream CSV")->required();
    sim_sub->add_option("--weights-out", sim_cmd.weights_out, "output weight CSV (t,w)");

    RunCmd run_cmd;
    auto* run_sub = app.add_subcommand("run", "run one rule over a stream");
    add_stream_options(run_sub, run_cmd.stream, false);
    add_rule_options(run_sub, run_cmd.rule_opts);
    run_sub->add_option("--out", run_cmd.out, "decision log CSV (default: stdout)");
    run_sub->add_option("--restore", run_cmd.restore, "resume from a snapshot file");
    run_sub->add_option("--snapshot-at", run_cmd.snapshot_at,
                        "stop after this step index and write a snapshot");
    run_sub->add_option("--snapshot-out", run_cmd.snapshot_out, "snapshot output path");

    TrainCmd train_cmd;
    auto* train_sub = app.add_subcommand("train", "online-train the weight network while testing");
    add_stream_options(train_sub, train_cmd.stream, false);
    add_rule_options(train_sub, train_cmd.rule_opts);
    add_train_options(train_sub, train_cmd.train);
    train_sub->add_option("--out", train_cmd.out, "decision log CSV (default: stdout)");
    train_sub->add_option("--net-out", train_cmd.net_out, "write final network snapshot");
    train_sub->add_option("--edr-out", train_cmd.edr_out, "write per-batch proxy-objective CSV");
    train_sub->add_option("--restore", train_cmd.restore, "resume from a snapshot file");
    train_sub->add_option("--snapshot-at", train_cmd.snapshot_at,
                          "stop after this step index and write a snapshot");
    train_sub->add_option("--snapshot-out", train_cmd.snapshot_out, "snapshot output path");

    PowerCmd power_cmd;
    auto* power_sub = app.add_subcommand("power", "analytic power report and G/D grids");
    power_sub->add_option("--pi1", power_cmd.pi1, "alternative fraction");
    power_sub->add_option("--mu", power_cmd.mu, "alternative mean");
    power_sub->add_option("--b0", power_cmd.b0, "reward size alpha - w0");
    power_sub->add_option("--q0", power_cmd.q0, "null weight dist");
    power_sub->add_option("--q1", power_cmd.q1, "alternative weight dist");
    power_sub->add_option("--gamma", power_cmd.gamma, "finite | infinite");
    power_sub->add_option("--horizon", power_cmd.horizon, "finite-schedule horizon");
    power_sub->add_option("--truncation", power_cmd.truncation, "series truncation");
    power_sub->add_option("--grid-points", power_cmd.grid_points, "grid resolution");
    power_sub->add_option("--out", power_cmd.out, "grid CSV path");

    OfflineCmd off_cmd;
    auto* off_sub = app.add_subcommand("offline", "BH / Storey-BH on a one-column p file");
    off_sub->add_option("--input", off_cmd.input, "one p-value per line")->required();
    off_sub->add_option("--method", off_cmd.method, "bh | storey");
    off_sub->add_option("--alpha", off_cmd.alpha, "level");
    off_sub->add_option("--lambda", off_cmd.lambda, "Storey parameter");
    off_sub->add_flag("--cap-pi0", off_cmd.cap_pi0, "cap the null-fraction estimate at 1");

    CompareCmd cmp_cmd;
    auto* cmp_sub = app.add_subcommand("compare", "run several rules on the same streams");
    add_stream_options(cmp_sub, cmp_cmd.stream, false);
    add_rule_options(cmp_sub, cmp_cmd.rule_opts);
    add_train_options(cmp_sub, cmp_cmd.train);
    cmp_sub->add_option("--rules", cmp_cmd.rules, "comma-separated rule list");
    cmp_sub->add_option("--repeats", cmp_cmd.repeats, "replicates (generator mode)");
    cmp_sub->add_option("--base-seed", cmp_cmd.base_seed, "replicate seed base");
    cmp_sub->add_flag("--parallel", cmp_cmd.parallel, "run replicates with OpenMP");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim_sub->parsed()) return sim_cmd.run(sim_sub);
        if (run_sub->parsed()) return run_cmd.run(run_sub);
        if (train_sub->parsed()) return train_cmd.run(train_sub);
        if (power_sub->parsed()) return power_cmd.run(power_sub);
        if (off_sub->parsed()) return off_cmd.run(off_sub);
        if (cmp_sub->parsed()) return cmp_cmd.run(cmp_sub);
    } catch (const ConstraintViolation& e) {
        std::cerr << "constraint error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
