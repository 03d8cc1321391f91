// CSV ingestion and emission.
//
// Input stream format:  header `t,p,x1,...,xd[,h]`, strictly increasing
// integer t, p in the open interval (0,1), optional 0/1 label column h
// (all rows or none). Malformed files abort with a per-line diagnostic
// before any decision is made.
//
// Decision log format:  comment header (formatting + config echo), columns
// `t,alpha,weight,reject,wealth,fdp_hat[,fdp,tdp]`, then one trailing
// summary comment line. All doubles use %.12g; identical runs re-emit
// byte-identical files.
#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fdrstream/core.hpp"
#include "fdrstream/engine.hpp"
#include "fdrstream/sim.hpp"

namespace fdrstream {

namespace detail {
inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& tok, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size())
        throw ValidationError(where + ": not a number: '" + tok + "'");
    return v;
}

inline long parse_long(const std::string& tok, const std::string& where) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (tok.empty() || end != tok.c_str() + tok.size())
        throw ValidationError(where + ": not an integer: '" + tok + "'");
    return v;
}
}  // namespace detail

inline std::vector<HypothesisEvent> ingest_stream(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(name + ": empty file (no header)");
    const std::vector<std::string> header = detail::split_csv(line);
    if (header.size() < 2 || header[0] != "t" || header[1] != "p")
        throw ValidationError(name + ":1: header must start with 't,p'");
    bool labeled = !header.empty() && header.back() == "h";
    const std::size_t d = header.size() - 2 - (labeled ? 1 : 0);
    for (std::size_t i = 0; i < d; ++i)
        if (header[2 + i] != "x" + std::to_string(i + 1))
            throw ValidationError(name + ":1: context columns must be named x1..x" +
                                  std::to_string(d) + " (got '" + header[2 + i] + "')");

    std::vector<HypothesisEvent> events;
    long prev_t = 0;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = name + ":" + std::to_string(line_no);
        const std::vector<std::string> f = detail::split_csv(line);
        if (f.size() != header.size())
            throw ValidationError(where + ": expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(f.size()));
        HypothesisEvent ev;
        ev.index = detail::parse_long(f[0], where + ": field 't'");
        if (ev.index <= prev_t)
            throw ValidationError(where + ": field 't': must be strictly increasing (" +
                                  std::to_string(ev.index) + " after " +
                                  std::to_string(prev_t) + ")");
        prev_t = ev.index;
        ev.p = detail::parse_double(f[1], where + ": field 'p'");
        if (!(ev.p > 0.0 && ev.p < 1.0))
            throw ValidationError(where + ": field 'p': must lie in the open interval (0,1)");
        ev.context.reserve(d);
        for (std::size_t i = 0; i < d; ++i)
            ev.context.push_back(
                detail::parse_double(f[2 + i], where + ": field 'x" + std::to_string(i + 1) + "'"));
        if (labeled) {
            const std::string& h = f.back();
            if (h == "0") ev.alternative = false;
            else if (h == "1") ev.alternative = true;
            else throw ValidationError(where + ": field 'h': must be 0 or 1 (got '" + h + "')");
        }
        events.push_back(std::move(ev));
    }
    validate_stream(events);
    return events;
}

inline std::vector<HypothesisEvent> ingest_stream(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open input file: " + path);
    return ingest_stream(in, path);
}

// Writes a stream in the ingestible format; %.17g keeps doubles bit-exact
// across the round trip.
inline void write_stream(const std::vector<HypothesisEvent>& events, std::ostream& out) {
    const std::size_t d = events.empty() ? 0 : events.front().context.size();
    const bool labeled = !events.empty() && events.front().alternative.has_value();
    out << "t,p";
    for (std::size_t i = 1; i <= d; ++i) out << ",x" << i;
    if (labeled) out << ",h";
    out << "\n";
    for (const auto& ev : events) {
        out << ev.index << "," << detail::fmt("%.17g", ev.p);
        for (double x : ev.context) out << "," << detail::fmt("%.17g", x);
        if (labeled) out << "," << (*ev.alternative ? 1 : 0);
        out << "\n";
    }
}

inline void write_stream(const std::vector<HypothesisEvent>& events, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file: " + path);
    write_stream(events, out);
    if (!out) throw ValidationError("write failed: " + path);
}

// Decision log with running estimates. `estimator_lambda` > 0 switches the
// fdp_hat column to the discard-threshold estimator (requires the original
// events for the p-values); 0 uses the level-sum estimator.
inline void emit_decisions(const RunResult& run, const std::vector<HypothesisEvent>& events,
                           std::ostream& out, const std::vector<std::string>& config_echo = {},
                           double estimator_lambda = 0.0) {
    if (run.decisions.size() != events.size())
        throw ValidationError("emit: decision log and event stream differ in length");
    const bool labeled = !events.empty() && events.front().alternative.has_value();
    out << "# decision log; doubles formatted %.12g\n";
    for (const auto& lineText : config_echo) out << "# " << lineText << "\n";
    out << "t,alpha,weight,reject,wealth,fdp_hat";
    if (labeled) out << ",fdp,tdp";
    out << "\n";

    double est_sum = 0.0;
    long R = 0, V = 0, S = 0, N1 = 0;
    for (std::size_t i = 0; i < run.decisions.size(); ++i) {
        const Decision& dec = run.decisions[i];
        const HypothesisEvent& ev = events[i];
        if (estimator_lambda > 0.0)
            est_sum += ev.p > estimator_lambda ? dec.alpha / (1.0 - estimator_lambda) : 0.0;
        else
            est_sum += dec.alpha;
        if (dec.rejected) ++R;
        if (labeled) {
            if (*ev.alternative) ++N1;
            if (dec.rejected) (*ev.alternative ? ++S : ++V);
        }
        const double fdp_hat = est_sum / static_cast<double>(std::max<long>(R, 1));
        out << ev.index << "," << detail::fmt("%.12g", dec.alpha) << ","
            << detail::fmt("%.12g", dec.weight) << "," << (dec.rejected ? 1 : 0) << ","
            << detail::fmt("%.12g", dec.wealth_after) << "," << detail::fmt("%.12g", fdp_hat);
        if (labeled)
            out << "," << detail::fmt("%.12g", static_cast<double>(V) / std::max<long>(R, 1))
                << "," << detail::fmt("%.12g", static_cast<double>(S) / std::max<long>(N1, 1));
        out << "\n";
    }

    const double final_wealth =
        run.decisions.empty() ? 0.0 : run.decisions.back().wealth_after;
    out << "# summary: steps=" << run.decisions.size() << " R=" << R;
    if (labeled) out << " V=" << V << " S=" << S << " N1=" << N1;
    out << " fdp_hat="
        << detail::fmt("%.12g", est_sum / static_cast<double>(std::max<long>(R, 1)));
    if (labeled)
        out << " fdp=" << detail::fmt("%.12g", static_cast<double>(V) / std::max<long>(R, 1))
            << " tdp=" << detail::fmt("%.12g", static_cast<double>(S) / std::max<long>(N1, 1));
    out << " wealth_final=" << detail::fmt("%.12g", final_wealth) << "\n";
}

inline void emit_decisions(const RunResult& run, const std::vector<HypothesisEvent>& events,
                           const std::string& path,
                           const std::vector<std::string>& config_echo = {},
                           double estimator_lambda = 0.0) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file: " + path);
    emit_decisions(run, events, out, config_echo, estimator_lambda);
    if (!out) throw ValidationError("write failed: " + path);
}

// One row per replicate plus mean and se summary rows.
inline void write_experiment_report(const ExperimentReport& rep, std::ostream& out,
                                    const std::vector<std::string>& config_echo = {}) {
    out << "# experiment report; doubles formatted %.12g\n";
    for (const auto& lineText : config_echo) out << "# " << lineText << "\n";
    out << "# note: " << rep.note << "\n";
    out << "replicate,seed,max_fdp,final_fdp,tdp,R,V\n";
    for (const auto& row : rep.rows)
        out << row.replicate << "," << row.seed << "," << detail::fmt("%.12g", row.max_fdp)
            << "," << detail::fmt("%.12g", row.final_fdp) << ","
            << detail::fmt("%.12g", row.tdp) << "," << row.R << "," << row.V << "\n";
    out << "mean,," << detail::fmt("%.12g", rep.mean_max_fdp) << ","
        << detail::fmt("%.12g", rep.mean_final_fdp) << "," << detail::fmt("%.12g", rep.mean_tdp)
        << ",,\n";
    out << "se,," << detail::fmt("%.12g", rep.se_max_fdp) << ","
        << detail::fmt("%.12g", rep.se_final_fdp) << "," << detail::fmt("%.12g", rep.se_tdp)
        << ",,\n";
}

inline void write_experiment_report(const ExperimentReport& rep, const std::string& path,
                                    const std::vector<std::string>& config_echo = {}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file: " + path);
    write_experiment_report(rep, out, config_echo);
    if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace fdrstream
