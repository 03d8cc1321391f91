// Versioned, checksummed, line-oriented text snapshots of a mid-stream run:
// engine ledger, rule extras, optional network parameter blob, RNG cursor.
// Doubles are stored as hexfloats so restore is bit-exact.
#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fdrstream/core.hpp"
#include "fdrstream/engine.hpp"

namespace fdrstream {

inline constexpr int kSnapshotVersion = 1;
inline constexpr const char* kSnapshotMagic = "fdrstream-snapshot";

struct Snapshot {
    int version = kSnapshotVersion;
    std::string rule_name;
    double alpha_level = 0.0, w0 = 0.0, wealth = 0.0;
    long t = 0, tau = 0, rejections = 0;
    bool rho1 = false;
    std::vector<std::uint8_t> history;                          // one flag per step
    std::vector<std::pair<std::string, std::string>> extras;    // rule-specific state
    std::vector<double> net_params;                             // theta blob (may be empty)
    std::uint64_t rng_cursor = 0;  // reserved; streams are materialized before running
};

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

class SnapshotCodec {
  public:
    static Snapshot capture(const EngineState& s, const Rule& rule) {
        Snapshot snap;
        snap.rule_name = rule.name();
        snap.alpha_level = s.alpha_level();
        snap.w0 = s.w0();
        snap.wealth = s.wealth();
        snap.t = s.t();
        snap.tau = s.tau();
        snap.rho1 = s.rho1_passed();
        snap.rejections = s.rejection_count();
        snap.history = s.history();
        rule.save_extras(snap.extras);
        return snap;
    }

    static EngineState restore_state(const Snapshot& snap, long history_cap = 10000000) {
        if (!(snap.wealth >= 0.0) || snap.t < 0 || snap.tau < 0 || snap.tau > snap.t ||
            snap.rejections < 0)
            throw ValidationError("snapshot: inconsistent engine fields");
        EngineState s(snap.alpha_level, snap.w0, history_cap);
        s.wealth_ = snap.wealth;
        s.t_ = snap.t;
        s.tau_ = snap.tau;
        s.rho1_passed_ = snap.rho1;
        s.rejection_count_ = snap.rejections;
        s.history_ = snap.history;
        return s;
    }

    static std::string encode(const Snapshot& snap) {
        std::ostringstream body;
        body << "rule " << snap.rule_name << "\n";
        body << "alpha " << hexfloat_encode(snap.alpha_level) << "\n";
        body << "w0 " << hexfloat_encode(snap.w0) << "\n";
        body << "wealth " << hexfloat_encode(snap.wealth) << "\n";
        body << "t " << snap.t << "\n";
        body << "tau " << snap.tau << "\n";
        body << "rho1 " << (snap.rho1 ? 1 : 0) << "\n";
        body << "rejections " << snap.rejections << "\n";
        body << "history_len " << snap.history.size() << "\n";
        body << "history " << pack_bits(snap.history) << "\n";
        body << "rng_cursor " << snap.rng_cursor << "\n";
        body << "net_params " << snap.net_params.size() << "\n";
        for (double v : snap.net_params) body << "param " << hexfloat_encode(v) << "\n";
        for (const auto& [k, v] : snap.extras) body << "extra " << k << " " << v << "\n";
        body << "end\n";
        const std::string text = body.str();
        std::ostringstream out;
        char sum[24];
        std::snprintf(sum, sizeof(sum), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(text)));
        out << kSnapshotMagic << " v" << kSnapshotVersion << " " << sum << "\n" << text;
        return out.str();
    }

    static Snapshot decode(const std::string& text) {
        const std::size_t nl = text.find('\n');
        if (nl == std::string::npos) throw ValidationError("snapshot: truncated header");
        std::istringstream header(text.substr(0, nl));
        std::string magic, version, checksum;
        header >> magic >> version >> checksum;
        if (magic != kSnapshotMagic) throw ValidationError("snapshot: bad magic");
        if (version != "v" + std::to_string(kSnapshotVersion))
            throw ValidationError("snapshot: version mismatch (got " + version + ", expected v" +
                                  std::to_string(kSnapshotVersion) + ")");
        const std::string body = text.substr(nl + 1);
        char sum[24];
        std::snprintf(sum, sizeof(sum), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(body)));
        if (checksum != sum)
            throw ValidationError("snapshot: checksum mismatch (corrupt file)");

        Snapshot snap;
        std::istringstream lines(body);
        std::string line;
        std::size_t history_len = 0, param_count = 0;
        bool saw_end = false;
        while (std::getline(lines, line)) {
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            if (key == "rule") ls >> snap.rule_name;
            else if (key == "alpha") snap.alpha_level = read_hex(ls);
            else if (key == "w0") snap.w0 = read_hex(ls);
            else if (key == "wealth") snap.wealth = read_hex(ls);
            else if (key == "t") ls >> snap.t;
            else if (key == "tau") ls >> snap.tau;
            else if (key == "rho1") { int b = 0; ls >> b; snap.rho1 = b != 0; }
            else if (key == "rejections") ls >> snap.rejections;
            else if (key == "history_len") ls >> history_len;
            else if (key == "history") {
                std::string packed;
                ls >> packed;
                snap.history = unpack_bits(packed, history_len);
            } else if (key == "rng_cursor") ls >> snap.rng_cursor;
            else if (key == "net_params") ls >> param_count;
            else if (key == "param") snap.net_params.push_back(read_hex(ls));
            else if (key == "extra") {
                std::string k, v;
                ls >> k >> v;
                snap.extras.emplace_back(k, v);
            } else if (key == "end") { saw_end = true; break; }
            else if (!key.empty()) throw ValidationError("snapshot: unknown field '" + key + "'");
        }
        if (!saw_end) throw ValidationError("snapshot: missing end marker");
        if (snap.net_params.size() != param_count)
            throw ValidationError("snapshot: parameter blob length mismatch");
        return snap;
    }

    static void save_file(const Snapshot& snap, const std::string& path) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("snapshot: cannot open for writing: " + path);
        out << encode(snap);
        if (!out) throw ValidationError("snapshot: write failed: " + path);
    }

    static Snapshot load_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ValidationError("snapshot: cannot open: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return decode(ss.str());
    }

  private:
    static double read_hex(std::istringstream& ls) {
        std::string tok;
        ls >> tok;
        return hexfloat_decode(tok);
    }

    // Four history flags per hex character, most significant bit first.
    static std::string pack_bits(const std::vector<std::uint8_t>& bits) {
        if (bits.empty()) return "-";
        static const char* digits = "0123456789abcdef";
        std::string out;
        out.reserve((bits.size() + 3) / 4);
        for (std::size_t i = 0; i < bits.size(); i += 4) {
            int nib = 0;
            for (std::size_t j = 0; j < 4 && i + j < bits.size(); ++j)
                if (bits[i + j]) nib |= 1 << (3 - j);
            out.push_back(digits[nib]);
        }
        return out;
    }

    static std::vector<std::uint8_t> unpack_bits(const std::string& packed, std::size_t n) {
        std::vector<std::uint8_t> bits;
        if (packed == "-") {
            if (n != 0) throw ValidationError("snapshot: history length mismatch");
            return bits;
        }
        if (packed.size() != (n + 3) / 4)
            throw ValidationError("snapshot: history length mismatch");
        bits.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const char c = packed[i / 4];
            int nib;
            if (c >= '0' && c <= '9') nib = c - '0';
            else if (c >= 'a' && c <= 'f') nib = c - 'a' + 10;
            else throw ValidationError("snapshot: bad history encoding");
            bits.push_back((nib >> (3 - i % 4)) & 1 ? 1 : 0);
        }
        return bits;
    }
};

}  // namespace fdrstream
