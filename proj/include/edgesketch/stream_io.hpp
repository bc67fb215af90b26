#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "edgesketch/edge.hpp"
#include "edgesketch/errors.hpp"

namespace edgesketch {

enum class EdgeFormat { comma, space };

inline char separator(EdgeFormat f) { return f == EdgeFormat::comma ? ',' : ' '; }

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

inline bool parse_u64(std::string_view tok, std::uint64_t& out) {
    if (tok.empty()) return false;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return res.ec == std::errc{} && res.ptr == tok.data() + tok.size();
}

} // namespace detail

/// Line-by-line reader of `u<sep>v<sep>t` edge files. Non-numeric node ids are
/// interned to dense integer ids in arrival order. Decreasing timestamps are
/// clamped to the last one seen (warned once on stderr) so downstream bins
/// stay monotone.
class EdgeReader {
public:
    EdgeReader(const std::string& path, EdgeFormat format)
        : in_(path), path_(path), format_(format) {
        if (!in_) throw DataError(path + ": cannot open file");
    }

    // Reads the next event. Returns false at end of stream.
    bool next(EdgeEvent& out) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_;
            std::string_view body = detail::trim(line);
            if (body.empty()) continue;
            parse_line(body, out);
            return true;
        }
        return false;
    }

    std::uint64_t out_of_order_count() const { return out_of_order_; }
    std::uint64_t lines_read() const { return line_; }

private:
    void parse_line(std::string_view body, EdgeEvent& out) {
        const char sep = separator(format_);
        std::string_view tok[3];
        std::size_t n_tok = 0;
        while (!body.empty() || n_tok == 0) {
            const std::size_t pos = body.find(sep);
            std::string_view field = detail::trim(body.substr(0, pos));
            if (pos == std::string_view::npos) body = {};
            else body.remove_prefix(pos + 1);
            if (field.empty() && format_ == EdgeFormat::space) continue; // runs of spaces
            if (n_tok == 3) fail("too many fields");
            tok[n_tok++] = field;
            if (body.empty()) break;
        }
        if (n_tok != 3) fail("expected 3 fields (u" + std::string(1, sep) + "v" +
                             std::string(1, sep) + "t), got " + std::to_string(n_tok));

        out.u = node_id(tok[0]);
        out.v = node_id(tok[1]);
        std::uint64_t t = 0;
        if (!detail::parse_u64(tok[2], t))
            fail("timestamp is not a non-negative integer: '" + std::string(tok[2]) + "'");

        if (have_t_ && t < last_t_) {
            ++out_of_order_;
            if (out_of_order_ == 1)
                std::cerr << path_ << ": warning: decreasing timestamp at line " << line_
                          << "; clamping out-of-order timestamps to the last bin\n";
            t = last_t_;
        }
        last_t_ = t;
        have_t_ = true;
        out.t = t;
        out.label.reset();
    }

    std::uint64_t node_id(std::string_view tok) {
        std::uint64_t value = 0;
        if (detail::parse_u64(tok, value)) return value;
        if (tok.empty()) fail("empty node id");
        const auto [it, inserted] = intern_.try_emplace(std::string(tok), intern_.size());
        return it->second;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw DataError(path_ + ":" + std::to_string(line_) + ": " + what);
    }

    std::ifstream in_;
    std::string path_;
    EdgeFormat format_;
    std::uint64_t line_ = 0;
    std::uint64_t out_of_order_ = 0;
    std::uint64_t last_t_ = 0;
    bool have_t_ = false;
    std::unordered_map<std::string, std::uint64_t> intern_;
};

inline std::vector<EdgeEvent> read_edges(const std::string& path, EdgeFormat format) {
    EdgeReader reader(path, format);
    std::vector<EdgeEvent> edges;
    EdgeEvent e;
    while (reader.next(e)) edges.push_back(e);
    return edges;
}

// One ASCII 0/1 per line, aligned 1:1 with an edge file.
inline std::vector<std::uint8_t> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");
    std::vector<std::uint8_t> labels;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = detail::trim(line);
        if (body.empty()) continue;
        if (body == "0") labels.push_back(0);
        else if (body == "1") labels.push_back(1);
        else
            throw DataError(path + ":" + std::to_string(line_no) + ": label must be 0 or 1, got '" +
                            std::string(body) + "'");
    }
    return labels;
}

inline void write_edges(const std::string& path, const std::vector<EdgeEvent>& edges,
                        EdgeFormat format) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open file for writing");
    const char sep = separator(format);
    for (const EdgeEvent& e : edges)
        out << e.u << sep << e.v << sep << e.t << '\n';
    if (!out) throw DataError(path + ": write failed");
}

inline void write_labels(const std::string& path, const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open file for writing");
    for (const std::uint8_t l : labels)
        out << int(l) << '\n';
    if (!out) throw DataError(path + ": write failed");
}

/// Deterministic labeled stream: steady background traffic over a pool of
/// recurring node pairs, plus injected single-bin bursts in which one source
/// hammers a small set of destinations (microclusters).
struct SyntheticConfig {
    std::uint64_t n_nodes = 1000;
    std::uint64_t n_edges = 1'000'000;
    std::uint64_t n_bins = 1000;
    std::uint32_t burst_count = 20;
    std::uint32_t burst_size = 500;
    std::uint32_t burst_fanout = 5;
    double background_rate = 1.0; // background events per active pair per bin
    std::uint64_t seed = 42;

    void validate() const {
        if (n_nodes < 2) throw ParamError("n_nodes must be >= 2");
        if (n_bins < 1) throw ParamError("n_bins must be >= 1");
        if (!(background_rate > 0.0)) throw ParamError("background_rate must be > 0");
        const std::uint64_t burst_events = std::uint64_t{burst_count} * burst_size;
        if (burst_events > n_edges)
            throw ParamError("burst_count*burst_size exceeds n_edges (" +
                             std::to_string(burst_events) + " > " + std::to_string(n_edges) + ")");
        if (burst_count > 0) {
            if (burst_fanout < 1) throw ParamError("burst_fanout must be >= 1");
            if (burst_size < 1) throw ParamError("burst_size must be >= 1");
            if (n_bins < 2) throw ParamError("n_bins must be >= 2 to place bursts after history");
            if (burst_fanout >= n_nodes)
                throw ParamError("burst_fanout must be < n_nodes");
        }
    }
};

struct SyntheticStream {
    std::vector<EdgeEvent> edges;
    std::vector<std::uint8_t> labels; // aligned with edges
};

inline SyntheticStream generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    const std::uint64_t burst_events = std::uint64_t{cfg.burst_count} * cfg.burst_size;
    const std::uint64_t background = cfg.n_edges - burst_events;

    // Background pool sized so each active pair sees ~background_rate events per bin.
    const double per_bin = static_cast<double>(background) / static_cast<double>(cfg.n_bins);
    const std::uint64_t max_pairs = cfg.n_nodes * (cfg.n_nodes - 1);
    std::uint64_t pool_size = static_cast<std::uint64_t>(std::llround(per_bin / cfg.background_rate));
    pool_size = std::clamp<std::uint64_t>(pool_size, 1, max_pairs / 2 + 1);

    std::vector<std::pair<std::uint64_t, std::uint64_t>> pool;
    pool.reserve(pool_size);
    {
        std::unordered_map<std::uint64_t, bool> seen;
        seen.reserve(pool_size * 2);
        while (pool.size() < pool_size) {
            const std::uint64_t u = rng() % cfg.n_nodes;
            const std::uint64_t v = rng() % cfg.n_nodes;
            if (u == v) continue;
            const std::uint64_t key = u * cfg.n_nodes + v;
            if (seen.try_emplace(key, true).second) pool.emplace_back(u, v);
        }
    }

    SyntheticStream out;
    out.edges.reserve(cfg.n_edges);

    const std::uint64_t base_per_bin = cfg.n_bins ? background / cfg.n_bins : 0;
    const std::uint64_t remainder = cfg.n_bins ? background % cfg.n_bins : 0;
    for (std::uint64_t b = 0; b < cfg.n_bins; ++b) {
        const std::uint64_t count = base_per_bin + (b < remainder ? 1 : 0);
        for (std::uint64_t i = 0; i < count; ++i) {
            const auto& [u, v] = pool[rng() % pool.size()];
            out.edges.push_back(EdgeEvent{u, v, b, false});
        }
    }

    // Bursts land in bins >= 1 so a history baseline exists when they hit.
    for (std::uint32_t j = 0; j < cfg.burst_count; ++j) {
        const std::uint64_t bin = 1 + rng() % (cfg.n_bins - 1);
        const std::uint64_t src = rng() % cfg.n_nodes;
        std::vector<std::uint64_t> dests;
        dests.reserve(cfg.burst_fanout);
        while (dests.size() < cfg.burst_fanout) {
            const std::uint64_t v = rng() % cfg.n_nodes;
            if (v == src || std::find(dests.begin(), dests.end(), v) != dests.end()) continue;
            dests.push_back(v);
        }
        for (std::uint32_t e = 0; e < cfg.burst_size; ++e)
            out.edges.push_back(EdgeEvent{src, dests[e % cfg.burst_fanout], bin, true});
    }

    std::stable_sort(out.edges.begin(), out.edges.end(),
                     [](const EdgeEvent& a, const EdgeEvent& b) { return a.t < b.t; });

    out.labels.reserve(out.edges.size());
    for (const EdgeEvent& e : out.edges)
        out.labels.push_back(e.label.value_or(false) ? 1 : 0);
    return out;
}

} // namespace edgesketch
