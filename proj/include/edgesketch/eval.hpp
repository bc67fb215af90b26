#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "edgesketch/detector.hpp"
#include "edgesketch/edge.hpp"
#include "edgesketch/errors.hpp"
#include "edgesketch/scoring.hpp"
#include "edgesketch/stream_io.hpp"
#include "edgesketch/tensor_sketch.hpp"

namespace edgesketch {

enum class ScoreMode { posterior, raw };

inline std::string to_string(ScoreMode m) { return m == ScoreMode::posterior ? "posterior" : "raw"; }
inline std::string to_string(FlagMode m) { return m == FlagMode::smoothed ? "smoothed" : "raw"; }

inline ScoreMode score_mode_from_string(const std::string& s) {
    if (s == "posterior") return ScoreMode::posterior;
    if (s == "raw") return ScoreMode::raw;
    throw ParamError("score_mode must be 'posterior' or 'raw', got '" + s + "'");
}

inline FlagMode flag_mode_from_string(const std::string& s) {
    if (s == "smoothed") return FlagMode::smoothed;
    if (s == "raw") return FlagMode::raw;
    throw ParamError("flag_mode must be 'smoothed' or 'raw', got '" + s + "'");
}

struct RunReport {
    std::uint64_t n_edges = 0;
    double exec_seconds = 0.0;        // processing loop only, I/O excluded
    double avg_time_per_edge = 0.0;   // exec_seconds / n_edges (0 for empty streams)
    std::optional<double> auc;        // present when labels with both classes were supplied
    SketchParams sketch;
    ScoringParams scoring;
    DetectorParams detector;
    ScoreMode score_mode = ScoreMode::posterior;
};

struct PipelineResult {
    std::vector<ScoredEdge> scored;
    RunReport report;
};

// AvgTime = T_exec / N.
inline double avg_time(double exec_seconds, std::uint64_t n_edges) {
    if (n_edges == 0) throw ParamError("avg_time requires n_edges >= 1");
    return exec_seconds / static_cast<double>(n_edges);
}

// Rank-statistic ROC-AUC with tied scores averaged; identical to the
// trapezoidal area under the full TPR/FPR threshold sweep.
inline double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw DataError("scores/labels length mismatch: " + std::to_string(scores.size()) + " vs " +
                        std::to_string(labels.size()));
    std::uint64_t n_pos = 0;
    for (const std::uint8_t l : labels) n_pos += (l != 0);
    const std::uint64_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw DataError("AUC undefined: labels contain a single class");

    std::vector<std::uint32_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(),
              [&](std::uint32_t a, std::uint32_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < idx.size()) {
        std::size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j)); // 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[idx[k]] != 0) pos_rank_sum += avg_rank;
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

// Runs sketch -> scoring -> detector over the stream in order. Timing covers
// the processing loop only; label pairing and AUC happen outside the clock.
inline PipelineResult run_pipeline(std::span<const EdgeEvent> edges, const SketchParams& sketch_params,
                                   const ScoringParams& scoring_params,
                                   const DetectorParams& detector_params, ScoreMode score_mode,
                                   std::span<const std::uint8_t> labels = {}) {
    scoring_params.validate();
    if (!labels.empty() && labels.size() != edges.size())
        throw DataError("labels/edges length mismatch: " + std::to_string(labels.size()) + " vs " +
                        std::to_string(edges.size()));

    TensorSketch sketch(sketch_params);
    EwmaDetector detector(detector_params);

    PipelineResult out;
    out.scored.resize(edges.size());

    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const EdgeEvent& e = edges[i];
        const auto est = sketch.update(e.u, e.v, e.t);
        const double raw = raw_score(est.a_hat, est.s_hat, est.t_bins);
        const double post = posterior_anomaly(est.a_hat, est.s_hat, est.t_bins, scoring_params);
        const double x = score_mode == ScoreMode::posterior ? post : raw;
        const EwmaDetector::Decision d = detector.classify(x);
        out.scored[i] = ScoredEdge{e.u, e.v, e.t, est.a_hat, est.s_hat, raw, post, d.z, d.tau, d.flag};
    }
    const auto t1 = std::chrono::steady_clock::now();

    RunReport& r = out.report;
    r.n_edges = edges.size();
    r.exec_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.avg_time_per_edge = edges.empty() ? 0.0 : avg_time(r.exec_seconds, r.n_edges);
    r.sketch = sketch_params;
    r.scoring = scoring_params;
    r.detector = detector_params;
    r.score_mode = score_mode;

    if (!labels.empty()) {
        const std::uint64_t n_pos =
            static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
        if (n_pos > 0 && n_pos < labels.size()) {
            std::vector<double> consumed(out.scored.size());
            for (std::size_t i = 0; i < out.scored.size(); ++i)
                consumed[i] = score_mode == ScoreMode::posterior ? out.scored[i].posterior
                                                                 : out.scored[i].raw;
            r.auc = roc_auc(consumed, labels);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parameter sweeps

struct SweepCell {
    SketchParams sketch;
    ScoringParams scoring;
    DetectorParams detector;
    ScoreMode score_mode = ScoreMode::posterior;
};

struct SweepRow {
    SweepCell cell;
    std::uint32_t repeats = 0;
    std::optional<double> auc_mean;
    std::optional<double> auc_std;
    double runtime_mean_s = 0.0;
    double avg_time_per_edge_s = 0.0;
    std::string error; // nonempty when the cell failed; other cells still run
};

// Runs every cell `repeats` times with distinct hash seeds (seed, seed+1, ...).
// Cells are independent and distributed over `workers` threads.
inline std::vector<SweepRow> sweep(const std::vector<SweepCell>& grid,
                                   std::span<const EdgeEvent> edges,
                                   std::span<const std::uint8_t> labels, std::uint32_t repeats,
                                   unsigned workers = 0) {
    if (grid.empty()) throw ParamError("sweep grid must be non-empty");
    if (repeats < 1) throw ParamError("repeats must be >= 1");
    if (workers == 0)
        workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                                  static_cast<unsigned>(grid.size())));

    std::vector<SweepRow> rows(grid.size());
    std::atomic<std::size_t> next{0};

    const auto run_cell = [&](std::size_t ci) {
        SweepRow& row = rows[ci];
        row.cell = grid[ci];
        row.repeats = repeats;
        try {
            std::vector<double> aucs;
            double exec_sum = 0.0;
            for (std::uint32_t rep = 0; rep < repeats; ++rep) {
                SweepCell cell = grid[ci];
                cell.sketch.seed += rep;
                const PipelineResult res = run_pipeline(edges, cell.sketch, cell.scoring,
                                                        cell.detector, cell.score_mode, labels);
                exec_sum += res.report.exec_seconds;
                if (res.report.auc) aucs.push_back(*res.report.auc);
            }
            row.runtime_mean_s = exec_sum / repeats;
            row.avg_time_per_edge_s = edges.empty() ? 0.0 : row.runtime_mean_s / edges.size();
            if (!aucs.empty()) {
                const double mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) / aucs.size();
                double var = 0.0;
                for (const double a : aucs) var += (a - mean) * (a - mean);
                row.auc_mean = mean;
                row.auc_std = std::sqrt(var / aucs.size());
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    };

    if (workers <= 1) {
        for (std::size_t ci = 0; ci < grid.size(); ++ci) run_cell(ci);
        return rows;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned wi = 0; wi < workers; ++wi)
        pool.emplace_back([&] {
            for (std::size_t ci = next.fetch_add(1); ci < grid.size(); ci = next.fetch_add(1))
                run_cell(ci);
        });
    for (std::thread& th : pool) th.join();
    return rows;
}

// ---------------------------------------------------------------------------
// Grid files: one `key=v1[,v2,...]` per line, '#' comments, cartesian product.

namespace detail {

inline void apply_grid_value(SweepCell& cell, const std::string& key, const std::string& value) {
    const auto as_u32 = [&](const char* name) {
        std::uint64_t v = 0;
        if (!parse_u64(trim(value), v) || v > 0xffffffffull)
            throw ParamError(std::string(name) + ": invalid value '" + value + "'");
        return static_cast<std::uint32_t>(v);
    };
    const auto as_u64 = [&](const char* name) {
        std::uint64_t v = 0;
        if (!parse_u64(trim(value), v))
            throw ParamError(std::string(name) + ": invalid value '" + value + "'");
        return v;
    };
    const auto as_double = [&](const char* name) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw ParamError(std::string(name) + ": invalid value '" + value + "'");
        }
    };

    if (key == "rows") cell.sketch.d = as_u32("rows");
    else if (key == "cols") cell.sketch.w = as_u32("cols");
    else if (key == "window") cell.sketch.W = as_u32("window");
    else if (key == "bin_width") cell.sketch.delta = as_double("bin_width");
    else if (key == "gamma") cell.sketch.gamma = as_double("gamma");
    else if (key == "seed") cell.sketch.seed = as_u64("seed");
    else if (key == "delta_shift") cell.scoring.delta_shift = as_double("delta_shift");
    else if (key == "prior") cell.scoring.prior = as_double("prior");
    else if (key == "lambda") cell.detector.lambda = as_double("lambda");
    else if (key == "k") cell.detector.k = as_double("k");
    else if (key == "score_mode") cell.score_mode = score_mode_from_string(std::string(trim(value)));
    else if (key == "flag_mode") cell.detector.flag_mode = flag_mode_from_string(std::string(trim(value)));
    else throw ParamError("unknown grid key '" + key + "'");
}

} // namespace detail

inline std::vector<SweepCell> parse_grid(std::istream& in, const SweepCell& base) {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = detail::trim(line);
        if (const std::size_t hash = body.find('#'); hash != std::string_view::npos)
            body = detail::trim(body.substr(0, hash));
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw DataError("grid line " + std::to_string(line_no) + ": expected key=value");
        const std::string key(detail::trim(body.substr(0, eq)));
        for (const auto& [k, vs] : axes)
            if (k == key) throw DataError("grid line " + std::to_string(line_no) +
                                          ": duplicate key '" + key + "'");
        std::vector<std::string> values;
        std::string_view rest = body.substr(eq + 1);
        while (true) {
            const std::size_t comma = rest.find(',');
            values.emplace_back(detail::trim(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        if (values.empty() || (values.size() == 1 && values[0].empty()))
            throw DataError("grid line " + std::to_string(line_no) + ": no values for '" + key + "'");
        axes.emplace_back(key, std::move(values));
    }
    if (axes.empty()) throw DataError("grid file defines no parameters");

    std::vector<SweepCell> cells;
    std::vector<std::size_t> pick(axes.size(), 0);
    while (true) {
        SweepCell cell = base;
        for (std::size_t ai = 0; ai < axes.size(); ++ai)
            detail::apply_grid_value(cell, axes[ai].first, axes[ai].second[pick[ai]]);
        cells.push_back(cell);
        std::size_t ai = axes.size();
        while (ai > 0) {
            --ai;
            if (++pick[ai] < axes[ai].second.size()) break;
            pick[ai] = 0;
            if (ai == 0) return cells;
        }
    }
}

inline std::vector<SweepCell> parse_grid_file(const std::string& path, const SweepCell& base) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");
    return parse_grid(in, base);
}

// ---------------------------------------------------------------------------
// Output formats

// Score rows: fixed header, floats with 9 significant digits.
inline void write_scores_csv(std::ostream& out, std::span<const ScoredEdge> rows) {
    out << "u,v,t,a_hat,s_hat,raw,posterior,z,tau,flag\n";
    char buf[256];
    for (const ScoredEdge& r : rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%llu,%llu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%d\n",
                      static_cast<unsigned long long>(r.u), static_cast<unsigned long long>(r.v),
                      static_cast<unsigned long long>(r.t), r.a_hat, r.s_hat, r.raw, r.posterior,
                      r.z, r.tau, r.flag ? 1 : 0);
        out << buf;
    }
}

namespace detail {

inline std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace detail

// Full provenance of a run as key=value lines.
inline std::string format_report(const RunReport& r) {
    std::ostringstream os;
    os << "rows=" << r.sketch.d << "\ncols=" << r.sketch.w << "\nwindow=" << r.sketch.W
       << "\nbin_width=" << detail::fmt_g(r.sketch.delta) << "\ngamma=" << detail::fmt_g(r.sketch.gamma)
       << "\nseed=" << r.sketch.seed << "\ndelta_shift=" << detail::fmt_g(r.scoring.delta_shift)
       << "\nprior=" << detail::fmt_g(r.scoring.prior)
       << "\nvariance_floor=" << detail::fmt_g(r.scoring.variance_floor)
       << "\nanomaly_variance_factor=" << detail::fmt_g(r.scoring.anomaly_variance_factor)
       << "\nlambda=" << detail::fmt_g(r.detector.lambda) << "\nk=" << detail::fmt_g(r.detector.k)
       << "\nflag_mode=" << to_string(r.detector.flag_mode)
       << "\nscore_mode=" << to_string(r.score_mode) << "\nn_edges=" << r.n_edges
       << "\nexec_seconds=" << detail::fmt_g(r.exec_seconds)
       << "\navg_time_per_edge=" << detail::fmt_g(r.avg_time_per_edge) << "\nauc="
       << (r.auc ? detail::fmt_g(*r.auc) : "n/a") << "\n";
    return os.str();
}

// One row per sweep cell.
inline void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << "rows,cols,window,bin_width,gamma,delta_shift,prior,lambda,k,score_mode,flag_mode,seed,"
           "repeats,auc_mean,auc_std,runtime_mean_s,avg_time_per_edge_s,error\n";
    for (const SweepRow& r : rows) {
        const SweepCell& c = r.cell;
        out << c.sketch.d << ',' << c.sketch.w << ',' << c.sketch.W << ','
            << detail::fmt_g(c.sketch.delta) << ',' << detail::fmt_g(c.sketch.gamma) << ','
            << detail::fmt_g(c.scoring.delta_shift) << ',' << detail::fmt_g(c.scoring.prior) << ','
            << detail::fmt_g(c.detector.lambda) << ',' << detail::fmt_g(c.detector.k) << ','
            << to_string(c.score_mode) << ',' << to_string(c.detector.flag_mode) << ','
            << c.sketch.seed << ',' << r.repeats << ','
            << (r.auc_mean ? detail::fmt_g(*r.auc_mean) : "n/a") << ','
            << (r.auc_std ? detail::fmt_g(*r.auc_std) : "n/a") << ','
            << detail::fmt_g(r.runtime_mean_s) << ',' << detail::fmt_g(r.avg_time_per_edge_s) << ','
            << r.error << '\n';
    }
}

} // namespace edgesketch
