// edgesketch: streaming edge-anomaly detection over (u,v,t) graph streams.
//
// Subcommands:
//   run    score a stream, write per-edge rows, print a run report
//   synth  generate a deterministic labeled stream with injected bursts
//   bench  time the pipeline over prefixes of a stream (10, 100, ..., 1e6)
//   sweep  run a parameter grid, report AUC mean/std and runtime per cell
//
// Exit codes: 0 success, 1 usage/parameter error, 2 data error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "edgesketch/eval.hpp"
#include "edgesketch/stream_io.hpp"

namespace {

using namespace edgesketch;

struct CliConfig {
    std::string edges;
    std::string labels;
    std::string out;
    std::string format = "comma";
    std::uint32_t rows = 4;
    std::uint32_t cols = 512;
    std::uint32_t window = 16;
    double bin_width = 1.0;
    double gamma = 0.95;
    double delta_shift = 10.0;
    double prior = 0.05;
    double lambda = 0.8;
    double k = 3.0;
    std::string score_mode = "posterior";
    std::string flag_mode = "smoothed";
    std::uint64_t seed = 42;
    std::uint32_t repeats = 5;
};

EdgeFormat parse_format(const std::string& s) {
    if (s == "comma") return EdgeFormat::comma;
    if (s == "space") return EdgeFormat::space;
    throw ParamError("format must be 'comma' or 'space', got '" + s + "'");
}

SketchParams sketch_params(const CliConfig& c) {
    SketchParams p;
    p.d = c.rows;
    p.w = c.cols;
    p.W = c.window;
    p.delta = c.bin_width;
    p.gamma = c.gamma;
    p.seed = c.seed;
    p.validate();
    return p;
}

ScoringParams scoring_params(const CliConfig& c) {
    ScoringParams p;
    p.delta_shift = c.delta_shift;
    p.prior = c.prior;
    p.validate();
    return p;
}

DetectorParams detector_params(const CliConfig& c) {
    DetectorParams p;
    p.lambda = c.lambda;
    p.k = c.k;
    p.flag_mode = flag_mode_from_string(c.flag_mode);
    return p;
}

void add_param_flags(CLI::App* cmd, CliConfig& cfg, std::string& config_path) {
    cmd->add_option("--config", config_path, "key=value file, '#' comments; flags override it");
    cmd->add_option("--rows", cfg.rows, "Hash rows d");
    cmd->add_option("--cols", cfg.cols, "Columns per row w");
    cmd->add_option("--window", cfg.window, "Live time bins W");
    cmd->add_option("--bin_width", cfg.bin_width, "Time bin width (timestamp units)");
    cmd->add_option("--gamma", cfg.gamma, "Decay factor per bin transition, (0,1]");
    cmd->add_option("--delta_shift", cfg.delta_shift, "Anomaly mean shift");
    cmd->add_option("--prior", cfg.prior, "Anomaly prior p0, (0,1)");
    cmd->add_option("--lambda", cfg.lambda, "EWMA smoothing weight, (0,1]");
    cmd->add_option("--k", cfg.k, "Threshold sensitivity multiplier");
    cmd->add_option("--score_mode", cfg.score_mode, "Score fed to the detector: posterior|raw");
    cmd->add_option("--flag_mode", cfg.flag_mode, "Signal compared to tau: smoothed|raw");
    cmd->add_option("--seed", cfg.seed, "Hash seed");
}

// Applies one config-file entry to the parameter structs. Flags parsed later
// overwrite whatever the file set. Unknown keys are usage errors.
void apply_config_entry(CliConfig& cfg, SyntheticConfig& synth, const std::string& key,
                        const std::string& value) {
    const auto as_u32 = [&] {
        return static_cast<std::uint32_t>(std::stoul(value));
    };
    const auto as_u64 = [&] { return std::stoull(value); };
    const auto as_double = [&] { return std::stod(value); };
    try {
        if (key == "edges") cfg.edges = value;
        else if (key == "labels") cfg.labels = value;
        else if (key == "out") cfg.out = value;
        else if (key == "format") cfg.format = value;
        else if (key == "rows") cfg.rows = as_u32();
        else if (key == "cols") cfg.cols = as_u32();
        else if (key == "window") cfg.window = as_u32();
        else if (key == "bin_width") cfg.bin_width = as_double();
        else if (key == "gamma") cfg.gamma = as_double();
        else if (key == "delta_shift") cfg.delta_shift = as_double();
        else if (key == "prior") cfg.prior = as_double();
        else if (key == "lambda") cfg.lambda = as_double();
        else if (key == "k") cfg.k = as_double();
        else if (key == "score_mode") cfg.score_mode = value;
        else if (key == "flag_mode") cfg.flag_mode = value;
        else if (key == "seed") { cfg.seed = as_u64(); synth.seed = cfg.seed; }
        else if (key == "repeats") cfg.repeats = as_u32();
        else if (key == "n_nodes") synth.n_nodes = as_u64();
        else if (key == "n_edges") synth.n_edges = as_u64();
        else if (key == "n_bins") synth.n_bins = as_u64();
        else if (key == "burst_count") synth.burst_count = as_u32();
        else if (key == "burst_size") synth.burst_size = as_u32();
        else if (key == "burst_fanout") synth.burst_fanout = as_u32();
        else if (key == "background_rate") synth.background_rate = as_double();
        else throw ParamError("config: unknown key '" + key + "'");
    } catch (const ParamError&) {
        throw;
    } catch (const std::exception&) {
        throw ParamError("config: invalid value for '" + key + "': '" + value + "'");
    }
}

void load_config_file(const std::string& path, CliConfig& cfg, SyntheticConfig& synth) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open config file");
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string body = line;
        if (const std::size_t hash = body.find('#'); hash != std::string::npos)
            body.resize(hash);
        const std::string trimmed{detail::trim(body)};
        if (trimmed.empty()) continue;
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw DataError(path + ":" + std::to_string(line_no) + ": expected key=value");
        const std::string key{detail::trim(trimmed.substr(0, eq))};
        const std::string value{detail::trim(trimmed.substr(eq + 1))};
        apply_config_entry(cfg, synth, key, value);
    }
}

// The config file must be applied before CLI11 parses the flags, so the flag
// values win; scan argv for --config up front.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg(argv[i]);
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return std::string(arg.substr(9));
    }
    return {};
}

struct LoadedStream {
    std::vector<EdgeEvent> edges;
    std::vector<std::uint8_t> labels;
    double load_seconds = 0.0;
};

LoadedStream load_stream(const CliConfig& cfg, bool want_labels) {
    LoadedStream s;
    const auto t0 = std::chrono::steady_clock::now();
    s.edges = read_edges(cfg.edges, parse_format(cfg.format));
    if (want_labels && !cfg.labels.empty()) {
        s.labels = read_labels(cfg.labels);
        if (s.labels.size() != s.edges.size())
            throw DataError("label count " + std::to_string(s.labels.size()) +
                            " does not match edge count " + std::to_string(s.edges.size()));
    }
    s.load_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

int cmd_run(const CliConfig& cfg) {
    const LoadedStream stream = load_stream(cfg, true);
    const PipelineResult res =
        run_pipeline(stream.edges, sketch_params(cfg), scoring_params(cfg), detector_params(cfg),
                     score_mode_from_string(cfg.score_mode), stream.labels);

    if (!cfg.out.empty()) {
        std::ofstream out(cfg.out);
        if (!out) throw DataError(cfg.out + ": cannot open file for writing");
        write_scores_csv(out, res.scored);
        if (!out) throw DataError(cfg.out + ": write failed");
    } else {
        write_scores_csv(std::cout, res.scored);
    }

    std::cout << format_report(res.report) << "load_seconds=" << stream.load_seconds << "\n";
    if (!stream.labels.empty() && !res.report.auc)
        std::cout << "note=AUC undefined (labels contain a single class)\n";
    return 0;
}

int cmd_synth(const CliConfig& cfg, const SyntheticConfig& synth, const std::string& labels_out) {
    const SyntheticStream stream = generate_synthetic(synth);
    const EdgeFormat fmt = parse_format(cfg.format);
    const std::string label_path = labels_out.empty() ? cfg.out + ".labels" : labels_out;
    write_edges(cfg.out, stream.edges, fmt);
    write_labels(label_path, stream.labels);

    // Side-car metadata; line counts double as a pairing check for consumers.
    std::uint64_t positives = 0;
    for (const std::uint8_t l : stream.labels) positives += l;
    std::ofstream meta(cfg.out + ".meta");
    meta << "edges=" << cfg.out << "\nlabels=" << label_path << "\nn_edges=" << stream.edges.size()
         << "\nn_labels=" << stream.labels.size() << "\nn_anomalies=" << positives
         << "\nn_nodes=" << synth.n_nodes << "\nn_bins=" << synth.n_bins
         << "\nburst_count=" << synth.burst_count << "\nburst_size=" << synth.burst_size
         << "\nburst_fanout=" << synth.burst_fanout << "\nbackground_rate=" << synth.background_rate
         << "\nseed=" << synth.seed << "\n";
    if (stream.edges.size() != stream.labels.size())
        throw DataError("generator emitted mismatched edge/label counts");

    std::cout << "wrote " << stream.edges.size() << " edges to " << cfg.out << ", labels to "
              << label_path << " (" << positives << " anomalous)\n";
    return 0;
}

int cmd_bench(const CliConfig& cfg) {
    const LoadedStream stream = load_stream(cfg, false);
    if (stream.edges.empty()) throw DataError(cfg.edges + ": empty stream");

    std::printf("%12s %14s %18s %14s\n", "n_edges", "exec_seconds", "avg_time_per_edge", "edges_per_s");
    std::vector<std::uint64_t> sizes;
    for (std::uint64_t n = 10; n <= 1000000; n *= 10) sizes.push_back(n);
    for (const std::uint64_t want : sizes) {
        const std::uint64_t n = std::min<std::uint64_t>(want, stream.edges.size());
        const std::span<const EdgeEvent> prefix(stream.edges.data(), n);
        const PipelineResult res =
            run_pipeline(prefix, sketch_params(cfg), scoring_params(cfg), detector_params(cfg),
                         score_mode_from_string(cfg.score_mode));
        std::printf("%12llu %14.6f %18.3e %14.0f\n", static_cast<unsigned long long>(n),
                    res.report.exec_seconds, res.report.avg_time_per_edge,
                    res.report.exec_seconds > 0.0 ? n / res.report.exec_seconds : 0.0);
        if (n < want) break; // stream exhausted
    }
    return 0;
}

int cmd_sweep(const CliConfig& cfg, const std::string& grid_path) {
    SweepCell base;
    base.sketch = sketch_params(cfg);
    base.scoring = scoring_params(cfg);
    base.detector = detector_params(cfg);
    base.score_mode = score_mode_from_string(cfg.score_mode);

    const std::vector<SweepCell> grid = parse_grid_file(grid_path, base);
    const LoadedStream stream = load_stream(cfg, true);
    const std::vector<SweepRow> rows = sweep(grid, stream.edges, stream.labels, cfg.repeats);

    if (!cfg.out.empty()) {
        std::ofstream out(cfg.out);
        if (!out) throw DataError(cfg.out + ": cannot open file for writing");
        write_sweep_csv(out, rows);
    } else {
        write_sweep_csv(std::cout, rows);
    }
    std::cerr << "swept " << grid.size() << " configurations x " << cfg.repeats << " repeats over "
              << stream.edges.size() << " edges\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"edgesketch: sketch-based anomaly detection for streaming graph edges"};
    app.require_subcommand(1);

    CliConfig cfg;
    SyntheticConfig synth;
    std::string grid_path;
    std::string labels_out;
    std::string config_path;

    CLI::App* run = app.add_subcommand("run", "Score an edge stream and write per-edge rows");
    run->add_option("--edges", cfg.edges, "Edge file, one u<sep>v<sep>t per line");
    run->add_option("--labels", cfg.labels, "Label file, one 0/1 per line");
    run->add_option("--out", cfg.out, "Score CSV path (default: stdout)");
    run->add_option("--format", cfg.format, "Field separator: comma|space");
    add_param_flags(run, cfg, config_path);

    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic stream");
    synth_cmd->add_option("--config", config_path, "key=value file, '#' comments; flags override it");
    synth_cmd->add_option("--out", cfg.out, "Edge file to write");
    synth_cmd->add_option("--labels", labels_out, "Label file to write (default: <out>.labels)");
    synth_cmd->add_option("--format", cfg.format, "Field separator: comma|space");
    synth_cmd->add_option("--n_nodes", synth.n_nodes, "Node pool size");
    synth_cmd->add_option("--n_edges", synth.n_edges, "Total events");
    synth_cmd->add_option("--n_bins", synth.n_bins, "Number of time bins");
    synth_cmd->add_option("--burst_count", synth.burst_count, "Injected bursts");
    synth_cmd->add_option("--burst_size", synth.burst_size, "Events per burst");
    synth_cmd->add_option("--burst_fanout", synth.burst_fanout, "Distinct destinations per burst");
    synth_cmd->add_option("--background_rate", synth.background_rate,
                          "Background events per active pair per bin");
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");

    CLI::App* bench = app.add_subcommand("bench", "Time the pipeline over stream prefixes");
    bench->add_option("--edges", cfg.edges, "Edge file");
    bench->add_option("--format", cfg.format, "Field separator: comma|space");
    add_param_flags(bench, cfg, config_path);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a parameter grid");
    sweep_cmd->add_option("--grid", grid_path, "Grid file: key=v1[,v2,...] per line")->required();
    sweep_cmd->add_option("--edges", cfg.edges, "Edge file");
    sweep_cmd->add_option("--labels", cfg.labels, "Label file, one 0/1 per line");
    sweep_cmd->add_option("--out", cfg.out, "Report CSV path (default: stdout)");
    sweep_cmd->add_option("--format", cfg.format, "Field separator: comma|space");
    sweep_cmd->add_option("--repeats", cfg.repeats, "Runs per cell with distinct hash seeds");
    add_param_flags(sweep_cmd, cfg, config_path);

    try {
        const std::string early_config = find_config_arg(argc, argv);
        if (!early_config.empty()) load_config_file(early_config, cfg, synth);
        app.parse(argc, argv);
        if (cfg.edges.empty() && (run->parsed() || bench->parsed() || sweep_cmd->parsed()))
            throw ParamError("edges: required (give --edges or set it in the config file)");
        if (cfg.out.empty() && synth_cmd->parsed())
            throw ParamError("out: required (give --out or set it in the config file)");
        if (run->parsed()) return cmd_run(cfg);
        if (synth_cmd->parsed()) return cmd_synth(cfg, synth, labels_out);
        if (bench->parsed()) return cmd_bench(cfg);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, grid_path);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e); // prints help or the offending option
        return code == 0 ? 0 : 1;
    } catch (const ParamError& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const OrderingError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
