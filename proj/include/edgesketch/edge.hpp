#pragma once

#include <cstdint>
#include <optional>

namespace edgesketch {

// One timestamped directed interaction from a graph stream.
struct EdgeEvent {
    std::uint64_t u = 0;
    std::uint64_t v = 0;
    std::uint64_t t = 0;
    std::optional<bool> label; // ground truth when known (true = anomalous)

    bool operator==(const EdgeEvent&) const = default;
};

// Per-edge output record of the full pipeline.
struct ScoredEdge {
    std::uint64_t u = 0;
    std::uint64_t v = 0;
    std::uint64_t t = 0;
    double a_hat = 0.0;     // current-bin frequency estimate
    double s_hat = 0.0;     // cumulative frequency estimate
    double raw = 0.0;       // squared-deviation score
    double posterior = 0.0; // Bayesian anomaly probability
    double z = 0.0;         // EWMA-smoothed score
    double tau = 0.0;       // dynamic threshold at emission
    bool flag = false;
};

} // namespace edgesketch
