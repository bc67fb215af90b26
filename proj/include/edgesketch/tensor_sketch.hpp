#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "edgesketch/errors.hpp"
#include "edgesketch/hashing.hpp"

namespace edgesketch {

struct SketchParams {
    std::uint32_t d = 4;    // hash rows
    std::uint32_t w = 512;  // columns per row
    std::uint32_t W = 16;   // live time bins (ring length)
    double delta = 1.0;     // bin width, timestamp units
    double gamma = 0.95;    // decay per bin transition
    std::uint64_t seed = 42;

    void validate() const {
        if (d < 1) throw ParamError("rows (d) must be >= 1, got " + std::to_string(d));
        if (w < 1) throw ParamError("cols (w) must be >= 1, got " + std::to_string(w));
        if (W < 1) throw ParamError("window (W) must be >= 1, got " + std::to_string(W));
        if (!(delta > 0.0)) throw ParamError("bin_width (delta) must be > 0, got " + std::to_string(delta));
        if (!(gamma > 0.0) || gamma > 1.0) throw ParamError("gamma must be in (0,1], got " + std::to_string(gamma));
    }
};

/// d x w x W counter tensor over sliding time bins, with conservative updates,
/// per-transition decay, window pruning, and an undecayed d x w cumulative plane.
///
/// The ring slot for absolute bin b is b mod W. Decay is lazy: a slot remembers
/// which bin its mass belongs to (stamp_), and reads scale by
/// gamma^(current_bin - stamp); expired slots are zeroed when the ring reuses
/// them. Per-edge work is O(d).
class TensorSketch {
public:
    struct UpdateResult {
        double a_hat = 0.0;        // current-bin estimate after the increment
        double s_hat = 0.0;        // cumulative estimate after the increment
        std::uint64_t t_bins = 0;  // bins elapsed so far (1-based)
    };

    explicit TensorSketch(const SketchParams& params) : p_(params) {
        p_.validate();
        current_.assign(static_cast<std::size_t>(p_.d) * p_.w * p_.W, 0.0);
        total_.assign(static_cast<std::size_t>(p_.d) * p_.w, 0.0);
        stamp_.assign(p_.W, kEmptySlot);
        cols_.assign(p_.d, 0);
    }

    // Moves the sketch to the bin of timestamp t. Returns the number of bin
    // transitions (0 when t falls in the current bin, and on the first call).
    std::uint64_t advance_time(std::uint64_t t) {
        const std::uint64_t bin = bin_of(t);
        if (!started_) {
            started_ = true;
            current_bin_ = bin;
            bins_elapsed_ = 1;
            return 0;
        }
        if (bin < current_bin_) {
            throw OrderingError("timestamp " + std::to_string(t) + " falls in bin " +
                                std::to_string(bin) + ", behind current bin " +
                                std::to_string(current_bin_));
        }
        const std::uint64_t transitions = bin - current_bin_;
        current_bin_ = bin;
        bins_elapsed_ += transitions;
        return transitions;
    }

    // Conservative update of (u,v) at timestamp t in both the current-bin
    // plane and the cumulative plane: only counters equal to the row-wise
    // minimum are incremented.
    UpdateResult update(std::uint64_t u, std::uint64_t v, std::uint64_t t) {
        advance_time(t);
        const std::size_t slot = static_cast<std::size_t>(current_bin_ % p_.W);
        claim_slot(slot);

        for (std::uint32_t i = 0; i < p_.d; ++i)
            cols_[i] = hash_edge(p_.seed, i, u, v, p_.w);

        UpdateResult r;
        r.a_hat = conservative_increment(current_.data() + slot * plane_cells());
        r.s_hat = conservative_increment(total_.data());
        r.t_bins = bins_elapsed_;
        return r;
    }

    // Row-wise minimum over the current bin's counters; 0 when the bin is empty.
    double estimate_current(std::uint64_t u, std::uint64_t v) const {
        if (!started_) return 0.0;
        const std::size_t slot = static_cast<std::size_t>(current_bin_ % p_.W);
        if (stamp_[slot] != current_bin_) return 0.0;
        return min_over_rows(current_.data() + slot * plane_cells(), u, v);
    }

    // Row-wise minimum over the cumulative plane; never decayed, never pruned.
    double estimate_total(std::uint64_t u, std::uint64_t v) const {
        return min_over_rows(total_.data(), u, v);
    }

    // Estimate for (u,v) in absolute bin `bin`, with pending decay applied.
    // 0 outside the live window (current_bin - W, current_bin].
    double estimate_in_bin(std::uint64_t u, std::uint64_t v, std::uint64_t bin) const {
        if (!started_ || bin > current_bin_) return 0.0;
        if (current_bin_ - bin >= p_.W) return 0.0;
        const std::size_t slot = static_cast<std::size_t>(bin % p_.W);
        if (stamp_[slot] != bin) return 0.0;
        const double mult = std::pow(p_.gamma, static_cast<double>(current_bin_ - bin));
        return min_over_rows(current_.data() + slot * plane_cells(), u, v) * mult;
    }

    const SketchParams& params() const { return p_; }
    bool started() const { return started_; }
    std::uint64_t current_bin() const { return current_bin_; }
    std::uint64_t bins_elapsed() const { return bins_elapsed_; }
    std::uint64_t bin_of(std::uint64_t t) const {
        return static_cast<std::uint64_t>(std::floor(static_cast<double>(t) / p_.delta));
    }

    // Total counter cells: d*w*W ring plus d*w cumulative, fixed for the sketch's life.
    std::size_t cell_count() const { return current_.size() + total_.size(); }

private:
    static constexpr std::uint64_t kEmptySlot = std::numeric_limits<std::uint64_t>::max();

    std::size_t plane_cells() const { return static_cast<std::size_t>(p_.d) * p_.w; }

    // Makes `slot` hold the current bin, zeroing expired mass on ring reuse.
    void claim_slot(std::size_t slot) {
        if (stamp_[slot] == current_bin_) return;
        double* plane = current_.data() + slot * plane_cells();
        std::fill(plane, plane + plane_cells(), 0.0);
        stamp_[slot] = current_bin_;
    }

    // CMS-CU step on one plane using the columns in cols_: increment exactly
    // the cells equal to the row-wise minimum, then return the new minimum.
    double conservative_increment(double* plane) {
        double min_val = std::numeric_limits<double>::infinity();
        for (std::uint32_t i = 0; i < p_.d; ++i)
            min_val = std::min(min_val, plane[static_cast<std::size_t>(i) * p_.w + cols_[i]]);
        double new_min = std::numeric_limits<double>::infinity();
        for (std::uint32_t i = 0; i < p_.d; ++i) {
            double& cell = plane[static_cast<std::size_t>(i) * p_.w + cols_[i]];
            if (cell == min_val) cell += 1.0;
            new_min = std::min(new_min, cell);
        }
        return new_min;
    }

    double min_over_rows(const double* plane, std::uint64_t u, std::uint64_t v) const {
        double min_val = std::numeric_limits<double>::infinity();
        for (std::uint32_t i = 0; i < p_.d; ++i) {
            const std::uint32_t col = hash_edge(p_.seed, i, u, v, p_.w);
            min_val = std::min(min_val, plane[static_cast<std::size_t>(i) * p_.w + col]);
        }
        return min_val;
    }

    SketchParams p_;
    std::vector<double> current_;       // ring of W planes, slot-major: (slot*d + row)*w + col
    std::vector<double> total_;         // cumulative plane: row*w + col
    std::vector<std::uint64_t> stamp_;  // absolute bin each ring slot holds
    std::vector<std::uint32_t> cols_;   // per-update scratch: column per row
    bool started_ = false;
    std::uint64_t current_bin_ = 0;
    std::uint64_t bins_elapsed_ = 0;
};

} // namespace edgesketch
