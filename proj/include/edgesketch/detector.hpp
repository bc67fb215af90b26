#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "edgesketch/errors.hpp"

namespace edgesketch {

// Chebyshev bound on the false-positive rate of the mu + k*sigma rule.
inline double fpr_bound(double k) {
    if (!(k > 0.0)) throw ParamError("k must be > 0, got " + std::to_string(k));
    return 1.0 / (k * k);
}

enum class FlagMode { smoothed, raw };

struct DetectorParams {
    double lambda = 0.8;                      // EWMA smoothing weight
    double k = 3.0;                           // threshold sensitivity multiplier
    FlagMode flag_mode = FlagMode::smoothed;  // which signal is compared to tau
};

/// EWMA-smoothed score signal with a dynamic threshold tau = mu + k*sigma over
/// the raw score history. Statistics are maintained incrementally (Welford)
/// and match the batch mean / population standard deviation.
class EwmaDetector {
public:
    struct Decision {
        double z = 0.0;
        double tau = 0.0;
        bool flag = false;
    };

    EwmaDetector(double lambda, double k, FlagMode flag_mode = FlagMode::smoothed)
        : lambda_(lambda), k_(k), flag_mode_(flag_mode) {
        if (!(lambda > 0.0) || lambda > 1.0)
            throw ParamError("lambda must be in (0,1], got " + std::to_string(lambda));
        if (!(k > 0.0)) throw ParamError("k must be > 0, got " + std::to_string(k));
    }

    explicit EwmaDetector(const DetectorParams& p) : EwmaDetector(p.lambda, p.k, p.flag_mode) {}

    // z_t = lambda*x + (1-lambda)*z_{t-1}; the first score initializes z.
    // Evaluated as z + lambda*(x - z): a constant input is a bitwise fixed
    // point, so equality with the threshold stays exact on flat segments.
    double ewma_update(double x) {
        if (!have_z_ || lambda_ == 1.0) z_ = x;
        else z_ += lambda_ * (x - z_);
        have_z_ = true;
        return z_;
    }

    // Folds x into the running mean and population standard deviation.
    std::pair<double, double> stats_update(double x) {
        ++count_;
        const double d1 = x - mean_;
        mean_ += d1 / static_cast<double>(count_);
        m2_ += d1 * (x - mean_);
        return {mean_, sigma()};
    }

    double threshold() const {
        if (count_ == 0) throw StateError("threshold queried before any score");
        return mean_ + k_ * sigma();
    }

    // One detection step: smooth, update statistics over the raw score, then
    // flag on strict exceedance of the dynamic threshold.
    Decision classify(double x) {
        Decision d;
        d.z = ewma_update(x);
        stats_update(x);
        d.tau = threshold();
        d.flag = (flag_mode_ == FlagMode::smoothed ? d.z : x) > d.tau;
        return d;
    }

    double mean() const { return mean_; }
    double sigma() const {
        return count_ == 0 ? 0.0 : std::sqrt(std::max(m2_, 0.0) / static_cast<double>(count_));
    }
    double z() const { return z_; }
    std::uint64_t count() const { return count_; }
    double lambda() const { return lambda_; }
    double k() const { return k_; }
    FlagMode flag_mode() const { return flag_mode_; }

private:
    double lambda_;
    double k_;
    FlagMode flag_mode_;
    bool have_z_ = false;
    double z_ = 0.0;
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

} // namespace edgesketch
