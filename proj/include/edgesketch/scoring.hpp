#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "edgesketch/errors.hpp"

namespace edgesketch {

struct ScoringParams {
    double delta_shift = 10.0;            // mean shift under the anomaly hypothesis
    double prior = 0.05;                  // P(anomaly)
    double variance_floor = 1e-9;         // lower bound on the variance estimate
    double anomaly_variance_factor = 4.0; // variance inflation under anomaly

    void validate() const {
        if (!(prior > 0.0) || !(prior < 1.0))
            throw ParamError("prior must be in (0,1), got " + std::to_string(prior));
        if (!(delta_shift > 0.0))
            throw ParamError("delta_shift must be > 0, got " + std::to_string(delta_shift));
        if (!(variance_floor > 0.0))
            throw ParamError("variance_floor must be > 0, got " + std::to_string(variance_floor));
        if (!(anomaly_variance_factor > 0.0))
            throw ParamError("anomaly_variance_factor must be > 0, got " +
                             std::to_string(anomaly_variance_factor));
    }
};

// Squared deviation of the current-bin count from the historical per-bin mean,
// normalized by the accumulated history: (a - s/t)^2 * t / (s * (t-1)).
// A first bin or an empty history has nothing to deviate from, so 0.
inline double raw_score(double a, double s, std::uint64_t t_bins) {
    if (a < 0.0 || s < 0.0)
        throw ParamError("raw_score inputs must be non-negative, got a=" + std::to_string(a) +
                         " s=" + std::to_string(s));
    if (t_bins < 1) throw ParamError("raw_score requires t >= 1");
    if (t_bins == 1 || s == 0.0) return 0.0;
    const double t = static_cast<double>(t_bins);
    const double dev = a - s / t;
    return dev * dev * t / (s * (t - 1.0));
}

inline double log_gaussian(double a, double mu, double sigma2) {
    const double dev = a - mu;
    return -0.5 * std::log(2.0 * std::numbers::pi * sigma2) - dev * dev / (2.0 * sigma2);
}

/// Normal density of a under N(mu, sigma2).
inline double gaussian_likelihood(double a, double mu, double sigma2) {
    if (!(sigma2 > 0.0))
        throw ParamError("sigma2 must be > 0, got " + std::to_string(sigma2));
    return std::exp(log_gaussian(a, mu, sigma2));
}

// Posterior probability that observation a is anomalous given history (s, t):
//   mu = s/t, sigma2 = max(s/t^2, floor)
//   normal:  N(mu, sigma2);  anomaly: N(mu + delta_shift, factor * sigma2)
//   posterior = p0 * P_anomaly / (p0 * P_anomaly + (1-p0) * P_normal)
// Likelihoods are combined in log space so extreme observations stay well
// defined; when both underflow entirely the prior is returned.
inline double posterior_anomaly(double a, double s, std::uint64_t t_bins,
                                const ScoringParams& params) {
    params.validate();
    if (t_bins < 1) throw ParamError("posterior_anomaly requires t >= 1");
    const double t = static_cast<double>(t_bins);
    const double mu = s / t;
    const double sigma2 = std::max(s / (t * t), params.variance_floor);
    const double mu_a = mu + params.delta_shift;
    const double sigma2_a = params.anomaly_variance_factor * sigma2;

    const double ln_normal = log_gaussian(a, mu, sigma2);
    const double ln_anomaly = log_gaussian(a, mu_a, sigma2_a);
    if (std::isinf(ln_normal) && ln_normal < 0.0 && std::isinf(ln_anomaly) && ln_anomaly < 0.0)
        return params.prior;

    // 1 / (1 + (1-p0)/p0 * P_normal/P_anomaly), odds kept in log space so a
    // lopsided ratio degrades to exactly 0 or 1 instead of NaN.
    const double log_odds =
        ln_normal - ln_anomaly + std::log1p(-params.prior) - std::log(params.prior);
    return 1.0 / (1.0 + std::exp(log_odds));
}

} // namespace edgesketch
