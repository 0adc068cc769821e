// core.hpp
//
// Shared domain types for counting objects that satisfy an expensive
// predicate: the object universe, point estimates with confidence
// intervals, and the interval / variance arithmetic every estimator uses.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace approx_count {

/// Base error for everything thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input or configuration (bad parameters, malformed files).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An estimator could not produce a meaningful answer for this input
/// (e.g. an adjusted count whose classifier is no better than chance).
class DegenerateError : public Error {
public:
    using Error::Error;
};

struct DataPoint {
    std::uint64_t id = 0;
    std::vector<double> features;

    double x() const { return features[0]; }
    double y() const { return features[1]; }
};

/// Immutable ordered universe of objects. Ids are unique and every feature
/// vector has the declared dimension.
class Dataset {
public:
    Dataset(std::vector<DataPoint> points, std::size_t dimension)
        : points_(std::move(points)), dimension_(dimension) {
        if (dimension_ == 0) throw ConfigError("dataset dimension must be positive");
        if (points_.empty()) throw ConfigError("dataset must contain at least one point");
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(points_.size());
        for (const auto& p : points_) {
            if (p.features.size() != dimension_) {
                throw ConfigError("point " + std::to_string(p.id) + " has " +
                                  std::to_string(p.features.size()) + " features, expected " +
                                  std::to_string(dimension_));
            }
            if (!seen.insert(p.id).second) {
                throw ConfigError("duplicate id " + std::to_string(p.id));
            }
        }
    }

    std::size_t size() const { return points_.size(); }
    std::size_t dimension() const { return dimension_; }
    const DataPoint& operator[](std::size_t i) const { return points_[i]; }
    std::span<const DataPoint> points() const { return points_; }

private:
    std::vector<DataPoint> points_;
    std::size_t dimension_;
};

/// Wall-clock spent outside predicate evaluation, per phase.
struct Overhead {
    double learn_ms = 0.0;
    double design_ms = 0.0;
    double apply_ms = 0.0;
    double total() const { return learn_ms + design_ms + apply_ms; }
};

/// Point estimate of the positive count with optional uncertainty.
///
/// `variance` is the estimated variance of `count` (not of the proportion).
/// Point-only methods (classify-and-count, adjusted count) leave both
/// `variance` and `ci` empty.
struct Estimate {
    double count = 0.0;
    std::optional<double> proportion;
    std::optional<double> variance;
    std::optional<std::pair<double, double>> ci;
    std::uint64_t oracle_calls = 0;
    std::string method;
    std::uint64_t seed = 0;
    Overhead overhead;
    std::vector<std::string> warnings;
};

/// Sample budget shared by the learning, design, and estimation phases.
struct Budget {
    std::size_t total_samples = 0;
    double learn_fraction = 0.25;
    double design_fraction = 0.25;

    void validate() const {
        if (total_samples == 0) throw ConfigError("budget must be positive");
        if (learn_fraction < 0.0 || learn_fraction >= 1.0)
            throw ConfigError("learn fraction must be in [0,1)");
        if (design_fraction < 0.0 || design_fraction >= 1.0)
            throw ConfigError("design fraction must be in [0,1)");
    }
    std::size_t learn_samples() const {
        return static_cast<std::size_t>(std::floor(learn_fraction * double(total_samples)));
    }
};

// ---------------------------------------------------------------------------
// Normal quantile

namespace detail {

// Acklam's rational approximation (relative error < 1.2e-9) followed by one
// Halley step against erfc.
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw ConfigError("normal quantile requires p in (0,1)");
    }
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

}  // namespace detail

/// Standard normal quantile Φ⁻¹(p).
inline double normal_quantile(double p) { return detail::inverse_normal_cdf(p); }

/// Two-sided critical value z_{α/2}.
inline double z_critical(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
    return normal_quantile(1.0 - alpha / 2.0);
}

// ---------------------------------------------------------------------------
// Intervals on a proportion

namespace detail {

inline void check_interval_args(double p_hat, std::size_t n, std::size_t N) {
    if (n == 0 || N == 0) throw ConfigError("interval requires n, N > 0");
    if (n > N) throw ConfigError("sample size exceeds population size");
    if (p_hat < 0.0 || p_hat > 1.0) throw ConfigError("proportion must be in [0,1]");
}

// (N-n)/(N-1), defined as 0 for a census and for N = 1.
inline double fpc(std::size_t n, std::size_t N) {
    if (N <= 1 || n >= N) return 0.0;
    return double(N - n) / double(N - 1);
}

}  // namespace detail

/// Wald interval p̂ ± z·sqrt(p̂(1−p̂)/n · (N−n)/(N−1)), clamped to [0,1].
inline std::pair<double, double> wald_interval(double p_hat, std::size_t n, std::size_t N,
                                               double alpha) {
    detail::check_interval_args(p_hat, n, N);
    const double z = z_critical(alpha);
    const double half =
        z * std::sqrt(p_hat * (1.0 - p_hat) / double(n) * detail::fpc(n, N));
    return {std::clamp(p_hat - half, 0.0, 1.0), std::clamp(p_hat + half, 0.0, 1.0)};
}

/// Wilson score interval with the finite-population correction folded into an
/// effective sample size n_eff = n / fpc. A census gives a width-0 interval.
inline std::pair<double, double> wilson_interval(double p_hat, std::size_t n, std::size_t N,
                                                 double alpha) {
    detail::check_interval_args(p_hat, n, N);
    const double f = detail::fpc(n, N);
    if (f == 0.0) return {p_hat, p_hat};
    const double z = z_critical(alpha);
    const double n_eff = double(n) / f;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n_eff;
    const double center = (p_hat + z2 / (2.0 * n_eff)) / denom;
    const double half =
        z / denom * std::sqrt(p_hat * (1.0 - p_hat) / n_eff + z2 / (4.0 * n_eff * n_eff));
    return {std::clamp(center - half, 0.0, 1.0), std::clamp(center + half, 0.0, 1.0)};
}

/// Variance of the stratified proportion estimator:
///   Σ W_h² S_h² / n_h − (1/N) Σ W_h S_h².
inline double stratified_variance(std::span<const double> weights,
                                  std::span<const double> stddevs,
                                  std::span<const std::size_t> alloc, std::size_t N) {
    if (weights.size() != stddevs.size() || weights.size() != alloc.size())
        throw ConfigError("stratified_variance: length mismatch");
    if (N == 0) throw ConfigError("stratified_variance: N must be positive");
    double wsum = 0.0;
    for (double w : weights) wsum += w;
    if (std::abs(wsum - 1.0) > 1e-9) throw ConfigError("stratum weights must sum to 1");
    double first = 0.0, second = 0.0;
    for (std::size_t h = 0; h < weights.size(); ++h) {
        if (alloc[h] == 0) throw ConfigError("empty allocation");
        const double s2 = stddevs[h] * stddevs[h];
        first += weights[h] * weights[h] * s2 / double(alloc[h]);
        second += weights[h] * s2;
    }
    return first - second / double(N);
}

/// Unbiased sample variance of a 0/1 variable with `positives` ones out of `m`.
/// Zero when m < 2.
inline double bernoulli_sample_variance(std::size_t positives, std::size_t m) {
    if (m < 2) return 0.0;
    const double c = double(positives);
    const double mm = double(m);
    return c * (mm - c) / (mm * (mm - 1.0));
}

}  // namespace approx_count
