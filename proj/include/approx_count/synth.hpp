// synth.hpp
//
// Seeded synthetic point clouds and noise-count tables.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "core.hpp"
#include "predicates.hpp"
#include "rng.hpp"

namespace approx_count {

enum class PointKind { Uniform2d, Clustered2d };

inline PointKind parse_point_kind(const std::string& s) {
    if (s == "uniform2d") return PointKind::Uniform2d;
    if (s == "clustered2d") return PointKind::Clustered2d;
    throw ConfigError("unknown point kind '" + s + "'");
}

inline const char* to_string(PointKind k) {
    return k == PointKind::Uniform2d ? "uniform2d" : "clustered2d";
}

/// Blob centers of clustered2d, 5σ apart with σ = 1.
inline constexpr double kBlobSigma = 1.0;
inline constexpr double kBlobSeparation = 5.0;

/// Ids are 0..N-1. Each point draws from its own stream, so a point does not
/// depend on N.
inline Dataset generate_points(PointKind kind, std::size_t N, std::uint64_t seed) {
    if (N == 0) throw ConfigError("N must be at least 1");
    std::vector<DataPoint> pts;
    pts.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
        Stream rng = Stream::derive(seed, "points", std::uint64_t(i));
        DataPoint p;
        p.id = i;
        if (kind == PointKind::Uniform2d) {
            const double x = rng.uniform();
            p.features = {x, rng.uniform()};
        } else {
            const double cx = (rng.next_u64() & 1) ? kBlobSeparation : 0.0;
            const double x = cx + kBlobSigma * rng.normal();
            p.features = {x, kBlobSigma * rng.normal()};
        }
        pts.push_back(std::move(p));
    }
    return Dataset(std::move(pts), 2);
}

using BaseCounts = std::vector<std::pair<std::uint64_t, std::int64_t>>;

enum class NoiseKind { Gaussian, Zipf };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    double s = 1.0;  // Zipf exponent
    std::uint64_t seed = 0;
};

/// "gaussian" or "zipf:S".
inline NoiseSpec parse_noise_spec(const std::string& text, std::uint64_t seed) {
    NoiseSpec spec;
    spec.seed = seed;
    if (text == "gaussian") return spec;
    if (text.rfind("zipf:", 0) == 0) {
        spec.kind = NoiseKind::Zipf;
        try {
            std::size_t used = 0;
            spec.s = std::stod(text.substr(5), &used);
            if (used != text.size() - 5) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("bad zipf exponent in '" + text + "'");
        }
        if (!(spec.s > 0.0)) throw ConfigError("zipf exponent must be positive");
        return spec;
    }
    throw ConfigError("unknown noise kind '" + text + "'");
}

/// max(0, round(c + z))
inline std::int64_t gaussian_noise_count(std::int64_t c, double z) {
    return std::max<std::int64_t>(0, std::llround(double(c) + z));
}

inline NoiseTable gaussian_noise_table(const BaseCounts& base, std::uint64_t seed) {
    NoiseTable t;
    for (const auto& [id, c] : base) {
        Stream rng = Stream::derive(seed, "gaussian-noise", id);
        t.set(id, gaussian_noise_count(c, rng.normal()));
    }
    return t;
}

/// P(r) ∝ r^{-s} for r = 1..len.
inline std::vector<double> zipf_probabilities(std::size_t len, double s) {
    if (len == 0) throw ConfigError("zipf support must be non-empty");
    if (!(s > 0.0)) throw ConfigError("zipf exponent must be positive");
    std::vector<double> p(len);
    double total = 0.0;
    for (std::size_t r = 0; r < len; ++r) total += p[r] = std::pow(double(r + 1), -s);
    for (double& v : p) v /= total;
    return p;
}

/// Inverse-CDF draw of a 0-based rank.
inline std::size_t zipf_rank(const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min(std::size_t(it - cdf.begin()), cdf.size() - 1);
}

inline NoiseTable zipf_noise_table(const BaseCounts& base, double s, std::uint64_t seed) {
    std::vector<std::int64_t> values;
    values.reserve(base.size());
    for (const auto& kv : base) values.push_back(kv.second);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    NoiseTable t;
    if (values.empty()) return t;
    Stream perm = Stream::derive(seed, "zipf-permutation");
    shuffle(values, perm);

    const auto p = zipf_probabilities(values.size(), s);
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < p.size(); ++r) cdf[r] = acc += p[r];
    for (const auto& kv : base) {
        const double u = Stream::derive(seed, "zipf-noise", kv.first).uniform();
        t.set(kv.first, values[zipf_rank(cdf, u)]);
    }
    return t;
}

inline NoiseTable make_noise_table(const BaseCounts& base, const NoiseSpec& spec) {
    return spec.kind == NoiseKind::Gaussian ? gaussian_noise_table(base, spec.seed)
                                            : zipf_noise_table(base, spec.s, spec.seed);
}

/// Dominance count of every point, keyed by id.
inline BaseCounts dominance_counts(const Dataset& dataset) {
    BaseCounts out;
    out.reserve(dataset.size());
    for (const auto& p : dataset.points())
        out.emplace_back(p.id, std::int64_t(dominance_count(p, dataset)));
    return out;
}

/// The same multiset of counts reassigned to ids by a seeded permutation.
inline BaseCounts permute_counts(BaseCounts base, std::uint64_t seed) {
    std::vector<std::int64_t> values;
    values.reserve(base.size());
    for (const auto& kv : base) values.push_back(kv.second);
    Stream rng = Stream::derive(seed, "count-permutation");
    shuffle(values, rng);
    for (std::size_t i = 0; i < base.size(); ++i) base[i].second = values[i];
    return base;
}

}  // namespace approx_count
