// rng.hpp
//
// Portable counter-based random streams. Every random decision in the library
// comes from a `Stream` keyed by (master seed, purpose, ...); no platform
// library RNG is involved, so draws are reproducible everywhere.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "core.hpp"

namespace approx_count {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// FNV-1a, used to turn purpose tags into stream keys.
constexpr std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : tag) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Derive a child key from a parent key and any number of integer/tag parts.
constexpr std::uint64_t derive_key(std::uint64_t key) { return key; }

template <class... Rest>
constexpr std::uint64_t derive_key(std::uint64_t key, std::string_view tag, Rest... rest);

template <class... Rest>
constexpr std::uint64_t derive_key(std::uint64_t key, std::uint64_t part, Rest... rest) {
    return derive_key(mix64(key ^ mix64(part + 0x632be59bd9b4e019ULL)), rest...);
}

template <class... Rest>
constexpr std::uint64_t derive_key(std::uint64_t key, std::string_view tag, Rest... rest) {
    return derive_key(key, hash_tag(tag), rest...);
}

/// Counter-based generator: the i-th output is mix64(key + i·γ).
class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(mix64(key)) {}

    template <class... Parts>
    static Stream derive(std::uint64_t master, Parts... parts) {
        return Stream(derive_key(master, parts...));
    }

    std::uint64_t next_u64() {
        return mix64(key_ + 0x9e3779b97f4a7c15ULL * (counter_++));
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1).
    double uniform_open() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return u;
    }

    /// Uniform integer in [0, bound) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do { v = next_u64(); } while (v >= limit);
        return v % bound;
    }

    /// Standard normal via inverse CDF.
    double normal() { return normal_quantile(uniform_open()); }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

/// Uniform per-key value in [0,1), independent of any stream state.
inline double hash_uniform(std::uint64_t key) {
    return double(mix64(mix64(key)) >> 11) * 0x1.0p-53;
}

/// In-place seeded Fisher–Yates shuffle.
template <class T>
void shuffle(std::vector<T>& v, Stream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(v[i - 1], v[j]);
    }
}

/// n distinct elements of `population`, uniformly without replacement, in
/// draw order (partial Fisher–Yates).
template <class T>
std::vector<T> sample_without_replacement(std::span<const T> population, std::size_t n,
                                          Stream& rng) {
    if (n > population.size()) throw ConfigError("sample larger than population");
    std::vector<T> pool(population.begin(), population.end());
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    return pool;
}

/// Indices 0..N-1 drawn uniformly without replacement.
inline std::vector<std::size_t> sample_indices(std::size_t N, std::size_t n, Stream& rng) {
    std::vector<std::size_t> all(N);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return sample_without_replacement<std::size_t>(all, n, rng);
}

/// Successive weighted sampling without replacement by exponential race:
/// key_i = -ln(u_i)/w_i, returning the n smallest keys in arrival order.
/// Equivalent in distribution to repeatedly drawing among the remaining items
/// with probability proportional to weight.
inline std::vector<std::size_t> weighted_sample_without_replacement(
    std::span<const double> weights, std::size_t n, Stream& rng) {
    if (n > weights.size()) throw ConfigError("sample larger than population");
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry> heap;  // max-heap of the n smallest keys
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] > 0.0)) throw ConfigError("weights must be positive");
        const double key = -std::log(rng.uniform_open()) / weights[i];
        if (heap.size() < n) {
            heap.emplace(key, i);
        } else if (n > 0 && key < heap.top().first) {
            heap.pop();
            heap.emplace(key, i);
        }
    }
    std::vector<Entry> picked;
    picked.reserve(heap.size());
    while (!heap.empty()) {
        picked.push_back(heap.top());
        heap.pop();
    }
    std::sort(picked.begin(), picked.end());
    std::vector<std::size_t> out;
    out.reserve(picked.size());
    for (const auto& e : picked) out.push_back(e.second);
    return out;
}

}  // namespace approx_count
