// sampling.hpp
//
// Sampling-only estimators: simple random sampling, stratified sampling with
// proportional allocation over a surrogate grid, and two-stage Neyman.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "core.hpp"
#include "predicates.hpp"
#include "rng.hpp"

namespace approx_count {

/// Partition of (part of) the dataset into strata. `membership[i]` is the
/// stratum of dataset position i, or `kUnassigned` when the object is outside
/// the sampling frame.
struct Stratification {
    static constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

    std::vector<std::size_t> sizes;
    std::vector<std::size_t> membership;

    std::size_t strata() const { return sizes.size(); }
    std::size_t frame_size() const { return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}); }

    /// Dataset positions of each stratum, in ascending position order.
    std::vector<std::vector<std::size_t>> members() const {
        std::vector<std::vector<std::size_t>> out(sizes.size());
        for (std::size_t h = 0; h < sizes.size(); ++h) out[h].reserve(sizes[h]);
        for (std::size_t i = 0; i < membership.size(); ++i) {
            if (membership[i] != kUnassigned) out[membership[i]].push_back(i);
        }
        return out;
    }

    static Stratification from_membership(std::vector<std::size_t> membership, std::size_t H) {
        Stratification s;
        s.sizes.assign(H, 0);
        for (std::size_t m : membership) {
            if (m == kUnassigned) continue;
            if (m >= H) throw ConfigError("stratum id out of range");
            ++s.sizes[m];
        }
        s.membership = std::move(membership);
        return s;
    }
};

struct Allocation {
    std::vector<std::size_t> counts;
    std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

namespace detail {

// Real quotas q_h = clamp(λ·w_h, lo_h, hi_h) with Σ q_h = target, by
// bisection on λ. Zero-weight strata stay at lo_h.
inline std::vector<double> water_fill(const std::vector<double>& w, const std::vector<double>& lo,
                                      const std::vector<double>& hi, double target) {
    const std::size_t H = w.size();
    auto fill = [&](double lambda) {
        std::vector<double> q(H);
        for (std::size_t h = 0; h < H; ++h) q[h] = std::clamp(lambda * w[h], lo[h], hi[h]);
        return q;
    };
    auto total = [](const std::vector<double>& q) { return std::accumulate(q.begin(), q.end(), 0.0); };
    double top = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        if (w[h] > 0.0) top = std::max(top, hi[h] / w[h]);
    }
    double a = 0.0, b = top;
    for (int it = 0; it < 200 && b > a; ++it) {
        const double mid = 0.5 * (a + b);
        if (total(fill(mid)) < target) a = mid;
        else b = mid;
    }
    return fill(b);
}

// Integer allocation of `n` proportional to `weights` within
// [mins[h], caps[h]], rounded by largest remainder (ties to the lower
// index). Once every positive-weight stratum is full, the rest follows
// `fallback` weights.
inline std::vector<std::size_t> constrained_allocation(const std::vector<double>& weights,
                                                       const std::vector<double>& fallback,
                                                       const std::vector<std::size_t>& mins,
                                                       const std::vector<std::size_t>& caps,
                                                       std::size_t n) {
    const std::size_t H = weights.size();
    std::size_t min_sum = 0, cap_sum = 0;
    for (std::size_t h = 0; h < H; ++h) {
        if (mins[h] > caps[h]) throw ConfigError("stratum minimum exceeds its size");
        min_sum += mins[h];
        cap_sum += caps[h];
    }
    if (min_sum > n) throw ConfigError("infeasible allocation: minimum per stratum exceeds total");
    if (cap_sum < n) throw ConfigError("infeasible allocation: total exceeds population");

    std::vector<double> lo(H), hi(H), w(H);
    double reach = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        lo[h] = double(mins[h]);
        hi[h] = double(caps[h]);
        w[h] = std::max(0.0, weights[h]);
        reach += w[h] > 0.0 ? hi[h] : lo[h];
    }
    std::vector<double> q;
    if (reach >= double(n)) {
        q = water_fill(w, lo, hi, double(n));
    } else {
        std::vector<double> w2(H), lo2 = lo;
        for (std::size_t h = 0; h < H; ++h) {
            if (w[h] > 0.0) lo2[h] = hi[h];
            else w2[h] = std::max(0.0, fallback[h]);
        }
        q = water_fill(w2, lo2, hi, double(n));
    }

    std::vector<std::size_t> out(H);
    std::vector<std::pair<double, std::size_t>> rem;
    std::size_t assigned = 0;
    for (std::size_t h = 0; h < H; ++h) {
        out[h] = std::clamp(std::size_t(std::floor(q[h] + 1e-9)), mins[h], caps[h]);
        assigned += out[h];
        rem.emplace_back(q[h] - double(out[h]), h);
    }
    std::stable_sort(rem.begin(), rem.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [r, h] : rem) {
        if (assigned >= n) break;
        if (out[h] < caps[h]) {
            ++out[h];
            ++assigned;
        }
    }
    for (std::size_t h = 0; assigned < n && h < H; ++h) {
        while (assigned < n && out[h] < caps[h]) {
            ++out[h];
            ++assigned;
        }
    }
    for (std::size_t h = H; assigned > n && h-- > 0;) {
        while (assigned > n && out[h] > mins[h]) {
            --out[h];
            --assigned;
        }
    }
    return out;
}

}  // namespace detail

/// n_h ∝ N_h with largest-remainder rounding and n_h ≤ N_h.
inline Allocation proportional_allocation(std::span<const std::size_t> sizes, std::size_t n) {
    std::vector<double> w(sizes.begin(), sizes.end());
    std::vector<std::size_t> caps(sizes.begin(), sizes.end());
    std::vector<std::size_t> mins(sizes.size(), 0);
    return {detail::constrained_allocation(w, w, mins, caps, n)};
}

/// Pilot stddev floored at sqrt(q(1−q)), q = 0.5/(m+1): a pilot of m labels
/// that are all equal still leaves room for a rare minority.
inline double smoothed_stddev(double s, std::size_t m) {
    const double q = 0.5 / (double(m) + 1.0);
    return std::max(s, std::sqrt(q * (1.0 - q)));
}

/// Neyman allocation n_h ∝ N_h s_h bounded to [min_per_stratum, N_h]. Falls
/// back to proportional when every N_h s_h is zero.
inline Allocation neyman_allocation(std::span<const std::size_t> sizes,
                                    std::span<const double> stddevs, std::size_t n,
                                    std::size_t min_per_stratum) {
    if (sizes.size() != stddevs.size()) throw ConfigError("neyman_allocation: length mismatch");
    if (sizes.size() * min_per_stratum > n)
        throw ConfigError("infeasible allocation: H * min_per_stratum exceeds n");
    std::vector<double> w(sizes.size()), fallback(sizes.size());
    std::vector<std::size_t> caps(sizes.begin(), sizes.end());
    std::vector<std::size_t> mins(sizes.size());
    for (std::size_t h = 0; h < sizes.size(); ++h) {
        if (stddevs[h] < 0.0) throw ConfigError("negative stratum stddev");
        w[h] = double(sizes[h]) * stddevs[h];
        fallback[h] = double(sizes[h]);
        mins[h] = std::min(min_per_stratum, sizes[h]);
    }
    return {detail::constrained_allocation(w, fallback, mins, caps, n)};
}

/// Uniform grid of √H × √H cells over the (x, y) bounding box. Interior
/// boundary points go to the higher cell; empty cells are dropped.
inline Stratification grid_stratify(const Dataset& dataset, std::size_t H) {
    if (dataset.dimension() != 2) throw ConfigError("grid stratification requires 2-D points");
    const auto g = static_cast<std::size_t>(std::llround(std::sqrt(double(H))));
    if (H == 0 || g * g != H) throw ConfigError("number of grid strata must be a perfect square");
    double min_x = dataset[0].x(), max_x = min_x, min_y = dataset[0].y(), max_y = min_y;
    for (const auto& p : dataset.points()) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    auto cell = [g](double v, double lo, double hi) -> std::size_t {
        if (!(hi > lo)) return 0;
        const double t = (v - lo) / (hi - lo) * double(g);
        return std::min(static_cast<std::size_t>(std::floor(t)), g - 1);
    };
    std::vector<std::size_t> raw(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& p = dataset[i];
        raw[i] = cell(p.y(), min_y, max_y) * g + cell(p.x(), min_x, max_x);
    }
    std::vector<std::size_t> remap(H, Stratification::kUnassigned);
    std::vector<bool> used(H, false);
    for (std::size_t r : raw) used[r] = true;
    std::size_t next = 0;
    for (std::size_t c = 0; c < H; ++c) {
        if (used[c]) remap[c] = next++;
    }
    for (auto& r : raw) r = remap[r];
    return Stratification::from_membership(std::move(raw), next);
}

/// Per-stratum outcome of a stratified draw.
struct StratumSample {
    std::size_t drawn = 0;
    std::size_t positives = 0;
    double mean() const { return drawn ? double(positives) / double(drawn) : 0.0; }
    double variance() const { return bernoulli_sample_variance(positives, drawn); }
};

namespace detail {

inline std::vector<StratumSample> draw_strata(CountingOracle& oracle,
                                              const std::vector<std::vector<std::size_t>>& pools,
                                              const std::vector<std::size_t>& alloc, Stream& rng) {
    std::vector<StratumSample> out(pools.size());
    for (std::size_t h = 0; h < pools.size(); ++h) {
        if (alloc[h] > pools[h].size()) throw ConfigError("allocation exceeds stratum size");
        auto picked = sample_without_replacement<std::size_t>(pools[h], alloc[h], rng);
        out[h].drawn = picked.size();
        for (std::size_t i : picked) out[h].positives += oracle(i) ? 1 : 0;
    }
    return out;
}

/// Combine per-stratum samples into a count over strata of `pop` sizes.
/// Strata sampled from `pop[h]` objects; `weight_sizes[h]` scales each
/// stratum mean (usually equal to pop[h]).
struct StratifiedResult {
    double count = 0.0;
    double variance = 0.0;  // of count
    std::size_t low_sample_strata = 0;
};

inline StratifiedResult combine_strata(const std::vector<StratumSample>& samples,
                                       const std::vector<std::size_t>& pop,
                                       const std::vector<std::size_t>& weight_sizes) {
    StratifiedResult r;
    for (std::size_t h = 0; h < samples.size(); ++h) {
        const double Nw = double(weight_sizes[h]);
        if (weight_sizes[h] == 0) continue;
        if (samples[h].drawn == 0) throw ConfigError("empty allocation");
        r.count += Nw * samples[h].mean();
        if (samples[h].drawn < 2) ++r.low_sample_strata;
        const double fpc = pop[h] > 0 ? 1.0 - double(samples[h].drawn) / double(pop[h]) : 0.0;
        r.variance += Nw * Nw * samples[h].variance() / double(samples[h].drawn) * std::max(0.0, fpc);
    }
    return r;
}

inline void attach_normal_ci(Estimate& e, double alpha, double lo_bound, double hi_bound) {
    const double z = z_critical(alpha);
    const double half = z * std::sqrt(std::max(0.0, *e.variance));
    e.ci = std::pair{std::clamp(e.count - half, lo_bound, hi_bound),
                     std::clamp(e.count + half, lo_bound, hi_bound)};
}

}  // namespace detail

/// Simple random sampling without replacement with a Wald interval.
inline Estimate srs_estimate(CountingOracle& oracle, const Dataset& dataset, std::size_t n,
                             double alpha, std::uint64_t seed, bool wilson = false) {
    const std::size_t N = dataset.size();
    if (n == 0 || n > N) throw ConfigError("SRS sample size must be in [1, N]");
    OverheadClock clock(oracle);
    const std::uint64_t calls0 = oracle.calls();

    Stream rng = Stream::derive(seed, "srs");
    const auto picked = sample_indices(N, n, rng);
    std::size_t positives = 0;
    for (std::size_t i : picked) positives += oracle(i) ? 1 : 0;

    Estimate e;
    e.method = "srs";
    e.seed = seed;
    const double p = double(positives) / double(n);
    e.proportion = p;
    e.count = double(positives) * double(N) / double(n);
    e.variance = double(N) * double(N) * p * (1.0 - p) / double(n) * detail::fpc(n, N);
    auto [lo, hi] = wilson ? wilson_interval(p, n, N, alpha) : wald_interval(p, n, N, alpha);
    e.ci = std::pair{lo * double(N), hi * double(N)};
    e.oracle_calls = oracle.calls() - calls0;
    e.overhead.apply_ms = clock.lap();
    return e;
}

/// Stratified estimate for a fixed design: uniform draws per stratum and
/// unbiased within-stratum variance estimates.
inline Estimate stratified_estimate(CountingOracle& oracle, const Dataset& dataset,
                                    const Stratification& strat, const Allocation& alloc,
                                    double alpha, std::uint64_t seed) {
    if (alloc.counts.size() != strat.strata()) throw ConfigError("allocation/strata mismatch");
    if (strat.membership.size() != dataset.size()) throw ConfigError("stratification/dataset mismatch");
    const std::uint64_t calls0 = oracle.calls();
    Stream rng = Stream::derive(seed, "stratified");
    const auto pools = strat.members();
    const auto samples = detail::draw_strata(oracle, pools, alloc.counts, rng);
    const auto r = detail::combine_strata(samples, strat.sizes, strat.sizes);

    Estimate e;
    e.method = "stratified";
    e.seed = seed;
    const double frame = double(strat.frame_size());
    e.count = r.count;
    e.proportion = frame > 0 ? r.count / frame : 0.0;
    e.variance = r.variance;
    detail::attach_normal_ci(e, alpha, 0.0, double(dataset.size()));
    if (r.low_sample_strata > 0)
        e.warnings.push_back(std::to_string(r.low_sample_strata) +
                             " strata with fewer than 2 samples contribute zero variance");
    e.oracle_calls = oracle.calls() - calls0;
    return e;
}

/// SSP: proportional allocation of n over the given strata.
inline Estimate ssp_estimate(CountingOracle& oracle, const Dataset& dataset,
                             const Stratification& strat, std::size_t n, double alpha,
                             std::uint64_t seed) {
    OverheadClock clock(oracle);
    auto alloc = proportional_allocation(strat.sizes, n);
    Estimate e = stratified_estimate(oracle, dataset, strat, alloc, alpha, seed);
    e.method = "ssp";
    e.overhead.apply_ms = clock.lap();
    return e;
}

/// Two-stage Neyman stratified sampling. The proportional pilot estimates
/// s_h; its labels are kept as exact knowledge and pilot objects leave the
/// stage-2 frame.
inline Estimate ssn_estimate(CountingOracle& oracle, const Dataset& dataset,
                             const Stratification& strat, std::size_t n_total,
                             double pilot_fraction, double alpha, std::uint64_t seed,
                             std::size_t min_per_stratum = 2, bool smooth_pure_strata = true) {
    const std::size_t H = strat.strata();
    const std::size_t N = strat.frame_size();
    if (strat.membership.size() != dataset.size()) throw ConfigError("stratification/dataset mismatch");
    if (n_total > N) throw ConfigError("SSN budget exceeds population");
    const auto pilot_n = static_cast<std::size_t>(std::floor(pilot_fraction * double(n_total)));
    if (pilot_n < 2 * H) throw ConfigError("SSN pilot must have at least 2 samples per stratum");
    OverheadClock clock(oracle);
    const std::uint64_t calls0 = oracle.calls();

    Stream rng = Stream::derive(seed, "ssn");
    auto pools = strat.members();
    const auto pilot_alloc = proportional_allocation(strat.sizes, pilot_n);

    Estimate e;
    e.method = "ssn";
    e.seed = seed;

    // Stage 1: pilot, removed from the frame.
    std::vector<double> s(H, 0.0);
    std::size_t pilot_positives = 0;
    std::size_t thin_pilots = 0;
    for (std::size_t h = 0; h < H; ++h) {
        auto& pool = pools[h];
        for (std::size_t i = 0; i < pilot_alloc.counts[h]; ++i) {
            const std::size_t j = i + rng.below(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        std::size_t pos = 0;
        for (std::size_t i = 0; i < pilot_alloc.counts[h]; ++i) pos += oracle(pool[i]) ? 1 : 0;
        pilot_positives += pos;
        if (pilot_alloc.counts[h] < 2) ++thin_pilots;
        s[h] = std::sqrt(bernoulli_sample_variance(pos, pilot_alloc.counts[h]));
        if (smooth_pure_strata) s[h] = smoothed_stddev(s[h], pilot_alloc.counts[h]);
        pool.erase(pool.begin(), pool.begin() + std::ptrdiff_t(pilot_alloc.counts[h]));
    }
    if (thin_pilots > 0)
        e.warnings.push_back(std::to_string(thin_pilots) + " strata with fewer than 2 pilot samples");

    // Stage 2: Neyman allocation of the remainder over the reduced frame.
    std::vector<std::size_t> remaining(H);
    for (std::size_t h = 0; h < H; ++h) remaining[h] = pools[h].size();
    const std::size_t n2 = n_total - pilot_n;
    std::size_t min_h = min_per_stratum;
    while (min_h > 0 && min_h * H > n2) --min_h;
    auto alloc = neyman_allocation(remaining, s, n2, min_h);
    const auto samples = detail::draw_strata(oracle, pools, alloc.counts, rng);

    // Strata emptied by the pilot are fully known.
    std::vector<StratumSample> live;
    std::vector<std::size_t> live_pop;
    for (std::size_t h = 0; h < H; ++h) {
        if (remaining[h] == 0) continue;
        if (samples[h].drawn == 0) throw ConfigError("empty allocation");
        live.push_back(samples[h]);
        live_pop.push_back(remaining[h]);
    }
    const auto r = detail::combine_strata(live, live_pop, live_pop);
    e.count = double(pilot_positives) + r.count;
    e.proportion = e.count / double(N);
    e.variance = r.variance;
    detail::attach_normal_ci(e, alpha, 0.0, double(N));
    if (r.low_sample_strata > 0)
        e.warnings.push_back(std::to_string(r.low_sample_strata) +
                             " strata with fewer than 2 samples contribute zero variance");
    e.oracle_calls = oracle.calls() - calls0;
    e.overhead.apply_ms = clock.lap();
    return e;
}

}  // namespace approx_count
