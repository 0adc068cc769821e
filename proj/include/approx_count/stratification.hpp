// stratification.hpp
//
// Designing strata over objects ordered by classifier score. Objects are
// identified by their 1-based rank in the (score, id) order; a design is a
// list of boundaries 0 = b_0 < b_1 < ... < b_H = N where stratum h holds
// ranks (b_{h-1}, b_h]. Within-stratum variances come from a first-stage
// uniform sample located by its ranks and summarized by a prefix-sum index.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core.hpp"

namespace approx_count {

enum class AllocationMode { Neyman, Proportional };

inline const char* to_string(AllocationMode m) {
    return m == AllocationMode::Neyman ? "neyman" : "proportional";
}

// ---------------------------------------------------------------------------
// Sample ranks and prefix sums

struct SampleRanks {
    std::vector<std::size_t> iota;   // strictly increasing 1-based ranks
    std::vector<std::size_t> order;  // order[k] = which input sample has rank iota[k]
};

/// Ranks of the sampled objects in the universe ordered by (score, id).
/// One pass over the universe, bucketing each object between consecutive
/// sampled keys.
inline SampleRanks locate_sample_ranks(std::span<const double> scores,
                                       std::span<const std::uint64_t> ids,
                                       std::span<const std::size_t> samples) {
    if (scores.size() != ids.size()) throw ConfigError("scores/ids length mismatch");
    using Key = std::pair<double, std::uint64_t>;
    const std::size_t m = samples.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t s : samples) {
        if (s >= scores.size()) throw ConfigError("sample outside universe");
    }
    auto key = [&](std::size_t pos) { return Key{scores[pos], ids[pos]}; };
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return key(samples[a]) < key(samples[b]); });
    std::vector<Key> keys(m);
    for (std::size_t k = 0; k < m; ++k) keys[k] = key(samples[order[k]]);
    for (std::size_t k = 1; k < m; ++k) {
        if (keys[k] == keys[k - 1]) throw ConfigError("duplicate sample");
    }

    // bucket[j] = objects whose key has exactly j sampled keys <= it.
    std::vector<std::size_t> bucket(m + 1, 0);
    for (std::size_t pos = 0; pos < scores.size(); ++pos) {
        const auto j = std::size_t(std::upper_bound(keys.begin(), keys.end(), key(pos)) - keys.begin());
        ++bucket[j];
    }
    SampleRanks out;
    out.order = std::move(order);
    out.iota.resize(m);
    std::size_t below = 0;
    for (std::size_t k = 0; k < m; ++k) {
        below += bucket[k];
        out.iota[k] = below + 1;
    }
    return out;
}

inline SampleRanks locate_sample_ranks(std::span<const double> scores,
                                       std::span<const std::size_t> samples) {
    std::vector<std::uint64_t> ids(scores.size());
    std::iota(ids.begin(), ids.end(), std::uint64_t{0});
    return locate_sample_ranks(scores, ids, samples);
}

struct PrefixSumIndex {
    std::vector<std::size_t> gamma{0};

    std::size_t samples() const { return gamma.size() - 1; }
    std::size_t positives(std::size_t lo, std::size_t hi) const { return gamma[hi] - gamma[lo]; }
};

inline PrefixSumIndex build_prefix_index(const std::vector<bool>& sorted_labels) {
    PrefixSumIndex idx;
    idx.gamma.reserve(sorted_labels.size() + 1);
    for (bool b : sorted_labels) idx.gamma.push_back(idx.gamma.back() + (b ? 1 : 0));
    return idx;
}

/// s² over the samples lo..hi-1 (0-based sample positions).
inline double stratum_variance(const PrefixSumIndex& gamma, std::size_t lo, std::size_t hi) {
    if (hi < lo + 2) throw ConfigError("too few samples in stratum");
    return bernoulli_sample_variance(gamma.positives(lo, hi), hi - lo);
}

// ---------------------------------------------------------------------------
// Objectives

/// (1/n)(Σ N_h s_h)² − Σ N_h s_h²
inline double neyman_objective(std::span<const std::size_t> sizes, std::span<const double> s,
                               std::size_t n) {
    if (n == 0) throw ConfigError("objective requires n >= 1");
    double lin = 0.0, quad = 0.0;
    for (std::size_t h = 0; h < sizes.size(); ++h) {
        lin += double(sizes[h]) * s[h];
        quad += double(sizes[h]) * s[h] * s[h];
    }
    return lin * lin / double(n) - quad;
}

/// ((N − n)/n) Σ N_h s_h²
inline double proportional_objective(std::span<const std::size_t> sizes,
                                     std::span<const double> s, std::size_t n, std::size_t N) {
    if (n == 0) throw ConfigError("objective requires n >= 1");
    double quad = 0.0;
    for (std::size_t h = 0; h < sizes.size(); ++h) quad += double(sizes[h]) * s[h] * s[h];
    return (double(N) - double(n)) / double(n) * quad;
}

// ---------------------------------------------------------------------------
// Designs

struct DesignConstraints {
    std::size_t N_floor = 1;  // minimum stratum size
    std::size_t m_floor = 2;  // minimum first-stage samples per stratum
    std::size_t H = 4;
    std::size_t n = 1;        // second-stage sample total
};

struct DesignResult {
    std::vector<std::size_t> sizes;
    std::vector<double> stddevs;       // first-stage s_h
    std::vector<std::size_t> samples;  // first-stage m_h
    double objective = 0.0;
    AllocationMode mode = AllocationMode::Neyman;
    std::vector<std::string> warnings;

    std::vector<std::size_t> boundaries() const {
        std::vector<std::size_t> b{0};
        for (std::size_t sz : sizes) b.push_back(b.back() + sz);
        return b;
    }
};

/// Shared view of a design instance: ranks, prefix index, N, constraints.
class DesignContext {
public:
    DesignContext(std::span<const std::size_t> ranks, const PrefixSumIndex& gamma, std::size_t N,
                  DesignConstraints c)
        : ranks_(ranks.begin(), ranks.end()), gamma_(&gamma), N_(N), c_(c) {
        if (gamma.samples() != ranks_.size()) throw ConfigError("ranks/prefix index mismatch");
        for (std::size_t k = 0; k < ranks_.size(); ++k) {
            if (ranks_[k] < 1 || ranks_[k] > N_) throw ConfigError("sample rank out of range");
            if (k > 0 && ranks_[k] <= ranks_[k - 1]) throw ConfigError("sample ranks must increase");
        }
        if (c_.n == 0) throw ConfigError("second-stage sample total must be positive");
        ell_.assign(N_ + 1, 0);
        std::size_t k = 0;
        for (std::size_t b = 0; b <= N_; ++b) {
            while (k < ranks_.size() && ranks_[k] <= b) ++k;
            ell_[b] = k;
        }
    }

    std::size_t N() const { return N_; }
    std::size_t m() const { return ranks_.size(); }
    const DesignConstraints& constraints() const { return c_; }
    const std::vector<std::size_t>& ranks() const { return ranks_; }
    /// Number of samples with rank ≤ b.
    std::size_t ell(std::size_t b) const { return ell_[b]; }

    void require_feasible(std::size_t H) const {
        if (H < 2) throw ConfigError("design requires H >= 2");
        if (c_.m_floor < 2) throw ConfigError("m_floor must be at least 2");
        if (H * c_.N_floor > N_ || H * c_.m_floor > m())
            throw ConfigError("no feasible stratification");
    }

    bool stratum_ok(std::size_t lo, std::size_t hi) const {
        return hi >= lo + std::max<std::size_t>(c_.N_floor, 1) &&
               ell_[hi] - ell_[lo] >= c_.m_floor;
    }

    double s2(std::size_t lo, std::size_t hi) const {
        return stratum_variance(*gamma_, ell_[lo], ell_[hi]);
    }

    double objective(std::span<const std::size_t> sizes, std::span<const double> s,
                     AllocationMode mode) const {
        return mode == AllocationMode::Neyman ? neyman_objective(sizes, s, c_.n)
                                              : proportional_objective(sizes, s, c_.n, N_);
    }

    /// Evaluates boundaries (including 0 and N). Strata with fewer than two
    /// samples take the pooled first-stage s when `allow_thin` is set.
    DesignResult evaluate(std::span<const std::size_t> bounds, AllocationMode mode,
                          bool allow_thin = false) const {
        DesignResult r;
        r.mode = mode;
        std::optional<double> pooled;
        for (std::size_t h = 0; h + 1 < bounds.size(); ++h) {
            const std::size_t lo = bounds[h], hi = bounds[h + 1];
            if (hi <= lo) throw ConfigError("empty stratum in design");
            const std::size_t mh = ell_[hi] - ell_[lo];
            double v;
            if (mh >= 2) {
                v = s2(lo, hi);
            } else {
                if (!allow_thin) throw ConfigError("too few samples in stratum");
                if (!pooled) pooled = m() >= 2 ? stratum_variance(*gamma_, 0, m()) : 0.25;
                v = *pooled;
                r.warnings.push_back("stratum " + std::to_string(h) +
                                     " has fewer than 2 first-stage samples; pooled s used");
            }
            r.sizes.push_back(hi - lo);
            r.stddevs.push_back(std::sqrt(v));
            r.samples.push_back(mh);
        }
        r.objective = objective(r.sizes, r.stddevs, mode);
        return r;
    }

private:
    std::vector<std::size_t> ranks_;
    const PrefixSumIndex* gamma_;
    std::size_t N_;
    DesignConstraints c_;
    std::vector<std::size_t> ell_;
};

namespace detail {

// Keeps the best design: lower objective, ties to lexicographically smaller sizes.
class BestDesign {
public:
    bool offer(double v, std::span<const std::size_t> bounds) {
        const double tol = 1e-12 * std::max(1.0, std::abs(best_));
        bool take = !found_ || v < best_ - tol;
        if (!take && found_ && std::abs(v - best_) <= tol) {
            take = std::lexicographical_compare(bounds.begin(), bounds.end(), bounds_.begin(),
                                                bounds_.end());
        }
        if (take) {
            found_ = true;
            best_ = v;
            bounds_.assign(bounds.begin(), bounds.end());
        }
        return take;
    }
    bool found() const { return found_; }
    const std::vector<std::size_t>& bounds() const { return bounds_; }

    DesignResult finish(const DesignContext& ctx, AllocationMode mode) const {
        if (!found_) throw ConfigError("no feasible stratification");
        return ctx.evaluate(bounds_, mode);
    }

private:
    bool found_ = false;
    double best_ = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> bounds_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Exhaustive oracle

inline DesignResult brute_force_design(std::span<const std::size_t> ranks,
                                       const PrefixSumIndex& gamma, std::size_t N,
                                       const DesignConstraints& c, AllocationMode mode) {
    if (N > 400 || c.H > 4) throw ConfigError("brute force limited to N <= 400, H <= 4");
    DesignContext ctx(ranks, gamma, N, c);
    ctx.require_feasible(c.H);
    const std::size_t H = c.H;
    const std::size_t Nf = std::max<std::size_t>(c.N_floor, 1);
    const double n = double(c.n);
    detail::BestDesign best;
    std::vector<std::size_t> bounds(H + 1, 0);
    bounds[H] = N;

    // lin = Σ N_h s_h, quad = Σ N_h s_h² over closed strata.
    auto rec = [&](auto&& self, std::size_t h, double lin, double quad) -> void {
        const std::size_t lo = bounds[h];
        const std::size_t left = H - 1 - h;  // strata after this one
        if (left == 0) {
            if (!ctx.stratum_ok(lo, N)) return;
            const double v2 = ctx.s2(lo, N);
            const double Nh = double(N - lo);
            const double L = lin + Nh * std::sqrt(v2);
            const double Q = quad + Nh * v2;
            const double v = mode == AllocationMode::Neyman ? L * L / n - Q
                                                            : (double(N) - n) / n * Q;
            best.offer(v, bounds);
            return;
        }
        for (std::size_t b = lo + Nf; b + left * Nf <= N; ++b) {
            if (ctx.m() - ctx.ell(b) < left * c.m_floor) break;
            if (!ctx.stratum_ok(lo, b)) continue;
            const double v2 = ctx.s2(lo, b);
            bounds[h + 1] = b;
            self(self, h + 1, lin + double(b - lo) * std::sqrt(v2), quad + double(b - lo) * v2);
        }
    };
    rec(rec, 0, 0.0, 0.0);
    return best.finish(ctx, mode);
}

// ---------------------------------------------------------------------------
// DirSol (H = 3)

namespace detail {

struct Pt {
    double u, w;
};

// Rectangle [uL,uH]×[wL,wH] clipped by u + w ≤ K, vertices in order.
inline std::vector<Pt> clip_rectangle(double uL, double uH, double wL, double wH, double K) {
    const std::vector<Pt> rect{{uL, wL}, {uH, wL}, {uH, wH}, {uL, wH}};
    std::vector<Pt> out;
    auto inside = [K](const Pt& p) { return p.u + p.w <= K + 1e-9; };
    for (std::size_t i = 0; i < rect.size(); ++i) {
        const Pt& a = rect[i];
        const Pt& b = rect[(i + 1) % rect.size()];
        const bool ia = inside(a), ib = inside(b);
        if (ia) out.push_back(a);
        if (ia != ib) {
            const double da = a.u + a.w - K, db = b.u + b.w - K;
            const double t = da / (da - db);
            out.push_back({a.u + t * (b.u - a.u), a.w + t * (b.w - a.w)});
        }
    }
    return out;
}

}  // namespace detail

/// Three-stratum Neyman design. For each split (i, j) of the samples the
/// objective is a convex quadratic in (N_1, N_3) over a polygon; its minima
/// on the critical line and along every edge are rounded to nearby integer
/// points and the best feasible one kept.
inline DesignResult dirsol(std::span<const std::size_t> ranks, const PrefixSumIndex& gamma,
                           std::size_t N, const DesignConstraints& c) {
    DesignConstraints c3 = c;
    c3.H = 3;
    DesignContext ctx(ranks, gamma, N, c3);
    ctx.require_feasible(3);
    const std::size_t m = ctx.m();
    const std::size_t mf = c.m_floor;
    const std::size_t Nf = std::max<std::size_t>(c.N_floor, 1);
    const double n = double(c.n);
    const double Nd = double(N);
    const auto& r = ctx.ranks();
    detail::BestDesign best;

    // 1-based sample positions: stratum 1 = samples 1..i, stratum 3 = j..m.
    for (std::size_t i = mf; i + mf < m; ++i) {
        for (std::size_t j = i + mf + 1; j + mf <= m + 1; ++j) {
            const double s1 = std::sqrt(stratum_variance(gamma, 0, i));
            const double s2 = std::sqrt(stratum_variance(gamma, i, j - 1));
            const double s3 = std::sqrt(stratum_variance(gamma, j - 1, m));
            const double uL = double(std::max(r[i - 1], Nf));
            const double uH = double(r[i] - 1);
            const double wL = double(std::max(N - r[j - 1] + 1, Nf));
            const double wH = double(N - r[j - 2]);
            const double K = Nd - double(Nf);
            if (uL > uH || wL > wH || uL + wL > K) continue;

            auto f = [&](double u, double w) {
                const double L = s2 * Nd + (s1 - s2) * u + (s3 - s2) * w;
                const double Q = s2 * s2 * Nd + (s1 * s1 - s2 * s2) * u + (s3 * s3 - s2 * s2) * w;
                return L * L / n - Q;
            };
            auto Lof = [&](const detail::Pt& p) {
                return s2 * Nd + (s1 - s2) * p.u + (s3 - s2) * p.w;
            };

            const auto poly = detail::clip_rectangle(uL, uH, wL, wH, K);
            std::vector<detail::Pt> cands(poly.begin(), poly.end());

            // Critical line: every stationary point has L = n(s_a + s2)/2.
            std::optional<double> Lc;
            bool consistent = true;
            for (double sa : {s1, s3}) {
                if (sa == s2) continue;
                const double want = n * (sa + s2) / 2.0;
                if (Lc && std::abs(*Lc - want) > 1e-9 * std::max(1.0, std::abs(want))) consistent = false;
                Lc = want;
            }
            for (std::size_t e = 0; e < poly.size(); ++e) {
                const auto& a = poly[e];
                const auto& b = poly[(e + 1) % poly.size()];
                // Edge minimum of the univariate quadratic.
                const double f0 = f(a.u, a.w);
                const double fh = f((a.u + b.u) / 2, (a.w + b.w) / 2);
                const double f1 = f(b.u, b.w);
                const double qa = 2.0 * (f1 - 2.0 * fh + f0);
                const double qb = f1 - f0 - qa;
                if (qa > 0.0) {
                    const double t = std::clamp(-qb / (2.0 * qa), 0.0, 1.0);
                    cands.push_back({a.u + t * (b.u - a.u), a.w + t * (b.w - a.w)});
                }
                if (Lc && consistent) {
                    const double la = Lof(a), lb = Lof(b);
                    if (la != lb) {
                        const double t = (*Lc - la) / (lb - la);
                        if (t >= 0.0 && t <= 1.0)
                            cands.push_back({a.u + t * (b.u - a.u), a.w + t * (b.w - a.w)});
                    }
                }
            }

            const auto iuL = std::size_t(uL), iuH = std::size_t(uH);
            const auto iwL = std::size_t(wL), iwH = std::size_t(wH);
            const auto iK = std::size_t(K);
            for (const auto& p : cands) {
                for (double uu : {std::floor(p.u + 1e-9), std::ceil(p.u - 1e-9)}) {
                    for (double ww : {std::floor(p.w + 1e-9), std::ceil(p.w - 1e-9)}) {
                        if (uu < 0 || ww < 0) continue;
                        const auto N1 = std::size_t(uu), N3 = std::size_t(ww);
                        if (N1 < iuL || N1 > iuH || N3 < iwL || N3 > iwH || N1 + N3 > iK) continue;
                        const std::size_t bounds[] = {0, N1, N - N3, N};
                        best.offer(f(double(N1), double(N3)), bounds);
                    }
                }
            }
        }
    }
    return best.finish(ctx, AllocationMode::Neyman);
}

// ---------------------------------------------------------------------------
// Candidate boundaries

namespace detail {

// Distinct offsets ⌊base^t⌋ (t = 0, 1, ...) strictly below `limit`.
inline std::vector<std::size_t> power_offsets(double base, std::size_t limit) {
    if (!(base >= 1.0 + 1e-6)) throw ConfigError("logarithmic base must exceed 1");
    std::vector<std::size_t> out;
    const double lb = std::log(base);
    double t = 0.0;
    for (;;) {
        const double v = std::floor(std::pow(base, t) + 1e-9);
        if (v >= double(limit)) break;
        const auto vi = std::size_t(v);
        if (out.empty() || out.back() != vi) out.push_back(vi);
        // Jump to the first t whose floor exceeds v.
        double next = std::max(t + 1.0, std::floor(std::log(v + 1.0) / lb) - 1.0);
        while (std::floor(std::pow(base, next) + 1e-9) <= v) next += 1.0;
        t = next;
    }
    return out;
}

}  // namespace detail

/// B_k for each consecutive pair of sample ranks (k = 1..m−1). A positive
/// `floor` adds the packed positions j·floor and N − j·floor (j < H) that
/// fall inside the gap.
inline std::vector<std::vector<std::size_t>> log_boundaries(std::span<const std::size_t> ranks,
                                                            std::size_t N, double base,
                                                            std::size_t floor = 0,
                                                            std::size_t H = 0) {
    std::vector<std::size_t> packed;
    for (std::size_t j = 1; floor > 0 && j < H && j * floor < N; ++j) {
        packed.push_back(j * floor);
        packed.push_back(N - j * floor);
    }
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t k = 0; k + 1 < ranks.size(); ++k) {
        const std::size_t a = ranks[k], b = ranks[k + 1];
        std::vector<std::size_t> B{a};
        for (std::size_t off : detail::power_offsets(base, b - a)) B.push_back(a + off);
        if (b - 1 > a) B.push_back(b - 1);
        for (std::size_t p : packed)
            if (p >= a && p < b) B.push_back(p);
        std::sort(B.begin(), B.end());
        B.erase(std::unique(B.begin(), B.end()), B.end());
        out.push_back(std::move(B));
    }
    return out;
}

/// LogBdr: every contiguous split of the samples into H groups, each
/// boundary chosen from the candidate set between the straddling samples.
inline DesignResult logbdr(std::span<const std::size_t> ranks, const PrefixSumIndex& gamma,
                           std::size_t N, const DesignConstraints& c, double base = 2.0,
                           AllocationMode mode = AllocationMode::Neyman) {
    DesignContext ctx(ranks, gamma, N, c);
    ctx.require_feasible(c.H);
    const auto B = log_boundaries(ranks, N, base, c.N_floor, c.H);
    const std::size_t H = c.H, m = ctx.m(), mf = c.m_floor;
    const std::size_t Nf = std::max<std::size_t>(c.N_floor, 1);
    detail::BestDesign best;
    std::vector<std::size_t> split(H + 1, 0);  // sample counts before each group
    split[H] = m;
    std::vector<std::size_t> bounds(H + 1, 0);
    bounds[H] = N;
    std::vector<double> s(H);
    std::vector<std::size_t> sizes(H);

    auto choose_bounds = [&](auto&& self, std::size_t h) -> void {
        if (h == H) {
            if (N - bounds[H - 1] < Nf) return;
            for (std::size_t g = 0; g < H; ++g) sizes[g] = bounds[g + 1] - bounds[g];
            best.offer(ctx.objective(sizes, s, mode), bounds);
            return;
        }
        // Boundary h sits between samples split[h]-1 and split[h] (0-based).
        for (std::size_t b : B[split[h] - 1]) {
            if (b < bounds[h - 1] + Nf) continue;
            bounds[h] = b;
            self(self, h + 1);
        }
    };
    auto choose_split = [&](auto&& self, std::size_t h) -> void {
        if (h == H) {
            if (m - split[H - 1] < mf) return;
            for (std::size_t g = 0; g < H; ++g)
                s[g] = std::sqrt(stratum_variance(gamma, split[g], split[g + 1]));
            choose_bounds(choose_bounds, 1);
            return;
        }
        const std::size_t left = H - h;
        for (std::size_t k = split[h - 1] + mf; k + left * mf <= m; ++k) {
            split[h] = k;
            self(self, h + 1);
        }
    };
    choose_split(choose_split, 1);
    return best.finish(ctx, mode);
}

/// Sorted candidate boundaries for the dynamic programs: 0, N, each sample
/// rank, and power offsets up from each rank and down from the next one,
/// all within the gap between consecutive samples. A positive `floor` adds
/// j·floor and N − j·floor for j < H so that layouts packed at the minimum
/// stratum size stay reachable.
inline std::vector<std::size_t> dp_candidates(std::span<const std::size_t> ranks, std::size_t N,
                                              double base = 2.0, std::size_t floor = 0,
                                              std::size_t H = 0) {
    std::vector<std::size_t> B{0, N};
    for (std::size_t j = 1; floor > 0 && j < H && j * floor < N; ++j) {
        B.push_back(j * floor);
        B.push_back(N - j * floor);
    }
    for (std::size_t k = 0; k < ranks.size(); ++k) {
        const std::size_t a = ranks[k];
        const std::size_t next = k + 1 < ranks.size() ? ranks[k + 1] : N + 1;
        B.push_back(a);
        for (std::size_t off : detail::power_offsets(base, next - a)) B.push_back(a + off);
        if (k + 1 < ranks.size()) {
            for (std::size_t off : detail::power_offsets(base, next - a + 1)) B.push_back(next - off);
        }
    }
    std::sort(B.begin(), B.end());
    B.erase(std::unique(B.begin(), B.end()), B.end());
    while (!B.empty() && B.back() > N) B.pop_back();
    return B;
}

/// DynPgm: for each cap t on N_h s_h, a DP over candidate boundaries that
/// carries the running Σ N_h s_h of the best prefix. Best over all t.
inline DesignResult dynpgm(std::span<const std::size_t> ranks, const PrefixSumIndex& gamma,
                           std::size_t N, const DesignConstraints& c, double eps = 0.05) {
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("eps must be in (0,1)");
    DesignContext ctx(ranks, gamma, N, c);
    ctx.require_feasible(c.H);
    const auto B = dp_candidates(ranks, N, 2.0, c.N_floor, c.H);
    const std::size_t L = B.size();
    const std::size_t H = c.H;
    const double n = double(c.n);
    constexpr double inf = std::numeric_limits<double>::infinity();

    std::vector<double> T;
    const auto top = std::size_t(std::ceil(std::log2(double(ctx.m()) * double(H) * double(N))));
    for (std::size_t i = 0; i <= top; ++i) T.push_back(std::ldexp(1.0, int(i)));
    for (std::size_t i = 0; double(i) * eps <= 1.0 + 1e-12; ++i) T.push_back(double(i) * eps);

    // Per-pair stratum data is independent of t.
    std::vector<double> Ns(L * L, -1.0), Ns2(L * L, 0.0);
    for (std::size_t j = 0; j < L; ++j) {
        for (std::size_t i = j + 1; i < L; ++i) {
            if (!ctx.stratum_ok(B[j], B[i])) continue;
            const double v = ctx.s2(B[j], B[i]);
            const double Nh = double(B[i] - B[j]);
            Ns[j * L + i] = Nh * std::sqrt(v);
            Ns2[j * L + i] = Nh * v;
        }
    }

    detail::BestDesign best;
    std::vector<double> A(L * (H + 1)), X(L * (H + 1));
    std::vector<std::size_t> prev(L * (H + 1));
    for (double t : T) {
        std::fill(A.begin(), A.end(), inf);
        A[0] = 0.0;
        X[0] = 0.0;
        for (std::size_t h = 1; h <= H; ++h) {
            for (std::size_t i = 1; i < L; ++i) {
                double bestA = inf, bestX = 0.0;
                std::size_t arg = 0;
                for (std::size_t j = 0; j < i; ++j) {
                    const double a = A[j * (H + 1) + h - 1];
                    if (a == inf) continue;
                    const double ns = Ns[j * L + i];
                    if (ns < 0.0 || ns > t) continue;
                    const double cand =
                        a + ns * ns / n - Ns2[j * L + i] + 2.0 / n * ns * X[j * (H + 1) + h - 1];
                    if (cand < bestA) {
                        bestA = cand;
                        bestX = X[j * (H + 1) + h - 1] + ns;
                        arg = j;
                    }
                }
                A[i * (H + 1) + h] = bestA;
                X[i * (H + 1) + h] = bestX;
                prev[i * (H + 1) + h] = arg;
            }
        }
        const double total = A[(L - 1) * (H + 1) + H];
        if (total == inf) continue;
        std::vector<std::size_t> bounds(H + 1);
        std::size_t i = L - 1;
        for (std::size_t h = H; h > 0; --h) {
            bounds[h] = B[i];
            i = prev[i * (H + 1) + h];
        }
        bounds[0] = 0;
        best.offer(ctx.evaluate(bounds, AllocationMode::Neyman).objective, bounds);
    }
    return best.finish(ctx, AllocationMode::Neyman);
}

/// DynPgmP: separable DP minimizing the proportional-allocation objective.
inline DesignResult dynpgmp(std::span<const std::size_t> ranks, const PrefixSumIndex& gamma,
                            std::size_t N, const DesignConstraints& c, double base = 2.0) {
    DesignContext ctx(ranks, gamma, N, c);
    ctx.require_feasible(c.H);
    const auto B = dp_candidates(ranks, N, base, c.N_floor, c.H);
    const std::size_t L = B.size();
    const std::size_t H = c.H;
    const double factor = (double(N) - double(c.n)) / double(c.n);
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> A(L * (H + 1), inf);
    std::vector<std::size_t> prev(L * (H + 1), 0);
    A[0] = 0.0;
    for (std::size_t h = 1; h <= H; ++h) {
        for (std::size_t i = 1; i < L; ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double a = A[j * (H + 1) + h - 1];
                if (a == inf || !ctx.stratum_ok(B[j], B[i])) continue;
                const double cand = a + factor * double(B[i] - B[j]) * ctx.s2(B[j], B[i]);
                if (cand < A[i * (H + 1) + h]) {
                    A[i * (H + 1) + h] = cand;
                    prev[i * (H + 1) + h] = j;
                }
            }
        }
    }
    if (A[(L - 1) * (H + 1) + H] == inf) throw ConfigError("no feasible stratification");
    std::vector<std::size_t> bounds(H + 1);
    std::size_t i = L - 1;
    for (std::size_t h = H; h > 0; --h) {
        bounds[h] = B[i];
        i = prev[i * (H + 1) + h];
    }
    return ctx.evaluate(bounds, AllocationMode::Proportional);
}

// ---------------------------------------------------------------------------
// Layout baselines

/// Stratum of each score when [0,1] is cut into H equal intervals; empty
/// strata are dropped and the rest renumbered in score order.
inline std::vector<std::size_t> fixed_width_strata(std::span<const double> scores, std::size_t H) {
    if (H == 0) throw ConfigError("H must be positive");
    std::vector<std::size_t> raw(scores.size());
    std::vector<bool> used(H, false);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double s = std::clamp(scores[i], 0.0, 1.0);
        raw[i] = std::min(std::size_t(std::floor(s * double(H))), H - 1);
        used[raw[i]] = true;
    }
    std::vector<std::size_t> remap(H, 0);
    std::size_t next = 0;
    for (std::size_t h = 0; h < H; ++h) {
        if (used[h]) remap[h] = next++;
    }
    for (auto& r : raw) r = remap[r];
    return raw;
}

/// Sizes differing by at most one, remainder to the earliest strata.
inline std::vector<std::size_t> fixed_height_strata(std::size_t N, std::size_t H) {
    if (H == 0 || H > N) throw ConfigError("fixed height requires 1 <= H <= N");
    std::vector<std::size_t> sizes(H, N / H);
    for (std::size_t h = 0; h < N % H; ++h) ++sizes[h];
    return sizes;
}

/// Rank boundaries (with 0 and N) of a fixed-width layout over
/// rank-ordered scores.
inline std::vector<std::size_t> fixed_width_bounds(std::span<const double> sorted_scores,
                                                   std::size_t H) {
    const std::size_t N = sorted_scores.size();
    std::vector<std::size_t> b{0};
    for (std::size_t h = 1; h < H; ++h) {
        const double cut = double(h) / double(H);
        const auto pos = std::size_t(std::lower_bound(sorted_scores.begin(), sorted_scores.end(), cut) -
                                     sorted_scores.begin());
        if (pos > b.back() && pos < N) b.push_back(pos);
    }
    b.push_back(N);
    return b;
}

inline std::vector<std::size_t> fixed_height_bounds(std::size_t N, std::size_t H) {
    std::vector<std::size_t> b{0};
    for (std::size_t sz : fixed_height_strata(N, H)) b.push_back(b.back() + sz);
    return b;
}

/// Best design whose cuts come from equally spaced score ticks. Coarse
/// scores can make fewer than H strata the only feasible layouts, so cut
/// sets of every size up to H−1 are searched.
inline DesignResult tick_design(std::span<const double> sorted_scores,
                                std::span<const std::size_t> ranks, const PrefixSumIndex& gamma,
                                const DesignConstraints& c, double spacing = 0.05,
                                AllocationMode mode = AllocationMode::Neyman) {
    if (!(spacing > 0.0 && spacing < 1.0)) throw ConfigError("tick spacing must be in (0,1)");
    const std::size_t N = sorted_scores.size();
    DesignContext ctx(ranks, gamma, N, c);
    if (c.m_floor < 2) throw ConfigError("m_floor must be at least 2");
    std::vector<std::size_t> cuts;
    for (std::size_t k = 1; double(k) * spacing < 1.0 - 1e-12; ++k) {
        const auto pos = std::size_t(std::lower_bound(sorted_scores.begin(), sorted_scores.end(),
                                                      double(k) * spacing) -
                                     sorted_scores.begin());
        if (pos > 0 && pos < N) cuts.push_back(pos);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    detail::BestDesign best;
    std::vector<std::size_t> bounds{0};
    std::vector<std::size_t> sizes;
    std::vector<double> s;
    auto rec = [&](auto&& self, std::size_t from) -> void {
        const std::size_t lo = bounds.back();
        if (ctx.stratum_ok(lo, N) && bounds.size() >= 2) {
            sizes.push_back(N - lo);
            s.push_back(std::sqrt(ctx.s2(lo, N)));
            bounds.push_back(N);
            best.offer(ctx.objective(sizes, s, mode), bounds);
            bounds.pop_back();
            sizes.pop_back();
            s.pop_back();
        }
        if (bounds.size() >= c.H) return;  // already H−1 cuts
        for (std::size_t k = from; k < cuts.size(); ++k) {
            if (!ctx.stratum_ok(lo, cuts[k])) continue;
            sizes.push_back(cuts[k] - lo);
            s.push_back(std::sqrt(ctx.s2(lo, cuts[k])));
            bounds.push_back(cuts[k]);
            self(self, k + 1);
            bounds.pop_back();
            sizes.pop_back();
            s.pop_back();
        }
    };
    rec(rec, 0);
    return best.finish(ctx, mode);
}

}  // namespace approx_count
