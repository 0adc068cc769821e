// lss.hpp
//
// Learned stratified sampling: order the unlabeled frame by classifier score,
// design score-contiguous strata from a first-stage sample, then estimate
// with a second-stage stratified sample.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "core.hpp"
#include "predicates.hpp"
#include "rng.hpp"
#include "sampling.hpp"
#include "scorers.hpp"
#include "stratification.hpp"

namespace approx_count {

enum class Optimizer { DirSol, LogBdr, DynPgm, DynPgmP, FixedWidth, FixedHeight, Ticks };

inline Optimizer parse_optimizer(const std::string& s) {
    if (s == "dirsol") return Optimizer::DirSol;
    if (s == "logbdr") return Optimizer::LogBdr;
    if (s == "dynpgm") return Optimizer::DynPgm;
    if (s == "dynpgmp") return Optimizer::DynPgmP;
    if (s == "fixed_width") return Optimizer::FixedWidth;
    if (s == "fixed_height") return Optimizer::FixedHeight;
    if (s == "ticks") return Optimizer::Ticks;
    throw ConfigError("unknown optimizer '" + s + "'");
}

inline const char* to_string(Optimizer o) {
    switch (o) {
        case Optimizer::DirSol: return "dirsol";
        case Optimizer::LogBdr: return "logbdr";
        case Optimizer::DynPgm: return "dynpgm";
        case Optimizer::DynPgmP: return "dynpgmp";
        case Optimizer::FixedWidth: return "fixed_width";
        case Optimizer::FixedHeight: return "fixed_height";
        case Optimizer::Ticks: return "ticks";
    }
    return "?";
}

inline AllocationMode parse_allocation(const std::string& s) {
    if (s == "neyman") return AllocationMode::Neyman;
    if (s == "proportional") return AllocationMode::Proportional;
    throw ConfigError("unknown allocation '" + s + "'");
}

struct LssConfig {
    Budget budget;  // design_fraction applies to what is left after learning
    ScorerFactory factory = knn_factory(3);
    std::size_t H = 4;
    Optimizer optimizer = Optimizer::Ticks;
    AllocationMode allocation = AllocationMode::Neyman;
    std::size_t m_floor = 5;
    std::optional<std::size_t> N_floor;  // default: min(n, N'/H)
    double base = 2.0;
    double eps = 0.05;
    double tick_spacing = 0.05;
    double alpha = 0.05;
    std::size_t min_per_stratum = 2;  // stage-2 floor, lowered to max(2, n2/H) when short
    bool reuse_design_samples = false;
    bool smooth_pure_strata = true;  // stage-2 weight uses s >= sqrt(q(1-q)), q = 0.5/(m_h+1)
};

/// Everything the design stage produced; exposed for inspection and tests.
struct LssDesign {
    std::vector<std::size_t> sorted_frame;  // dataset positions in (score, id) order
    std::vector<double> sorted_scores;
    SampleRanks ranks;
    PrefixSumIndex gamma;
    DesignConstraints constraints;
    DesignResult design;
};

namespace detail {

inline DesignResult run_optimizer(const LssConfig& cfg, const LssDesign& d) {
    const auto& iota = d.ranks.iota;
    const std::size_t N = d.sorted_frame.size();
    DesignContext ctx(iota, d.gamma, N, d.constraints);
    switch (cfg.optimizer) {
        case Optimizer::DirSol:
            if (d.constraints.H != 3) throw ConfigError("dirsol requires H = 3");
            return dirsol(iota, d.gamma, N, d.constraints);
        case Optimizer::LogBdr:
            return logbdr(iota, d.gamma, N, d.constraints, cfg.base, cfg.allocation);
        case Optimizer::DynPgm:
            return dynpgm(iota, d.gamma, N, d.constraints, cfg.eps);
        case Optimizer::DynPgmP:
            return dynpgmp(iota, d.gamma, N, d.constraints, cfg.base);
        case Optimizer::FixedWidth:
            return ctx.evaluate(fixed_width_bounds(d.sorted_scores, d.constraints.H),
                                cfg.allocation, true);
        case Optimizer::FixedHeight:
            return ctx.evaluate(fixed_height_bounds(N, d.constraints.H), cfg.allocation, true);
        case Optimizer::Ticks:
            return tick_design(d.sorted_scores, iota, d.gamma, d.constraints, cfg.tick_spacing,
                               cfg.allocation);
    }
    throw ConfigError("unknown optimizer");
}

}  // namespace detail

inline Estimate lss_estimate(CountingOracle& oracle, const Dataset& dataset, const LssConfig& cfg,
                             std::uint64_t seed, LssDesign* design_out = nullptr) {
    cfg.budget.validate();
    const std::size_t n = cfg.budget.total_samples;
    if (n > dataset.size()) throw ConfigError("budget exceeds dataset size");
    if (cfg.H < 2) throw ConfigError("LSS requires H >= 2");
    const std::size_t n_learn = cfg.budget.learn_samples();
    if (n_learn == 0) throw ConfigError("insufficient training data");
    const std::size_t rest = n - n_learn;
    const auto m = std::size_t(std::floor(cfg.budget.design_fraction * double(rest)));
    const std::size_t n2 = rest - m;
    if (m < 2 * cfg.H) throw ConfigError("first stage needs at least 2 samples per stratum");
    if (n2 < 2 * cfg.H) throw ConfigError("second stage needs at least 2 samples per stratum");
    if (cfg.min_per_stratum < 2) throw ConfigError("min_per_stratum must be at least 2");
    const std::uint64_t calls0 = oracle.calls();

    Estimate e;
    e.method = "lss";
    e.seed = seed;
    Stream rng = Stream::derive(seed, "lss");
    OverheadClock clock(oracle);

    // Phase 1: learn.
    auto learn = draw_learning_sample(oracle, dataset, n_learn, rng);
    ScorerPtr scorer = cfg.factory(learn.labeled, dataset);
    e.overhead.learn_ms = clock.lap();

    // Stage 1: order the frame, locate a uniform pilot, design strata.
    const std::size_t M = learn.frame.size();
    std::vector<double> scores(M);
    std::vector<std::uint64_t> ids(M);
    for (std::size_t k = 0; k < M; ++k) {
        scores[k] = scorer->score(dataset[learn.frame[k]]);
        ids[k] = dataset[learn.frame[k]].id;
    }
    std::vector<std::size_t> order(M);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] != scores[b] ? scores[a] < scores[b] : ids[a] < ids[b];
    });
    LssDesign d;
    d.sorted_frame.resize(M);
    d.sorted_scores.resize(M);
    for (std::size_t r = 0; r < M; ++r) {
        d.sorted_frame[r] = learn.frame[order[r]];
        d.sorted_scores[r] = scores[order[r]];
    }
    e.overhead.design_ms += clock.lap();

    std::vector<std::size_t> slots(M);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    const auto pilot = sample_without_replacement<std::size_t>(slots, m, rng);
    std::vector<bool> pilot_label(m);
    for (std::size_t k = 0; k < m; ++k) pilot_label[k] = oracle(learn.frame[pilot[k]]);
    clock.lap();

    d.ranks = locate_sample_ranks(scores, ids, pilot);
    std::vector<bool> sorted_labels(m);
    for (std::size_t k = 0; k < m; ++k) sorted_labels[k] = pilot_label[d.ranks.order[k]];
    d.gamma = build_prefix_index(sorted_labels);

    d.constraints.H = cfg.H;
    d.constraints.n = n2;
    d.constraints.N_floor = cfg.N_floor ? *cfg.N_floor : std::max<std::size_t>(1, std::min(n2, M / cfg.H));
    d.constraints.m_floor = cfg.m_floor;
    if (cfg.H * d.constraints.m_floor > m) d.constraints.m_floor = std::max<std::size_t>(2, m / cfg.H);
    if (d.constraints.m_floor != cfg.m_floor)
        e.warnings.push_back("m_floor lowered to " + std::to_string(d.constraints.m_floor));
    try {
        d.design = detail::run_optimizer(cfg, d);
    } catch (const ConfigError& err) {
        if (std::string(err.what()) != "no feasible stratification") throw;
        DesignContext ctx(d.ranks.iota, d.gamma, M, d.constraints);
        d.design = ctx.evaluate(fixed_height_bounds(M, cfg.H), cfg.allocation, true);
        e.warnings.push_back(std::string(to_string(cfg.optimizer)) +
                             " infeasible; fell back to fixed_height");
    }
    for (const auto& w : d.design.warnings) e.warnings.push_back(w);
    e.overhead.design_ms += clock.lap();

    // Stage 2: allocate over objects not yet labeled and draw.
    const auto bounds = d.design.boundaries();
    const std::size_t H = d.design.sizes.size();
    std::vector<bool> in_pilot(M, false);  // by rank - 1
    for (std::size_t r : d.ranks.iota) in_pilot[r - 1] = true;
    std::vector<std::vector<std::size_t>> pools(H);
    std::vector<std::size_t> pilot_pos(H, 0);
    for (std::size_t h = 0; h < H; ++h) {
        for (std::size_t r = bounds[h]; r < bounds[h + 1]; ++r) {
            if (!in_pilot[r]) pools[h].push_back(d.sorted_frame[r]);
        }
    }
    {
        std::size_t k = 0;
        for (std::size_t h = 0; h < H; ++h) {
            std::size_t pos = 0;
            while (k < m && d.ranks.iota[k] <= bounds[h + 1]) pos += sorted_labels[k++] ? 1 : 0;
            pilot_pos[h] = pos;
        }
    }
    std::size_t floor2 = cfg.min_per_stratum;
    if (H * floor2 > n2) floor2 = std::max<std::size_t>(2, n2 / H);
    std::vector<double> weights(H), fallback(H);
    std::vector<std::size_t> mins(H), caps(H);
    for (std::size_t h = 0; h < H; ++h) {
        fallback[h] = double(d.design.sizes[h]);
        const double sd = cfg.smooth_pure_strata
                              ? smoothed_stddev(d.design.stddevs[h], d.design.samples[h])
                              : d.design.stddevs[h];
        weights[h] = cfg.allocation == AllocationMode::Neyman ? double(d.design.sizes[h]) * sd
                                                              : fallback[h];
        caps[h] = pools[h].size();
        mins[h] = std::min(floor2, caps[h]);
    }
    const auto alloc = detail::constrained_allocation(weights, fallback, mins, caps, n2);
    e.overhead.design_ms += clock.lap();
    const auto samples = detail::draw_strata(oracle, pools, alloc, rng);
    clock.lap();

    double count = 0.0, var = 0.0;
    std::size_t thin = 0;
    for (std::size_t h = 0; h < H; ++h) {
        const double avail = double(pools[h].size());
        const auto& sh = samples[h];
        if (sh.drawn == pools[h].size()) {
            // Every object of the stratum has been labeled.
            count += double(sh.positives + pilot_pos[h]);
            continue;
        }
        if (sh.drawn < 2) ++thin;
        const double Nw = cfg.reuse_design_samples ? avail : double(d.design.sizes[h]);
        if (cfg.reuse_design_samples) count += double(pilot_pos[h]);
        count += Nw * sh.mean();
        var += Nw * Nw * sh.variance() / double(sh.drawn) * (1.0 - double(sh.drawn) / avail);
    }
    if (thin > 0)
        e.warnings.push_back(std::to_string(thin) +
                             " strata with fewer than 2 samples contribute zero variance");
    e.count = double(learn.positives) + count;
    e.proportion = e.count / double(dataset.size());
    e.variance = var;
    detail::attach_normal_ci(e, cfg.alpha, 0.0, double(dataset.size()));
    e.overhead.apply_ms = clock.lap();
    e.oracle_calls = oracle.calls() - calls0;
    if (design_out) *design_out = std::move(d);
    return e;
}

}  // namespace approx_count
