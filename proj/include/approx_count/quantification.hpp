// quantification.hpp
//
// Learning-based estimators: classify-and-count, adjusted count, and
// sample-clean style correction of the classifier's count.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"
#include "predicates.hpp"
#include "rng.hpp"
#include "scorers.hpp"

namespace approx_count {

struct QuantifyConfig {
    Budget budget;
    ScorerFactory factory = knn_factory(3);
    std::size_t folds = 5;
    double correction_fraction = 0.75;  // QLSC share of the budget spent on S'
    double delta = 0.05;                // QLAC degeneracy threshold on tpr - fpr
    double alpha = 0.05;

    void validate(std::size_t N) const {
        budget.validate();
        if (budget.total_samples > N) throw ConfigError("budget exceeds dataset size");
        if (correction_fraction < 0.0 || correction_fraction >= 1.0)
            throw ConfigError("correction fraction must be in [0,1)");
        if (!factory) throw ConfigError("no scorer factory configured");
    }
};

/// (C_obs − fpr·M)/(tpr − fpr) clamped to [0, M].
inline double adjusted_count(double c_obs, std::size_t frame_size, double tpr, double fpr,
                             double delta = 0.05) {
    if (tpr - fpr <= delta)
        throw DegenerateError("degenerate adjustment; classifier no better than chance");
    const double M = double(frame_size);
    return std::clamp((c_obs - fpr * M) / (tpr - fpr), 0.0, M);
}

/// C_obs − ε̂·M where ε̂ is the mean of f(o) − q(o) over the correction sample.
inline double corrected_count(double c_obs, std::size_t frame_size, double error_sum,
                              std::size_t correction_size) {
    if (correction_size == 0) throw ConfigError("empty correction sample");
    return c_obs - error_sum / double(correction_size) * double(frame_size);
}

namespace detail {

struct ClassifiedFrame {
    LearningSample learn;
    ScorerPtr scorer;
    std::vector<bool> predicted;  // aligned with learn.frame
    std::size_t c_obs = 0;
};

inline ClassifiedFrame classify_frame(CountingOracle& oracle, const Dataset& dataset,
                                      std::size_t n_learn, const ScorerFactory& factory,
                                      Stream& rng, Overhead& overhead) {
    if (n_learn == 0) throw ConfigError("insufficient training data");
    OverheadClock clock(oracle);
    ClassifiedFrame out;
    out.learn = draw_learning_sample(oracle, dataset, n_learn, rng);
    out.scorer = factory(out.learn.labeled, dataset);
    overhead.learn_ms += clock.lap();
    out.predicted.reserve(out.learn.frame.size());
    for (std::size_t i : out.learn.frame) {
        const bool f = out.scorer->predict(dataset[i]);
        out.predicted.push_back(f);
        out.c_obs += f ? 1 : 0;
    }
    overhead.apply_ms += clock.lap();
    return out;
}

}  // namespace detail

/// QLCC: train on the whole budget, count predicted positives on the rest.
inline Estimate qlcc_estimate(CountingOracle& oracle, const Dataset& dataset,
                              const QuantifyConfig& cfg, std::uint64_t seed) {
    cfg.validate(dataset.size());
    const std::uint64_t calls0 = oracle.calls();
    Estimate e;
    e.method = "qlcc";
    e.seed = seed;
    Stream rng = Stream::derive(seed, "qlcc");
    auto cf = detail::classify_frame(oracle, dataset, cfg.budget.total_samples, cfg.factory, rng,
                                     e.overhead);
    e.count = double(cf.c_obs + cf.learn.positives);
    e.proportion = e.count / double(dataset.size());
    e.oracle_calls = oracle.calls() - calls0;
    return e;
}

/// QLAC: classify-and-count corrected by k-fold estimates of tpr and fpr.
inline Estimate qlac_estimate(CountingOracle& oracle, const Dataset& dataset,
                              const QuantifyConfig& cfg, std::uint64_t seed) {
    cfg.validate(dataset.size());
    const std::uint64_t calls0 = oracle.calls();
    Estimate e;
    e.method = "qlac";
    e.seed = seed;
    Stream rng = Stream::derive(seed, "qlac");
    auto cf = detail::classify_frame(oracle, dataset, cfg.budget.total_samples, cfg.factory, rng,
                                     e.overhead);
    OverheadClock clock(oracle);
    const auto rates = kfold_error_rates(cf.learn.labeled, dataset, cfg.folds, cfg.factory,
                                         derive_key(seed, "qlac-folds"));
    const double adj =
        adjusted_count(double(cf.c_obs), cf.learn.frame.size(), rates.tpr, rates.fpr, cfg.delta);
    e.overhead.learn_ms += clock.lap();
    e.count = adj + double(cf.learn.positives);
    e.proportion = e.count / double(dataset.size());
    e.oracle_calls = oracle.calls() - calls0;
    return e;
}

/// QLSC: classify-and-count on the learning share, then estimate the mean
/// classification error f − q on a uniform correction sample of the frame.
inline Estimate qlsc_estimate(CountingOracle& oracle, const Dataset& dataset,
                              const QuantifyConfig& cfg, std::uint64_t seed) {
    cfg.validate(dataset.size());
    const std::size_t n = cfg.budget.total_samples;
    const auto n_corr =
        static_cast<std::size_t>(std::floor(cfg.correction_fraction * double(n)));
    if (n_corr < 2) throw ConfigError("QLSC correction sample must have at least 2 objects");
    const std::size_t n_learn = n - n_corr;
    const std::uint64_t calls0 = oracle.calls();

    Estimate e;
    e.method = "qlsc";
    e.seed = seed;
    Stream rng = Stream::derive(seed, "qlsc");
    auto cf = detail::classify_frame(oracle, dataset, n_learn, cfg.factory, rng, e.overhead);
    const std::size_t M = cf.learn.frame.size();
    if (n_corr > M) throw ConfigError("correction sample larger than frame");

    OverheadClock clock(oracle);
    std::vector<std::size_t> slots(M);
    for (std::size_t i = 0; i < M; ++i) slots[i] = i;
    const auto picked = sample_without_replacement<std::size_t>(slots, n_corr, rng);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t slot : picked) {
        const double err = double(cf.predicted[slot]) - double(oracle(cf.learn.frame[slot]));
        sum += err;
        sum_sq += err * err;
    }
    const double m = double(n_corr);
    const double mean = sum / m;
    const double s2 = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
    const double fpc = 1.0 - m / double(M);

    e.count = corrected_count(double(cf.c_obs), M, sum, n_corr) + double(cf.learn.positives);
    e.proportion = e.count / double(dataset.size());
    e.variance = double(M) * double(M) * s2 / m * std::max(0.0, fpc);
    const double half = z_critical(cfg.alpha) * std::sqrt(*e.variance);
    e.ci = std::pair{e.count - half, e.count + half};
    e.overhead.apply_ms += clock.lap();
    e.oracle_calls = oracle.calls() - calls0;
    return e;
}

}  // namespace approx_count
