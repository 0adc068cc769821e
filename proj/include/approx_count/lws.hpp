// lws.hpp
//
// Learned weighted sampling: draw without replacement with probability
// proportional to max(g(o), ε) and estimate with the ordered Des Raj
// estimator, which stays unbiased for any choice of positive π.
#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "core.hpp"
#include "predicates.hpp"
#include "rng.hpp"
#include "scorers.hpp"

namespace approx_count {

struct Draw {
    std::size_t index = 0;  // dataset position
    double pi = 0.0;        // initial normalized probability
    bool label = false;
};

using DrawSequence = std::vector<Draw>;

inline std::vector<double> lws_probabilities(std::span<const double> scores, double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    std::vector<double> pi(scores.size());
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        pi[i] = std::max(scores[i], epsilon);
        total += pi[i];
    }
    for (double& v : pi) v /= total;
    return pi;
}

struct DesRajTrace {
    std::vector<double> p;         // per-draw p_i
    std::vector<double> p_hat;     // running mean after i draws
    std::vector<double> var_hat;   // running variance estimate (0 at step 1)
};

/// Running Des Raj estimates of the positive fraction of an N-object frame.
inline DesRajTrace des_raj_running(std::span<const Draw> draws, std::size_t N) {
    if (draws.empty()) throw ConfigError("Des Raj estimator needs at least one draw");
    if (N == 0) throw ConfigError("frame size must be positive");
    DesRajTrace t;
    double q_prefix = 0.0, pi_prefix = 0.0;
    double sum = 0.0, sum_sq = 0.0;
    const double invN = 1.0 / double(N);
    for (std::size_t i = 0; i < draws.size(); ++i) {
        const auto& d = draws[i];
        if (!(d.pi > 0.0)) throw ConfigError("draw probability must be positive");
        const double q = d.label ? 1.0 : 0.0;
        const double p = invN * (q_prefix + q / d.pi * (1.0 - pi_prefix));
        q_prefix += q;
        pi_prefix += d.pi;
        t.p.push_back(p);
        sum += p;
        sum_sq += p * p;
        const double n = double(i + 1);
        const double mean = sum / n;
        t.p_hat.push_back(mean);
        t.var_hat.push_back(i == 0 ? 0.0
                                   : std::max(0.0, (sum_sq - n * mean * mean) / (n * (n - 1.0))));
    }
    return t;
}

struct LwsConfig {
    Budget budget;
    ScorerFactory factory = knn_factory(3);
    double epsilon = 0.01;
    double alpha = 0.05;
};

/// Two-phase LWS. A fixed scorer (factory ignoring its input) still consumes
/// the learning share so budgets stay comparable across scorers.
inline Estimate lws_estimate(CountingOracle& oracle, const Dataset& dataset, const LwsConfig& cfg,
                             std::uint64_t seed) {
    cfg.budget.validate();
    const std::size_t n = cfg.budget.total_samples;
    if (n > dataset.size()) throw ConfigError("budget exceeds dataset size");
    const std::size_t n_learn = cfg.budget.learn_samples();
    if (n_learn == 0) throw ConfigError("insufficient training data");
    const std::size_t n_draw = n - n_learn;
    if (n_draw < 2) throw ConfigError("LWS needs at least 2 estimation draws");
    const std::uint64_t calls0 = oracle.calls();

    Estimate e;
    e.method = "lws";
    e.seed = seed;
    Stream rng = Stream::derive(seed, "lws");
    OverheadClock clock(oracle);
    auto learn = draw_learning_sample(oracle, dataset, n_learn, rng);
    ScorerPtr scorer = cfg.factory(learn.labeled, dataset);
    e.overhead.learn_ms = clock.lap();

    std::vector<double> scores;
    scores.reserve(learn.frame.size());
    for (std::size_t i : learn.frame) scores.push_back(scorer->score(dataset[i]));
    const auto pi = lws_probabilities(scores, cfg.epsilon);
    e.overhead.design_ms = clock.lap();

    const auto order = weighted_sample_without_replacement(pi, n_draw, rng);
    DrawSequence draws;
    draws.reserve(order.size());
    for (std::size_t slot : order) {
        draws.push_back({learn.frame[slot], pi[slot], oracle(learn.frame[slot])});
    }
    const std::size_t M = learn.frame.size();
    const auto trace = des_raj_running(draws, M);

    // A full census is known exactly; the last p_i alone equals C/M there.
    const bool census = n_draw == M;
    const double p_hat = census ? trace.p.back() : trace.p_hat.back();
    e.count = double(learn.positives) + p_hat * double(M);
    e.proportion = e.count / double(dataset.size());
    e.variance = census ? 0.0 : double(M) * double(M) * trace.var_hat.back();
    const double half = z_critical(cfg.alpha) * std::sqrt(*e.variance);
    e.ci = std::pair{e.count - half, e.count + half};
    e.overhead.apply_ms = clock.lap();
    e.oracle_calls = oracle.calls() - calls0;
    return e;
}

}  // namespace approx_count
