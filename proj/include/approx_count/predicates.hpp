// predicates.hpp
//
// Expensive predicate oracles. Every evaluation through a CountingOracle is
// one unit of cost, regardless of how much scanning the predicate does.
#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "core.hpp"

namespace approx_count {

/// q(o) for the object at position `index` of the dataset.
using Predicate = std::function<bool(const Dataset&, std::size_t index)>;

/// Wraps a predicate and counts evaluations. One oracle per trial; the
/// counter is never shared between concurrent trials.
class CountingOracle {
public:
    CountingOracle(Predicate predicate, const Dataset& dataset, double simulated_cost_ms = 0.0)
        : predicate_(std::move(predicate)), dataset_(&dataset),
          simulated_cost_ms_(simulated_cost_ms) {}

    bool operator()(std::size_t index) {
        const auto start = std::chrono::steady_clock::now();
        ++calls_;
        const bool result = predicate_(*dataset_, index);
        if (simulated_cost_ms_ > 0.0) {
            std::this_thread::sleep_for(
                std::chrono::duration<double, std::milli>(simulated_cost_ms_));
        }
        busy_ += std::chrono::steady_clock::now() - start;
        return result;
    }

    std::uint64_t calls() const { return calls_; }
    /// Wall time spent inside predicate evaluation, in milliseconds.
    double busy_ms() const {
        return std::chrono::duration<double, std::milli>(busy_).count();
    }
    const Dataset& dataset() const { return *dataset_; }
    const Predicate& predicate() const { return predicate_; }
    double simulated_cost_ms() const { return simulated_cost_ms_; }

private:
    Predicate predicate_;
    const Dataset* dataset_;
    double simulated_cost_ms_;
    std::uint64_t calls_ = 0;
    std::chrono::steady_clock::duration busy_{};
};

/// Measures wall time of a phase minus the oracle's busy time in it.
class OverheadClock {
public:
    explicit OverheadClock(const CountingOracle& oracle)
        : oracle_(&oracle), start_(std::chrono::steady_clock::now()), busy0_(oracle.busy_ms()) {}

    /// Overhead since construction or the last lap, in milliseconds.
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double busy = oracle_->busy_ms();
        const double wall = std::chrono::duration<double, std::milli>(now - start_).count();
        const double out = std::max(0.0, wall - (busy - busy0_));
        start_ = now;
        busy0_ = busy;
        return out;
    }

private:
    const CountingOracle* oracle_;
    std::chrono::steady_clock::time_point start_;
    double busy0_;
};

/// C(O, q): evaluates the oracle on every object (exactly N calls).
template <class Oracle>
std::uint64_t exact_count(Oracle& oracle, const Dataset& dataset) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < dataset.size(); ++i) total += oracle(i) ? 1 : 0;
    return total;
}

/// Per-object labels of a full evaluation; exactly N oracle calls.
template <class Oracle>
std::vector<bool> evaluate_all(Oracle& oracle, const Dataset& dataset) {
    std::vector<bool> labels(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) labels[i] = oracle(i);
    return labels;
}

/// Predicate backed by precomputed labels (same answers, O(1) per call).
inline Predicate label_table_predicate(std::shared_ptr<const std::vector<bool>> labels) {
    return [labels = std::move(labels)](const Dataset&, std::size_t i) { return (*labels)[i]; };
}

enum class Comparator { Less, LessEqual };

inline bool compare(double value, double bound, Comparator cmp) {
    return cmp == Comparator::Less ? value < bound : value <= bound;
}

namespace detail {
inline void require_2d(const Dataset& dataset, const char* what) {
    if (dataset.dimension() != 2)
        throw ConfigError(std::string(what) + " requires 2-dimensional points");
}
}  // namespace detail

/// Number of points p with p.x ≥ o.x, p.y ≥ o.y and at least one strict.
inline std::size_t dominance_count(const DataPoint& o, const Dataset& dataset) {
    std::size_t c = 0;
    for (const auto& p : dataset.points()) {
        if (p.x() >= o.x() && p.y() >= o.y() && (p.x() > o.x() || p.y() > o.y())) ++c;
    }
    return c;
}

/// k-skyband membership: dominated by fewer than k others (comparator
/// configurable; default strict).
inline bool skyband_predicate(const DataPoint& o, const Dataset& dataset, std::size_t k,
                              Comparator cmp = Comparator::Less) {
    detail::require_2d(dataset, "skyband predicate");
    return compare(double(dominance_count(o, dataset)), double(k), cmp);
}

/// Number of points within Euclidean distance d of o; o itself excluded
/// unless include_self is set.
inline std::size_t neighbor_count(const DataPoint& o, const Dataset& dataset, double d,
                                  bool include_self = false) {
    const double d2 = d * d;
    std::size_t c = 0;
    for (const auto& p : dataset.points()) {
        if (!include_self && p.id == o.id) continue;
        const double dx = p.x() - o.x();
        const double dy = p.y() - o.y();
        if (dx * dx + dy * dy <= d2) ++c;
    }
    return c;
}

/// Few-neighbors predicate: at most k other points within distance d.
inline bool neighbors_predicate(const DataPoint& o, const Dataset& dataset, std::size_t k,
                                double d, Comparator cmp = Comparator::LessEqual,
                                bool include_self = false) {
    detail::require_2d(dataset, "neighbors predicate");
    if (!(d > 0.0)) throw ConfigError("neighbors predicate requires d > 0");
    return compare(double(neighbor_count(o, dataset, d, include_self)), double(k), cmp);
}

/// Noise count c' per object id, fixed once generated.
class NoiseTable {
public:
    NoiseTable() = default;
    explicit NoiseTable(std::unordered_map<std::uint64_t, std::int64_t> counts)
        : counts_(std::move(counts)) {}

    std::int64_t at(std::uint64_t id) const {
        auto it = counts_.find(id);
        if (it == counts_.end())
            throw ConfigError("noise table has no entry for id " + std::to_string(id));
        return it->second;
    }
    bool contains(std::uint64_t id) const { return counts_.count(id) != 0; }
    std::size_t size() const { return counts_.size(); }
    void set(std::uint64_t id, std::int64_t c) { counts_[id] = c; }

private:
    std::unordered_map<std::uint64_t, std::int64_t> counts_;
};

/// Mixed count (1−α)c + αc'.
inline double mix_counts(double c, double c_noise, double alpha) {
    return (1.0 - alpha) * c + alpha * c_noise;
}

/// Skyband test on the mixed count (1−α)·dominance + α·noise < k.
inline bool noisy_skyband_predicate(const DataPoint& o, const Dataset& dataset, std::size_t k,
                                    double alpha, const NoiseTable& noise,
                                    Comparator cmp = Comparator::Less) {
    detail::require_2d(dataset, "skyband predicate");
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("mixing alpha must be in [0,1]");
    const double c_noise = double(noise.at(o.id));
    if (alpha == 1.0) return compare(c_noise, double(k), cmp);
    const double c = double(dominance_count(o, dataset));
    return compare(mix_counts(c, c_noise, alpha), double(k), cmp);
}

/// Half-plane test w·o ≥ offset; a linearly separable synthetic predicate.
inline bool halfplane_predicate(const DataPoint& o, std::span<const double> w, double offset) {
    double dot = 0.0;
    for (std::size_t i = 0; i < w.size() && i < o.features.size(); ++i) dot += w[i] * o.features[i];
    return dot >= offset;
}

// Adapters to the oracle signature.

inline Predicate make_skyband(std::size_t k, Comparator cmp = Comparator::Less) {
    return [k, cmp](const Dataset& ds, std::size_t i) { return skyband_predicate(ds[i], ds, k, cmp); };
}

inline Predicate make_neighbors(std::size_t k, double d, Comparator cmp = Comparator::LessEqual,
                                bool include_self = false) {
    return [k, d, cmp, include_self](const Dataset& ds, std::size_t i) {
        return neighbors_predicate(ds[i], ds, k, d, cmp, include_self);
    };
}

inline Predicate make_noisy_skyband(std::size_t k, double alpha,
                                    std::shared_ptr<const NoiseTable> noise,
                                    Comparator cmp = Comparator::Less) {
    return [k, alpha, noise = std::move(noise), cmp](const Dataset& ds, std::size_t i) {
        return noisy_skyband_predicate(ds[i], ds, k, alpha, *noise, cmp);
    };
}

inline Predicate make_halfplane(std::vector<double> w, double offset) {
    return [w = std::move(w), offset](const Dataset& ds, std::size_t i) {
        return halfplane_predicate(ds[i], w, offset);
    };
}

}  // namespace approx_count
