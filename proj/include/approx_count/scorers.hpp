// scorers.hpp
//
// Cheap confidence scorers g: O -> [0,1] that approximate the predicate.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "core.hpp"
#include "predicates.hpp"
#include "rng.hpp"

namespace approx_count {

struct LabeledSample {
    std::size_t index = 0;  // position in the dataset
    bool label = false;
};

class Scorer {
public:
    virtual ~Scorer() = default;
    virtual double score(const DataPoint& o) const = 0;
    bool predict(const DataPoint& o) const { return score(o) >= 0.5; }
};

using ScorerPtr = std::shared_ptr<const Scorer>;

/// Trains a scorer from labeled samples of `dataset`.
using ScorerFactory =
    std::function<ScorerPtr(std::span<const LabeledSample>, const Dataset&)>;

/// Exact k-NN: score = fraction of positives among the k nearest training
/// points. Distance ties go to the lower dataset index. Planar data is
/// searched outward from the query's x position.
class KnnScorer final : public Scorer {
public:
    KnnScorer(std::span<const LabeledSample> train, const Dataset& dataset, std::size_t k)
        : k_(k), dim_(dataset.dimension()) {
        if (k == 0) throw ConfigError("k-NN requires k >= 1");
        if (train.size() < k) throw ConfigError("insufficient training data");
        std::vector<LabeledSample> sorted(train.begin(), train.end());
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.index < b.index; });
        features_.reserve(sorted.size() * dim_);
        for (const auto& s : sorted) {
            const auto& f = dataset[s.index].features;
            features_.insert(features_.end(), f.begin(), f.end());
            labels_.push_back(s.label);
            positives_ += s.label ? 1 : 0;
        }
        if (dim_ == 2) {
            by_x_.resize(labels_.size());
            std::iota(by_x_.begin(), by_x_.end(), std::size_t{0});
            std::sort(by_x_.begin(), by_x_.end(), [&](std::size_t a, std::size_t b) {
                return features_[2 * a] < features_[2 * b];
            });
            for (auto t : by_x_) {
                xs_.push_back(features_[2 * t]);
                ys_.push_back(features_[2 * t + 1]);
            }
        }
    }

    double score(const DataPoint& o) const override {
        if (positives_ == 0) return 0.0;
        if (positives_ == labels_.size()) return 1.0;
        // Training points are stored in index order, so keeping the first of
        // equal distances implements the tie rule.
        constexpr std::size_t kInline = 16;
        std::pair<double, std::size_t> inline_best[kInline + 1];
        std::vector<std::pair<double, std::size_t>> heap_best;
        std::pair<double, std::size_t>* best = inline_best;
        if (k_ > kInline) {
            heap_best.resize(k_ + 1);
            best = heap_best.data();
        }
        // Keep the k smallest (d2, t) pairs in ascending order.
        std::size_t size = 0;
        auto offer = [&](double d2, std::size_t t) {
            if (size == k_ && !(d2 < best[k_ - 1].first || (d2 == best[k_ - 1].first && t < best[k_ - 1].second)))
                return;
            std::size_t pos = size;
            while (pos > 0 && (best[pos - 1].first > d2 || (best[pos - 1].first == d2 && best[pos - 1].second > t))) {
                best[pos] = best[pos - 1];
                --pos;
            }
            best[pos] = {d2, t};
            if (size < k_) ++size;
        };
        auto bound = [&] { return size == k_ ? best[k_ - 1].first : std::numeric_limits<double>::infinity(); };
        const std::size_t n = labels_.size();
        if (dim_ == 2) {
            const double x = o.features[0], y = o.features[1];
            auto visit = [&](std::size_t i) {
                const double dx = xs_[i] - x, dy = ys_[i] - y;
                offer(dx * dx + dy * dy, by_x_[i]);
            };
            const auto mid = std::size_t(std::lower_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
            std::size_t lo = mid, hi = mid;  // unvisited: [0, lo) and [hi, n)
            bool left = lo > 0, right = hi < n;
            while (left || right) {
                if (left) {
                    const double dx = x - xs_[lo - 1];
                    if (dx * dx > bound()) {
                        left = false;
                    } else {
                        visit(--lo);
                        left = lo > 0;
                    }
                }
                if (right) {
                    const double dx = xs_[hi] - x;
                    if (dx * dx > bound()) {
                        right = false;
                    } else {
                        visit(hi++);
                        right = hi < n;
                    }
                }
            }
        } else {
            const double* f = features_.data();
            for (std::size_t t = 0; t < n; ++t, f += dim_) {
                double d2 = 0.0;
                for (std::size_t j = 0; j < dim_; ++j) {
                    const double diff = f[j] - o.features[j];
                    d2 += diff * diff;
                }
                offer(d2, t);
            }
        }
        std::size_t pos = 0;
        for (std::size_t i = 0; i < size; ++i) pos += labels_[best[i].second];
        return double(pos) / double(k_);
    }

    std::size_t k() const { return k_; }

private:
    std::size_t k_;
    std::size_t dim_;
    std::vector<double> features_;
    std::vector<std::uint8_t> labels_;
    std::size_t positives_ = 0;
    std::vector<std::size_t> by_x_;  // training positions ordered by x
    std::vector<double> xs_, ys_;
};

inline ScorerPtr train_knn(std::span<const LabeledSample> train, const Dataset& dataset,
                           std::size_t k) {
    return std::make_shared<KnnScorer>(train, dataset, k);
}

inline ScorerFactory knn_factory(std::size_t k = 3) {
    return [k](std::span<const LabeledSample> train, const Dataset& ds) {
        return train_knn(train, ds, std::min(k, std::max<std::size_t>(train.size(), 1)));
    };
}

/// Arbitrary scores: a hash of (seed, id) mapped uniformly to [0,1).
class RandomScorer final : public Scorer {
public:
    explicit RandomScorer(std::uint64_t seed) : seed_(seed) {}
    double score(const DataPoint& o) const override {
        return hash_uniform(derive_key(seed_, "random-scorer", o.id));
    }

private:
    std::uint64_t seed_;
};

inline ScorerPtr random_scorer(std::uint64_t seed) {
    return std::make_shared<RandomScorer>(seed);
}

inline ScorerFactory random_factory(std::uint64_t seed) {
    return [seed](std::span<const LabeledSample>, const Dataset&) { return random_scorer(seed); };
}

/// Externally computed scores keyed by object id.
class TableScorer final : public Scorer {
public:
    explicit TableScorer(std::unordered_map<std::uint64_t, double> scores)
        : scores_(std::move(scores)) {
        for (const auto& [id, s] : scores_) {
            if (!(s >= 0.0 && s <= 1.0))
                throw ConfigError("score for id " + std::to_string(id) + " outside [0,1]");
        }
    }
    double score(const DataPoint& o) const override {
        auto it = scores_.find(o.id);
        if (it == scores_.end())
            throw ConfigError("no external score for id " + std::to_string(o.id));
        return it->second;
    }
    std::size_t size() const { return scores_.size(); }

private:
    std::unordered_map<std::uint64_t, double> scores_;
};

inline ScorerFactory fixed_factory(ScorerPtr scorer) {
    return [scorer = std::move(scorer)](std::span<const LabeledSample>, const Dataset&) {
        return scorer;
    };
}

/// The b pool entries whose scores are closest to 0.5; ties go to the lower
/// dataset index. Pool entries are dataset positions.
inline std::vector<std::size_t> augment_uncertain(const Scorer& scorer, const Dataset& dataset,
                                                  std::span<const std::size_t> pool,
                                                  std::size_t b) {
    b = std::min(b, pool.size());
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(pool.size());
    for (std::size_t idx : pool) keyed.emplace_back(std::abs(scorer.score(dataset[idx]) - 0.5), idx);
    std::partial_sort(keyed.begin(), keyed.begin() + std::ptrdiff_t(b), keyed.end());
    std::vector<std::size_t> out;
    out.reserve(b);
    for (std::size_t i = 0; i < b; ++i) out.push_back(keyed[i].second);
    return out;
}

struct ErrorRates {
    double tpr = 0.0;
    double fpr = 0.0;
};

/// Pooled true/false positive rates from k-fold cross validation. Folds are
/// a seeded shuffle dealt round-robin.
inline ErrorRates kfold_error_rates(std::span<const LabeledSample> train, const Dataset& dataset,
                                    std::size_t folds, const ScorerFactory& factory,
                                    std::uint64_t seed) {
    if (folds < 2) throw ConfigError("k-fold requires at least 2 folds");
    if (train.size() < folds) throw ConfigError("fewer samples than folds");
    std::size_t pos = 0;
    for (const auto& s : train) pos += s.label ? 1 : 0;
    if (pos == 0 || pos == train.size()) throw DegenerateError("degenerate class balance");

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Stream rng = Stream::derive(seed, "kfold");
    shuffle(order, rng);

    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<LabeledSample> fit, held;
        for (std::size_t r = 0; r < order.size(); ++r) {
            (r % folds == f ? held : fit).push_back(train[order[r]]);
        }
        ScorerPtr model = factory(fit, dataset);
        for (const auto& s : held) {
            const bool predicted = model->predict(dataset[s.index]);
            if (s.label) (predicted ? tp : fn)++;
            else (predicted ? fp : tn)++;
        }
    }
    return {double(tp) / double(tp + fn), double(fp) / double(fp + tn)};
}

/// Uniform labeled sample S^L and the frame O∖S^L it leaves behind.
struct LearningSample {
    std::vector<LabeledSample> labeled;
    std::vector<std::size_t> frame;  // dataset positions not in S^L, ascending
    std::size_t positives = 0;       // C over S^L
};

inline LearningSample draw_learning_sample(CountingOracle& oracle, const Dataset& dataset,
                                           std::size_t n, Stream& rng) {
    if (n > dataset.size()) throw ConfigError("learning sample larger than dataset");
    LearningSample out;
    std::vector<bool> taken(dataset.size(), false);
    for (std::size_t i : sample_indices(dataset.size(), n, rng)) {
        const bool label = oracle(i);
        out.labeled.push_back({i, label});
        out.positives += label ? 1 : 0;
        taken[i] = true;
    }
    out.frame.reserve(dataset.size() - n);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (!taken[i]) out.frame.push_back(i);
    }
    return out;
}

/// Precision/recall harmonic mean of scorer predictions against labels.
inline double f1_score(const Scorer& scorer, const Dataset& dataset,
                       std::span<const std::size_t> indices, const std::vector<bool>& labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i : indices) {
        const bool pred = scorer.predict(dataset[i]);
        if (pred && labels[i]) ++tp;
        else if (pred) ++fp;
        else if (labels[i]) ++fn;
    }
    if (tp == 0) return 0.0;
    return 2.0 * double(tp) / double(2 * tp + fp + fn);
}

}  // namespace approx_count
