#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "approx_count/quantification.hpp"

using namespace approx_count;

namespace {

struct Instance {
    Dataset ds;
    std::shared_ptr<const std::vector<bool>> labels;
    std::size_t truth;
    CountingOracle oracle() const { return CountingOracle(label_table_predicate(labels), ds); }
};

Instance halfplane_instance(std::size_t N, double threshold, std::uint64_t seed) {
    Stream rng(seed);
    std::vector<DataPoint> pts;
    std::vector<bool> labels;
    for (std::size_t i = 0; i < N; ++i) {
        const double x = rng.uniform(), y = rng.uniform();
        pts.push_back({i, {x, y}});
        labels.push_back(x + y > threshold);
    }
    const auto truth = std::size_t(std::count(labels.begin(), labels.end(), true));
    return {Dataset(pts, 2), std::make_shared<const std::vector<bool>>(std::move(labels)), truth};
}

ScorerPtr label_scorer(const Instance& inst, bool invert = false) {
    std::unordered_map<std::uint64_t, double> m;
    for (std::size_t i = 0; i < inst.ds.size(); ++i) m[inst.ds[i].id] = ((*inst.labels)[i] != invert) ? 1.0 : 0.0;
    return std::make_shared<TableScorer>(std::move(m));
}

ScorerPtr constant_scorer(const Instance& inst, double v) {
    std::unordered_map<std::uint64_t, double> m;
    for (std::size_t i = 0; i < inst.ds.size(); ++i) m[inst.ds[i].id] = v;
    return std::make_shared<TableScorer>(std::move(m));
}

QuantifyConfig config(std::size_t n, ScorerFactory f) {
    QuantifyConfig c;
    c.budget.total_samples = n;
    c.factory = std::move(f);
    return c;
}

}  // namespace

TEST(AdjustedCount, Identity) {
    EXPECT_DOUBLE_EQ(adjusted_count(37, 100, 1.0, 0.0), 37.0);
}

TEST(AdjustedCount, WorkedValue) {
    EXPECT_NEAR(adjusted_count(60, 100, 0.8, 0.2), 40.0 / 0.6, 1e-12);
    EXPECT_NEAR(adjusted_count(60, 100, 0.8, 0.2), 66.667, 1e-3);
}

TEST(AdjustedCount, DegenerateAndClamp) {
    try {
        adjusted_count(10, 100, 0.35, 0.95);
        FAIL();
    } catch (const DegenerateError& e) {
        EXPECT_STREQ(e.what(), "degenerate adjustment; classifier no better than chance");
    }
    EXPECT_THROW(adjusted_count(10, 100, 0.5, 0.46), DegenerateError);
    EXPECT_EQ(adjusted_count(0, 100, 0.9, 0.3), 0.0);
    EXPECT_EQ(adjusted_count(100, 100, 0.6, 0.0), 100.0);
}

TEST(AdjustedCount, InvertsTrueConfusion) {
    // With the scorer's true rates on the frame, the adjustment recovers the
    // frame's positive count exactly.
    auto inst = halfplane_instance(400, 1.0, 3);
    auto g = random_scorer(8);
    Stream rng(1);
    auto learn_idx = sample_indices(400, 40, rng);
    std::vector<bool> in_s(400, false);
    std::size_t c_s = 0;
    for (auto i : learn_idx) {
        in_s[i] = true;
        c_s += (*inst.labels)[i];
    }
    double tp = 0, fn = 0, fp = 0, tn = 0, c_obs = 0;
    std::size_t M = 0;
    for (std::size_t i = 0; i < 400; ++i) {
        if (in_s[i]) continue;
        ++M;
        // Threshold below 0.5 so the random scorer is weakly informative by luck.
        const bool f = g->score(inst.ds[i]) >= 0.5 || inst.ds[i].x() > 0.8;
        const bool q = (*inst.labels)[i];
        c_obs += f;
        if (q) (f ? tp : fn)++;
        else (f ? fp : tn)++;
    }
    const double adj = adjusted_count(c_obs, M, tp / (tp + fn), fp / (fp + tn));
    EXPECT_NEAR(adj + double(c_s), double(inst.truth), 1e-9);
}

TEST(CorrectedCount, WorkedValue) {
    EXPECT_DOUBLE_EQ(corrected_count(60, 100, 2.0, 10), 40.0);
}

TEST(Qlcc, PerfectScorerExact) {
    auto inst = halfplane_instance(300, 1.0, 1);
    auto o = inst.oracle();
    auto e = qlcc_estimate(o, inst.ds, config(30, fixed_factory(label_scorer(inst))), 4);
    EXPECT_DOUBLE_EQ(e.count, double(inst.truth));
    EXPECT_FALSE(e.ci.has_value());
    EXPECT_FALSE(e.variance.has_value());
    EXPECT_EQ(e.oracle_calls, 30u);
}

TEST(Qlcc, AllPositiveScorer) {
    auto inst = halfplane_instance(300, 1.0, 1);
    auto o = inst.oracle();
    auto cfg = config(30, fixed_factory(constant_scorer(inst, 1.0)));
    auto e = qlcc_estimate(o, inst.ds, cfg, 4);
    // Replay the learning draw to get C_S.
    Stream rng = Stream::derive(4, "qlcc");
    std::size_t c_s = 0;
    for (auto i : sample_indices(300, 30, rng)) c_s += (*inst.labels)[i];
    EXPECT_DOUBLE_EQ(e.count, 270.0 + double(c_s));
}

TEST(Qlcc, OneNnReplay) {
    auto inst = halfplane_instance(100, 1.0, 12);
    auto o = inst.oracle();
    const std::uint64_t seed = 31;
    auto e = qlcc_estimate(o, inst.ds, config(20, knn_factory(1)), seed);

    // Independent 1-NN: nearest training point by squared distance, ties to
    // the lower dataset index.
    Stream rng = Stream::derive(seed, "qlcc");
    auto train = sample_indices(100, 20, rng);
    std::sort(train.begin(), train.end());
    std::vector<bool> in_s(100, false);
    double count = 0;
    for (auto i : train) {
        in_s[i] = true;
        count += (*inst.labels)[i];
    }
    for (std::size_t i = 0; i < 100; ++i) {
        if (in_s[i]) continue;
        double best = 1e300;
        bool label = false;
        for (auto t : train) {
            const double dx = inst.ds[i].x() - inst.ds[t].x(), dy = inst.ds[i].y() - inst.ds[t].y();
            const double d = dx * dx + dy * dy;
            if (d < best) {
                best = d;
                label = (*inst.labels)[t];
            }
        }
        count += label;
    }
    EXPECT_DOUBLE_EQ(e.count, count);
}

TEST(Qlcc, WithinFrameBounds) {
    auto inst = halfplane_instance(200, 1.3, 2);
    for (std::uint64_t s = 0; s < 50; ++s) {
        auto o = inst.oracle();
        auto e = qlcc_estimate(o, inst.ds, config(20, knn_factory(3)), s);
        Stream rng = Stream::derive(s, "qlcc");
        std::size_t c_s = 0;
        for (auto i : sample_indices(200, 20, rng)) c_s += (*inst.labels)[i];
        EXPECT_GE(e.count, double(c_s));
        EXPECT_LE(e.count, double(180 + c_s));
    }
}

TEST(Qlac, RunsAndAccountsCalls) {
    auto inst = halfplane_instance(500, 1.0, 5);
    auto o = inst.oracle();
    auto e = qlac_estimate(o, inst.ds, config(60, knn_factory(3)), 2);
    EXPECT_EQ(e.oracle_calls, 60u);
    EXPECT_GE(e.count, 0.0);
    EXPECT_LE(e.count, 500.0);
}

TEST(Qlac, DegenerateScorer) {
    // Inverted labels give tpr = 0, fpr = 1.
    auto inst = halfplane_instance(300, 1.0, 1);
    auto o = inst.oracle();
    auto cfg = config(40, fixed_factory(label_scorer(inst, true)));
    EXPECT_THROW(qlac_estimate(o, inst.ds, cfg, 4), DegenerateError);
}

TEST(Qlsc, PerfectScorerMatchesQlcc) {
    auto inst = halfplane_instance(300, 1.0, 1);
    auto cfg = config(40, fixed_factory(label_scorer(inst)));
    auto o = inst.oracle();
    auto e = qlsc_estimate(o, inst.ds, cfg, 4);
    EXPECT_DOUBLE_EQ(e.count, double(inst.truth));
    EXPECT_DOUBLE_EQ(*e.variance, 0.0);
    EXPECT_DOUBLE_EQ(e.ci->first, e.count);
    EXPECT_EQ(e.oracle_calls, 40u);
}

TEST(Qlsc, FullCorrectionExact) {
    auto inst = halfplane_instance(100, 1.0, 6);
    auto cfg = config(100, fixed_factory(random_scorer(3)));
    auto o = inst.oracle();
    auto e = qlsc_estimate(o, inst.ds, cfg, 8);
    EXPECT_DOUBLE_EQ(e.count, double(inst.truth));
}

TEST(Qlsc, TooSmallCorrection) {
    auto inst = halfplane_instance(100, 1.0, 6);
    auto o = inst.oracle();
    EXPECT_THROW(qlsc_estimate(o, inst.ds, config(2, knn_factory(1)), 1), ConfigError);
}

TEST(Qlsc, Unbiased) {
    auto inst = halfplane_instance(200, 1.2, 7);
    auto cfg = config(40, fixed_factory(random_scorer(5)));
    std::vector<double> c;
    for (std::uint64_t t = 0; t < 5000; ++t) {
        auto o = inst.oracle();
        c.push_back(qlsc_estimate(o, inst.ds, cfg, t).count);
    }
    const double mean = std::accumulate(c.begin(), c.end(), 0.0) / double(c.size());
    double var = 0;
    for (double x : c) var += (x - mean) * (x - mean);
    var /= double(c.size() - 1);
    EXPECT_LE(std::abs(mean - double(inst.truth)), 3.0 * std::sqrt(var / double(c.size())));
}
