// harness.hpp
//
// Experiment plumbing: dataset and score files, predicate and method specs,
// seeded sweeps over cached labels, trial records, and summaries.
#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "lss.hpp"
#include "lws.hpp"
#include "quantification.hpp"
#include "sampling.hpp"
#include "synth.hpp"

namespace approx_count {

using Json = nlohmann::json;

inline constexpr const char* kConfigSchema = "approx-count/experiment-v1";

// ---------------------------------------------------------------------------
// Files

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    for (auto& c : out) {
        while (!c.empty() && (c.back() == '\r' || c.back() == ' ')) c.pop_back();
        while (!c.empty() && c.front() == ' ') c.erase(c.begin());
    }
    return out;
}

inline double parse_double(const std::string& s, std::size_t line, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("line " + std::to_string(line) + ": non-numeric " + what + " '" + s + "'");
}

inline std::uint64_t parse_id(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        if (!s.empty() && s[0] != '-') {
            const auto v = std::stoull(s, &used);
            if (used == s.size()) return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError("line " + std::to_string(line) + ": bad id '" + s + "'");
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return in;
}

}  // namespace detail

/// Header `id,x,y` or `id,f1,...,fd`.
inline Dataset load_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("line 1: missing header");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "id") throw ConfigError("line 1: header must start with 'id'");
    const std::size_t dim = header.size() - 1;
    const bool xy = dim == 2 && header[1] == "x" && header[2] == "y";
    for (std::size_t j = 1; j <= dim && !xy; ++j) {
        if (header[j] != "f" + std::to_string(j))
            throw ConfigError("line 1: expected column 'f" + std::to_string(j) + "', got '" + header[j] + "'");
    }
    std::vector<DataPoint> pts;
    std::unordered_set<std::uint64_t> seen;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != dim + 1)
            throw ConfigError("line " + std::to_string(lineno) + ": expected " +
                              std::to_string(dim + 1) + " fields, got " + std::to_string(cells.size()));
        DataPoint p;
        p.id = detail::parse_id(cells[0], lineno);
        if (!seen.insert(p.id).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate id " + cells[0]);
        for (std::size_t j = 1; j <= dim; ++j) p.features.push_back(detail::parse_double(cells[j], lineno, "feature"));
        pts.push_back(std::move(p));
    }
    if (pts.empty()) throw ConfigError("'" + path + "' has no data rows");
    return Dataset(std::move(pts), dim);
}

inline void write_csv(const Dataset& ds, std::ostream& out) {
    out << "id";
    if (ds.dimension() == 2) {
        out << ",x,y";
    } else {
        for (std::size_t j = 1; j <= ds.dimension(); ++j) out << ",f" << j;
    }
    out << '\n';
    char buf[32];
    for (const auto& p : ds.points()) {
        out << p.id;
        for (double v : p.features) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

/// Header `id,score`; scores in [0,1].
inline std::shared_ptr<TableScorer> load_scores(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || detail::split_csv_line(line) != std::vector<std::string>{"id", "score"})
        throw ConfigError("line 1: score file header must be 'id,score'");
    std::unordered_map<std::uint64_t, double> m;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 2) throw ConfigError("line " + std::to_string(lineno) + ": expected 2 fields");
        const auto id = detail::parse_id(cells[0], lineno);
        if (!m.emplace(id, detail::parse_double(cells[1], lineno, "score")).second)
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate id " + cells[0]);
    }
    return std::make_shared<TableScorer>(std::move(m));
}

// ---------------------------------------------------------------------------
// Predicates

struct PredicateSpec {
    std::string kind = "skyband";  // skyband | neighbors | halfplane
    std::size_t k = 5;
    double d = 0.1;
    std::optional<Comparator> comparator;
    bool include_self = false;
    double alpha_mix = 0.0;
    std::string noise = "gaussian";
    std::uint64_t noise_seed = 0;
    std::vector<double> w{1.0, 1.0};
    double offset = 1.0;
};

inline Comparator parse_comparator(const std::string& s) {
    if (s == "<") return Comparator::Less;
    if (s == "<=") return Comparator::LessEqual;
    throw ConfigError("comparator must be '<' or '<='");
}

namespace detail {

inline std::shared_ptr<const NoiseTable> noise_for(const BaseCounts& base, const PredicateSpec& spec) {
    const auto ns = parse_noise_spec(spec.noise, spec.noise_seed);
    // Gaussian noise perturbs a shuffled copy so it carries no signal about the true count.
    const BaseCounts src = ns.kind == NoiseKind::Gaussian ? permute_counts(base, spec.noise_seed) : base;
    return std::make_shared<const NoiseTable>(make_noise_table(src, ns));
}

}  // namespace detail

/// Builds q for a dataset. A positive alpha_mix blends the object's count
/// with a noise count before the threshold test.
inline Predicate build_predicate(const PredicateSpec& spec, const Dataset& ds) {
    if (spec.alpha_mix < 0.0 || spec.alpha_mix > 1.0) throw ConfigError("alpha-mix must be in [0,1]");
    if (spec.kind == "skyband") {
        const auto cmp = spec.comparator.value_or(Comparator::Less);
        if (spec.alpha_mix == 0.0) return make_skyband(spec.k, cmp);
        return make_noisy_skyband(spec.k, spec.alpha_mix, detail::noise_for(dominance_counts(ds), spec), cmp);
    }
    if (spec.kind == "neighbors") {
        const auto cmp = spec.comparator.value_or(Comparator::LessEqual);
        if (!(spec.d > 0.0)) throw ConfigError("neighbors predicate requires d > 0");
        if (spec.alpha_mix == 0.0) return make_neighbors(spec.k, spec.d, cmp, spec.include_self);
        BaseCounts base;
        for (const auto& p : ds.points())
            base.emplace_back(p.id, std::int64_t(neighbor_count(p, ds, spec.d, spec.include_self)));
        auto noise = detail::noise_for(base, spec);
        return [spec, cmp, noise](const Dataset& d, std::size_t i) {
            const double c = double(neighbor_count(d[i], d, spec.d, spec.include_self));
            return compare(mix_counts(c, double(noise->at(d[i].id)), spec.alpha_mix), double(spec.k), cmp);
        };
    }
    if (spec.kind == "halfplane") {
        if (spec.w.empty()) throw ConfigError("halfplane predicate needs weights");
        return make_halfplane(spec.w, spec.offset);
    }
    throw ConfigError("unknown predicate '" + spec.kind + "'");
}

// ---------------------------------------------------------------------------
// Methods

struct MethodSpec {
    std::string name = "srs";
    std::string label;  // output name; defaults to name
    bool wilson = false;
    std::size_t grid = 4;
    double pilot_fraction = 0.25;
    double learn_fraction = 0.25;
    double design_fraction = 0.25;
    std::string scorer = "knn";  // knn | random | file
    std::size_t knn_k = 3;
    std::size_t folds = 5;
    double correction_fraction = 0.75;
    double delta = 0.05;
    double epsilon = 0.01;
    std::size_t strata = 4;
    std::string optimizer = "ticks";
    std::string alloc = "neyman";
    std::size_t m_floor = 5;
    std::size_t min_per_stratum = 2;
    double base = 2.0;
    double eps = 0.05;
    double tick_spacing = 0.05;
    bool reuse_design_samples = false;
    bool smooth_pure_strata = true;

    const std::string& output_name() const { return label.empty() ? name : label; }
};

inline const std::vector<std::string>& method_names() {
    static const std::vector<std::string> names{"srs", "ssp", "ssn", "qlcc", "qlac", "qlsc", "lws", "lss"};
    return names;
}

/// Shared, read-only state for running methods on one dataset.
struct MethodContext {
    const Dataset* dataset = nullptr;
    std::shared_ptr<const TableScorer> scores;  // for scorer = "file"
    std::map<std::size_t, Stratification> grids;
};

inline ScorerFactory scorer_factory(const MethodSpec& m, const MethodContext& ctx, std::uint64_t seed) {
    if (m.scorer == "knn") return knn_factory(m.knn_k);
    if (m.scorer == "random") return random_factory(derive_key(seed, "random-scorer"));
    if (m.scorer == "file") {
        if (!ctx.scores) throw ConfigError("scorer 'file' needs a score file");
        return fixed_factory(ctx.scores);
    }
    throw ConfigError("unknown scorer '" + m.scorer + "'");
}

inline Estimate run_method(const MethodSpec& m, MethodContext& ctx, CountingOracle& oracle,
                           std::size_t n, double alpha, std::uint64_t seed) {
    const Dataset& ds = *ctx.dataset;
    auto grid = [&]() -> const Stratification& {
        auto it = ctx.grids.find(m.grid);
        if (it == ctx.grids.end()) it = ctx.grids.emplace(m.grid, grid_stratify(ds, m.grid)).first;
        return it->second;
    };
    Budget budget;
    budget.total_samples = n;
    budget.learn_fraction = m.learn_fraction;
    budget.design_fraction = m.design_fraction;

    if (m.name == "srs") return srs_estimate(oracle, ds, n, alpha, seed, m.wilson);
    if (m.name == "ssp") return ssp_estimate(oracle, ds, grid(), n, alpha, seed);
    if (m.name == "ssn")
        return ssn_estimate(oracle, ds, grid(), n, m.pilot_fraction, alpha, seed, m.min_per_stratum,
                            m.smooth_pure_strata);
    if (m.name == "qlcc" || m.name == "qlac" || m.name == "qlsc") {
        QuantifyConfig q;
        q.budget = budget;
        q.factory = scorer_factory(m, ctx, seed);
        q.folds = m.folds;
        q.correction_fraction = m.correction_fraction;
        q.delta = m.delta;
        q.alpha = alpha;
        if (m.name == "qlcc") return qlcc_estimate(oracle, ds, q, seed);
        if (m.name == "qlac") return qlac_estimate(oracle, ds, q, seed);
        return qlsc_estimate(oracle, ds, q, seed);
    }
    if (m.name == "lws") {
        LwsConfig c;
        c.budget = budget;
        c.factory = scorer_factory(m, ctx, seed);
        c.epsilon = m.epsilon;
        c.alpha = alpha;
        return lws_estimate(oracle, ds, c, seed);
    }
    if (m.name == "lss") {
        LssConfig c;
        c.budget = budget;
        c.factory = scorer_factory(m, ctx, seed);
        c.H = m.strata;
        c.optimizer = parse_optimizer(m.optimizer);
        c.allocation = parse_allocation(m.alloc);
        c.m_floor = m.m_floor;
        c.min_per_stratum = m.min_per_stratum;
        c.base = m.base;
        c.eps = m.eps;
        c.tick_spacing = m.tick_spacing;
        c.alpha = alpha;
        c.reuse_design_samples = m.reuse_design_samples;
        c.smooth_pure_strata = m.smooth_pure_strata;
        return lss_estimate(oracle, ds, c, seed);
    }
    throw ConfigError("unknown method '" + m.name + "'");
}

// ---------------------------------------------------------------------------
// Experiment config

struct DatasetSpec {
    std::optional<std::string> csv;
    PointKind kind = PointKind::Uniform2d;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    PredicateSpec predicate;
    std::vector<MethodSpec> methods;
    std::vector<double> sample_fractions{0.05};
    std::size_t trials = 10;
    std::uint64_t master_seed = 1;
    double alpha = 0.05;
    double simulated_cost_ms = 0.0;
    bool timing = false;
    std::optional<std::string> scores;

    void validate() const {
        if (trials < 1) throw ConfigError("trials must be at least 1");
        if (methods.empty()) throw ConfigError("no methods configured");
        if (sample_fractions.empty()) throw ConfigError("no sample fractions configured");
        for (double f : sample_fractions)
            if (!(f > 0.0 && f <= 1.0)) throw ConfigError("sample fractions must be in (0,1]");
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0,1)");
        if (simulated_cost_ms < 0.0) throw ConfigError("simulated_cost_ms must be non-negative");
        std::set<std::string> labels;
        for (const auto& m : methods) {
            if (std::find(method_names().begin(), method_names().end(), m.name) == method_names().end())
                throw ConfigError("unknown method '" + m.name + "'");
            if (!labels.insert(m.output_name()).second)
                throw ConfigError("duplicate method label '" + m.output_name() + "'");
        }
    }
};

namespace detail {

class JsonReader {
public:
    JsonReader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(where_ + "." + key + ": wrong type");
        }
    }
    template <class T>
    void get(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        T v{};
        get(key, v);
        out = v;
    }
    bool has(const char* key) const { return j_.contains(key); }
    const Json& at(const char* key) {
        seen_.insert(key);
        return j_.at(key);
    }
    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
        }
    }

private:
    const Json& j_;
    std::string where_;
    std::set<std::string> seen_;
};

}  // namespace detail

inline MethodSpec parse_method(const Json& j, const std::string& where) {
    MethodSpec m;
    if (j.is_string()) {
        m.name = j.get<std::string>();
        return m;
    }
    detail::JsonReader r(j, where);
    r.get("name", m.name);
    r.get("label", m.label);
    r.get("wilson", m.wilson);
    r.get("grid", m.grid);
    r.get("pilot_fraction", m.pilot_fraction);
    r.get("learn_fraction", m.learn_fraction);
    r.get("design_fraction", m.design_fraction);
    r.get("scorer", m.scorer);
    r.get("knn_k", m.knn_k);
    r.get("folds", m.folds);
    r.get("correction_fraction", m.correction_fraction);
    r.get("delta", m.delta);
    r.get("epsilon", m.epsilon);
    r.get("strata", m.strata);
    r.get("optimizer", m.optimizer);
    r.get("alloc", m.alloc);
    r.get("m_floor", m.m_floor);
    r.get("min_per_stratum", m.min_per_stratum);
    r.get("base", m.base);
    r.get("eps", m.eps);
    r.get("tick_spacing", m.tick_spacing);
    r.get("reuse_design_samples", m.reuse_design_samples);
    r.get("smooth_pure_strata", m.smooth_pure_strata);
    r.finish();
    return m;
}

/// Relative file paths resolve against `base_dir`.
inline ExperimentConfig parse_config(const Json& j, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig c;
    detail::JsonReader r(j, "config");
    std::string schema;
    r.get("schema", schema);
    if (schema != kConfigSchema)
        throw ConfigError("config schema must be '" + std::string(kConfigSchema) + "'");
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return (path.is_absolute() || base_dir.empty() ? path : base_dir / path).string();
    };
    if (r.has("dataset")) {
        detail::JsonReader d(r.at("dataset"), "dataset");
        std::optional<std::string> csv;
        std::string kind = to_string(c.dataset.kind);
        d.get("csv", csv);
        d.get("kind", kind);
        d.get("n", c.dataset.n);
        d.get("seed", c.dataset.seed);
        d.finish();
        if (csv) c.dataset.csv = resolve(*csv);
        c.dataset.kind = parse_point_kind(kind);
    }
    if (r.has("predicate")) {
        detail::JsonReader p(r.at("predicate"), "predicate");
        std::optional<std::string> cmp;
        p.get("kind", c.predicate.kind);
        p.get("k", c.predicate.k);
        p.get("d", c.predicate.d);
        p.get("comparator", cmp);
        p.get("include_self", c.predicate.include_self);
        p.get("alpha_mix", c.predicate.alpha_mix);
        p.get("noise", c.predicate.noise);
        p.get("noise_seed", c.predicate.noise_seed);
        p.get("w", c.predicate.w);
        p.get("offset", c.predicate.offset);
        p.finish();
        if (cmp) c.predicate.comparator = parse_comparator(*cmp);
    }
    if (r.has("methods")) {
        const Json& ms = r.at("methods");
        if (!ms.is_array()) throw ConfigError("methods must be an array");
        for (std::size_t i = 0; i < ms.size(); ++i)
            c.methods.push_back(parse_method(ms[i], "methods[" + std::to_string(i) + "]"));
    }
    r.get("sample_fractions", c.sample_fractions);
    r.get("trials", c.trials);
    r.get("master_seed", c.master_seed);
    r.get("alpha", c.alpha);
    r.get("simulated_cost_ms", c.simulated_cost_ms);
    r.get("timing", c.timing);
    std::optional<std::string> scores;
    r.get("scores", scores);
    if (scores) c.scores = resolve(*scores);
    r.finish();
    c.validate();
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    auto in = detail::open_input(path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("'" + path + "': invalid JSON (" + e.what() + ")");
    }
    return parse_config(j, std::filesystem::path(path).parent_path());
}

inline Dataset make_dataset(const DatasetSpec& spec) {
    return spec.csv ? load_csv(*spec.csv) : generate_points(spec.kind, spec.n, spec.seed);
}

// ---------------------------------------------------------------------------
// Trials

struct TrialRecord {
    std::string method;
    std::size_t n = 0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    double count = 0.0;
    std::optional<double> ci_lo, ci_hi, variance;
    std::uint64_t truth = 0;
    double abs_error = 0.0;
    std::uint64_t oracle_calls = 0;
    double wall_ms = 0.0;
    Overhead overhead;
};

inline std::size_t sample_size(double fraction, std::size_t N) {
    return std::clamp<std::size_t>(std::size_t(std::llround(fraction * double(N))), 1, N);
}

inline std::uint64_t trial_seed(std::uint64_t master, const std::string& method, std::size_t n,
                                std::size_t trial) {
    return derive_key(master, method, std::uint64_t(n), std::uint64_t(trial));
}

/// Runs every (method, size, trial) against labels cached once; records are
/// ordered by method, then size, then trial.
inline std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, const Dataset& ds) {
    cfg.validate();
    CountingOracle truth_oracle(build_predicate(cfg.predicate, ds), ds);
    auto labels = std::make_shared<const std::vector<bool>>(evaluate_all(truth_oracle, ds));
    const auto truth = std::uint64_t(std::count(labels->begin(), labels->end(), true));
    const Predicate cached = label_table_predicate(labels);

    MethodContext ctx;
    ctx.dataset = &ds;
    if (cfg.scores) ctx.scores = load_scores(*cfg.scores);

    std::vector<TrialRecord> out;
    for (const auto& m : cfg.methods) {
        for (double f : cfg.sample_fractions) {
            const std::size_t n = sample_size(f, ds.size());
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                TrialRecord r;
                r.method = m.output_name();
                r.n = n;
                r.trial = t;
                r.seed = trial_seed(cfg.master_seed, r.method, n, t);
                r.truth = truth;
                CountingOracle oracle(cached, ds, cfg.simulated_cost_ms);
                const auto start = std::chrono::steady_clock::now();
                try {
                    const Estimate e = run_method(m, ctx, oracle, n, cfg.alpha, r.seed);
                    r.count = e.count;
                    if (e.ci) {
                        r.ci_lo = e.ci->first;
                        r.ci_hi = e.ci->second;
                    }
                    r.variance = e.variance;
                    r.abs_error = std::abs(e.count - double(truth));
                    r.overhead = e.overhead;
                } catch (const Error& e) {
                    r.ok = false;
                    r.error = e.what();
                }
                r.oracle_calls = oracle.calls();
                r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

namespace detail {

// Shortest text that parses back to the same double.
inline std::string fmt(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

inline std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace detail

/// Timing columns vary run to run, so they are written only on request.
inline void write_records(const std::vector<TrialRecord>& records, std::ostream& out, bool timing) {
    out << "method,n,trial,seed,status,count,ci_lo,ci_hi,variance,truth,abs_error,oracle_calls,error";
    if (timing) out << ",wall_ms,learn_ms,design_ms,apply_ms";
    out << '\n';
    for (const auto& r : records) {
        out << r.method << ',' << r.n << ',' << r.trial << ',' << r.seed << ',' << (r.ok ? "ok" : "failed")
            << ',' << (r.ok ? detail::fmt(r.count) : "") << ',' << detail::fmt(r.ci_lo) << ','
            << detail::fmt(r.ci_hi) << ',' << detail::fmt(r.variance) << ',' << r.truth << ','
            << (r.ok ? detail::fmt(r.abs_error) : "") << ',' << r.oracle_calls << ','
            << detail::csv_safe(r.error);
        if (timing)
            out << ',' << detail::fmt(r.wall_ms) << ',' << detail::fmt(r.overhead.learn_ms) << ','
                << detail::fmt(r.overhead.design_ms) << ',' << detail::fmt(r.overhead.apply_ms);
        out << '\n';
    }
}

inline std::vector<TrialRecord> read_records(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("line 1: missing header");
    const auto header = detail::split_csv_line(line);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"method", "n", "trial", "seed", "status", "count", "ci_lo", "ci_hi",
                             "variance", "truth", "abs_error", "oracle_calls", "error"}) {
        if (!col.count(need)) throw ConfigError("line 1: missing column '" + std::string(need) + "'");
    }
    const bool timing = col.count("wall_ms") && col.count("learn_ms") && col.count("design_ms") && col.count("apply_ms");
    std::vector<TrialRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto c = detail::split_csv_line(line);
        if (c.size() != header.size())
            throw ConfigError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " fields");
        auto num = [&](const char* k) { return detail::parse_double(c[col[k]], lineno, k); };
        auto opt = [&](const char* k) -> std::optional<double> {
            if (c[col[k]].empty()) return std::nullopt;
            return num(k);
        };
        TrialRecord r;
        r.method = c[col["method"]];
        r.n = std::size_t(detail::parse_id(c[col["n"]], lineno));
        r.trial = std::size_t(detail::parse_id(c[col["trial"]], lineno));
        r.seed = detail::parse_id(c[col["seed"]], lineno);
        r.ok = c[col["status"]] == "ok";
        r.error = c[col["error"]];
        if (r.ok) {
            r.count = num("count");
            r.abs_error = num("abs_error");
        }
        r.ci_lo = opt("ci_lo");
        r.ci_hi = opt("ci_hi");
        r.variance = opt("variance");
        r.truth = detail::parse_id(c[col["truth"]], lineno);
        r.oracle_calls = detail::parse_id(c[col["oracle_calls"]], lineno);
        if (timing) {
            r.wall_ms = num("wall_ms");
            r.overhead.learn_ms = num("learn_ms");
            r.overhead.design_ms = num("design_ms");
            r.overhead.apply_ms = num("apply_ms");
        }
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Summaries

/// Quantile by linear interpolation between order statistics at q·(n−1).
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw ConfigError("quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

inline double iqr(const std::vector<double>& v) { return quantile(v, 0.75) - quantile(v, 0.25); }

struct SummaryRow {
    std::string method;
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t failed = 0;
    std::uint64_t truth = 0;
    double mae = 0.0, mean = 0.0, variance = 0.0, iqr = 0.0;
    std::optional<double> coverage;
    double mean_calls = 0.0;
    std::optional<double> overhead_fraction;  // (learn+design+apply)/wall
    Overhead mean_overhead;
    double mean_wall_ms = 0.0;
};

/// One row per (method, n) in first-appearance order. Failed trials are
/// counted but excluded from the statistics.
inline std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records, bool timing) {
    if (records.empty()) throw ConfigError("nothing to summarize");
    std::vector<SummaryRow> rows;
    std::map<std::pair<std::string, std::size_t>, std::vector<const TrialRecord*>> groups;
    for (const auto& r : records) {
        auto key = std::make_pair(r.method, r.n);
        if (!groups.count(key)) {
            rows.push_back({});
            rows.back().method = r.method;
            rows.back().n = r.n;
        }
        groups[key].push_back(&r);
    }
    for (auto& row : rows) {
        const auto& g = groups[{row.method, row.n}];
        row.trials = g.size();
        row.truth = g.front()->truth;
        std::vector<double> est;
        std::size_t with_ci = 0, covered = 0;
        double calls = 0, frac = 0, wall = 0;
        for (const auto* r : g) {
            calls += double(r->oracle_calls);
            if (!r->ok) {
                ++row.failed;
                continue;
            }
            est.push_back(r->count);
            row.mae += r->abs_error;
            if (r->ci_lo && r->ci_hi) {
                ++with_ci;
                covered += (*r->ci_lo <= double(r->truth) && double(r->truth) <= *r->ci_hi);
            }
            row.mean_overhead.learn_ms += r->overhead.learn_ms;
            row.mean_overhead.design_ms += r->overhead.design_ms;
            row.mean_overhead.apply_ms += r->overhead.apply_ms;
            wall += r->wall_ms;
            if (r->wall_ms > 0) frac += r->overhead.total() / r->wall_ms;
        }
        row.mean_calls = calls / double(g.size());
        if (est.empty()) continue;
        const double k = double(est.size());
        row.mae /= k;
        for (double e : est) row.mean += e;
        row.mean /= k;
        for (double e : est) row.variance += (e - row.mean) * (e - row.mean);
        row.variance = est.size() > 1 ? row.variance / (k - 1) : 0.0;
        row.iqr = iqr(est);
        if (with_ci == est.size()) row.coverage = double(covered) / k;
        if (timing) {
            row.overhead_fraction = frac / k;
            row.mean_overhead.learn_ms /= k;
            row.mean_overhead.design_ms /= k;
            row.mean_overhead.apply_ms /= k;
            row.mean_wall_ms = wall / k;
        }
    }
    return rows;
}

inline Json summary_json(const std::vector<SummaryRow>& rows, bool timing) {
    Json out = Json::array();
    for (const auto& r : rows) {
        Json j{{"method", r.method}, {"n", r.n},           {"trials", r.trials},
               {"failed", r.failed}, {"truth", r.truth},   {"mae", r.mae},
               {"mean", r.mean},     {"variance", r.variance}, {"iqr", r.iqr},
               {"mean_oracle_calls", r.mean_calls}};
        j["coverage"] = r.coverage ? Json(*r.coverage) : Json(nullptr);
        if (timing) {
            j["overhead_fraction"] = r.overhead_fraction ? Json(*r.overhead_fraction) : Json(nullptr);
            j["overhead_ms"] = {{"learn", r.mean_overhead.learn_ms},
                                {"design", r.mean_overhead.design_ms},
                                {"apply", r.mean_overhead.apply_ms}};
            j["wall_ms"] = r.mean_wall_ms;
        }
        out.push_back(std::move(j));
    }
    return out;
}

inline void write_summary_csv(const std::vector<SummaryRow>& rows, std::ostream& out, bool timing) {
    out << "method,n,trials,failed,truth,mae,mean,variance,iqr,coverage,mean_oracle_calls";
    if (timing) out << ",overhead_fraction,learn_ms,design_ms,apply_ms,wall_ms";
    out << '\n';
    for (const auto& r : rows) {
        out << r.method << ',' << r.n << ',' << r.trials << ',' << r.failed << ',' << r.truth << ','
            << detail::fmt(r.mae) << ',' << detail::fmt(r.mean) << ',' << detail::fmt(r.variance) << ','
            << detail::fmt(r.iqr) << ',' << detail::fmt(r.coverage) << ',' << detail::fmt(r.mean_calls);
        if (timing)
            out << ',' << detail::fmt(r.overhead_fraction) << ',' << detail::fmt(r.mean_overhead.learn_ms)
                << ',' << detail::fmt(r.mean_overhead.design_ms) << ','
                << detail::fmt(r.mean_overhead.apply_ms) << ',' << detail::fmt(r.mean_wall_ms);
        out << '\n';
    }
}

inline Json estimate_json(const Estimate& e) {
    Json j{{"method", e.method}, {"count", e.count}, {"oracle_calls", e.oracle_calls}, {"seed", e.seed}};
    j["proportion"] = e.proportion ? Json(*e.proportion) : Json(nullptr);
    j["variance"] = e.variance ? Json(*e.variance) : Json(nullptr);
    j["ci"] = e.ci ? Json::array({e.ci->first, e.ci->second}) : Json(nullptr);
    j["overhead_ms"] = {{"learn", e.overhead.learn_ms}, {"design", e.overhead.design_ms}, {"apply", e.overhead.apply_ms}};
    j["warnings"] = e.warnings;
    return j;
}

}  // namespace approx_count
