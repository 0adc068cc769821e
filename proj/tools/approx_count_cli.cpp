// approx-count: gen | estimate | sweep | report
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "approx_count/harness.hpp"

namespace ac = approx_count;
namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDegenerate = 3;

struct GenArgs {
    std::string kind = "uniform2d";
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    std::string out;
};

struct EstimateArgs {
    std::string data;
    std::string query = "skyband";
    std::size_t k = 5;
    double d = 0.1;
    bool include_self = false;
    std::string comparator;
    double alpha_mix = 0.0;
    std::string noise = "gaussian";
    std::uint64_t noise_seed = 0;
    std::string method = "lss";
    double sample_frac = 0.02;
    double split = 0.25;
    std::size_t strata = 4;
    std::string optimizer = "ticks";
    std::string alloc = "neyman";
    double ci_level = 0.95;
    std::uint64_t seed = 1;
    std::string format = "json";
    std::string scores;
    std::string scorer = "knn";
    std::size_t knn_k = 3;
    double epsilon = 0.01;
    bool truth = false;
};

struct SweepArgs {
    std::string config;
    std::string out;
};

struct ReportArgs {
    std::string records;
    std::string format = "json";
    bool timing = false;
};

std::ofstream open_output(const fs::path& p) {
    std::ofstream out(p);
    if (!out) throw ac::ConfigError("cannot write '" + p.string() + "'");
    return out;
}

int run_gen(const GenArgs& a) {
    const auto ds = ac::generate_points(ac::parse_point_kind(a.kind), a.n, a.seed);
    if (a.out.empty()) {
        ac::write_csv(ds, std::cout);
    } else {
        auto out = open_output(a.out);
        ac::write_csv(ds, out);
    }
    return 0;
}

int run_estimate(const EstimateArgs& a) {
    if (!(a.ci_level > 0.0 && a.ci_level < 1.0)) throw ac::ConfigError("--ci-level must be in (0,1)");
    if (!(a.sample_frac > 0.0 && a.sample_frac <= 1.0)) throw ac::ConfigError("--sample-frac must be in (0,1]");
    const auto ds = ac::load_csv(a.data);

    ac::PredicateSpec ps;
    ps.kind = a.query;
    ps.k = a.k;
    ps.d = a.d;
    ps.include_self = a.include_self;
    if (!a.comparator.empty()) ps.comparator = ac::parse_comparator(a.comparator);
    ps.alpha_mix = a.alpha_mix;
    ps.noise = a.noise;
    ps.noise_seed = a.noise_seed;

    ac::MethodSpec m;
    m.name = a.method;
    m.learn_fraction = a.split;
    m.strata = a.strata;
    m.optimizer = a.optimizer;
    m.alloc = a.alloc;
    m.scorer = a.scores.empty() ? a.scorer : "file";
    m.knn_k = a.knn_k;
    m.epsilon = a.epsilon;
    if (std::find(ac::method_names().begin(), ac::method_names().end(), m.name) == ac::method_names().end())
        throw ac::ConfigError("unknown method '" + m.name + "'");

    ac::MethodContext ctx;
    ctx.dataset = &ds;
    if (!a.scores.empty()) ctx.scores = ac::load_scores(a.scores);
    ac::CountingOracle oracle(ac::build_predicate(ps, ds), ds);
    const std::size_t n = ac::sample_size(a.sample_frac, ds.size());
    const auto e = ac::run_method(m, ctx, oracle, n, 1.0 - a.ci_level, a.seed);

    std::optional<std::uint64_t> truth;
    if (a.truth) {
        ac::CountingOracle full(ac::build_predicate(ps, ds), ds);
        truth = ac::exact_count(full, ds);
    }
    if (a.format == "json") {
        auto j = ac::estimate_json(e);
        j["n"] = n;
        j["N"] = ds.size();
        if (truth) j["truth"] = *truth;
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "method,n,N,seed,count,ci_lo,ci_hi,variance,oracle_calls,learn_ms,design_ms,apply_ms"
                  << (truth ? ",truth" : "") << '\n';
        auto f = [](const std::optional<double>& v) { return v ? ac::detail::fmt(*v) : std::string(); };
        std::cout << e.method << ',' << n << ',' << ds.size() << ',' << e.seed << ',' << ac::detail::fmt(e.count)
                  << ',' << f(e.ci ? std::optional(e.ci->first) : std::nullopt) << ','
                  << f(e.ci ? std::optional(e.ci->second) : std::nullopt) << ',' << f(e.variance) << ','
                  << e.oracle_calls << ',' << ac::detail::fmt(e.overhead.learn_ms) << ','
                  << ac::detail::fmt(e.overhead.design_ms) << ',' << ac::detail::fmt(e.overhead.apply_ms);
        if (truth) std::cout << ',' << *truth;
        std::cout << '\n';
    }
    for (const auto& w : e.warnings) std::cerr << "warning: " << w << '\n';
    return 0;
}

int run_sweep(const SweepArgs& a) {
    const auto cfg = ac::load_config(a.config);
    const auto ds = ac::make_dataset(cfg.dataset);
    const auto records = ac::run_experiment(cfg, ds);
    fs::create_directories(a.out);
    {
        auto out = open_output(fs::path(a.out) / "records.csv");
        ac::write_records(records, out, cfg.timing);
    }
    const auto rows = ac::summarize(records, cfg.timing);
    {
        auto out = open_output(fs::path(a.out) / "summary.json");
        out << ac::summary_json(rows, cfg.timing).dump(2) << '\n';
    }
    std::size_t failed = 0;
    for (const auto& r : records) failed += !r.ok;
    std::cerr << records.size() << " trials, " << failed << " failed; wrote " << a.out << '\n';
    return 0;
}

int run_report(const ReportArgs& a) {
    const auto rows = ac::summarize(ac::read_records(a.records), a.timing);
    if (a.format == "json")
        std::cout << ac::summary_json(rows, a.timing).dump(2) << '\n';
    else
        ac::write_summary_csv(rows, std::cout, a.timing);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Approximate counting of expensive predicates"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "write a synthetic point set as CSV");
    g->add_option("--kind", gen.kind, "uniform2d | clustered2d")->capture_default_str();
    g->add_option("--n", gen.n, "number of points")->capture_default_str();
    g->add_option("--seed", gen.seed)->capture_default_str();
    g->add_option("--out", gen.out, "output file (stdout when omitted)");

    EstimateArgs est;
    auto* e = app.add_subcommand("estimate", "estimate the count of one predicate");
    e->add_option("--data", est.data, "CSV with id,x,y or id,f1..fd")->required();
    e->add_option("--query", est.query)->check(CLI::IsMember({"skyband", "neighbors", "halfplane"}))->capture_default_str();
    e->add_option("--k", est.k)->capture_default_str();
    e->add_option("--d", est.d, "neighbor radius")->capture_default_str();
    e->add_flag("--include-self", est.include_self, "count the object among its own neighbors");
    e->add_option("--comparator", est.comparator, "< or <= (predicate default when omitted)");
    e->add_option("--alpha-mix", est.alpha_mix, "weight of the noise count")->capture_default_str();
    e->add_option("--noise", est.noise, "gaussian | zipf:S")->capture_default_str();
    e->add_option("--noise-seed", est.noise_seed)->capture_default_str();
    e->add_option("--method", est.method)->check(CLI::IsMember(ac::method_names()))->capture_default_str();
    e->add_option("--sample-frac", est.sample_frac, "oracle budget as a fraction of N")->capture_default_str();
    e->add_option("--split", est.split, "share of the budget spent on training")->capture_default_str();
    e->add_option("--strata", est.strata)->capture_default_str();
    e->add_option("--optimizer", est.optimizer)->capture_default_str();
    e->add_option("--alloc", est.alloc)->check(CLI::IsMember({"neyman", "proportional"}))->capture_default_str();
    e->add_option("--ci-level", est.ci_level)->capture_default_str();
    e->add_option("--seed", est.seed)->capture_default_str();
    e->add_option("--format", est.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    e->add_option("--scores", est.scores, "id,score file used as the scoring function");
    e->add_option("--scorer", est.scorer)->check(CLI::IsMember({"knn", "random"}))->capture_default_str();
    e->add_option("--knn-k", est.knn_k)->capture_default_str();
    e->add_option("--epsilon", est.epsilon, "LWS probability floor")->capture_default_str();
    e->add_flag("--truth", est.truth, "also evaluate the predicate on every object");

    SweepArgs sweep;
    auto* s = app.add_subcommand("sweep", "run an experiment config");
    s->add_option("--config", sweep.config)->required();
    s->add_option("--out", sweep.out, "output directory for records.csv and summary.json")->required();

    ReportArgs rep;
    auto* r = app.add_subcommand("report", "summarize a records.csv");
    r->add_option("--records", rep.records)->required();
    r->add_option("--format", rep.format)->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    r->add_flag("--timing", rep.timing, "include overhead columns");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int code = app.exit(err);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*g) return run_gen(gen);
        if (*e) return run_estimate(est);
        if (*s) return run_sweep(sweep);
        return run_report(rep);
    } catch (const ac::DegenerateError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitDegenerate;
    } catch (const ac::ConfigError& err) {
        std::cerr << "error: " << err.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 1;
    }
}
