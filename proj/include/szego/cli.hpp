#pragma once

// Command implementations behind the `szego` executable. Each command reads
// its section of the configuration, writes its tables into the output
// directory and finishes with a run.json manifest.

#include "szego/szego.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace szego::cli {

using io::Config;
using io::ConfigError;
using io::CsvTable;
using io::json;

enum ExitCode : int { kOk = 0, kThreshold = 1, kInput = 2 };

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<unsigned> threads;
    std::vector<std::string> overrides;  ///< "key=value" pairs from --set
};

/// File, then SZEGO_* environment, then --set, then the dedicated flags.
inline Config load_config(const GlobalOptions& g, char** envp) {
    Config c;
    if (!g.config_path.empty()) c = Config::load(g.config_path);
    c.apply_env(envp);
    for (const auto& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set", 0, kv, "expected key=value");
        c.set(Config::trim(kv.substr(0, eq)), Config::trim(kv.substr(eq + 1)));
    }
    if (g.seed) c.set("seed", std::to_string(*g.seed));
    if (g.threads) c.set("threads", std::to_string(*g.threads));
    if (!g.out_dir.empty()) c.set("out", g.out_dir);
    return c;
}

namespace detail {

inline std::uint64_t require_seed(const Config& c) {
    if (!c.has("seed")) throw ConfigError(c.name(), 0, "seed", "a seed is required for stochastic commands (--seed or seed = N)");
    const auto s = c.get_int("seed");
    if (s < 0) throw c.error("seed", "must be nonnegative");
    return static_cast<std::uint64_t>(s);
}

inline unsigned threads(const Config& c) {
    const auto t = c.get_int("threads", 1);
    if (t < 1 || t > 256) throw c.error("threads", "must be in 1..256");
    return static_cast<unsigned>(t);
}

inline std::filesystem::path out_dir(const Config& c, const std::string& command) { return c.get_string("out", "runs/" + command); }

inline std::set<std::string> with_globals(std::set<std::string> s) {
    s.insert({"seed", "threads", "out", "schema_version"});
    return s;
}

inline void check_schema(const Config& c) {
    if (c.has("schema_version") && c.get_int("schema_version") != io::kConfigSchemaVersion)
        throw c.error("schema_version", "unsupported schema version (expected " + std::to_string(io::kConfigSchemaVersion) + ")");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = Config::trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline ExponentVector rational_list(const Config& c, const std::string& key) {
    ExponentVector z;
    for (const auto& t : split(c.get_string(key), ',')) {
        try {
            z.push_back(parse_rational(t));
        } catch (const std::exception&) {
            throw c.error(key, "bad rational '" + t + "'");
        }
    }
    return z;
}

/// "1 0 1 1; 0 1 1 -1" -> integer rows.
inline std::vector<std::vector<std::int64_t>> matrix_rows(const Config& c, const std::string& key) {
    std::vector<std::vector<std::int64_t>> rows;
    for (const auto& r : split(c.get_string(key), ';')) {
        std::istringstream in(r);
        std::vector<std::int64_t> row;
        std::string tok;
        while (in >> tok) {
            try {
                std::size_t pos = 0;
                row.push_back(std::stoll(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument("");
            } catch (...) {
                throw c.error(key, "bad integer '" + tok + "'");
            }
        }
        if (!rows.empty() && row.size() != rows[0].size()) throw c.error(key, "rows differ in length");
        rows.push_back(row);
    }
    if (rows.empty()) throw c.error(key, "empty matrix");
    return rows;
}

inline IncidenceLikeMatrix load_edges(const Config& c, const std::string& key) {
    const auto path = c.get_string(key);
    std::ifstream in(path);
    if (!in) throw ConfigError(c.name(), 0, key, "cannot open edge list '" + path + "'");
    return read_edge_list(in);
}

/// Numeric keys under a prefix (except `skip`) as a parameter map.
inline std::map<std::string, double> params_under(const Config& c, const std::string& prefix, const std::set<std::string>& skip) {
    std::map<std::string, double> p;
    for (const auto& [k, e] : c.entries()) {
        if (k.rfind(prefix, 0) != 0) continue;
        const std::string name = k.substr(prefix.size());
        if (name.find('.') != std::string::npos || skip.count(name)) continue;
        p[name] = c.get_double(k);
    }
    return p;
}

inline std::string fmt(double x) { return io::fmt_double(x); }

inline json rational_json(const Rational& r) { return to_string(r); }

inline json vec_json(const est::Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(io::num(v[i]));
    return a;
}

inline json mat_json(const est::Mat& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
    return a;
}

inline CsvTable mat_csv(const est::Mat& m, const std::vector<std::string>& names, const std::string& label) {
    CsvTable t;
    t.header.push_back(label);
    for (const auto& n : names) t.header.push_back(n);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        std::vector<std::string> r{names[std::size_t(i)]};
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(fmt(m(i, j)));
        t.add(r);
    }
    return t;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// szego: trace / Fejer integral limit along a T ladder

inline int cmd_szego(const Config& c) {
    c.check_known(detail::with_globals({"szego.graph", "szego.cycle_length", "szego.edges", "szego.symbol.*", "szego.t_list", "szego.tolerance"}));
    detail::check_schema(c);
    const std::string graph = c.get_string("szego.graph", "cycle");
    IncidenceLikeMatrix M;
    if (graph == "cycle") {
        const auto n = c.get_int("szego.cycle_length", 2);
        if (n < 2 || n > 8) throw c.error("szego.cycle_length", "must be in 2..8");
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (long long i = 0; i < n; ++i) edges.emplace_back(std::size_t(i), std::size_t((i + 1) % n));
        M = IncidenceLikeMatrix::from_edges(std::size_t(n), edges);
    } else if (graph == "edges") {
        M = detail::load_edges(c, "szego.edges");
    } else {
        throw c.error("szego.graph", "expected 'cycle' or 'edges'");
    }
    const std::string family = c.get_string("szego.symbol.family", "ar1");
    SpectralSymbol f;
    try {
        auto params = detail::params_under(c, "szego.symbol.", {"family"});
        if (!c.has("szego.symbol.family") && params.empty()) params["phi"] = 0.5;
        f = symbols::from_name(family, params);
    } catch (const std::invalid_argument& e) {
        throw c.error("szego.symbol.family", e.what());
    }
    if (!f.domain.torus()) throw c.error("szego.symbol.family", "the trace ladder runs on the torus");
    std::vector<double> Ts = c.get_list("szego.t_list", std::vector<double>{256, 512, 1024, 2048, 4096});
    for (double T : Ts)
        if (!(T >= 1) || T != std::floor(T)) throw c.error("szego.t_list", "T values must be positive integers");
    const double tol = c.get_double("szego.tolerance", 0.05);

    FejerIntegralSpec spec{M, std::vector<SpectralSymbol>(M.E(), f), SpectralDomain{}, 0};
    const auto rep = szego_limit_check(spec, Ts);
    io::RunRecord rr("szego", detail::out_dir(c, "szego"), c, 0, detail::threads(c));
    CsvTable t{{"T", "value", "ratio", "target", "rel_error"}, {}};
    for (const auto& r : rep.rows) t.add({detail::fmt(r.T), detail::fmt(r.value), detail::fmt(r.ratio), detail::fmt(r.target), detail::fmt(r.rel_error)});
    rr.write_csv("szego.csv", t);
    const double last = rep.rows.back().rel_error;
    const bool pass = last < tol && rep.tail_decreasing;
    json s;
    s["V"] = M.V();
    s["E"] = M.E();
    s["corank"] = rep.co;
    s["k_M"] = io::num(rep.k_M);
    s["limit"] = io::num(rep.limit);
    s["pcp_ok"] = rep.pcp_ok;
    s["tail_decreasing"] = rep.tail_decreasing;
    s["final_rel_error"] = io::num(last);
    s["tolerance"] = tol;
    s["pass"] = pass;
    rr.write_json("szego.json", s);
    const int code = pass ? kOk : kThreshold;
    rr.finish(code, pass ? "ok" : "threshold_failure", s);
    return code;
}

// ---------------------------------------------------------------------------
// polytope: ranks, exponent, membership and vertices

inline int cmd_polytope(const Config& c) {
    c.check_known(detail::with_globals({"polytope.matrix", "polytope.edges", "polytope.z", "polytope.case", "polytope.vertices", "polytope.family",
                                        "polytope.m", "polytope.n", "polytope.k"}));
    detail::check_schema(c);
    io::RunRecord rr("polytope", detail::out_dir(c, "polytope"), c, 0, detail::threads(c));
    json s;
    if (c.has("polytope.family")) {
        FamilySpec fam;
        const auto kind = c.get_string("polytope.family");
        if (kind == "sum") fam.kind = FamilySpec::Kind::sum;
        else if (kind == "bilinear") fam.kind = FamilySpec::Kind::bilinear;
        else throw c.error("polytope.family", "expected 'sum' or 'bilinear'");
        fam.m = std::size_t(c.get_int("polytope.m", 1));
        fam.n = std::size_t(c.get_int("polytope.n", 1));
        const auto k = c.get_int("polytope.k", 2);
        if (fam.m < 1 || fam.m > 4 || fam.n < 1 || fam.n > 4 || k < 2 || k > 6) throw c.error("polytope.k", "family sizes: m, n in 1..4, k in 2..6");
        const auto z = detail::rational_list(c, "polytope.z");
        if (z.size() != (fam.kind == FamilySpec::Kind::sum ? 1u : 2u)) throw c.error("polytope.z", "sum families take one exponent, bilinear families two (z_f, z_b)");
        const auto chk = cumulant_inequality_check(fam, z, std::size_t(k));
        s["family"] = kind;
        s["m"] = fam.m;
        s["n"] = fam.n;
        s["k"] = k;
        s["graphs"] = chk.graphs;
        s["alpha_k"] = detail::rational_json(chk.alpha_k);
        s["half_k"] = detail::rational_json(chk.half_k);
        s["holds"] = chk.holds;
        s["strict"] = chk.strict;
        json facets = json::object();
        for (const auto& [name, ok] : chk.facets) facets[name] = ok;
        s["facets"] = facets;
        // the generated graphs as edge lists
        std::string all;
        const auto graphs = generate_family(fam, std::size_t(k));
        for (std::size_t i = 0; i < graphs.size(); ++i) {
            std::ostringstream es;
            es << "# graph " << i << " V=" << graphs[i].V << "\n";
            write_edge_list(es, graphs[i]);
            all += es.str();
        }
        rr.write_text("family.edges", all);
    } else {
        IncidenceLikeMatrix M;
        if (c.has("polytope.matrix")) M = IncidenceLikeMatrix::general(detail::matrix_rows(c, "polytope.matrix"));
        else if (c.has("polytope.edges")) M = detail::load_edges(c, "polytope.edges");
        else throw ConfigError(c.name(), 0, "polytope.matrix", "give polytope.matrix, polytope.edges or polytope.family");
        const auto z = detail::rational_list(c, "polytope.z");
        if (z.size() != M.E()) throw c.error("polytope.z", "need one exponent per column (" + std::to_string(M.E()) + ")");
        PcpCase pc;
        try {
            pc = parse_pcp_case(c.get_string("polytope.case", "C1"));
        } catch (const std::invalid_argument& e) {
            throw c.error("polytope.case", e.what());
        }
        s["V"] = M.V();
        s["E"] = M.E();
        s["rank"] = full_rank(M);
        s["corank"] = corank(M);
        s["case"] = to_string(pc);
        json zs = json::array();
        for (const auto& v : z) zs.push_back(detail::rational_json(v));
        s["z"] = zs;
        const auto mem = pcp_membership(M, z, pc);
        s["member"] = mem.member;
        s["violated"] = mem.violated;
        if (mem.witness) s["witness"] = *mem.witness;
        s["member_lp"] = pcp_membership_lp(M, z, pc);
        if (pc != PcpCase::C2_counting) {
            const auto ar = alpha_exponent_report(M, z, pc);
            s["alpha"] = detail::rational_json(ar.alpha);
            if (ar.discrete) {
                s["alpha_removal_form"] = detail::rational_json(ar.alpha_removal_form);
                s["maximiser"] = ar.maximiser;
            }
        }
        if (c.get_bool("polytope.vertices", true)) {
            json vs = json::array();
            for (const auto& v : pcp_vertices(M, pc)) {
                json row = json::array();
                for (const auto& x : v) row.push_back(detail::rational_json(x));
                vs.push_back(row);
            }
            s["vertices"] = vs;
        }
        if (M.kind() == MatrixKind::graph_incidence) {
            std::ostringstream es;
            write_edge_list(es, M);
            rr.write_text("graph.edges", es.str());
        }
    }
    rr.write_json("polytope.json", s);
    rr.finish(kOk, "ok", s);
    return kOk;
}

// ---------------------------------------------------------------------------
// clt: Monte Carlo CLT for quadratic forms and Appell sums

inline int cmd_clt(const Config& c) {
    c.check_known(detail::with_globals({"clt.functional", "clt.l", "clt.bhat", "clt.model", "clt.phi", "clt.innovation", "clt.innovation_p1",
                                        "clt.innovation_p2", "clt.n", "clt.replicas", "clt.ratio_tolerance", "clt.max_skewness",
                                        "clt.max_excess_kurtosis"}));
    detail::check_schema(c);
    CltConfig cfg;
    cfg.seed = detail::require_seed(c);
    cfg.threads = detail::threads(c);
    const auto fn = c.get_string("clt.functional", "quadratic");
    if (fn == "quadratic") cfg.functional = CltConfig::Functional::quadratic;
    else if (fn == "sum") cfg.functional = CltConfig::Functional::sum;
    else throw c.error("clt.functional", "expected 'quadratic' or 'sum'");
    cfg.l = int(c.get_int("clt.l", 2));
    if (cfg.functional == CltConfig::Functional::sum && (cfg.l < 1 || cfg.l > 6)) throw c.error("clt.l", "must be in 1..6");
    cfg.bhat = LagKernel::from_symmetric(c.get_list("clt.bhat", std::vector<double>{1.0, 0.5}));
    const auto innov_name = c.get_string("clt.innovation", "gaussian");
    Innovation xi;
    try {
        xi = parse_innovation(innov_name, c.get_double("clt.innovation_p1", 1.0), c.get_double("clt.innovation_p2", 1.0));
        xi.validate();
    } catch (const std::invalid_argument& e) {
        throw c.error("clt.innovation", e.what());
    }
    const auto model = c.get_string("clt.model", "ar1");
    if (model != "ar1") throw c.error("clt.model", "supported models: ar1");
    try {
        cfg.model = ar1_model(c.get_double("clt.phi", 0.3), xi);
    } catch (const std::invalid_argument& e) {
        throw c.error("clt.phi", e.what());
    }
    const auto N = c.get_double("clt.n", 16384);
    if (!(N >= 16) || N != std::floor(N) || N > double(1 << 24)) throw c.error("clt.n", "must be an integer in 16..2^24");
    cfg.N = std::size_t(N);
    const auto R = c.get_int("clt.replicas", 2000);
    if (R < 2 || R > 1000000) throw c.error("clt.replicas", "must be in 2..10^6");
    cfg.replicas = std::size_t(R);
    const double rtol = c.get_double("clt.ratio_tolerance", 0.1), mskew = c.get_double("clt.max_skewness", 0.1),
                 mkurt = c.get_double("clt.max_excess_kurtosis", 0.2);

    const auto st = mc_clt_experiment(cfg);
    io::RunRecord rr("clt", detail::out_dir(c, "clt"), c, cfg.seed, cfg.threads);
    CsvTable t{{"replica", "value"}, {}};
    for (std::size_t i = 0; i < st.values.size(); ++i) t.add({std::to_string(i), detail::fmt(st.values[i])});
    rr.write_csv("clt_replicas.csv", t);
    bool pass;
    std::string verdict;
    if (!(st.target >= 0) || std::isnan(st.target)) {
        pass = false;
        verdict = "no target available: " + st.target_note;
    } else if (st.target == 0) {
        pass = st.variance <= 1e-24;
        verdict = "zero target: variance must vanish";
    } else {
        pass = std::abs(st.ratio - 1) <= rtol && std::abs(st.skewness) < mskew && std::abs(st.excess_kurtosis) < mkurt;
        verdict = "ratio within tolerance and shape statistics below thresholds";
    }
    json s;
    s["functional"] = fn;
    s["l"] = cfg.l;
    s["model"] = model;
    s["innovation"] = xi.name();
    s["N"] = cfg.N;
    s["replicas"] = cfg.replicas;
    s["mean"] = io::num(st.mean);
    s["variance"] = io::num(st.variance);
    s["target"] = io::num(st.target);
    s["ratio"] = io::num(st.ratio);
    s["ratio_se"] = io::num(st.ratio_se);
    s["skewness"] = io::num(st.skewness);
    s["excess_kurtosis"] = io::num(st.excess_kurtosis);
    s["ks_distance"] = io::num(st.ks_distance);
    s["target_note"] = st.target_note;
    s["criterion"] = verdict;
    s["pass"] = pass;
    rr.write_json("clt.json", s);
    const int code = pass ? kOk : kThreshold;
    rr.finish(code, pass ? "ok" : "threshold_failure", s);
    return code;
}

// ---------------------------------------------------------------------------
// fit: Whittle and Ibragimov estimation for the FRBM family

inline json conditions_json(const est::ConditionReport& r) {
    json a = json::array();
    for (const auto& ch : r.checks) a.push_back({{"id", ch.id}, {"status", ch.status}, {"detail", ch.detail}});
    return a;
}

inline int cmd_fit(const Config& c) {
    c.check_known(detail::with_globals({"fit.method", "fit.series", "fit.periodogram", "fit.gamma", "fit.alpha", "fit.c", "fit.t", "fit.h", "fit.replicas",
                                        "fit.weight", "fit.weight_a", "fit.weight_b", "fit.box_gamma", "fit.box_alpha", "fit.box_c", "fit.d4",
                                        "fit.starts", "fit.max_iterations", "fit.conditions", "fit.write_series"}));
    detail::check_schema(c);
    const auto method = c.get_string("fit.method", "whittle");
    if (method != "whittle" && method != "ibragimov" && method != "both") throw c.error("fit.method", "expected whittle, ibragimov or both");
    auto box_of = [&](const std::string& key, double lo, double hi) {
        const auto v = c.get_list(key, std::vector<double>{lo, hi});
        if (v.size() != 2 || !(v[0] < v[1])) throw c.error(key, "expected 'lo, hi' with lo < hi");
        return v;
    };
    const auto bg = box_of("fit.box_gamma", 0.5, 2.0), ba = box_of("fit.box_alpha", 0.01, 0.49), bc = box_of("fit.box_c", 0.2, 5.0);
    if (bg[0] < 0.5 || ba[0] < 0 || ba[1] >= 0.5 || bc[0] <= 0) throw c.error("fit.box_alpha", "box must lie in [1/2, inf) x [0, 1/2) x (0, inf)");
    const auto F = est::frbm_family({{bg[0], ba[0], bc[0]}, {bg[1], ba[1], bc[1]}});
    est::WeightFunction w;
    try {
        const auto wn = c.get_string("fit.weight", "power_ratio");
        w = wn == "power_ratio" ? est::frbm_weight(c.get_double("fit.weight_a", 4), c.get_double("fit.weight_b", 1.5)) : est::weight_from_name(wn, {});
    } catch (const std::invalid_argument& e) {
        throw c.error("fit.weight", e.what());
    }
    est::OptimizerConfig oc;
    oc.starts = std::size_t(c.get_int("fit.starts", 5));
    oc.max_iterations = std::size_t(c.get_int("fit.max_iterations", 5000));
    if (oc.starts < 1 || oc.starts > 64) throw c.error("fit.starts", "must be in 1..64");
    const double d4 = c.get_double("fit.d4", 0.0);

    est::Vec th0(3);
    th0 << c.get_double("fit.gamma", 1.0), c.get_double("fit.alpha", 0.2), c.get_double("fit.c", 1.0);
    if (!F.box.contains(th0)) throw c.error("fit.alpha", "theta0 (fit.gamma, fit.alpha, fit.c) lies outside the parameter box");

    std::vector<est::PeriodogramGrid> grids;
    std::uint64_t seed = 0;
    const bool from_file = c.has("fit.series") || c.has("fit.periodogram");
    std::optional<SampleSeries> first_series;
    if (c.has("fit.series")) {
        SampleSeries s;
        try {
            s = io::read_series_csv(c.get_string("fit.series"));
        } catch (const std::runtime_error& e) {
            throw ConfigError(c.name(), 0, "fit.series", e.what());
        }
        grids.push_back(est::PeriodogramGrid::from(periodogram_fourier(s)));
    } else if (c.has("fit.periodogram")) {
        std::map<std::string, std::vector<double>> cols;
        try {
            cols = io::read_csv_columns(c.get_string("fit.periodogram"));
        } catch (const std::runtime_error& e) {
            throw ConfigError(c.name(), 0, "fit.periodogram", e.what());
        }
        if (!cols.count("lambda") || !cols.count("i")) throw c.error("fit.periodogram", "periodogram CSV needs columns lambda,I");
        est::PeriodogramGrid g{cols["lambda"], cols["i"], 0};
        if (g.lambda.size() < 2) throw c.error("fit.periodogram", "need at least two frequencies");
        g.dlambda = g.lambda[1] - g.lambda[0];
        try {
            g.validate();
        } catch (const std::invalid_argument& e) {
            throw c.error("fit.periodogram", e.what());
        }
        grids.push_back(g);
    } else {
        seed = detail::require_seed(c);
        const double T = c.get_double("fit.t", 8192), h = c.get_double("fit.h", 0.0625);
        if (!(T > 0) || !(h > 0) || T / h > double(1 << 22) || T / h < 16) throw c.error("fit.t", "need 16 <= T/h <= 2^22");
        const auto R = c.get_int("fit.replicas", 1);
        if (R < 1 || R > 100000) throw c.error("fit.replicas", "must be in 1..10^5");
        const auto plan = make_frbm_synthesis(est::to_frbm(th0), T, h);
        grids.resize(std::size_t(R));
        for (std::size_t r = 0; r < grids.size(); ++r) {
            const auto s = simulate_frbm(plan, seed, r);
            if (r == 0) first_series = s;
            grids[r] = est::PeriodogramGrid::from(periodogram_fourier(s));
        }
    }
    const unsigned nthreads = detail::threads(c);
    io::RunRecord rr("fit", detail::out_dir(c, "fit"), c, seed, nthreads);
    if (first_series && c.get_bool("fit.write_series", false)) rr.write_text("series.csv", io::series_csv(*first_series));

    json s;
    s["family"] = F.name;
    s["parameters"] = F.param_names;
    s["theta0"] = detail::vec_json(th0);
    s["weight"] = {{"name", w.name}, {"params", w.params}};
    s["grid"] = {{"size", grids[0].lambda.size()}, {"step", grids[0].dlambda}, {"nyquist", grids[0].lambda.back()}};
    s["replicas"] = grids.size();
    s["source"] = from_file ? "file" : "simulated";
    s["frbm_weight_constraints"] = {{"b>1", w.name == "power_ratio" && w.params[1] > 1},
                                    {"a>b+2", w.name == "power_ratio" && w.params[0] > w.params[1] + 2},
                                    {"a>A+2", w.name == "power_ratio" && w.params[0] > (bg[1] - bg[0]) + 2}};
    if (c.get_bool("fit.conditions", true)) s["conditions"] = conditions_json(est::check_conditions(F, w, th0));
    bool pass = true;
    const double T = 2 * M_PI / grids[0].dlambda;

    auto run_method = [&](const std::string& m) {
        const bool wh = m == "whittle";
        est::FactorizedFamily P(F, w, th0);
        std::vector<est::EstimationResult> res(grids.size());
        parallel_replicas(grids.size(), nthreads, [&](std::size_t r) {
            res[r] = wh ? est::whittle_fit(grids[r], F, w, oc) : est::ibragimov_fit(grids[r], P, oc);
        });
        const auto names = res[0].names;
        const est::Vec truth = wh ? th0 : P.shape(th0);
        est::Mat Sigma;
        if (wh) {
            Sigma = est::whittle_asymptotic_cov(F, w, th0, 1.0, d4).Sigma;
        } else {
            Sigma = est::ibragimov_asymptotic_cov(P, truth, 1.0, d4).Sigma;
        }
        json j;
        j["parameters"] = names;
        j["asymptotic_covariance"] = detail::mat_json(Sigma);
        rr.write_csv(m + "_covariance.csv", detail::mat_csv(Sigma, names, "parameter"));
        CsvTable rt;
        rt.header = {"replica"};
        for (const auto& n : names) rt.header.push_back(n);
        rt.header.insert(rt.header.end(), {"objective", "iterations", "converged"});
        if (!wh) rt.header.push_back("sigma2_hat");
        std::size_t unconverged = 0;
        for (std::size_t r = 0; r < res.size(); ++r) {
            std::vector<std::string> row{std::to_string(r)};
            for (Eigen::Index i = 0; i < res[r].theta.size(); ++i) row.push_back(detail::fmt(res[r].theta[i]));
            row.insert(row.end(), {detail::fmt(res[r].objective), std::to_string(res[r].iterations), res[r].converged ? "1" : "0"});
            if (!wh) row.push_back(detail::fmt(*res[r].sigma2_hat));
            rt.add(row);
            unconverged += res[r].converged ? 0 : 1;
        }
        rr.write_csv(m + "_estimates.csv", rt);
        j["unconverged"] = unconverged;
        if (res.size() == 1) {
            j["theta_hat"] = detail::vec_json(res[0].theta);
            j["objective"] = io::num(res[0].objective);
            j["iterations"] = res[0].iterations;
            j["converged"] = res[0].converged;
            if (!wh) j["sigma2_hat"] = io::num(*res[0].sigma2_hat);
            json tr = json::array();
            for (const auto& st : res[0].fit.trace)
                tr.push_back({{"start", detail::vec_json(st.start)}, {"theta", detail::vec_json(st.theta)}, {"value", io::num(st.value)},
                              {"iterations", st.iterations}, {"converged", st.converged}});
            j["trace"] = tr;
            j["best_start"] = res[0].fit.best_start;
        } else {
            const auto n = double(res.size());
            est::Vec mean = est::Vec::Zero(truth.size());
            for (const auto& r : res) mean += r.theta;
            mean /= n;
            est::Mat C = est::Mat::Zero(truth.size(), truth.size());
            for (const auto& r : res) C += (r.theta - mean) * (r.theta - mean).transpose();
            C /= n - 1;
            const est::Vec se = (C.diagonal() / n).cwiseSqrt();
            const est::Mat scaled = T * C;
            bool consistent = true, cov_ok = true;
            for (Eigen::Index i = 0; i < truth.size(); ++i) {
                consistent = consistent && std::abs(mean[i] - truth[i]) <= 3 * se[i];
                const double ratio = scaled(i, i) / Sigma(i, i);
                cov_ok = cov_ok && ratio >= 0.5 && ratio <= 2;
            }
            j["mean"] = detail::vec_json(mean);
            j["standard_error"] = detail::vec_json(se);
            j["scaled_sample_covariance"] = detail::mat_json(scaled);
            j["consistent_3se"] = consistent;
            j["covariance_within_factor_2"] = cov_ok;
            if (!wh) {
                std::vector<double> s2;
                for (const auto& r : res) s2.push_back(*r.sigma2_hat);
                const auto st = summarize(s2, 0);
                const double target = P.sigma2(truth);
                j["sigma2_mean"] = io::num(st.mean);
                j["sigma2_se"] = io::num(std::sqrt(st.variance / n));
                j["sigma2_target"] = io::num(target);
                j["sigma2_consistent_3se"] = std::abs(st.mean - target) <= 3 * std::sqrt(st.variance / n);
                pass = pass && j["sigma2_consistent_3se"].get<bool>();
            }
            pass = pass && consistent && cov_ok;
        }
        s[m] = j;
    };
    if (method == "whittle" || method == "both") run_method("whittle");
    if (method == "ibragimov" || method == "both") run_method("ibragimov");
    s["pass"] = pass;
    rr.write_json("fit.json", s);
    const int code = pass ? kOk : kThreshold;
    rr.finish(code, pass ? "ok" : "threshold_failure", json{{"pass", pass}, {"replicas", grids.size()}});
    return code;
}

// ---------------------------------------------------------------------------
// diagrams: enumeration dumps and compiled cumulant graphs

inline int cmd_diagrams(const Config& c) {
    c.check_known(detail::with_globals({"diagrams.rows", "diagrams.mode", "diagrams.gaussian", "diagrams.dump", "diagrams.kind", "diagrams.m",
                                        "diagrams.n", "diagrams.k", "diagrams.d.*"}));
    detail::check_schema(c);
    io::RunRecord rr("diagrams", detail::out_dir(c, "diagrams"), c, 0, detail::threads(c));
    json s;
    if (c.has("diagrams.kind")) {
        wick::CumulantGraphKind kind;
        const auto k = c.get_string("diagrams.kind");
        if (k == "sum") kind.type = wick::CumulantGraphKind::Type::sum;
        else if (k == "bilinear") kind.type = wick::CumulantGraphKind::Type::bilinear;
        else throw c.error("diagrams.kind", "expected 'sum' or 'bilinear'");
        kind.m = std::size_t(c.get_int("diagrams.m", 2));
        kind.n = std::size_t(c.get_int("diagrams.n", 1));
        kind.k = std::size_t(c.get_int("diagrams.k", 2));
        if (kind.table().K() > wick::kMaxDiagramSlots) throw c.error("diagrams.k", "table too large (at most " + std::to_string(wick::kMaxDiagramSlots) + " slots)");
        wick::CumulantSequence model;
        model.d.assign(9, 0.0);
        model.d[2] = 1;
        for (const auto& [name, v] : detail::params_under(c, "diagrams.d.", {})) {
            std::size_t pos = 0;
            int order = 0;
            try {
                order = std::stoi(name, &pos);
            } catch (...) {
                pos = 0;
            }
            if (pos != name.size() || order < 2 || order > 8) throw c.error("diagrams.d." + name, "cumulant order must be 2..8");
            model.d[std::size_t(order)] = v;
        }
        const auto cds = wick::compile_cumulant_graphs(kind, model);
        const auto groups = wick::group_by_graph(cds);
        s["kind"] = k;
        s["m"] = kind.m;
        s["n"] = kind.n;
        s["k"] = kind.k;
        s["diagrams"] = cds.size();
        s["groups"] = groups.size();
        json gs = json::array();
        std::string edges;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            const auto& g = groups[i];
            const auto& rep = g.representative;
            json gj;
            gj["key"] = wick::canonical_key(rep);
            gj["multiplicity"] = g.multiplicity;
            gj["weight_symbol"] = rep.weight_symbol();
            gj["weight_each"] = io::num(rep.weight);
            gj["V"] = rep.graph.V;
            gj["edges"] = rep.graph.edges.size();
            gj["higher_blocks"] = rep.higher.size();
            gs.push_back(gj);
            std::ostringstream es;
            es << "# group " << i << " V=" << rep.graph.V << " multiplicity=" << g.multiplicity << "\n";
            write_edge_list(es, rep.graph);
            edges += es.str();
        }
        s["graph_groups"] = gs;
        rr.write_text("graphs.edges", edges);
    } else {
        wick::DiagramTable t;
        for (double r : c.get_list("diagrams.rows")) {
            if (!(r >= 1) || r != std::floor(r)) throw c.error("diagrams.rows", "row sizes must be positive integers");
            t.row_sizes.push_back(std::size_t(r));
        }
        if (t.K() > wick::kMaxDiagramSlots) throw c.error("diagrams.rows", "at most " + std::to_string(wick::kMaxDiagramSlots) + " slots");
        const auto mode = c.get_string("diagrams.mode", "wick_cumulant");
        wick::DiagramMode dm;
        if (mode == "moment") dm = wick::DiagramMode::moment;
        else if (mode == "wick_moment") dm = wick::DiagramMode::wick_moment;
        else if (mode == "cumulant") dm = wick::DiagramMode::cumulant;
        else if (mode == "wick_cumulant") dm = wick::DiagramMode::wick_cumulant;
        else throw c.error("diagrams.mode", "expected moment, wick_moment, cumulant or wick_cumulant");
        auto cons = wick::constraints_for(dm);
        cons.gaussian = c.get_bool("diagrams.gaussian", false);
        const auto ds = wick::enumerate_diagrams(t, cons);
        s["rows"] = t.row_sizes;
        s["mode"] = mode;
        s["gaussian"] = cons.gaussian;
        s["connected"] = cons.connected;
        s["no_flat"] = cons.no_flat;
        s["count"] = ds.size();
        if (c.get_bool("diagrams.dump", true)) {
            json a = json::array();
            for (const auto& d : ds) a.push_back(d.blocks);
            s["diagrams"] = a;
        }
    }
    rr.write_json("diagrams.json", s);
    rr.finish(kOk, "ok", json{{"count", s.contains("count") ? s["count"] : s["diagrams"]}});
    return kOk;
}

// ---------------------------------------------------------------------------
// kernels: L_p norms and the kernel property

inline int cmd_kernels(const Config& c) {
    c.check_known(detail::with_globals({"kernels.t_list", "kernels.p_list", "kernels.l1_t", "kernels.property_t_list", "kernels.property_n"}));
    detail::check_schema(c);
    io::RunRecord rr("kernels", detail::out_dir(c, "kernels"), c, 0, detail::threads(c));
    const auto Ts = c.get_list("kernels.t_list", std::vector<double>{64, 256, 1024});
    const auto ps = c.get_list("kernels.p_list", std::vector<double>{2, 4});
    CsvTable norms{{"domain", "T", "p", "norm_pow_p", "reference", "rel_gap"}, {}};
    for (double T : Ts) {
        if (!(T >= 2) || T != std::floor(T)) throw c.error("kernels.t_list", "T values must be integers >= 2");
        for (double p : ps) {
            if (!(p > 1)) throw c.error("kernels.p_list", "p must exceed 1 (p = 1 has its own ladder)");
            const double disc = std::pow(kernel_norm(T, p, {DomainTag::torus, 1}, NormMethod::quadrature), p);
            const double cont = std::pow(kernel_norm(T, p, {DomainTag::line, 1}, NormMethod::quadrature), p);
            double rd = std::nan(""), rc = std::nan("");
            if (p == 2) {
                rd = T;
                rc = 2 * M_PI * T;
            } else if (p == 4) {
                // counts of index quadruples with t1 + t2 = t3 + t4, and its continuous analogue
                rd = (2 * T * T * T + T) / 3;
                rc = 4 * M_PI * T * T * T / 3;
            }
            norms.add({"torus", detail::fmt(T), detail::fmt(p), detail::fmt(disc), detail::fmt(rd), detail::fmt(std::abs(disc - rd) / rd)});
            norms.add({"line", detail::fmt(T), detail::fmt(p), detail::fmt(cont), detail::fmt(rc), detail::fmt(std::abs(cont - rc) / rc)});
        }
    }
    rr.write_csv("kernel_norms.csv", norms);
    CsvTable l1{{"T", "l1_norm", "reference", "ratio"}, {}};
    for (double T : c.get_list("kernels.l1_t", std::vector<double>{1024, 4096, 16384})) {
        if (!(T >= 2) || T != std::floor(T)) throw c.error("kernels.l1_t", "T values must be integers >= 2");
        const auto a = dirichlet_l1_asymptotic(std::llround(T));
        l1.add({detail::fmt(T), detail::fmt(a.value), detail::fmt(4 / (M_PI * M_PI) * std::log(T)), detail::fmt(a.ratio)});
    }
    rr.write_csv("kernel_l1.csv", l1);
    const auto n = c.get_int("kernels.property_n", 2);
    if (n < 2 || n > 3) throw c.error("kernels.property_n", "must be 2 or 3");
    const auto rep = verify_kernel_property(
        [](const std::vector<double>& u) {
            double s = 0;
            for (double x : u) s += x;
            return std::cos(s);
        },
        c.get_list("kernels.property_t_list", std::vector<double>{64, 128, 256, 512, 1024}), std::size_t(n), SpectralDomain{});
    std::ostringstream ps_csv;
    rep.write_csv(ps_csv);
    rr.write_text("kernel_property.csv", ps_csv.str());
    json s{{"property_decreasing", rep.decreasing}, {"property_final_deviation", io::num(rep.rows.back().deviation)}};
    rr.write_json("kernels.json", s);
    rr.finish(kOk, "ok", s);
    return kOk;
}

/// Dispatch with the exit-code policy: configuration and input problems give 2.
inline int run(const std::string& command, const GlobalOptions& g, char** envp, std::ostream& err = std::cerr) {
    try {
        const Config c = load_config(g, envp);
        if (command == "szego") return cmd_szego(c);
        if (command == "polytope") return cmd_polytope(c);
        if (command == "clt") return cmd_clt(c);
        if (command == "fit") return cmd_fit(c);
        if (command == "diagrams") return cmd_diagrams(c);
        if (command == "kernels") return cmd_kernels(c);
        err << "unknown command '" << command << "'\n";
        return kInput;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kInput;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInput;
    } catch (const std::out_of_range& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInput;
    } catch (const std::length_error& e) {
        err << "input too large: " << e.what() << "\n";
        return kInput;
    } catch (const std::domain_error& e) {
        err << "invalid input: " << e.what() << "\n";
        return kInput;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return kInput;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << "\n";
        return kInput;
    }
}

}  // namespace szego::cli
