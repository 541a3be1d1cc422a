#include "szego/io.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <fstream>
#include <sstream>

using namespace szego;
using namespace szego::io;
namespace fs = std::filesystem;

namespace {

Config parse(const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in, "t.ini");
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("szego_test_" + std::to_string(::getpid())) / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

struct Run {
    int code = -1;
    std::string err;
};

// Runs the CLI with stderr captured; `env` is prepended as VAR=value assignments.
Run cli(const std::string& args, const fs::path& dir, const std::string& env = "") {
    const auto err = dir / "stderr.txt";
    const std::string cmd = env + " " + std::string(SZEGO_CLI_PATH) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
    const int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    r.err = slurp(err);
    return r;
}

fs::path config_file(const fs::path& dir, const std::string& text) {
    const auto p = dir / "cfg.ini";
    std::ofstream(p) << text;
    return p;
}

const char* kSmallClt =
    "seed = 11\n[clt]\nfunctional = quadratic\nbhat = 1, 0.5\nmodel = ar1\nphi = 0.3\ninnovation = gaussian\nn = 512\nreplicas = 40\n"
    "ratio_tolerance = 10\nmax_skewness = 10\nmax_excess_kurtosis = 10\n";

}  // namespace

TEST(Config, SectionsCommentsAndQuotes) {
    const auto c = parse("seed = 5 # trailing\n; whole-line comment\n[Fit]\nMethod = \"both\"\nbox_c = 0.2, 5\n[fit.weight]\na = 4\n");
    EXPECT_EQ(c.get_int("seed"), 5);
    EXPECT_EQ(c.get_string("fit.method"), "both");
    EXPECT_EQ(c.get_list("fit.box_c"), (std::vector<double>{0.2, 5}));
    EXPECT_DOUBLE_EQ(c.get_double("fit.weight.a"), 4);
    EXPECT_EQ(c.get_string("fit.missing", std::string("x")), "x");
    EXPECT_THROW(c.get_string("fit.missing"), ConfigError);
}

TEST(Config, PowersOfTwoInNumbers) {
    const auto c = parse("t = 2^13\nlist = 2^4, 2^5, 100\n");
    EXPECT_DOUBLE_EQ(c.get_double("t"), 8192);
    EXPECT_EQ(c.get_list("list"), (std::vector<double>{16, 32, 100}));
}

TEST(Config, ErrorsCarryFileLineAndField) {
    try {
        parse("a = 1\n\nb = 2\na = 3\n");
        FAIL() << "duplicate accepted";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 4);
        EXPECT_EQ(e.field(), "a");
        EXPECT_NE(std::string(e.what()).find("t.ini:4"), std::string::npos);
    }
    EXPECT_THROW(parse("[open\n"), ConfigError);
    EXPECT_THROW(parse("novalue\n"), ConfigError);
    try {
        parse("x = 1\nn = twelve\n").get_int("n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.line(), 2);
    }
    EXPECT_THROW(parse("b = maybe\n").get_bool("b"), ConfigError);
    EXPECT_THROW(parse("l = ,\n").get_list("l"), ConfigError);
}

TEST(Config, UnknownKeysRejectedWithWildcards) {
    const auto c = parse("[szego]\ngraph = cycle\nsymbol.phi = 0.5\n");
    EXPECT_NO_THROW(c.check_known({"szego.graph", "szego.symbol.*"}));
    try {
        c.check_known({"szego.graph"});
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "szego.symbol.phi");
        EXPECT_EQ(e.line(), 3);
    }
}

TEST(Config, EnvironmentOverrides) {
    auto c = parse("[clt]\nreplicas = 2000\n");
    std::string a = "SZEGO_CLT__REPLICAS=17", b = "OTHER_CLT__N=3", d = "SZEGO_CLT__SUB__KEY=x";
    char* envp[] = {a.data(), b.data(), d.data(), nullptr};
    c.apply_env(envp);
    EXPECT_EQ(c.get_int("clt.replicas"), 17);
    EXPECT_FALSE(c.has("clt.n"));
    EXPECT_EQ(c.get_string("clt.sub.key"), "x");
    EXPECT_EQ(c.entries().at("clt.replicas").source, "env");
}

TEST(Config, CanonicalFormAndHash) {
    const auto a = parse("b = 2\na = 1\n"), b = parse("a = 1\nb = 2\n"), c = parse("a = 1\nb = 3\n");
    EXPECT_EQ(a.canonical(), "a=1\nb=2\n");
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    // FNV-1a 64-bit reference vectors
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Csv, ColumnsAndSeriesRoundTrip) {
    const auto dir = scratch("csv");
    std::ofstream(dir / "p.csv") << "Lambda, I\n0.5, 1.25\n1.0,2\n\n";
    const auto cols = read_csv_columns(dir / "p.csv");
    EXPECT_EQ(cols.at("lambda"), (std::vector<double>{0.5, 1.0}));
    EXPECT_EQ(cols.at("i"), (std::vector<double>{1.25, 2}));
    std::ofstream(dir / "bad.csv") << "a,b\n1,x\n";
    EXPECT_THROW(read_csv_columns(dir / "bad.csv"), std::runtime_error);

    SampleSeries s;
    s.h = 0.0625;
    s.values = {0.1, -1.0 / 3, 2e-17, 5, 6.02214076e23};
    std::ofstream(dir / "s.csv") << series_csv(s);
    const auto back = read_series_csv(dir / "s.csv");
    EXPECT_DOUBLE_EQ(back.h, s.h);
    EXPECT_EQ(back.values, s.values);
    std::ofstream(dir / "uneven.csv") << "t,x\n0,1\n1,1\n3,1\n4,1\n";
    EXPECT_THROW(read_series_csv(dir / "uneven.csv"), std::runtime_error);
}

TEST(RunRecordFile, ListsOutputsWithHashes) {
    const auto dir = scratch("record");
    const auto cfg = parse("seed = 3\n");
    RunRecord rec("demo", dir, cfg, 3, 2);
    rec.write_text("a.txt", "hello\n");
    rec.finish(1, "threshold_failure", {{"x", 1}});
    const auto j = json::parse(slurp(dir / "run.json"));
    EXPECT_EQ(j["command"], "demo");
    EXPECT_EQ(j["exit_code"], 1);
    EXPECT_EQ(j["status"], "threshold_failure");
    EXPECT_EQ(j["seed"], 3);
    EXPECT_EQ(j["threads"], 2);
    EXPECT_EQ(j["config_hash"], hex64(cfg.hash()));
    ASSERT_EQ(j["outputs"].size(), 1u);
    EXPECT_EQ(j["outputs"][0]["fnv1a"], hex64(fnv1a(slurp(dir / "a.txt"))));
    EXPECT_TRUE(j["versions"].contains("eigen"));
}

TEST(Cli, ShippedConfigsSucceed) {
    for (auto [cmd, file] : std::vector<std::pair<std::string, std::string>>{
             {"szego", "szego_cycle"}, {"polytope", "polytope_c3"}, {"diagrams", "diagrams_sum"}, {"kernels", "kernels"}}) {
        const auto dir = scratch("shipped_" + cmd);
        const auto r = cli(cmd + " --config " + std::string(SZEGO_SOURCE_DIR) + "/configs/" + file + ".ini --out " + (dir / "out").string(), dir);
        EXPECT_EQ(r.code, 0) << cmd << ": " << r.err;
        const auto j = json::parse(slurp(dir / "out" / "run.json"));
        EXPECT_EQ(j["command"], cmd);
        EXPECT_EQ(j["status"], "ok");
        EXPECT_GE(j["outputs"].size(), 1u);
        for (const auto& o : j["outputs"]) EXPECT_EQ(o["fnv1a"], hex64(fnv1a(slurp(dir / "out" / o["file"].get<std::string>()))));
    }
}

TEST(Cli, InputErrorsExitTwo) {
    const auto dir = scratch("errors");
    EXPECT_EQ(cli("", dir).code, 2);
    EXPECT_EQ(cli("frobnicate", dir).code, 2);
    EXPECT_EQ(cli("kernels --config " + (dir / "missing.ini").string(), dir).code, 2);
    EXPECT_EQ(cli("kernels --threads 0", dir).code, 2);
    const auto bad = config_file(dir, "[szego]\ngraph = cycle\nbogus = 1\n");
    const auto r = cli("szego --config " + bad.string() + " --out " + (dir / "o").string(), dir);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("cfg.ini:3"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("szego.bogus"), std::string::npos) << r.err;
    // stochastic commands need a seed
    const auto noseed = config_file(dir, "[clt]\nreplicas = 10\n");
    EXPECT_EQ(cli("clt --config " + noseed.string() + " --out " + (dir / "o2").string(), dir).code, 2);
    EXPECT_EQ(cli("--help", dir).code, 0);
}

TEST(Cli, ThresholdFailureExitsOneAndStillReports) {
    const auto dir = scratch("threshold");
    const auto cfg = std::string(SZEGO_SOURCE_DIR) + "/configs/szego_cycle.ini";
    const auto r = cli("szego --config " + cfg + " --out " + (dir / "o").string(), dir, "SZEGO_SZEGO__TOLERANCE=1e-12");
    EXPECT_EQ(r.code, 1) << r.err;
    const auto j = json::parse(slurp(dir / "o" / "run.json"));
    EXPECT_EQ(j["status"], "threshold_failure");
    EXPECT_EQ(j["exit_code"], 1);
    EXPECT_NE(j["config"].get<std::string>().find("szego.tolerance=1e-12"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "o" / "szego.csv"));
}

TEST(Cli, FlagsOverrideConfigAndEnvironment) {
    const auto dir = scratch("flags");
    const auto cfg = config_file(dir, kSmallClt);
    const auto r = cli("clt --config " + cfg.string() + " --seed 99 --set clt.replicas=12 --out " + (dir / "o").string(), dir, "SZEGO_SEED=7 SZEGO_CLT__REPLICAS=30");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(slurp(dir / "o" / "run.json"));
    EXPECT_EQ(j["seed"], 99);
    const auto cols = read_csv_columns(dir / "o" / "clt_replicas.csv");
    EXPECT_EQ(cols.begin()->second.size(), 12u);
}

TEST(Cli, SeededRunsAreReproducibleAcrossThreadCounts) {
    const auto dir = scratch("determinism");
    const auto cfg = config_file(dir, kSmallClt);
    ASSERT_EQ(cli("clt --config " + cfg.string() + " --threads 1 --out " + (dir / "a").string(), dir).code, 0);
    ASSERT_EQ(cli("clt --config " + cfg.string() + " --threads 4 --out " + (dir / "b").string(), dir).code, 0);
    EXPECT_EQ(slurp(dir / "a" / "clt_replicas.csv"), slurp(dir / "b" / "clt_replicas.csv"));
    ASSERT_EQ(cli("clt --config " + cfg.string() + " --seed 12 --out " + (dir / "c").string(), dir).code, 0);
    EXPECT_NE(slurp(dir / "a" / "clt_replicas.csv"), slurp(dir / "c" / "clt_replicas.csv"));
}
