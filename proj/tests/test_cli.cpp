#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <sstream>

#include "permform/cli.hpp"
#include "test_support.hpp"

using namespace permform;
namespace pt = permform::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
  json parsed() const { return json::parse(out); }
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return pt::data_path(name); }

/// Scratch directory removed on destruction.
struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() /
          ("permform_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  std::string write(const std::string& name, const std::string& body) const {
    write_file(path(name), body);
    return path(name);
  }
};

void strip_timing(json& j) {
  if (j.is_object()) {
    j.erase("wall_time_ms");
    for (auto& [_, v] : j.items()) strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}

std::string mis_certificate(const Scratch& s) {
  const auto cert = s.path("mis.json");
  EXPECT_EQ(run({"solve", "--problem", "mis", "--input", data("g5.dimacs"), "--method", "exact", "--out", cert}).code, 0);
  return cert;
}

}  // namespace

// --- solve ---------------------------------------------------------------------

TEST(CliSolve, ExactIndependentSet) {
  const auto r = run({"solve", "--problem", "mis", "--input", data("g5.dimacs"), "--method", "exact", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.parsed();
  EXPECT_EQ(j["objective"], 3);
  EXPECT_EQ(j["feasible"], true);
  EXPECT_EQ(j["solution"]["vertices"], json({1, 4, 5}));
  EXPECT_EQ(j["certificate"]["k"], 3);
  EXPECT_EQ(j["method"], "exact");
}

TEST(CliSolve, AnnealRingTour) {
  const auto r = run({"solve", "--problem", "tsp", "--input", data("ring5.tsp"), "--method", "anneal", "--seed", "7", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.parsed()["objective"], 5);
}

TEST(CliSolve, AnnealSatisfiesSmallFormula) {
  const auto r = run({"solve", "--problem", "sat", "--input", data("small.cnf"), "--method", "anneal", "--seed", "42", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.parsed();
  EXPECT_EQ(j["feasible"], true);
  SatAssignment a;
  for (const auto& v : j["solution"]["assignment"]) a.values.push_back(v.get<bool>());
  EXPECT_TRUE(a.satisfies(pt::small_formula()));
}

TEST(CliSolve, TextOutput) {
  const auto r = run({"solve", "--problem", "mis", "--input", data("g5.dimacs"), "--method", "exact"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("objective: 3"), std::string::npos);
  EXPECT_NE(r.out.find("vertices {1,4,5}"), std::string::npos);
}

TEST(CliSolve, RelaxAndIsomorphism) {
  const auto r = run({"solve", "--problem", "mis", "--input", data("g5.dimacs"), "--method", "relax", "--seed", "1", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.parsed()["objective"], 3);
  const auto g = run({"solve", "--problem", "gi", "--input", data("c4.dimacs"), "--second", data("c4_relabelled.dimacs"),
                      "--method", "relax", "--json"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(g.parsed()["violation"], 0);
  EXPECT_EQ(g.parsed()["second"].get<std::string>(), data("c4_relabelled.dimacs"));
}

TEST(CliSolve, ParameterOverridesAreApplied) {
  const auto r = run({"solve", "--problem", "tsp", "--input", data("ring5.tsp"), "--iterations", "1", "--restarts", "1",
                      "--cooling-rate", "0.5", "--initial-temperature", "2", "--json"});
  ASSERT_TRUE(r.code == 0 || r.code == 2) << r.err;
  EXPECT_FALSE(r.parsed()["trajectory"].is_null());
  EXPECT_EQ(run({"solve", "--problem", "tsp", "--input", data("ring5.tsp"), "--cooling-rate", "1.5"}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "mis", "--input", data("g5.dimacs"), "--method", "relax", "--sinkhorn-iters", "0"}).code, 1);
}

TEST(CliSolve, InfeasibleBestEffortExitsTwo) {
  Scratch s;
  // Two unit clauses on the same variable: no assignment satisfies both.
  const auto cnf = s.write("unsat.cnf", "p cnf 1 2\n1 0\n-1 0\n");
  const auto r = run({"solve", "--problem", "sat", "--input", cnf, "--json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(r.parsed()["feasible"], false);
  EXPECT_TRUE(r.parsed()["solution"].is_null());
  EXPECT_EQ(run({"solve", "--problem", "sat", "--input", cnf, "--method", "exact"}).code, 2);
}

TEST(CliSolve, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"solve"}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "knapsack", "--input", data("g5.dimacs")}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "mis", "--input", data("g5.dimacs"), "--method", "magic"}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "sat", "--input", data("small.cnf"), "--method", "relax"}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "mds", "--input", data("g5.dimacs"), "--method", "relax"}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "mis", "--input", "/no/such/file"}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "gi", "--input", data("c4.dimacs")}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "mis", "--input", data("g5.dimacs"), "--second", data("c4.dimacs")}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "mis", "--input", data("g5.dimacs"), "--json", "--text"}).code, 1);
  EXPECT_EQ(run({"solve", "--problem", "tsp", "--input", data("g5.dimacs")}).code, 1);
}

TEST(CliSolve, ParseErrorsReportLines) {
  Scratch s;
  const auto bad = s.write("bad.dimacs", "p edge 3 1\ne 1 7\n");
  const auto r = run({"solve", "--problem", "mis", "--input", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST(CliSolve, LenientModeWarns) {
  Scratch s;
  const auto g = s.write("loose.dimacs", "p edge 3 5\ne 1 2\n");
  EXPECT_EQ(run({"solve", "--problem", "mis", "--input", g}).code, 1);
  const auto r = run({"solve", "--problem", "mis", "--input", g, "--lenient"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(CliSolve, ExactOutOfRangeExitsFive) {
  Scratch s;
  std::ostringstream text;
  text << "p edge 30 0\n";
  const auto big = s.write("big.dimacs", text.str());
  EXPECT_EQ(run({"solve", "--problem", "mis", "--input", big, "--method", "exact"}).code, 5);
}

TEST(CliSolve, ByteStableJson) {
  for (const std::string method : {"anneal", "relax"}) {
    const std::vector<std::string> args = {"solve", "--problem", "mvc", "--input", data("g5.dimacs"), "--method", method,
                                           "--seed", "5", "--json"};
    auto a = run(args).parsed();
    auto b = run(args).parsed();
    strip_timing(a);
    strip_timing(b);
    EXPECT_EQ(a.dump(), b.dump()) << method;
  }
}

// --- verify ---------------------------------------------------------------------

TEST(CliVerify, ValidCertificate) {
  Scratch s;
  const auto cert = mis_certificate(s);
  const auto r = run({"verify", "--problem", "mis", "--input", data("g5.dimacs"), "--certificate", cert, "--json"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.parsed()["verdict"], "valid");
  EXPECT_EQ(r.parsed()["digest_match"], true);
}

TEST(CliVerify, CertificateSurvivesWhitespaceVariants) {
  Scratch s;
  const auto cert = mis_certificate(s);
  const auto variant = s.write("g5_variant.dimacs", "c reordered\np edge 5 7\ne 5 3\ne 4 3\ne 5 2\ne 4 2\ne 3 2\ne 3 1\ne 2 1\n");
  EXPECT_EQ(run({"verify", "--problem", "mis", "--input", variant, "--certificate", cert}).code, 0);
}

TEST(CliVerify, LargerKIsInvalid) {
  Scratch s;
  auto j = json::parse(read_file(mis_certificate(s)));
  j["k"] = 4;
  j["objective"] = 4;
  const auto cert = s.write("k4.json", j.dump(2));
  const auto r = run({"verify", "--problem", "mis", "--input", data("g5.dimacs"), "--certificate", cert, "--json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.parsed()["verdict"], "invalid");
  EXPECT_GT(r.parsed()["violation"].get<int>(), 0);
}

TEST(CliVerify, TamperedPermutationRejected) {
  Scratch s;
  auto j = json::parse(read_file(mis_certificate(s)));
  j["pi"] = {1, 4, 4, 2, 3};
  const auto cert = s.write("tampered.json", j.dump(2));
  const auto r = run({"verify", "--problem", "mis", "--input", data("g5.dimacs"), "--certificate", cert, "--json"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.parsed()["reason"].get<std::string>().find("bijection"), std::string::npos);
}

TEST(CliVerify, WrongObjectiveOrFlagRejected) {
  Scratch s;
  const auto base = json::parse(read_file(mis_certificate(s)));
  auto j = base;
  j["objective"] = 2;
  EXPECT_EQ(run({"verify", "--problem", "mis", "--input", data("g5.dimacs"), "--certificate", s.write("o.json", j.dump())}).code, 3);
  j = base;
  j["feasible"] = false;
  EXPECT_EQ(run({"verify", "--problem", "mis", "--input", data("g5.dimacs"), "--certificate", s.write("f.json", j.dump())}).code, 3);
  EXPECT_EQ(run({"verify", "--problem", "mvc", "--input", data("g5.dimacs"), "--certificate", s.path("mis.json")}).code, 3);
  EXPECT_EQ(run({"verify", "--problem", "mis", "--input", data("g5.dimacs"), "--certificate", s.write("junk.json", "{")}).code, 3);
}

TEST(CliVerify, DigestMismatchExitsFour) {
  Scratch s;
  const auto cert = mis_certificate(s);
  const auto r = run({"verify", "--problem", "mis", "--input", data("g5_relabelled.dimacs"), "--certificate", cert, "--json"});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.parsed()["digest_match"], false);
}

TEST(CliVerify, SolveCertificatesVerifyForEveryProblem) {
  Scratch s;
  struct Case {
    std::string problem, input, second;
  };
  const std::vector<Case> cases = {
      {"mis", "g5.dimacs", ""},      {"clique", "g5.dimacs", ""},   {"mvc", "g5.dimacs", ""},
      {"mds", "g5.dimacs", ""},      {"maxcut", "k4.dimacs", ""},     {"coloring", "c5.dimacs", ""},
      {"tsp", "square.tsp", ""},       {"qap", "sample.qap", ""},       {"sat", "small.cnf", ""},
      {"gi", "g5.dimacs", "g5_relabelled.dimacs"},
  };
  for (const auto& c : cases)
    for (const std::string method : {"anneal", "exact"}) {
      const auto cert = s.path(c.problem + method + ".json");
      std::vector<std::string> args = {"solve", "--problem", c.problem, "--input", data(c.input), "--method", method, "--out", cert};
      if (!c.second.empty()) args.insert(args.end(), {"--second", data(c.second)});
      ASSERT_EQ(run(args).code, 0) << c.problem << " " << method;
      std::vector<std::string> vargs = {"verify", "--problem", c.problem, "--input", data(c.input), "--certificate", cert};
      if (!c.second.empty()) vargs.insert(vargs.end(), {"--second", data(c.second)});
      EXPECT_EQ(run(vargs).code, 0) << c.problem << " " << method;
    }
}

// --- oracle ---------------------------------------------------------------------

TEST(CliOracle, Examples) {
  auto r = run({"oracle", "--problem", "maxcut", "--input", data("k4.dimacs")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("optimum: 4"), std::string::npos);
  r = run({"oracle", "--problem", "coloring", "--input", data("c5.dimacs")});
  EXPECT_NE(r.out.find("optimum: 3"), std::string::npos);
  r = run({"oracle", "--problem", "mis", "--input", data("g5.dimacs"), "--formulation-search"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("3 = 3, AGREE"), std::string::npos);
}

TEST(CliOracle, JsonReport) {
  const auto r = run({"oracle", "--problem", "tsp", "--input", data("square.tsp"), "--formulation-search", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.parsed();
  EXPECT_EQ(j["optimum"], 4);
  EXPECT_EQ(j["formulation_search"]["agree"], true);
  EXPECT_EQ(j["witness"]["tour"].size(), 4u);
}

TEST(CliOracle, SizeLimitExitsFive) {
  Scratch s;
  const auto big = s.write("big.dimacs", "p edge 25 0\n");
  const auto r = run({"oracle", "--problem", "mis", "--input", big});
  EXPECT_EQ(r.code, 5);
  EXPECT_NE(r.err.find("exceeds oracle limit"), std::string::npos);
  EXPECT_EQ(run({"oracle", "--problem", "mis", "--input", data("g5.dimacs"), "--formulation-search"}).code, 0);
  EXPECT_EQ(run({"oracle", "--problem", "mis", "--input", s.write("nine.dimacs", "p edge 9 0\n"), "--formulation-search"}).code, 5);
}

// --- encode ---------------------------------------------------------------------

TEST(CliEncode, SmallFormulaMatrices) {
  const auto r = run({"encode", "--problem", "sat", "--input", data("small.cnf")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.parsed();
  EXPECT_EQ(j["N"], 13);
  EXPECT_EQ(j["literal_order"], json({1, -1, 2, -2, 3, -3, 4, -4}));
  std::vector<int> sums;
  for (const auto& row : j["B"]) {
    int s = 0;
    for (const auto& v : row) s += v.get<int>();
    sums.push_back(s);
  }
  EXPECT_EQ(sums, (std::vector<int>{3, 3, 2, 3, 2}));
  const auto enc = sat_encode(pt::small_formula());
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(j["V"][i][k], enc.conflict(i, k));
  EXPECT_EQ(j["A"].size(), 13u);
}

TEST(CliEncode, UnitClauseAndOutFile) {
  Scratch s;
  const auto cnf = s.write("unit.cnf", "p cnf 1 1\n1 0\n");
  const auto out = s.path("enc.json");
  ASSERT_EQ(run({"encode", "--problem", "sat", "--input", cnf, "--out", out}).code, 0);
  const auto j = json::parse(read_file(out));
  EXPECT_EQ(j["A"], json({{0, 1, 1}, {1, 0, 0}, {1, 0, 0}}));
  EXPECT_EQ(run({"encode", "--problem", "mis", "--input", data("g5.dimacs")}).code, 1);
}

// --- bench ----------------------------------------------------------------------

TEST(CliBench, EmptySuite) {
  Scratch s;
  const auto suite = s.write("empty.json", R"({"runs": []})");
  const auto r = run({"bench", "--suite", suite, "--json"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.parsed()["rows"].empty());
  EXPECT_EQ(r.parsed()["aggregate"]["runs"], 0);
  EXPECT_EQ(run({"bench", "--suite", suite}).code, 0);
}

TEST(CliBench, OutOfRangeRowContinues) {
  Scratch s;
  s.write("big.dimacs", "p edge 30 0\n");
  const auto suite = s.write("suite.json", R"({"runs": [
    {"problem": "mis", "input": "big.dimacs", "method": "anneal", "seed": 1},
    {"problem": "mis", "input": ")" + data("g5.dimacs") + R"(", "method": "exact"}]})");
  const auto r = run({"bench", "--suite", suite, "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = r.parsed();
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["oracle"], "out of range");
  EXPECT_EQ(j["rows"][0]["feasible"], true);
  EXPECT_EQ(j["rows"][1]["agree"], true);
  EXPECT_EQ(j["aggregate"]["oracle_checked"], 1);
  const auto text = run({"bench", "--suite", suite});
  EXPECT_NE(text.out.find("oracle: out of range"), std::string::npos);
}

TEST(CliBench, ExactSuiteAgreesWithOracle) {
  Scratch s;
  json runs = json::array();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto name = "g" + std::to_string(seed) + ".dimacs";
    s.write(name, write_dimacs_graph(pt::random_graph(7, 0.2 + 0.03 * static_cast<double>(seed), 4000 + seed)));
    for (const char* p : {"mis", "maxcut", "mvc", "mds", "clique", "coloring"})
      runs.push_back({{"problem", p}, {"input", name}, {"method", "exact"}});
  }
  const auto suite = s.write("suite.json", json{{"runs", runs}}.dump());
  const auto r = run({"bench", "--suite", suite, "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto agg = r.parsed()["aggregate"];
  EXPECT_EQ(agg["runs"], 120);
  EXPECT_EQ(agg["oracle_checked"], 120);
  EXPECT_EQ(agg["oracle_agree"], 120);
  EXPECT_EQ(agg["agreement_rate"], 1);
}

TEST(CliBench, ByteStableModuloTiming) {
  Scratch s;
  const auto suite = s.write("suite.json", json{{"runs",
                                                  {{{"problem", "tsp"}, {"input", data("ring5.tsp")}, {"method", "anneal"}, {"seed", 3}},
                                                   {{"problem", "mis"}, {"input", data("g5.dimacs")}, {"method", "relax"}, {"seed", 4}},
                                                   {{"problem", "sat"}, {"input", data("small.cnf")}, {"method", "anneal"}}}}}
                                                .dump());
  auto a = run({"bench", "--suite", suite, "--json"}).parsed();
  auto b = run({"bench", "--suite", suite, "--json"}).parsed();
  strip_timing(a);
  strip_timing(b);
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(CliBench, ManifestErrors) {
  Scratch s;
  EXPECT_EQ(run({"bench", "--suite", s.write("a.json", "{")}).code, 1);
  EXPECT_EQ(run({"bench", "--suite", s.write("b.json", R"({"runs": {}})")}).code, 1);
  EXPECT_EQ(run({"bench", "--suite", s.write("c.json", R"({"runs": [{"problem": "mis"}]})")}).code, 1);
  EXPECT_EQ(run({"bench", "--suite", s.write("d.json", R"({"runs": [{"problem": "x", "input": "y"}]})")}).code, 1);
  EXPECT_EQ(run({"bench", "--suite", s.write("e.json", R"({"runs": [{"problem": "mis", "input": "y", "bogus": 1}]})")}).code, 1);
  EXPECT_EQ(run({"bench", "--suite", s.write("f.json", R"({"runs": [{"problem": "mis", "input": "y", "seed": -1}]})")}).code, 1);
  // A missing instance file is a row error, not a manifest error.
  const auto r = run({"bench", "--suite", s.write("g.json", R"({"runs": [{"problem": "mis", "input": "missing.dimacs"}]})"), "--json"});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.parsed()["rows"][0].contains("error"));
}

TEST(CliHelp, PrintsUsage) {
  const auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("solve"), std::string::npos);
}
