#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dichotomy/cli.hpp"

using namespace dichotomy;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("dichotomy_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const std::string& stdout_path = "/dev/null") {
  const std::string command = std::string(DICHOTOMY_CLI) + " " + args + " > " + stdout_path + " 2>/dev/null";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

fs::path write_config(const fs::path& dir, const std::string& name, const nlohmann::json& doc) {
  const fs::path path = dir / name;
  std::ofstream(path) << doc.dump(2);
  return path;
}

}  // namespace

TEST(ParseMatrix, Formats) {
  Matrix expected(2, 2);
  expected << 0.5, 0.0, 0.0, 2.0;
  EXPECT_EQ(parse_matrix("0.5 0; 0 2"), expected);
  EXPECT_EQ(parse_matrix("0.5, 0\n0, 2\n"), expected);
  EXPECT_EQ(parse_matrix("  0.5   0 ;0 2e0"), expected);
}

TEST(ParseMatrix, Errors) {
  for (const char* bad : {"", "a b; c d", "1 2; 3", "1 2 3; 4 5 6", "1x 2; 3 4"}) {
    try {
      parse_matrix(bad);
      FAIL() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError) << bad;
    }
  }
}

TEST(ParseConfig, Defaults) {
  const RunConfig config = parse_config(nlohmann::json::parse(R"({"model": {"name": "torus_example"}})"));
  EXPECT_EQ(config.model.k, 1);
  EXPECT_EQ(config.mesh.M, 64);
  EXPECT_EQ(config.window, 50);
  EXPECT_EQ(config.tolerances.newton, 1e-10);
  EXPECT_TRUE(config.outputs.report.empty());
}

TEST(ParseConfig, RoundTrip) {
  const RunConfig config = load_config(std::string(DICHOTOMY_CONFIGS) + "/torus_k1.json");
  EXPECT_EQ(config.mesh.M, 128);
  EXPECT_EQ(config.model.params.at("c"), 0.05);
  const RunConfig again = parse_config(to_json(config));
  EXPECT_EQ(to_json(again), to_json(config));
}

TEST(ParseConfig, Errors) {
  for (const char* bad : {R"([])", R"({"schema_version": 2, "model": {"name": "torus_example"}})",
                          R"({"window": 10})", R"({"model": {"name": "torus_example"}, "tolerances": {"rank": -1}})",
                          R"({"model": {"name": "torus_example", "k": 2}, "mesh": {"k": 1}})",
                          R"({"model": {"name": "torus_example"}, "window": 0})",
                          R"({"model": {"name": "torus_example", "params": {"c": "x"}}})"}) {
    try {
      parse_config(nlohmann::json::parse(bad));
      FAIL() << "accepted " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ParseError) << bad;
    }
  }
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(BuildMesh, AppliesRefinements) {
  MeshConfig mesh;
  mesh.k = 2;
  mesh.M = 16;
  mesh.refinements = {{1, 2}};
  const ParameterMesh built = build_mesh(mesh);
  EXPECT_EQ(built.loops[0].size(), 16u);
  EXPECT_EQ(built.loops[1].size(), 32u);
}

TEST(ExitCodes, Conclusions) {
  EXPECT_EQ(exit_code_for(Conclusion::certified_bifurcation), 0);
  EXPECT_EQ(exit_code_for(Conclusion::no_certificate), 1);
  EXPECT_EQ(exit_code_for(Conclusion::assumptions_violated), 2);
  EXPECT_EQ(exit_code_for(Conclusion::numerical_failure), 3);
}

TEST(SweepCsv, Format) {
  std::ostringstream out;
  write_sweep_csv(out, {{0, ParameterPoint{{3.0, 0.0}}, 0.125, 1.0, 1, 0.0}}, 2);
  EXPECT_EQ(out.str(), "vertex_index,theta_0,theta_1,sigma_min,kernel_dim\n0,3,0,0.125,1\n");
}

TEST(Verify, SuitesPass) {
  for (const auto& name : kVerifySuites) {
    const SuiteResult result = run_suite(name, 0);
    EXPECT_TRUE(result.passed()) << name << ": " << (result.failures.empty() ? "" : result.failures[0].second);
    EXPECT_GT(result.cases, 0);
  }
  EXPECT_THROW(run_suite("bogus"), Error);
}

TEST(Verify, SuiteRunsAreReproducible) {
  std::ostringstream a;
  std::ostringstream b;
  std::ostringstream err;
  EXPECT_EQ(cmd_verify("contour", 123, a, err), 0);
  EXPECT_EQ(cmd_verify("contour", 123, b, err), 0);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Binary, SpectralExitCodes) {
  const fs::path dir = scratch_dir();
  EXPECT_EQ(run_cli("spectral '0.5 0; 0 2'", (dir / "spectral.txt").string()), 0);
  EXPECT_NE(slurp(dir / "spectral.txt").find("k_s: 1"), std::string::npos);
  EXPECT_EQ(run_cli("spectral '0 -1; 1 0'"), 2);
  EXPECT_EQ(run_cli("spectral '1 2; 2 4'"), 2);
  EXPECT_EQ(run_cli("spectral 'a b'"), 64);
  EXPECT_EQ(run_cli("spectral"), 64);
  EXPECT_EQ(run_cli("frobnicate"), 64);
}

TEST(Binary, SpectralOfCounterexampleLimit) {
  const fs::path dir = scratch_dir();
  std::ofstream(dir / "a_minus.txt") << "0.5 0 0 0\n0 2 0 0\n0 0 2 0\n0 0 0 0.5\n";
  EXPECT_EQ(run_cli((dir / "a_minus.txt").string(), (dir / "unused.txt").string()), 64);
  EXPECT_EQ(run_cli("spectral " + (dir / "a_minus.txt").string(), (dir / "a_minus_out.txt").string()), 0);
  EXPECT_NE(slurp(dir / "a_minus_out.txt").find("k_s: 2"), std::string::npos);
}

TEST(Binary, SweepCsvLocatesTheKernel) {
  const fs::path dir = scratch_dir();
  const fs::path csv = dir / "torus.csv";
  ASSERT_EQ(run_cli("sweep --model torus_example --mesh-m 128 --window 30 --csv " + csv.string()), 0);
  const auto rows = lines_of(slurp(csv));
  ASSERT_EQ(rows.size(), 129u);
  EXPECT_EQ(rows[0], "vertex_index,theta_0,sigma_min,kernel_dim");
  double best = 1e300;
  std::size_t best_index = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(in, field, ',')) fields.push_back(field);
    ASSERT_EQ(fields.size(), 4u);
    const double sigma = std::stod(fields[2]);
    if (sigma < best) {
      best = sigma;
      best_index = std::stoul(fields[0]);
    }
    EXPECT_EQ(fields[3], i == 1 ? "1" : "0") << rows[i];
  }
  EXPECT_EQ(best_index, 0u);

  const fs::path again = dir / "torus_again.csv";
  ASSERT_EQ(run_cli("sweep --model torus_example --mesh-m 128 --window 30 --csv " + again.string()), 0);
  EXPECT_EQ(slurp(csv), slurp(again));
}

TEST(Binary, SweepUnwritableOutput) {
  EXPECT_EQ(run_cli("sweep --model torus_example --mesh-m 16 --window 20 --csv /nonexistent/dir/out.csv"), 74);
}

TEST(Binary, SweepCounterexampleKernelEverywhere) {
  const fs::path dir = scratch_dir();
  const fs::path csv = dir / "counter.csv";
  ASSERT_EQ(run_cli("sweep --model counterexample_A5 --mesh-m 16 --window 20 --csv " + csv.string()), 0);
  const auto rows = lines_of(slurp(csv));
  ASSERT_EQ(rows.size(), 17u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_NE(rows[i].substr(rows[i].rfind(',') + 1), "0") << rows[i];
}

TEST(Binary, ConstantTabulatedFamilyIsRegular) {
  const fs::path dir = scratch_dir();
  nlohmann::json doc = {{"schema_version", 1},
                        {"model", {{"name", "tabulated"}, {"k", 1}, {"matrices", {{{0.5, 0.2}, {0.0, 3.0}}}}}},
                        {"mesh", {{"k", 1}, {"M", 8}}},
                        {"window", 10},
                        {"outputs", {{"report", (dir / "tab.json").string()}, {"sweep_csv", (dir / "tab.csv").string()}}}};
  const fs::path config = write_config(dir, "tab_config.json", doc);
  EXPECT_EQ(run_cli("certify --config " + config.string()), 1);
  const auto report = nlohmann::json::parse(slurp(dir / "tab.json"));
  EXPECT_EQ(report.at("conclusion"), "no_certificate");
  for (const auto& r : report.at("sweep")) EXPECT_EQ(r.at("kernel_dim"), 0);
  EXPECT_TRUE(report.at("candidates").empty());
}

TEST(Binary, CertifyReportSchema) {
  const fs::path dir = scratch_dir();
  const fs::path out = dir / "torus_report.json";
  ASSERT_EQ(run_cli("certify --model torus_example --mesh-m 32 --window 20 --out " + out.string()), 0);
  const auto report = nlohmann::json::parse(slurp(out));
  for (const char* key : {"schema_version", "assumption_status", "certificate", "sweep", "candidates", "solutions",
                          "newton_attempts", "conclusion", "notes", "failure", "config"}) {
    EXPECT_TRUE(report.contains(key)) << key;
  }
  EXPECT_EQ(report.at("schema_version"), kSchemaVersion);
  EXPECT_EQ(report.at("conclusion"), "certified_bifurcation");
  EXPECT_EQ(report.at("assumption_status").size(), 5u);
  EXPECT_EQ(report.at("certificate").at("w1_plus"), nlohmann::json({1}));
  EXPECT_EQ(report.at("sweep").size(), 32u);
}

TEST(Binary, CertifyExitCodes) {
  const fs::path dir = scratch_dir();
  EXPECT_EQ(run_cli("certify --model counterexample_A5 --mesh-m 16 --window 20", (dir / "c.json").string()), 2);
  EXPECT_EQ(run_cli("certify --model torus_example --mesh-m 16 --window 4", (dir / "w.json").string()), 3);
  EXPECT_EQ(run_cli("certify --model torus_example --mesh-m 4"), 64);
  EXPECT_EQ(run_cli("certify --model nonexistent"), 64);
  EXPECT_EQ(run_cli("certify"), 64);
  EXPECT_EQ(run_cli("certify --config /nonexistent.json"), 64);
}

TEST(Binary, VerifyCommand) {
  EXPECT_EQ(run_cli("verify index --seed 5"), 0);
  EXPECT_EQ(run_cli("verify nothing"), 64);
  EXPECT_EQ(run_cli("verify index --seed -1"), 64);
}
