#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dichotomy/models.hpp"
#include "dichotomy/nonlinear.hpp"

namespace dichotomy {

inline constexpr int kSchemaVersion = 1;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int no_certificate = 1;
inline constexpr int assumptions_violated = 2;
inline constexpr int not_hyperbolic = 2;
inline constexpr int numerical_failure = 3;
inline constexpr int verify_failed = 1;
inline constexpr int usage = 64;
inline constexpr int io_error = 74;
}  // namespace exit_code

struct MeshRefinement {
  int loop = 0;
  int factor = 2;
};

struct MeshConfig {
  int k = 1;
  int M = 64;
  std::vector<MeshRefinement> refinements;
};

struct Tolerances {
  double hyperbolicity = kDefaultHyperbolicityTol;
  double rank = kDefaultRankTol;
  double newton = 1e-10;
  double trigger = 1e-3;
};

struct OutputPaths {
  std::string report;
  std::string sweep_csv;
};

struct RunConfig {
  ModelSpec model;
  MeshConfig mesh;
  int window = kDefaultWindow;
  Tolerances tolerances;
  OutputPaths outputs;
};

/// Throws ParseError on malformed or inconsistent documents.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& config);

ParameterMesh build_mesh(const MeshConfig& config);
CertifyOptions certify_options(const RunConfig& config);

nlohmann::json to_json(const BifurcationReport& report);
int exit_code_for(Conclusion conclusion);

/// Rows separated by ';' or newlines, entries by whitespace or ','.
Matrix parse_matrix(const std::string& text);

/// vertex_index, theta_0 .. theta_{k-1}, sigma_min, kernel_dim with 17 significant digits.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRecord>& records, int k);

int cmd_spectral(const std::string& input, std::ostream& out, std::ostream& err);
int cmd_certify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream& err);

struct SuiteResult {
  std::string name;
  int cases = 0;
  std::vector<std::pair<std::uint64_t, std::string>> failures;  // seed, message
  bool passed() const { return failures.empty(); }
};

inline const std::vector<std::string> kVerifySuites = {"index", "right_inverse", "splice", "adjoint", "contour"};

/// Runs one invariant suite on the seeded random corpus. Throws InvalidArgument for unknown names.
SuiteResult run_suite(const std::string& name, std::uint64_t seed = 0);

int cmd_verify(const std::string& suite, std::uint64_t seed, std::ostream& out, std::ostream& err);

}  // namespace dichotomy
