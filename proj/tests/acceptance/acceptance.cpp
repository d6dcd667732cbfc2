// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dichotomy/cli.hpp"
#include "dichotomy/models.hpp"
#include "dichotomy/random.hpp"
#include "dichotomy/spectral.hpp"

using namespace dichotomy;
namespace fs = std::filesystem;

namespace {

const ParameterPoint kOrigin{{0.0}};

struct Outcome {
  bool passed = false;
  std::string detail;
};

Sequence random_sequence(Rng& rng, int first, int last, int dim) {
  Sequence x(first, last, dim);
  for (Eigen::Index i = 0; i < x.flat().size(); ++i) x.flat()(i) = rng.normal();
  return x;
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / ("dichotomy_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string command = std::string(DICHOTOMY_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome spectral_oracle() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const int n = 1 + static_cast<int>(seed % 4);
    const Matrix a = random_hyperbolic_matrix(seed, n);
    const Matrix schur = hyperbolic_splitting(a).stable_projector;
    worst = std::max(worst, (schur - spectral_projector_contour(a, 256).real()).cwiseAbs().maxCoeff());
  }
  Matrix d(2, 2);
  d << 0.5, 0.0, 0.0, 2.0;
  Matrix e1 = Matrix::Zero(2, 2);
  e1(0, 0) = 1.0;
  const double diag_err = (hyperbolic_splitting(d).stable_projector - e1).cwiseAbs().maxCoeff();
  return {worst <= 1e-8 && diag_err <= 1e-12, "max |Ps - Re P_contour| = " + fmt(worst) + ", diag error " + fmt(diag_err)};
}

Outcome torus_eigenstructure() {
  double eig_err = 0.0;
  double vec_err = 0.0;
  for (const auto& v : make_circle_mesh(128).vertices) {
    const Matrix a = torus_matrix(v);
    const Eigen::VectorXcd mu = a.eigenvalues();
    const double lo = std::min(mu(0).real(), mu(1).real());
    const double hi = std::max(mu(0).real(), mu(1).real());
    eig_err = std::max({eig_err, std::abs(lo - 0.5), std::abs(hi - 2.0), mu.imag().cwiseAbs().maxCoeff()});
    const Vector es = hyperbolic_splitting(a).stable_basis.col(0);
    const Vector expected = (Vector(2) << std::cos(v.theta[0] / 2), std::sin(v.theta[0] / 2)).finished();
    vec_err = std::max(vec_err, std::min((es - expected).cwiseAbs().maxCoeff(), (es + expected).cwiseAbs().maxCoeff()));
  }
  return {eig_err <= 1e-10 && vec_err <= 1e-8, "eigenvalue error " + fmt(eig_err) + ", eigenvector error " + fmt(vec_err)};
}

Outcome moebius_invariant() {
  bool ok = true;
  std::ostringstream detail;
  for (int m : {64, 128}) {
    const NonlinearFamily fam = build_torus_example(1, 0.0);
    const ParameterMesh mesh = make_circle_mesh(m);
    const int plus = w1_along_loop(sample_subbundle(fam.linearization.limit_plus, mesh, SubspaceKind::stable,
                                                    AsymptoticEnd::plus_infinity), 0);
    const int minus = w1_along_loop(sample_subbundle(fam.linearization.limit_minus, mesh, SubspaceKind::stable,
                                                     AsymptoticEnd::minus_infinity), 0);
    ok = ok && plus == 1 && minus == 0;
    detail << "M=" << m << ": w1+ " << plus << " w1- " << minus << "; ";
  }
  for (int k : {2, 3}) {
    const NonlinearFamily fam = build_torus_example(k, 0.0);
    const W1Vector w = w1_vector(sample_subbundle(fam.linearization.limit_plus, make_torus_mesh(k, 32),
                                                  SubspaceKind::stable, AsymptoticEnd::plus_infinity));
    ok = ok && w.bits == std::vector<int>(k, 1);
    detail << "T^" << k << ": [";
    for (int b : w.bits) detail << b;
    detail << "] ";
  }
  return {ok, detail.str()};
}

Outcome family_index() {
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed, 500);
    const int n = rng.uniform_int(1, 4);
    const int k_plus = rng.uniform_int(0, n);
    const int k_minus = rng.uniform_int(0, n);
    const LinearFamily fam = build_random(seed, n, k_plus, k_minus, rng.uniform(0.2, 0.6));
    const TruncatedOperator op = assemble_truncated(fam, kOrigin, fam.decay_probe);
    if (op.cols() - op.rows() != k_plus - k_minus) ++failures;
  }
  return {failures == 0, std::to_string(200 - failures) + "/200 families"};
}

Outcome right_inverse() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 1 + static_cast<int>(seed % 4);
    const Matrix a = random_hyperbolic_matrix(seed + 1000, n);
    Rng rng(seed, 501);
    const Sequence x = random_sequence(rng, 0, 40, n);
    const Sequence mx = right_inverse_apply(a, x);
    for (int k = 0; k <= 30; ++k) worst = std::max(worst, (mx[k + 1] - a * mx[k] - x[k]).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-8, "max |L M x - x| = " + fmt(worst)};
}

Outcome splice() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 1 + static_cast<int>(seed % 4);
    const LinearFamily fam =
        build_tabulated({random_hyperbolic_matrix(seed + 2000, n), random_hyperbolic_matrix(seed + 3000, n)}, -1, 1);
    Rng rng(seed, 502);
    const int first = -rng.uniform_int(1, 30);
    const int last = rng.uniform_int(1, 30);
    worst = std::max(worst, splice_check(fam, kOrigin, random_sequence(rng, first, last, n)));
  }
  return {worst <= 1e-12, "max discrepancy " + fmt(worst)};
}

Outcome linear_bifurcation_set() {
  const ParameterMesh mesh = make_circle_mesh(128);
  SweepOptions opts;
  opts.attempt_newton = false;
  const SweepResult result = sweep(build_torus_example(1, 0.0), mesh, opts);
  std::size_t nearest = 0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (std::abs(std::abs(mesh.vertices[v].theta[0]) - std::numbers::pi) <
        std::abs(std::abs(mesh.vertices[nearest].theta[0]) - std::numbers::pi)) {
      nearest = v;
    }
  }
  bool kernels_ok = true;
  std::vector<double> sigmas;
  for (const auto& r : result.records) {
    kernels_ok = kernels_ok && r.kernel_dim == (r.vertex_index == nearest ? 1 : 0);
    sigmas.push_back(r.sigma_min);
  }
  std::nth_element(sigmas.begin(), sigmas.begin() + sigmas.size() / 2, sigmas.end());
  const double median = sigmas[sigmas.size() / 2];
  const double ratio = result.records[nearest].sigma_min / median;
  return {kernels_ok && ratio <= 1e-3,
          "kernel only at vertex " + std::to_string(nearest) + ": " + (kernels_ok ? "yes" : "no") +
              ", sigma_min / median = " + fmt(ratio)};
}

Outcome end_to_end() {
  const fs::path dir = scratch();
  const std::string configs = DICHOTOMY_CONFIGS;
  const fs::path k1 = dir / "torus_k1.json";
  const int code = run_cli("certify --config " + configs + "/torus_k1.json --out " + k1.string() + " --csv " +
                           (dir / "torus_k1.csv").string());
  if (code != 0) return {false, "torus k=1 exit code " + std::to_string(code)};
  const auto report = read_json(k1);
  const auto& candidates = report.at("candidates");
  const int M = report.at("config").at("mesh").at("M");
  bool near_pi = !candidates.empty();
  for (const auto& c : candidates) {
    const double theta = report.at("sweep").at(c.get<std::size_t>()).at("theta").at(0);
    near_pi = near_pi && std::numbers::pi - std::abs(theta) <= 2.0 * std::numbers::pi / M + 1e-12;
  }
  const bool certified = report.at("conclusion") == "certified_bifurcation";

  const fs::path k3 = dir / "torus_k3.json";
  const int code3 = run_cli("certify --config " + configs + "/torus_k3.json --out " + k3.string());
  const auto report3 = read_json(k3);
  const auto& bound = report3.at("certificate").at("dimension_bound");
  const bool bound_ok = code3 == 0 && bound.is_number() && bound.get<int>() == 2;
  return {certified && near_pi && bound_ok, std::string("k=1 ") + report.at("conclusion").get<std::string>() +
                                                ", candidates near pi: " + (near_pi ? "yes" : "no") +
                                                "; k=3 exit " + std::to_string(code3) + ", dimension_bound " +
                                                bound.dump()};
}

Outcome counterexample() {
  const fs::path dir = scratch();
  const fs::path out = dir / "counterexample.json";
  const int code = run_cli("certify --config " + std::string(DICHOTOMY_CONFIGS) + "/counterexample.json --out " +
                           out.string() + " --csv " + (dir / "counterexample.csv").string());
  const auto report = read_json(out);
  bool kernels = !report.at("sweep").empty();
  for (const auto& r : report.at("sweep")) kernels = kernels && r.at("kernel_dim").get<int>() >= 1;

  const NonlinearFamily fam = build_counterexample(1);
  const Sequence y = adjoint_kernel_recurrence(fam.linearization, kOrigin, -40, 40,
                                               (Vector(4) << 0.0, 0.0, 0.0, 1.0).finished());
  bool positive = true;
  for (int n = -40; n <= 40; ++n) positive = positive && y[n](3) > 0.0;

  double pairing = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed, 503);
    Sequence a = random_sequence(rng, -20, 20, 4);
    Sequence b = random_sequence(rng, -20, 20, 4);
    for (Sequence* s : {&a, &b}) {
      (*s)[-20].setZero();
      (*s)[20].setZero();
    }
    pairing = std::max(pairing, std::abs(adjoint_pairing_defect(fam.linearization, kOrigin, a, b)) /
                                    std::max(1.0, a.flat().norm() * b.flat().norm()));
  }

  double largest = 0.0;
  const ParameterMesh mesh = make_circle_mesh(32);
  for (std::uint64_t seed = 0; seed < 32; ++seed) {
    Rng rng(seed, 504);
    Sequence x0 = random_sequence(rng, -20, 20, 4);
    x0.flat() *= rng.uniform(0.01, 0.5) / x0.amplitude();
    try {
      largest = std::max(largest, newton_solve(fam, mesh.vertices[seed], x0).amplitude);
    } catch (const Error&) {
    }
  }
  const bool ok = code == 2 && kernels && positive && pairing <= 1e-10 && largest <= 1e-8;
  return {ok, "exit " + std::to_string(code) + ", kernel everywhere: " + (kernels ? "yes" : "no") +
                  ", weights positive: " + (positive ? "yes" : "no") + ", pairing defect " + fmt(pairing) +
                  ", largest Newton amplitude " + fmt(largest)};
}

Outcome jacobian_consistency() {
  ModelSpec torus;
  torus.name = "torus_example";
  ModelSpec counter;
  counter.name = "counterexample_A5";
  ModelSpec random;
  random.name = "random_asymptotic";
  random.params = {{"seed", 7}, {"N", 3}};
  ModelSpec tabulated;
  tabulated.name = "tabulated";
  tabulated.params = {{"first", -1}};
  tabulated.matrices = {random_hyperbolic_matrix(1, 3), random_hyperbolic_matrix(2, 3)};

  double worst = 0.0;
  for (const ModelSpec& spec : {torus, counter, random, tabulated}) {
    const NonlinearFamily fam = build_model(spec);
    const int window = std::max(fam.linearization.decay_probe, 10);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed, 505);
      const Sequence x = random_sequence(rng, -window, window, fam.dim);
      const ParameterPoint lambda{{rng.uniform(-std::numbers::pi, std::numbers::pi)}};
      const Matrix analytic = jacobian(fam, lambda, x).matrix;
      constexpr double eps = 1e-6;
      Matrix numeric(analytic.rows(), analytic.cols());
      for (Eigen::Index j = 0; j < x.flat().size(); ++j) {
        Sequence up = x;
        Sequence down = x;
        up.flat()(j) += eps;
        down.flat()(j) -= eps;
        numeric.col(j) = (residual(fam, lambda, up) - residual(fam, lambda, down)) / (2.0 * eps);
      }
      worst = std::max(worst, (analytic - numeric).norm() / analytic.norm());
    }
  }
  return {worst <= 1e-5, "max relative error " + fmt(worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"spectral oracle", spectral_oracle},
      {"torus eigenstructure", torus_eigenstructure},
      {"Moebius invariant", moebius_invariant},
      {"family index, structural form", family_index},
      {"right inverse", right_inverse},
      {"splice identity", splice},
      {"linear bifurcation set", linear_bifurcation_set},
      {"end-to-end certification", end_to_end},
      {"A5 counterexample", counterexample},
      {"Jacobian consistency", jacobian_consistency},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    if (!outcome.passed) ++failed;
    std::printf("criterion %zu %s: %s (%s)\n", i + 1, outcome.passed ? "PASS" : "FAIL", criteria[i].first.c_str(),
                outcome.detail.c_str());
  }
  std::error_code ec;
  fs::remove_all(scratch(), ec);
  return failed == 0 ? 0 : 1;
}
