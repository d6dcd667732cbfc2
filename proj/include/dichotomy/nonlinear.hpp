#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dichotomy/bundle.hpp"
#include "dichotomy/linear_difference.hpp"
#include "dichotomy/param_mesh.hpp"
#include "dichotomy/types.hpp"

namespace dichotomy {

/// x_{n+1} = f_n(lambda, x_n) with its state derivative and the linearization at x = 0.
struct NonlinearFamily {
  int dim = 0;
  int params = 0;
  std::function<Vector(int, const ParameterPoint&, const Vector&)> map;
  std::function<Matrix(int, const ParameterPoint&, const Vector&)> derivative;
  LinearFamily linearization;
};

enum class SolutionKind { trivial, nontrivial, borderline };

struct WindowSolution {
  ParameterPoint lambda;
  int window = 0;
  Sequence x;
  double residual_norm = 0.0;
  double amplitude = 0.0;
  int iterations = 0;
  SolutionKind kind = SolutionKind::trivial;
};

struct NewtonOptions {
  int max_iter = 50;
  double tol = 1e-10;
  bool damping = true;
  int max_halvings = 8;
  double hyperbolicity_tol = kDefaultHyperbolicityTol;
  /// Called with every iterate, starting with the initial guess.
  std::function<void(const Sequence&)> observer;
};

/// F(x) on the window: x_{n+1} - f_n(lambda, x_n) for n = -M .. M-1, followed by
/// the boundary rows of the linearization's closure.
Vector residual(const NonlinearFamily& fam, const ParameterPoint& lambda, const Sequence& x,
                double tol = kDefaultHyperbolicityTol);

/// DF(x); at x = 0 this is assemble_truncated of the linearization.
TruncatedOperator jacobian(const NonlinearFamily& fam, const ParameterPoint& lambda, const Sequence& x,
                           double tol = kDefaultHyperbolicityTol);

/// Damped Newton on residual(). Converged once |F|_inf <= tol and the last
/// update is below tol * max(1, amplitude). Throws NoConvergence or SingularJacobian.
WindowSolution newton_solve(const NonlinearFamily& fam, const ParameterPoint& lambda, const Sequence& x0,
                            const NewtonOptions& opts = {});

/// amplitude * (first kernel column) reshaped to a window, rescaled so max_n |x_n| = amplitude.
Sequence branch_seed(const KernelDiagnostics& diag, double amplitude);

std::string to_string(SolutionKind kind);

struct SweepRecord {
  std::size_t vertex_index = 0;
  ParameterPoint theta;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  int kernel_dim = 0;
  double gap_ratio = 0.0;
};

struct NewtonAttempt {
  std::size_t candidate_vertex = 0;
  std::size_t start_vertex = 0;
  std::string outcome;  // converged_trivial, converged_nontrivial, converged_borderline, or an error kind
  std::optional<WindowSolution> solution;
};

struct SweepOptions {
  int window = kDefaultWindow;
  double rank_tol = kDefaultRankTol;
  double trigger = 1e-3;
  double seed_amplitude = 0.05;
  double hyperbolicity_tol = kDefaultHyperbolicityTol;
  bool attempt_newton = true;
  NewtonOptions newton;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<std::size_t> candidates;
  std::vector<NewtonAttempt> attempts;
};

/// sigma_min and kernel dimension of DF(0) at every vertex; candidates are the
/// vertices with sigma_min < trigger * median. Each candidate's kernel seeds
/// Newton at its loop neighbours.
SweepResult sweep(const NonlinearFamily& fam, const ParameterMesh& mesh, const SweepOptions& opts = {});

enum class Conclusion { certified_bifurcation, no_certificate, assumptions_violated, numerical_failure };

std::string to_string(Conclusion conclusion);

struct AssumptionCheck {
  std::string name;
  bool evaluated = false;
  bool passed = false;
  std::string detail;
};

struct BifurcationReport {
  std::vector<AssumptionCheck> assumption_status;  // A1 .. A5 in order
  std::optional<BifurcationCertificate> certificate;
  std::vector<SweepRecord> sweep;
  std::vector<std::size_t> candidates;
  std::vector<WindowSolution> solutions;
  std::vector<NewtonAttempt> newton_attempts;
  Conclusion conclusion = Conclusion::no_certificate;
  std::vector<std::string> notes;
  std::optional<std::string> failure;
};

struct CertifyOptions {
  SweepOptions sweep;
  double a3_deviation_tol = 1e-5;
};

/// Runs the assumption checks, the w1 certificate of the two stable bundles and
/// the sweep. Numerical failures are recorded in the report rather than thrown.
BifurcationReport certify_bifurcation(const NonlinearFamily& fam, const ParameterMesh& mesh,
                                      const CertifyOptions& opts = {});

}  // namespace dichotomy
