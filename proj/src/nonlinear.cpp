#include "dichotomy/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "dichotomy/parallel.hpp"

namespace dichotomy {

namespace {

constexpr double kSingularRcond = 100.0 * std::numeric_limits<double>::epsilon();

int window_of(const NonlinearFamily& fam, const Sequence& x) {
  const int window = x.last();
  if (x.first() != -window || x.dim() != fam.dim) {
    throw Error(ErrorKind::InvalidArgument, "window sequence must be indexed -M..M with the family's dimension");
  }
  if (window < 1 || window < fam.linearization.decay_probe) {
    throw Error(ErrorKind::WindowTooSmall, "window " + std::to_string(window) + " below decay probe " +
                                               std::to_string(fam.linearization.decay_probe));
  }
  return window;
}

template <typename Result, typename Call>
Result guarded_eval(const char* what, int n, Call&& call) {
  Result value;
  try {
    value = call();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::EvaluatorFailure, std::string(what) + " threw at n = " + std::to_string(n) + ": " + e.what());
  }
  if (!value.allFinite()) {
    throw Error(ErrorKind::EvaluatorFailure, std::string(what) + " returned non-finite values at n = " + std::to_string(n));
  }
  return value;
}

Vector residual_with(const NonlinearFamily& fam, const ParameterPoint& lambda, const Sequence& x,
                     const BoundaryClosure& closure) {
  const int window = window_of(fam, x);
  const Eigen::Index d = fam.dim;
  const Eigen::Index dynamic_rows = 2 * static_cast<Eigen::Index>(window) * d;
  Vector out(dynamic_rows + closure.plus_rows.rows() + closure.minus_rows.rows());
  for (int n = -window; n < window; ++n) {
    const Vector image = guarded_eval<Vector>("f_n", n, [&] { return fam.map(n, lambda, Vector(x[n])); });
    out.segment(static_cast<Eigen::Index>(n + window) * d, d) = x[n + 1] - image;
  }
  out.segment(dynamic_rows, closure.plus_rows.rows()) = closure.plus_rows * x[window];
  out.tail(closure.minus_rows.rows()) = closure.minus_rows * x[-window];
  return out;
}

TruncatedOperator jacobian_with(const NonlinearFamily& fam, const ParameterPoint& lambda, const Sequence& x,
                                const BoundaryClosure& closure) {
  TruncatedOperator op;
  op.window = window_of(fam, x);
  op.dim = fam.dim;
  op.lambda = lambda;
  op.bc_plus_rank = static_cast<int>(closure.plus_rows.rows());
  op.bc_minus_rank = static_cast<int>(closure.minus_rows.rows());
  op.matrix = assemble_window_operator(
      fam.dim, op.window,
      [&](int n) { return guarded_eval<Matrix>("Df_n", n, [&] { return fam.derivative(n, lambda, Vector(x[n])); }); },
      closure);
  return op;
}

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

SolutionKind classify(const Sequence& x, double amplitude, double tol) {
  if (amplitude < 10.0 * tol) return SolutionKind::trivial;
  const double edge = std::max(x[x.first()].norm(), x[x.last()].norm());
  if (amplitude > 100.0 * tol && edge <= 1e-4 * amplitude) return SolutionKind::nontrivial;
  return SolutionKind::borderline;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

std::string to_string(SolutionKind kind) {
  switch (kind) {
    case SolutionKind::trivial: return "trivial";
    case SolutionKind::nontrivial: return "nontrivial";
    case SolutionKind::borderline: return "borderline";
  }
  return "unknown";
}

std::string to_string(Conclusion conclusion) {
  switch (conclusion) {
    case Conclusion::certified_bifurcation: return "certified_bifurcation";
    case Conclusion::no_certificate: return "no_certificate";
    case Conclusion::assumptions_violated: return "assumptions_violated";
    case Conclusion::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

Vector residual(const NonlinearFamily& fam, const ParameterPoint& lambda, const Sequence& x, double tol) {
  window_of(fam, x);
  return residual_with(fam, lambda, x, boundary_closure(fam.linearization, lambda, tol));
}

TruncatedOperator jacobian(const NonlinearFamily& fam, const ParameterPoint& lambda, const Sequence& x, double tol) {
  window_of(fam, x);
  return jacobian_with(fam, lambda, x, boundary_closure(fam.linearization, lambda, tol));
}

WindowSolution newton_solve(const NonlinearFamily& fam, const ParameterPoint& lambda, const Sequence& x0,
                            const NewtonOptions& opts) {
  if (!(opts.tol >= 1e-13)) throw Error(ErrorKind::InvalidArgument, "Newton tolerance must be at least 1e-13");
  const int window = window_of(fam, x0);
  const BoundaryClosure closure = boundary_closure(fam.linearization, lambda, opts.hyperbolicity_tol);

  WindowSolution sol;
  sol.lambda = lambda;
  sol.window = window;
  sol.x = x0;
  Vector f = residual_with(fam, lambda, sol.x, closure);
  double r = inf_norm(f);
  if (opts.observer) opts.observer(sol.x);

  auto finish = [&](int iterations) {
    sol.residual_norm = r;
    sol.amplitude = sol.x.amplitude();
    sol.iterations = iterations;
    sol.kind = classify(sol.x, sol.amplitude, opts.tol);
    return sol;
  };
  if (r == 0.0) return finish(0);

  for (int it = 1; it <= opts.max_iter; ++it) {
    const TruncatedOperator jac = jacobian_with(fam, lambda, sol.x, closure);
    Vector delta;
    if (jac.rows() == jac.cols()) {
      const Eigen::PartialPivLU<Matrix> lu(jac.matrix);
      if (!(lu.rcond() > kSingularRcond)) {
        throw Error(ErrorKind::SingularJacobian, "reciprocal condition " + format_number(lu.rcond()) +
                                                     " at iteration " + std::to_string(it));
      }
      delta = -lu.solve(f);
    } else {
      const Eigen::CompleteOrthogonalDecomposition<Matrix> cod(jac.matrix);
      delta = -cod.solve(f);
    }

    double step = 1.0;
    Sequence trial(sol.x.first(), sol.x.dim(), sol.x.flat() + delta);
    Vector f_trial = residual_with(fam, lambda, trial, closure);
    for (int h = 0; opts.damping && h < opts.max_halvings && !(inf_norm(f_trial) < r); ++h) {
      step *= 0.5;
      trial.flat() = sol.x.flat() + step * delta;
      f_trial = residual_with(fam, lambda, trial, closure);
    }

    sol.x = std::move(trial);
    f = std::move(f_trial);
    r = inf_norm(f);
    if (opts.observer) opts.observer(sol.x);

    const double update = step * inf_norm(delta);
    if (r == 0.0 || (r <= opts.tol && update <= opts.tol * std::max(1.0, sol.x.amplitude()))) return finish(it);
  }
  throw Error(ErrorKind::NoConvergence, "residual " + format_number(r) + " after " + std::to_string(opts.max_iter) +
                                            " iterations");
}

Sequence branch_seed(const KernelDiagnostics& diag, double amplitude) {
  if (diag.kernel_dim < 1 || diag.kernel_basis.cols() < 1) throw Error(ErrorKind::EmptyKernel, "no kernel direction");
  if (diag.dim < 1) throw Error(ErrorKind::InvalidArgument, "diagnostics carry no state dimension");
  const Eigen::Index states = diag.kernel_basis.rows() / diag.dim;
  const int window = static_cast<int>((states - 1) / 2);
  Sequence seed(-window, diag.dim, diag.kernel_basis.col(0));
  seed.flat() *= amplitude / seed.amplitude();
  return seed;
}

SweepResult sweep(const NonlinearFamily& fam, const ParameterMesh& mesh, const SweepOptions& opts) {
  const std::size_t count = mesh.vertices.size();
  const Sequence zero(-opts.window, opts.window, fam.dim);
  std::vector<KernelDiagnostics> diags(count);
  parallel_for(count, [&](std::size_t v) {
    diags[v] = kernel_diagnostics(jacobian(fam, mesh.vertices[v], zero, opts.hyperbolicity_tol), opts.rank_tol);
  });

  SweepResult result;
  std::vector<double> sigmas;
  for (std::size_t v = 0; v < count; ++v) {
    result.records.push_back({v, mesh.vertices[v], diags[v].sigma_min, diags[v].sigma_max, diags[v].kernel_dim,
                              diags[v].gap_ratio});
    sigmas.push_back(diags[v].sigma_min);
  }
  const double threshold = opts.trigger * median(sigmas);
  for (std::size_t v = 0; v < count; ++v) {
    if (diags[v].sigma_min < threshold) result.candidates.push_back(v);
  }
  if (!opts.attempt_newton) return result;

  for (std::size_t c : result.candidates) {
    for (const auto& loop : mesh.loops) {
      const auto pos = std::find(loop.begin(), loop.end(), c);
      if (pos == loop.end()) continue;
      const std::size_t i = static_cast<std::size_t>(pos - loop.begin());
      result.attempts.push_back({c, loop[(i + loop.size() - 1) % loop.size()], "", std::nullopt});
      result.attempts.push_back({c, loop[(i + 1) % loop.size()], "", std::nullopt});
      break;
    }
  }
  parallel_for(result.attempts.size(), [&](std::size_t a) {
    NewtonAttempt& attempt = result.attempts[a];
    try {
      const Sequence seed = branch_seed(diags[attempt.candidate_vertex], opts.seed_amplitude);
      attempt.solution = newton_solve(fam, mesh.vertices[attempt.start_vertex], seed, opts.newton);
      attempt.outcome = "converged_" + to_string(attempt.solution->kind);
    } catch (const Error& e) {
      attempt.outcome = std::string(to_string(e.kind()));
    }
  });
  return result;
}

namespace {

AssumptionCheck check_trivial_branch(const NonlinearFamily& fam, const ParameterMesh& mesh, int window) {
  AssumptionCheck check{"A1", true, true, ""};
  const Vector zero = Vector::Zero(fam.dim);
  double worst = 0.0;
  for (const auto& vertex : mesh.vertices) {
    for (int n = -window; n < window; ++n) {
      worst = std::max(worst, inf_norm(guarded_eval<Vector>("f_n", n, [&] { return fam.map(n, vertex, zero); })));
    }
  }
  check.passed = worst == 0.0;
  check.detail = "max |f_n(lambda, 0)| over mesh and window = " + format_number(worst);
  return check;
}

AssumptionCheck check_derivative_consistency(const NonlinearFamily& fam, const ParameterMesh& mesh, int window) {
  AssumptionCheck check{"A2", true, true, ""};
  const Vector zero = Vector::Zero(fam.dim);
  Vector probe(fam.dim);
  for (int i = 0; i < fam.dim; ++i) probe(i) = (i % 2 == 0 ? 1e-3 : -1e-3) * (1.0 + 0.25 * i);
  constexpr double eps = 1e-6;

  double linearization_gap = 0.0;
  double fd_gap = 0.0;
  for (const auto& vertex : mesh.vertices) {
    for (int n : {-window, -1, 0, window - 1}) {
      const Matrix at_zero = fam.derivative(n, vertex, zero);
      linearization_gap = std::max(linearization_gap, (at_zero - fam.linearization.coefficient(n, vertex)).cwiseAbs().maxCoeff());
      const Matrix analytic = fam.derivative(n, vertex, probe);
      Matrix numeric(fam.dim, fam.dim);
      for (int j = 0; j < fam.dim; ++j) {
        Vector step = Vector::Zero(fam.dim);
        step(j) = eps;
        numeric.col(j) = (fam.map(n, vertex, probe + step) - fam.map(n, vertex, probe - step)) / (2.0 * eps);
      }
      const double scale = std::max(1.0, analytic.cwiseAbs().maxCoeff());
      fd_gap = std::max(fd_gap, (numeric - analytic).cwiseAbs().maxCoeff() / scale);
    }
  }
  check.passed = linearization_gap <= 1e-10 && fd_gap <= 1e-5;
  std::ostringstream detail;
  detail << "|Df_n(lambda,0) - a_n(lambda)| = " << linearization_gap << ", finite-difference gap = " << fd_gap
         << " (equicontinuity itself is not machine-checkable)";
  check.detail = detail.str();
  return check;
}

}  // namespace

BifurcationReport certify_bifurcation(const NonlinearFamily& fam, const ParameterMesh& mesh,
                                      const CertifyOptions& opts) {
  BifurcationReport report;
  for (const char* name : {"A1", "A2", "A3", "A4", "A5"}) report.assumption_status.push_back({name, false, false, ""});
  auto& a1 = report.assumption_status[0];
  auto& a2 = report.assumption_status[1];
  auto& a3 = report.assumption_status[2];
  auto& a4 = report.assumption_status[3];
  auto& a5 = report.assumption_status[4];
  const int window = opts.sweep.window;
  const double tol = opts.sweep.hyperbolicity_tol;

  try {
    if (fam.params != mesh.k) throw Error(ErrorKind::InvalidArgument, "family and mesh parameter dimensions differ");
    if (window < 1 || window < fam.linearization.decay_probe) {
      throw Error(ErrorKind::WindowTooSmall, "window " + std::to_string(window) + " below decay probe " +
                                                 std::to_string(fam.linearization.decay_probe));
    }

    a1 = check_trivial_branch(fam, mesh, window);
    a2 = check_derivative_consistency(fam, mesh, window);

    a3.evaluated = true;
    a4.evaluated = true;
    a3.passed = true;
    a4.passed = true;
    double worst_deviation = 0.0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < mesh.vertices.size() && a3.passed; ++v) {
      const auto& vertex = mesh.vertices[v];
      try {
        const A3Profile profile = check_A3(fam.linearization, vertex, window, opts.a3_deviation_tol);
        worst_deviation = std::max(worst_deviation, profile.deviation);
        worst_margin = std::min({worst_margin, profile.margin_plus, profile.margin_minus});
        if (!profile.passed) {
          a3.passed = false;
          a3.detail = "coefficients not within tolerance of their limits at vertex " + std::to_string(v);
        }
        if (a4.passed && fredholm_index(fam.linearization, vertex, tol) != 0) {
          a4.passed = false;
          a4.detail = "stable dimensions differ at vertex " + std::to_string(v) + " (index " +
                      std::to_string(fredholm_index(fam.linearization, vertex, tol)) + ")";
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::HyperbolicityViolation && e.kind() != ErrorKind::NotInvertible) throw;
        a3.passed = false;
        a4.passed = false;
        a3.detail = "vertex " + std::to_string(v) + ": " + e.what();
        a4.detail = "not decidable without hyperbolic limits";
      }
    }
    if (a3.passed) {
      std::ostringstream detail;
      detail << "max deviation " << worst_deviation << ", min hyperbolicity margin " << worst_margin;
      a3.detail = detail.str();
      try {
        const auto plus = sample_subbundle(fam.linearization.limit_plus, mesh, SubspaceKind::stable,
                                           AsymptoticEnd::plus_infinity, tol);
        const auto minus = sample_subbundle(fam.linearization.limit_minus, mesh, SubspaceKind::stable,
                                            AsymptoticEnd::minus_infinity, tol);
        if (plus.rank == minus.rank) report.certificate = certify(plus, minus, mesh.k);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::RankDiscontinuity && e.kind() != ErrorKind::HyperbolicityViolation) throw;
        a3.passed = false;
        a3.detail = e.what();
      }
    }
    if (a4.passed && a4.detail.empty()) a4.detail = "equal stable dimensions at every vertex";

    if (a1.passed && a2.passed && a3.passed && a4.passed) {
      SweepResult swept = sweep(fam, mesh, opts.sweep);
      a5.evaluated = true;
      const double rank_tol = opts.sweep.rank_tol;
      const auto regular = std::find_if(swept.records.begin(), swept.records.end(), [rank_tol](const SweepRecord& r) {
        return r.kernel_dim == 0 && r.sigma_min >= 10.0 * rank_tol * r.sigma_max;
      });
      a5.passed = regular != swept.records.end();
      a5.detail = a5.passed ? "trivial kernel at vertex " + std::to_string(regular->vertex_index)
                            : "truncated linearization has a kernel at every vertex";
      report.sweep = std::move(swept.records);
      report.candidates = std::move(swept.candidates);
      for (const auto& attempt : swept.attempts) {
        if (attempt.solution) report.solutions.push_back(*attempt.solution);
      }
      report.newton_attempts = std::move(swept.attempts);
    } else {
      a5.detail = "not evaluated: earlier assumptions failed";
    }
  } catch (const Error& e) {
    report.failure = e.what();
    report.conclusion = Conclusion::numerical_failure;
    return report;
  }

  const bool all_passed = std::all_of(report.assumption_status.begin(), report.assumption_status.end(),
                                      [](const AssumptionCheck& c) { return c.evaluated && c.passed; });
  const bool mismatch = report.certificate && report.certificate->any_mismatch;
  if (!all_passed) {
    report.conclusion = Conclusion::assumptions_violated;
  } else if (mismatch) {
    report.conclusion = Conclusion::certified_bifurcation;
  } else {
    report.conclusion = Conclusion::no_certificate;
  }

  if (mismatch && !all_passed) {
    report.notes.push_back("w1 of the stable bundles differs, but the assumptions fail, so no bifurcation is implied");
  }
  if (report.conclusion == Conclusion::certified_bifurcation) {
    report.notes.push_back("a bifurcation point of homoclinic solutions exists; candidates mark vertices where "
                           "the linearization is numerically singular, not proven bifurcation points");
    if (report.certificate->dimension_bound) {
      report.notes.push_back("the set of bifurcation points has covering dimension at least " +
                             std::to_string(*report.certificate->dimension_bound) + " and is not contractible");
    }
  }
  return report;
}

}  // namespace dichotomy
