#include "dichotomy/linear_difference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dichotomy {

namespace {

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

void require_window(const LinearFamily& fam, int window) {
  if (window < 1 || window < fam.decay_probe) {
    throw Error(ErrorKind::WindowTooSmall, "window " + std::to_string(window) + " below decay probe " +
                                               std::to_string(std::max(1, fam.decay_probe)));
  }
}

void require_same_window(const Sequence& x, const Sequence& y) {
  if (x.first() != y.first() || x.last() != y.last() || x.dim() != y.dim()) {
    throw Error(ErrorKind::InvalidArgument, "sequences live on different windows");
  }
}

}  // namespace

A3Profile check_A3(const LinearFamily& fam, const ParameterPoint& lambda, int horizon, double tol) {
  if (horizon < fam.decay_probe) throw Error(ErrorKind::InvalidArgument, "horizon below decay probe");
  const Matrix plus = fam.limit_plus(lambda);
  const Matrix minus = fam.limit_minus(lambda);

  A3Profile profile;
  profile.margin_plus = is_hyperbolic(plus, tol);
  profile.margin_minus = is_hyperbolic(minus, tol);
  for (int n = fam.decay_probe; n <= horizon; ++n) {
    profile.deviation = std::max(profile.deviation, operator_norm(fam.coefficient(n, lambda) - plus));
  }
  for (int m = std::max(fam.decay_probe, 1); m <= horizon; ++m) {
    profile.deviation = std::max(profile.deviation, operator_norm(fam.coefficient(-m, lambda) - minus));
  }
  profile.passed = profile.deviation <= tol && profile.margin_plus >= tol && profile.margin_minus >= tol;
  return profile;
}

int fredholm_index(const LinearFamily& fam, const ParameterPoint& lambda, double tol) {
  const auto plus = hyperbolic_splitting(fam.limit_plus(lambda), tol);
  const auto minus = hyperbolic_splitting(fam.limit_minus(lambda), tol);
  return plus.stable_dim() - minus.stable_dim();
}

BoundaryClosure boundary_closure(const LinearFamily& fam, const ParameterPoint& lambda, double tol) {
  const auto plus = hyperbolic_splitting(fam.limit_plus(lambda), tol);
  const auto minus = hyperbolic_splitting(fam.limit_minus(lambda), tol);
  // x_M in E^s(+inf) and x_{-M} in E^u(-inf), written as the vanishing of the
  // complementary projections through annihilators of the admissible subspaces.
  return {annihilator_rows(plus.stable_basis), annihilator_rows(minus.unstable_basis), plus.stable_dim(),
          minus.stable_dim()};
}

Matrix assemble_window_operator(int dim, int window, const std::function<Matrix(int)>& block,
                                const BoundaryClosure& closure) {
  const Eigen::Index d = dim;
  const Eigen::Index dynamic_rows = 2 * static_cast<Eigen::Index>(window) * d;
  const Eigen::Index rows = dynamic_rows + closure.plus_rows.rows() + closure.minus_rows.rows();
  const Eigen::Index cols = (2 * static_cast<Eigen::Index>(window) + 1) * d;
  auto col_of = [&](int n) { return static_cast<Eigen::Index>(n + window) * d; };

  Matrix op = Matrix::Zero(rows, cols);
  for (int n = -window; n < window; ++n) {
    const Eigen::Index r = static_cast<Eigen::Index>(n + window) * d;
    op.block(r, col_of(n + 1), d, d).setIdentity();
    op.block(r, col_of(n), d, d) = -block(n);
  }
  op.block(dynamic_rows, col_of(window), closure.plus_rows.rows(), d) = closure.plus_rows;
  op.block(dynamic_rows + closure.plus_rows.rows(), col_of(-window), closure.minus_rows.rows(), d) =
      closure.minus_rows;
  return op;
}

TruncatedOperator assemble_truncated(const LinearFamily& fam, const ParameterPoint& lambda, int window, double tol) {
  require_window(fam, window);
  const BoundaryClosure closure = boundary_closure(fam, lambda, tol);
  TruncatedOperator op;
  op.window = window;
  op.dim = fam.dim;
  op.lambda = lambda;
  op.bc_plus_rank = static_cast<int>(closure.plus_rows.rows());
  op.bc_minus_rank = static_cast<int>(closure.minus_rows.rows());
  op.matrix = assemble_window_operator(
      fam.dim, window, [&](int n) { return fam.coefficient(n, lambda); }, closure);
  return op;
}

KernelDiagnostics kernel_diagnostics(const TruncatedOperator& op, double rank_tol) {
  if (!(rank_tol > 0.0 && rank_tol <= 1e-2)) throw Error(ErrorKind::InvalidArgument, "rank_tol must lie in (0, 1e-2]");

  const Eigen::BDCSVD<Matrix> svd(op.matrix, Eigen::ComputeFullV);
  const Vector& s = svd.singularValues();
  const Eigen::Index p = s.size();
  const Eigen::Index structural = std::max<Eigen::Index>(0, op.cols() - op.rows());

  KernelDiagnostics diag;
  diag.dim = op.dim;
  diag.sigma_max = p > 0 ? s(0) : 0.0;
  diag.sigma_min = (p > 0 && structural == 0) ? s(p - 1) : 0.0;

  const double cut = rank_tol * diag.sigma_max;
  Eigen::Index retained = 0;
  while (retained < p && s(retained) >= cut) ++retained;
  diag.kernel_dim = static_cast<int>((p - retained) + structural);

  if (diag.kernel_dim == 0) {
    diag.gap_ratio = std::numeric_limits<double>::infinity();
  } else if (retained == 0) {
    diag.gap_ratio = 1.0;
  } else {
    diag.gap_ratio = (retained < p ? s(retained) : 0.0) / s(retained - 1);
  }

  diag.kernel_basis = svd.matrixV().rightCols(diag.kernel_dim);
  normalize_column_signs(diag.kernel_basis);
  return diag;
}

std::optional<ParameterPoint> check_A5(const LinearFamily& fam, const ParameterMesh& mesh, int window,
                                       double rank_tol, double tol) {
  for (const auto& vertex : mesh.vertices) {
    const auto diag = kernel_diagnostics(assemble_truncated(fam, vertex, window, tol), rank_tol);
    if (diag.kernel_dim == 0 && diag.sigma_min >= 10.0 * rank_tol * diag.sigma_max) return vertex;
  }
  return std::nullopt;
}

Sequence right_inverse_apply(const Matrix& a, const Sequence& x, double tol) {
  if (x.first() != 0) throw Error(ErrorKind::InvalidArgument, "right inverse acts on sequences starting at n = 0");
  if (x.dim() != a.rows()) throw Error(ErrorKind::InvalidArgument, "sequence and matrix dimensions differ");

  const HyperbolicSplitting split = hyperbolic_splitting(a, tol);
  const Matrix& vs = split.stable_basis;
  const Matrix& vu = split.unstable_basis;
  const int last = x.last();

  // Stable part S_n = sum_{k<n} a^{n-1-k} P^s x_k, run forward with a|E^s.
  // Unstable part U_n = sum_{k>=n} a^{n-1-k} P^u x_k, run backward with (a|E^u)^{-1}.
  std::vector<Vector> stable(last + 1, Vector::Zero(vs.cols()));
  std::vector<Vector> unstable(last + 2, Vector::Zero(vu.cols()));
  for (int n = 0; n < last; ++n) {
    stable[n + 1] = split.stable_block * stable[n] + vs.transpose() * (split.stable_projector * x[n]);
  }
  const Eigen::PartialPivLU<Matrix> unstable_lu(split.unstable_block);
  for (int n = last; n >= 0; --n) {
    const Vector rhs = vu.transpose() * (split.unstable_projector * x[n]) + unstable[n + 1];
    unstable[n] = vu.cols() > 0 ? Vector(unstable_lu.solve(rhs)) : Vector();
  }

  Sequence out(0, last, x.dim());
  for (int n = 0; n <= last; ++n) out[n] = vs * stable[n] - vu * unstable[n];
  return out;
}

Sequence apply_operator(const LinearFamily& fam, const ParameterPoint& lambda, const Sequence& x) {
  Sequence out(x.first(), x.last() - 1, x.dim());
  for (int n = x.first(); n < x.last(); ++n) out[n] = x[n + 1] - fam.coefficient(n, lambda) * x[n];
  return out;
}

LinearFamily piecewise_constant(const LinearFamily& fam) {
  LinearFamily out = fam;
  out.coefficient = [plus = fam.limit_plus, minus = fam.limit_minus](int n, const ParameterPoint& lambda) {
    return n >= 0 ? plus(lambda) : minus(lambda);
  };
  return out;
}

double splice_check(const LinearFamily& fam, const ParameterPoint& lambda, const Sequence& x) {
  const Sequence direct = apply_operator(fam, lambda, x);
  const Matrix plus = fam.limit_plus(lambda);
  const Matrix minus = fam.limit_minus(lambda);

  // J x = (x restricted to n >= 0, x restricted to n <= 0); the two halves share x_0.
  auto half_plus = [&](int n) -> Vector { return n >= 0 ? Vector(x[n]) : Vector::Zero(x.dim()); };
  auto half_minus = [&](int n) -> Vector { return n <= 0 ? Vector(x[n]) : Vector::Zero(x.dim()); };

  double discrepancy = 0.0;
  for (int n = x.first(); n < x.last(); ++n) {
    Vector spliced = Vector::Zero(x.dim());
    if (n >= 0) spliced += half_plus(n + 1) - plus * half_plus(n);
    if (n < 0) spliced += half_minus(n + 1) - minus * half_minus(n);
    discrepancy = std::max(discrepancy, (direct[n] - spliced).cwiseAbs().maxCoeff());
  }
  return discrepancy;
}

Sequence adjoint_apply(const LinearFamily& fam, const ParameterPoint& lambda, const Sequence& y) {
  Sequence out(y.first(), y.last() - 1, y.dim());
  for (int n = y.first(); n < y.last(); ++n) {
    out[n] = y[n] - fam.coefficient(n + 1, lambda).transpose() * y[n + 1];
  }
  return out;
}

double adjoint_pairing_defect(const LinearFamily& fam, const ParameterPoint& lambda, const Sequence& x,
                              const Sequence& y) {
  require_same_window(x, y);
  const Sequence lx = apply_operator(fam, lambda, x);
  const Sequence ly = adjoint_apply(fam, lambda, y);
  double forward = 0.0;
  double dual = 0.0;
  for (int n = x.first(); n < x.last(); ++n) {
    forward += lx[n].dot(y[n]);
    dual += x[n + 1].dot(ly[n]);
  }
  return forward - dual;
}

Sequence adjoint_kernel_recurrence(const LinearFamily& fam, const ParameterPoint& lambda, int first, int last,
                                   const Vector& y0) {
  if (first > 0 || last < 0) throw Error(ErrorKind::InvalidArgument, "window must contain n = 0");
  if (y0.size() != fam.dim) throw Error(ErrorKind::InvalidArgument, "y0 has the wrong dimension");
  Sequence y(first, last, fam.dim);
  y[0] = y0;
  for (int n = -1; n >= first; --n) y[n] = fam.coefficient(n + 1, lambda).transpose() * y[n + 1];
  for (int n = 1; n <= last; ++n) {
    const Matrix at = fam.coefficient(n, lambda).transpose();
    const Eigen::FullPivLU<Matrix> lu(at);
    if (!lu.isInvertible()) throw Error(ErrorKind::NotInvertible, "a_n is singular at n = " + std::to_string(n));
    y[n] = lu.solve(Vector(y[n - 1]));
  }
  return y;
}

}  // namespace dichotomy
