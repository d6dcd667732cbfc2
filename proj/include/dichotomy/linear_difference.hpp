#pragma once

#include <functional>
#include <optional>

#include "dichotomy/bundle.hpp"
#include "dichotomy/param_mesh.hpp"
#include "dichotomy/spectral.hpp"
#include "dichotomy/types.hpp"

namespace dichotomy {

/// Coefficients a_n(lambda) of x_{n+1} = a_n(lambda) x_n together with their
/// limits a(lambda, +inf) and a(lambda, -inf).
struct LinearFamily {
  int dim = 0;
  int params = 0;
  std::function<Matrix(int, const ParameterPoint&)> coefficient;
  LimitFamily limit_plus;
  LimitFamily limit_minus;
  int decay_probe = 0;  // |n| from which a_n is compared with its limit
};

/// Finite section of (L x)_n = x_{n+1} - a_n x_n on x_{-M}, ..., x_M.
///
/// Rows are ordered: 2M dynamic blocks of size dim (n = -M .. M-1), then the
/// rows forcing x_M into E^s(+inf), then the rows forcing x_{-M} into E^u(-inf).
struct TruncatedOperator {
  int window = 0;
  int dim = 0;
  Matrix matrix;
  int bc_plus_rank = 0;
  int bc_minus_rank = 0;
  ParameterPoint lambda;

  Eigen::Index rows() const { return matrix.rows(); }
  Eigen::Index cols() const { return matrix.cols(); }
};

struct KernelDiagnostics {
  int kernel_dim = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double gap_ratio = 0.0;  // sigma_{r+1} / sigma_r at the rank cut; +inf when the kernel is empty
  Matrix kernel_basis;     // cols x kernel_dim, orthonormal
  int dim = 0;             // state dimension, for reshaping kernel columns into sequences
};

struct A3Profile {
  double deviation = 0.0;  // max over n0 <= |n| <= horizon of |a_n - a(+-inf)|
  double margin_plus = 0.0;
  double margin_minus = 0.0;
  bool passed = false;
};

/// Row blocks closing the window: plus_rows annihilate E^s(+inf), minus_rows annihilate E^u(-inf).
struct BoundaryClosure {
  Matrix plus_rows;
  Matrix minus_rows;
  int stable_dim_plus = 0;
  int stable_dim_minus = 0;
};

A3Profile check_A3(const LinearFamily& fam, const ParameterPoint& lambda, int horizon, double tol);

int fredholm_index(const LinearFamily& fam, const ParameterPoint& lambda, double tol = kDefaultHyperbolicityTol);

BoundaryClosure boundary_closure(const LinearFamily& fam, const ParameterPoint& lambda,
                                 double tol = kDefaultHyperbolicityTol);

/// Shared assembly for the finite section and the nonlinear Jacobian:
/// block(n) is the matrix multiplying x_n in row block n.
Matrix assemble_window_operator(int dim, int window, const std::function<Matrix(int)>& block,
                                const BoundaryClosure& closure);

TruncatedOperator assemble_truncated(const LinearFamily& fam, const ParameterPoint& lambda, int window,
                                     double tol = kDefaultHyperbolicityTol);

KernelDiagnostics kernel_diagnostics(const TruncatedOperator& op, double rank_tol = kDefaultRankTol);

/// First vertex whose truncated operator has a numerically trivial kernel with
/// sigma_min >= 10 rank_tol sigma_max.
std::optional<ParameterPoint> check_A5(const LinearFamily& fam, const ParameterMesh& mesh, int window,
                                       double rank_tol = kDefaultRankTol, double tol = kDefaultHyperbolicityTol);

/// Right inverse M of (L x)_n = x_{n+1} - a x_n on the half line, applied to x
/// supported on [0, K]. Powers act through the restrictions of a to E^s and E^u.
Sequence right_inverse_apply(const Matrix& a, const Sequence& x, double tol = kDefaultHyperbolicityTol);

/// (L x)_n for n = first .. last-1 of the window.
Sequence apply_operator(const LinearFamily& fam, const ParameterPoint& lambda, const Sequence& x);

/// The family with a_n replaced by its limit a(+inf) for n >= 0 and a(-inf) for n < 0.
LinearFamily piecewise_constant(const LinearFamily& fam);

/// max |L x - I (L+ (+) L-) J x| over the window, with L+ on n >= 0 and L- on n < 0.
double splice_check(const LinearFamily& fam, const ParameterPoint& lambda, const Sequence& x);

/// (L' y)_n = y_n - a_{n+1}^T y_{n+1} for n = first .. last-1.
Sequence adjoint_apply(const LinearFamily& fam, const ParameterPoint& lambda, const Sequence& y);

/// Sum_n <(L x)_n, y_n> - Sum_n <x_{n+1}, (L' y)_n>. L' is dual to L with the
/// domain sequence read one step ahead; the defect vanishes for x, y supported
/// strictly inside the window.
double adjoint_pairing_defect(const LinearFamily& fam, const ParameterPoint& lambda, const Sequence& x,
                              const Sequence& y);

/// Solution of L' y = 0 on [first, last] through y_n = a_{n+1}^T y_{n+1}, started from y_0.
Sequence adjoint_kernel_recurrence(const LinearFamily& fam, const ParameterPoint& lambda, int first, int last,
                                   const Vector& y0);

}  // namespace dichotomy
