#include "dichotomy/spectral.hpp"

#include <lapacke.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace dichotomy {

namespace {

void validate_square(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw Error(ErrorKind::InvalidArgument, "matrix must be square and non-empty");
  }
  if (a.rows() > kMaxDimension) {
    throw Error(ErrorKind::InvalidArgument, "matrix dimension exceeds " + std::to_string(kMaxDimension));
  }
  if (!a.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "matrix has non-finite entries");
  }
}

lapack_logical select_inside(const double* re, const double* im) { return std::hypot(*re, *im) < 1.0; }
lapack_logical select_outside(const double* re, const double* im) { return std::hypot(*re, *im) > 1.0; }

struct InvariantSubspace {
  Matrix basis;
  Matrix block;
};

// Real Schur form with the selected eigenvalues moved to the leading block.
InvariantSubspace ordered_schur(const Matrix& a, LAPACK_D_SELECT2 select) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Matrix t = a;
  Matrix z(n, n);
  Vector wr(n);
  Vector wi(n);
  lapack_int selected = 0;
  const lapack_int info =
      LAPACKE_dgees(LAPACK_COL_MAJOR, 'V', 'S', select, n, t.data(), n, &selected, wr.data(), wi.data(), z.data(), n);
  if (info != 0) {
    // info = n + 2 means rounding moved an eigenvalue across the unit circle during reordering.
    throw Error(ErrorKind::HyperbolicityViolation, "ordered Schur decomposition failed (info " + std::to_string(info) + ")");
  }
  return {z.leftCols(selected), t.topLeftCorner(selected, selected)};
}

// Applies the column sign convention to a basis and the matching similarity to its block.
void normalize_with_block(Matrix& basis, Matrix& block) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 1; i < basis.rows(); ++i) {
      if (std::abs(basis(i, j)) > std::abs(basis(pivot, j))) pivot = i;
    }
    if (basis(pivot, j) < 0.0) {
      basis.col(j) = -basis.col(j);
      block.row(j) = -block.row(j);
      block.col(j) = -block.col(j);
    }
  }
}

}  // namespace

void normalize_column_signs(Matrix& basis) {
  Matrix unused = Matrix::Zero(basis.cols(), basis.cols());
  normalize_with_block(basis, unused);
}

Matrix annihilator_rows(const Matrix& basis) {
  const Eigen::Index n = basis.rows();
  const Eigen::Index r = basis.cols();
  if (r == 0) return Matrix::Identity(n, n);
  Eigen::HouseholderQR<Matrix> qr(basis);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix complement = q.rightCols(n - r);
  normalize_column_signs(complement);
  return complement.transpose();
}

double is_hyperbolic(const Matrix& a, double tol) {
  validate_square(a);
  const Eigen::JacobiSVD<Matrix> svd(a);
  const double sigma_min = svd.singularValues().minCoeff();
  if (!(sigma_min > tol)) {
    throw Error(ErrorKind::NotInvertible, "smallest singular value " + format_number(sigma_min));
  }
  const Eigen::EigenSolver<Matrix> eig(a, false);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& mu : eig.eigenvalues()) margin = std::min(margin, std::abs(std::abs(mu) - 1.0));
  if (!(margin >= tol)) {
    throw Error(ErrorKind::HyperbolicityViolation, "eigenvalue within " + format_number(margin) + " of the unit circle");
  }
  return margin;
}

ComplexMatrix spectral_projector_contour(const Matrix& a, int nodes, double tol) {
  if (nodes < 16) throw Error(ErrorKind::InvalidArgument, "contour quadrature needs at least 16 nodes");
  is_hyperbolic(a, tol);
  const Eigen::Index n = a.rows();
  const ComplexMatrix ac = a.cast<std::complex<double>>();
  const ComplexMatrix identity = ComplexMatrix::Identity(n, n);
  ComplexMatrix projector = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < nodes; ++j) {
    const std::complex<double> z = std::polar(1.0, 2.0 * std::numbers::pi * j / nodes);
    const Eigen::PartialPivLU<ComplexMatrix> resolvent(z * identity - ac);
    projector += z * resolvent.solve(identity);
  }
  return projector / static_cast<double>(nodes);
}

HyperbolicSplitting hyperbolic_splitting(const Matrix& a, double tol) {
  HyperbolicSplitting split;
  split.margin = is_hyperbolic(a, tol);
  const Eigen::Index n = a.rows();

  auto stable = ordered_schur(a, select_inside);
  auto unstable = ordered_schur(a, select_outside);
  if (stable.basis.cols() + unstable.basis.cols() != n) {
    throw Error(ErrorKind::HyperbolicityViolation, "stable and unstable dimensions do not add up");
  }
  normalize_with_block(stable.basis, stable.block);
  normalize_with_block(unstable.basis, unstable.block);

  Matrix frame(n, n);
  frame << stable.basis, unstable.basis;
  const Matrix coordinates = frame.partialPivLu().inverse();
  split.stable_projector = stable.basis * coordinates.topRows(stable.basis.cols());
  split.unstable_projector = Matrix::Identity(n, n) - split.stable_projector;
  split.stable_basis = std::move(stable.basis);
  split.stable_block = std::move(stable.block);
  split.unstable_basis = std::move(unstable.basis);
  split.unstable_block = std::move(unstable.block);
  return split;
}

bool decay_check(const HyperbolicSplitting& split, const Matrix& a, int n_max) {
  if (n_max < 1) throw Error(ErrorKind::InvalidArgument, "n_max must be positive");

  auto decays = [n_max](const Vector& v, const auto& step) {
    const double threshold = 1e-6 * v.norm();
    Vector w = v;
    for (int n = 1; n <= n_max; ++n) {
      w = step(w);
      if (w.norm() < threshold) return true;
    }
    return false;
  };

  for (Eigen::Index j = 0; j < split.stable_basis.cols(); ++j) {
    if (!decays(split.stable_basis.col(j), [&a](const Vector& w) { return Vector(a * w); })) return false;
  }
  const Eigen::PartialPivLU<Matrix> lu(a);
  for (Eigen::Index j = 0; j < split.unstable_basis.cols(); ++j) {
    if (!decays(split.unstable_basis.col(j), [&lu](const Vector& w) { return Vector(lu.solve(w)); })) return false;
  }
  return true;
}

}  // namespace dichotomy
