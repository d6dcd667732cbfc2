#pragma once

#include "dichotomy/types.hpp"

namespace dichotomy {

/// Stable/unstable splitting of a hyperbolic matrix a.
///
/// The bases are orthonormal Schur vectors of a with the selected eigenvalues
/// leading, so a * stable_basis = stable_basis * stable_block exactly (up to
/// rounding), and likewise for the unstable part. The projectors are the
/// oblique projections onto one subspace along the other.
struct HyperbolicSplitting {
  Matrix stable_projector;
  Matrix unstable_projector;
  Matrix stable_basis;
  Matrix unstable_basis;
  Matrix stable_block;    // a restricted to E^s, in stable_basis coordinates
  Matrix unstable_block;  // a restricted to E^u, in unstable_basis coordinates
  double margin = 0.0;    // min over eigenvalues of ||mu| - 1|

  int dim() const { return static_cast<int>(stable_projector.rows()); }
  int stable_dim() const { return static_cast<int>(stable_basis.cols()); }
  int unstable_dim() const { return static_cast<int>(unstable_basis.cols()); }
};

/// Returns the hyperbolicity margin min_i ||mu_i| - 1|.
/// Throws NotInvertible when sigma_min(a) <= tol and HyperbolicityViolation
/// when the margin is below tol.
double is_hyperbolic(const Matrix& a, double tol = kDefaultHyperbolicityTol);

/// Trapezoid rule on the unit circle for (1 / 2 pi i) \oint (zI - a)^{-1} dz.
/// Only used as an independent check of hyperbolic_splitting: the quadrature
/// error behaves like rho^nodes where rho is the eigenvalue modulus closest to 1.
ComplexMatrix spectral_projector_contour(const Matrix& a, int nodes = 256,
                                         double tol = kDefaultHyperbolicityTol);

HyperbolicSplitting hyperbolic_splitting(const Matrix& a, double tol = kDefaultHyperbolicityTol);

/// Checks that every stable basis vector decays under forward iteration of a and
/// every unstable basis vector decays under a^{-1}, below 1e-6 of its norm within n_max steps.
bool decay_check(const HyperbolicSplitting& split, const Matrix& a, int n_max);

/// Flips column signs so the largest-magnitude entry of each column is positive
/// (ties resolved towards the lowest row index).
void normalize_column_signs(Matrix& basis);

/// Orthonormal rows spanning the annihilator of span(basis): R * basis = 0, R R^T = I.
Matrix annihilator_rows(const Matrix& basis);

}  // namespace dichotomy
