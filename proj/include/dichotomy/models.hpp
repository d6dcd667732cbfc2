#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dichotomy/linear_difference.hpp"
#include "dichotomy/nonlinear.hpp"

namespace dichotomy {

struct ModelSpec {
  std::string name;  // torus_example, counterexample_A5, random_asymptotic, tabulated
  int k = 1;
  std::map<std::string, double> params;
  std::vector<Matrix> matrices;  // tabulated only: a_first, ..., a_last
};

/// a(lambda) of the two-dimensional torus family, depending on theta_1 + ... + theta_k.
Matrix torus_matrix(const ParameterPoint& lambda);

/// x_{n+1} = a_n(lambda) x_n + c (x_2^2, x_1^2) with a_n = a(lambda) for n >= 0
/// and a(1, ..., 1) = diag(1/2, 2) for n < 0.
NonlinearFamily build_torus_example(int k, double c);

/// Four-dimensional family with h_n(lambda, x) = (0, 0, 0, |x|^2): the linearization
/// has a kernel at every parameter, yet no nontrivial homoclinic solutions exist.
NonlinearFamily build_counterexample(int k);

/// Parameter-independent family a_n = a(+-inf) + decay^|n| E_n with a(+-inf) = Q D Q^T,
/// Q random orthogonal and D holding k_plus (k_minus) eigenvalues of modulus in
/// (0.2, 0.8) and the rest in (1.25, 5).
LinearFamily build_random(std::uint64_t seed, int N, int k_plus, int k_minus, double decay);

/// a_n read from a table starting at index `first`; constant beyond either end.
LinearFamily build_tabulated(const std::vector<Matrix>& matrices, int first, int k);

/// Treats x_{n+1} = a_n x_n as a (linear) nonlinear family.
NonlinearFamily as_nonlinear(const LinearFamily& fam);

/// Builds the named family. Missing parameters take defaults; unknown ones are rejected.
NonlinearFamily build_model(const ModelSpec& spec);

/// S D S^{-1} with S a random well-conditioned matrix and D block diagonal with
/// real eigenvalues and complex pairs of modulus in (0.2, 0.8) or (1.25, 5).
Matrix random_hyperbolic_matrix(std::uint64_t seed, int N);

}  // namespace dichotomy
