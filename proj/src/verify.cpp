#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "dichotomy/cli.hpp"
#include "dichotomy/random.hpp"
#include "dichotomy/spectral.hpp"

namespace dichotomy {

namespace {

const ParameterPoint kOrigin{{0.0}};

Sequence random_sequence(Rng& rng, int first, int last, int dim) {
  Sequence x(first, last, dim);
  for (Eigen::Index i = 0; i < x.flat().size(); ++i) x.flat()(i) = rng.normal();
  return x;
}

// Random family with a random state dimension, ranks and decay rate.
LinearFamily random_family(std::uint64_t seed) {
  Rng rng(seed, 99);
  const int n = rng.uniform_int(1, 4);
  const int k_plus = rng.uniform_int(0, n);
  const int k_minus = rng.uniform_int(0, n);
  return build_random(seed, n, k_plus, k_minus, rng.uniform(0.2, 0.6));
}

std::string index_case(std::uint64_t seed) {
  Rng rng(seed, 99);
  const int n = rng.uniform_int(1, 4);
  const int k_plus = rng.uniform_int(0, n);
  const int k_minus = rng.uniform_int(0, n);
  const LinearFamily fam = random_family(seed);
  const TruncatedOperator op = assemble_truncated(fam, kOrigin, fam.decay_probe);
  const auto structural = op.cols() - op.rows();
  if (structural != k_plus - k_minus || fredholm_index(fam, kOrigin) != k_plus - k_minus) {
    std::ostringstream msg;
    msg << "cols - rows = " << structural << ", expected " << k_plus - k_minus;
    return msg.str();
  }
  return {};
}

std::string right_inverse_case(std::uint64_t seed) {
  const int n = 1 + static_cast<int>(seed % 4);
  const Matrix a = random_hyperbolic_matrix(seed, n);
  Rng rng(seed, 5);
  const Sequence x = random_sequence(rng, 0, 40, n);
  const Sequence mx = right_inverse_apply(a, x);
  double err = 0.0;
  for (int k = 0; k <= 30; ++k) err = std::max(err, (mx[k + 1] - a * mx[k] - x[k]).cwiseAbs().maxCoeff());
  if (err > 1e-8) return "|L M x - x| = " + format_number(err);
  return {};
}

std::string splice_case(std::uint64_t seed) {
  const int n = 1 + static_cast<int>(seed % 4);
  const LinearFamily fam =
      build_tabulated({random_hyperbolic_matrix(seed, n), random_hyperbolic_matrix(seed + 0x5A5A5A5AULL, n)}, -1, 1);
  Rng rng(seed, 6);
  const int first = -rng.uniform_int(1, 30);
  const int last = rng.uniform_int(1, 30);
  const double discrepancy = splice_check(fam, kOrigin, random_sequence(rng, first, last, n));
  if (discrepancy > 1e-12) return "splice discrepancy " + format_number(discrepancy);
  return {};
}

std::string adjoint_case(std::uint64_t seed) {
  const LinearFamily fam = random_family(seed);
  Rng rng(seed, 8);
  const int window = rng.uniform_int(5, 25);
  Sequence x = random_sequence(rng, -window, window, fam.dim);
  Sequence y = random_sequence(rng, -window, window, fam.dim);
  for (Sequence* s : {&x, &y}) {
    (*s)[-window].setZero();
    (*s)[window].setZero();
  }
  const double defect = adjoint_pairing_defect(fam, kOrigin, x, y);
  const double scale = std::max(1.0, x.flat().norm() * y.flat().norm());
  if (std::abs(defect) > 1e-10 * scale) return "pairing defect " + format_number(defect);
  return {};
}

std::string contour_case(std::uint64_t seed) {
  const int n = 1 + static_cast<int>(seed % 4);
  const Matrix a = random_hyperbolic_matrix(seed, n);
  const Matrix schur = hyperbolic_splitting(a).stable_projector;
  const ComplexMatrix contour = spectral_projector_contour(a, 256);
  const double real_gap = (schur - contour.real()).cwiseAbs().maxCoeff();
  const double imag = contour.imag().cwiseAbs().maxCoeff();
  if (real_gap > 1e-8 || imag > 1e-8) {
    return "|Ps - Re P_contour| = " + format_number(real_gap) + ", |Im P_contour| = " + format_number(imag);
  }
  return {};
}

}  // namespace

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
  std::function<std::string(std::uint64_t)> run_case;
  int cases = 0;
  if (name == "index") {
    run_case = index_case;
    cases = 200;
  } else if (name == "right_inverse") {
    run_case = right_inverse_case;
    cases = 100;
  } else if (name == "splice") {
    run_case = splice_case;
    cases = 100;
  } else if (name == "adjoint") {
    run_case = adjoint_case;
    cases = 100;
  } else if (name == "contour") {
    run_case = contour_case;
    cases = 200;
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown suite '" + name + "'");
  }

  SuiteResult result;
  result.name = name;
  result.cases = cases;
  for (int i = 0; i < cases; ++i) {
    const std::uint64_t case_seed = seed + static_cast<std::uint64_t>(i);
    std::string message;
    try {
      message = run_case(case_seed);
    } catch (const std::exception& e) {
      message = e.what();
    }
    if (!message.empty()) result.failures.emplace_back(case_seed, message);
  }
  return result;
}

}  // namespace dichotomy
