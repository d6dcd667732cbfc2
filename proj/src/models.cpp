#include "dichotomy/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "dichotomy/random.hpp"

namespace dichotomy {

namespace {

constexpr int kBuiltinDecayProbe = 10;

void require_k(int k) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "parameter torus dimension must be at least 1");
}

Matrix random_orthogonal(Rng& rng, int n) {
  const Eigen::HouseholderQR<Matrix> qr(rng.normal_matrix(n, n));
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

double stable_modulus(Rng& rng) { return rng.uniform(0.2, 0.8); }
double unstable_modulus(Rng& rng) { return rng.uniform(1.25, 5.0); }

Matrix random_limit(Rng& rng, int n, int stable) {
  Vector d(n);
  for (int i = 0; i < n; ++i) d(i) = rng.sign() * (i < stable ? stable_modulus(rng) : unstable_modulus(rng));
  const Matrix q = random_orthogonal(rng, n);
  return q * d.asDiagonal() * q.transpose();
}

std::uint64_t stream_of(int n) {
  return 1000 + (n >= 0 ? 2 * static_cast<std::uint64_t>(n) : 2 * static_cast<std::uint64_t>(-n) - 1);
}

int integral_param(const std::map<std::string, double>& params, const std::string& key, int fallback) {
  const auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (it->second != std::floor(it->second)) throw Error(ErrorKind::InvalidArgument, "parameter " + key + " must be an integer");
  return static_cast<int>(it->second);
}

double real_param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

void reject_unknown(const ModelSpec& spec, const std::set<std::string>& known) {
  for (const auto& [key, value] : spec.params) {
    if (!known.contains(key)) throw Error(ErrorKind::InvalidArgument, "unknown parameter '" + key + "' for " + spec.name);
  }
}

}  // namespace

Matrix torus_matrix(const ParameterPoint& lambda) {
  const double s = lambda.theta_sum();
  const double sin_half = std::sin(0.5 * s);
  const double cos_half = std::cos(0.5 * s);
  Matrix a(2, 2);
  a << 0.5 + 1.5 * sin_half * sin_half, -0.75 * std::sin(s),
       -0.75 * std::sin(s), 0.5 + 1.5 * cos_half * cos_half;
  return a;
}

NonlinearFamily build_torus_example(int k, double c) {
  require_k(k);
  if (!(std::abs(c) <= 1.0)) throw Error(ErrorKind::InvalidArgument, "|c| must not exceed 1");
  const Matrix minus = torus_matrix(ParameterPoint{std::vector<double>(k, 0.0)});

  NonlinearFamily fam;
  fam.dim = 2;
  fam.params = k;
  fam.linearization.dim = 2;
  fam.linearization.params = k;
  fam.linearization.decay_probe = kBuiltinDecayProbe;
  fam.linearization.limit_plus = torus_matrix;
  fam.linearization.limit_minus = [minus](const ParameterPoint&) { return minus; };
  fam.linearization.coefficient = [minus](int n, const ParameterPoint& lambda) {
    return n >= 0 ? torus_matrix(lambda) : minus;
  };
  const auto coefficient = fam.linearization.coefficient;
  fam.map = [coefficient, c](int n, const ParameterPoint& lambda, const Vector& x) {
    Vector h(2);
    h << c * x(1) * x(1), c * x(0) * x(0);
    return Vector(coefficient(n, lambda) * x + h);
  };
  fam.derivative = [coefficient, c](int n, const ParameterPoint& lambda, const Vector& x) {
    Matrix d = coefficient(n, lambda);
    d(0, 1) += 2.0 * c * x(1);
    d(1, 0) += 2.0 * c * x(0);
    return d;
  };
  return fam;
}

NonlinearFamily build_counterexample(int k) {
  require_k(k);
  Matrix minus = Matrix::Zero(4, 4);
  minus.diagonal() << 0.5, 2.0, 2.0, 0.5;
  const auto plus = [](const ParameterPoint& lambda) {
    Matrix a = Matrix::Zero(4, 4);
    a.topLeftCorner(2, 2) = torus_matrix(lambda);
    a(2, 2) = 0.5;
    a(3, 3) = 2.0;
    return a;
  };

  NonlinearFamily fam;
  fam.dim = 4;
  fam.params = k;
  fam.linearization.dim = 4;
  fam.linearization.params = k;
  fam.linearization.decay_probe = kBuiltinDecayProbe;
  fam.linearization.limit_plus = plus;
  fam.linearization.limit_minus = [minus](const ParameterPoint&) { return minus; };
  fam.linearization.coefficient = [plus, minus](int n, const ParameterPoint& lambda) {
    return n >= 0 ? plus(lambda) : minus;
  };
  const auto coefficient = fam.linearization.coefficient;
  fam.map = [coefficient](int n, const ParameterPoint& lambda, const Vector& x) {
    Vector y = coefficient(n, lambda) * x;
    y(3) += x.squaredNorm();
    return y;
  };
  fam.derivative = [coefficient](int n, const ParameterPoint& lambda, const Vector& x) {
    Matrix d = coefficient(n, lambda);
    d.row(3) += 2.0 * x.transpose();
    return d;
  };
  return fam;
}

LinearFamily build_random(std::uint64_t seed, int N, int k_plus, int k_minus, double decay) {
  if (N < 1 || N > kMaxDimension) throw Error(ErrorKind::InvalidArgument, "dimension out of range");
  if (k_plus < 0 || k_plus > N || k_minus < 0 || k_minus > N) {
    throw Error(ErrorKind::BadRanks, "stable ranks must lie in [0, N]");
  }
  if (!(decay > 0.0 && decay < 1.0)) throw Error(ErrorKind::InvalidArgument, "decay must lie in (0, 1)");

  Rng plus_rng(seed, 1);
  Rng minus_rng(seed, 2);
  const Matrix plus = random_limit(plus_rng, N, k_plus);
  const Matrix minus = random_limit(minus_rng, N, k_minus);

  LinearFamily fam;
  fam.dim = N;
  fam.params = 1;
  fam.decay_probe = std::max(8, static_cast<int>(std::ceil(std::log(1e-6) / std::log(decay))));
  fam.limit_plus = [plus](const ParameterPoint&) { return plus; };
  fam.limit_minus = [minus](const ParameterPoint&) { return minus; };
  fam.coefficient = [plus, minus, seed, N, decay](int n, const ParameterPoint&) {
    Rng rng(seed, stream_of(n));
    const Matrix perturbation = rng.uniform_matrix(N, N, -0.25, 0.25);
    return Matrix((n >= 0 ? plus : minus) + std::pow(decay, std::abs(n)) * perturbation);
  };
  return fam;
}

LinearFamily build_tabulated(const std::vector<Matrix>& matrices, int first, int k) {
  require_k(k);
  if (matrices.empty()) throw Error(ErrorKind::InvalidArgument, "tabulated family needs at least one matrix");
  const Eigen::Index n = matrices.front().rows();
  for (const auto& m : matrices) {
    if (m.rows() != n || m.cols() != n || n < 1 || n > kMaxDimension || !m.allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "tabulated matrices must be finite, square and of equal size");
    }
  }
  const int last = first + static_cast<int>(matrices.size()) - 1;

  LinearFamily fam;
  fam.dim = static_cast<int>(n);
  fam.params = k;
  fam.decay_probe = std::max({1, -first, last});
  const Matrix plus = matrices.back();
  const Matrix minus = matrices.front();
  fam.limit_plus = [plus](const ParameterPoint&) { return plus; };
  fam.limit_minus = [minus](const ParameterPoint&) { return minus; };
  fam.coefficient = [matrices, first, last](int i, const ParameterPoint&) {
    return matrices[static_cast<std::size_t>(std::clamp(i, first, last) - first)];
  };
  return fam;
}

NonlinearFamily as_nonlinear(const LinearFamily& fam) {
  NonlinearFamily out;
  out.dim = fam.dim;
  out.params = fam.params;
  out.linearization = fam;
  const auto coefficient = fam.coefficient;
  out.map = [coefficient](int n, const ParameterPoint& lambda, const Vector& x) {
    return Vector(coefficient(n, lambda) * x);
  };
  out.derivative = [coefficient](int n, const ParameterPoint& lambda, const Vector&) { return coefficient(n, lambda); };
  return out;
}

NonlinearFamily build_model(const ModelSpec& spec) {
  if (spec.name == "torus_example") {
    reject_unknown(spec, {"c"});
    return build_torus_example(spec.k, real_param(spec.params, "c", 0.05));
  }
  if (spec.name == "counterexample_A5") {
    reject_unknown(spec, {});
    return build_counterexample(spec.k);
  }
  if (spec.name == "random_asymptotic") {
    reject_unknown(spec, {"seed", "N", "k_plus", "k_minus", "decay"});
    require_k(spec.k);
    const int seed = integral_param(spec.params, "seed", 1);
    if (seed < 0) throw Error(ErrorKind::InvalidArgument, "seed must be non-negative");
    LinearFamily fam = build_random(static_cast<std::uint64_t>(seed), integral_param(spec.params, "N", 3),
                                    integral_param(spec.params, "k_plus", 1), integral_param(spec.params, "k_minus", 1),
                                    real_param(spec.params, "decay", 0.5));
    fam.params = spec.k;
    return as_nonlinear(fam);
  }
  if (spec.name == "tabulated") {
    reject_unknown(spec, {"first"});
    return as_nonlinear(build_tabulated(spec.matrices, integral_param(spec.params, "first", 0), spec.k));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model '" + spec.name + "'");
}

Matrix random_hyperbolic_matrix(std::uint64_t seed, int N) {
  if (N < 1 || N > kMaxDimension) throw Error(ErrorKind::InvalidArgument, "dimension out of range");
  Rng rng(seed, 7);
  Matrix d = Matrix::Zero(N, N);
  for (int i = 0; i < N;) {
    const double modulus = rng.uniform() < 0.5 ? stable_modulus(rng) : unstable_modulus(rng);
    if (i + 1 < N && rng.uniform() < 0.4) {
      const double angle = rng.uniform(0.2, std::numbers::pi - 0.2);
      d(i, i) = d(i + 1, i + 1) = modulus * std::cos(angle);
      d(i, i + 1) = -modulus * std::sin(angle);
      d(i + 1, i) = modulus * std::sin(angle);
      i += 2;
    } else {
      d(i, i) = rng.sign() * modulus;
      i += 1;
    }
  }
  Matrix s;
  Vector sigma;
  do {
    s = Matrix::Identity(N, N) + 0.5 * rng.normal_matrix(N, N) / std::sqrt(static_cast<double>(N));
    sigma = Eigen::JacobiSVD<Matrix>(s).singularValues();
  } while (sigma(N - 1) < 0.1 * sigma(0));
  return s * d * s.inverse();
}

}  // namespace dichotomy
