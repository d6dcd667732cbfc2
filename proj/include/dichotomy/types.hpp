#pragma once

#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "dichotomy/error.hpp"

namespace dichotomy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Largest state dimension handled by the dense algorithms.
inline constexpr int kMaxDimension = 32;

inline constexpr double kDefaultHyperbolicityTol = 1e-8;
inline constexpr double kDefaultRankTol = 1e-8;
inline constexpr int kDefaultWindow = 50;

/// A point of the parameter torus, stored by its angle coordinates in (-pi, pi].
struct ParameterPoint {
  std::vector<double> theta;

  int dim() const { return static_cast<int>(theta.size()); }
  double theta_sum() const { return std::accumulate(theta.begin(), theta.end(), 0.0); }
};

/// A finite piece x_first, ..., x_last of a sequence in R^dim, stored contiguously.
class Sequence {
 public:
  Sequence() = default;
  Sequence(int first, int last, int dim)
      : first_(first), last_(last), dim_(dim), data_(Vector::Zero(length_of(first, last) * dim)) {}
  Sequence(int first, int dim, Vector data)
      : first_(first), last_(first + static_cast<int>(data.size()) / dim - 1), dim_(dim), data_(std::move(data)) {
    if (dim <= 0 || data_.size() % dim != 0) {
      throw Error(ErrorKind::InvalidArgument, "sequence data length is not a multiple of the state dimension");
    }
  }

  int first() const { return first_; }
  int last() const { return last_; }
  int dim() const { return dim_; }
  int length() const { return length_of(first_, last_); }
  bool contains(int n) const { return n >= first_ && n <= last_; }

  auto operator[](int n) { return data_.segment(static_cast<Eigen::Index>(n - first_) * dim_, dim_); }
  auto operator[](int n) const { return data_.segment(static_cast<Eigen::Index>(n - first_) * dim_, dim_); }

  const Vector& flat() const { return data_; }
  Vector& flat() { return data_; }

  /// max_n |x_n| with the Euclidean norm on each state.
  double amplitude() const {
    double amp = 0.0;
    for (int n = first_; n <= last_; ++n) amp = std::max(amp, (*this)[n].norm());
    return amp;
  }

 private:
  static int length_of(int first, int last) { return last >= first ? last - first + 1 : 0; }

  int first_ = 0;
  int last_ = -1;
  int dim_ = 1;
  Vector data_;
};

}  // namespace dichotomy
