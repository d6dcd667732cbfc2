#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "dichotomy/param_mesh.hpp"
#include "dichotomy/types.hpp"

namespace dichotomy {

enum class AsymptoticEnd { plus_infinity, minus_infinity };
enum class SubspaceKind { stable, unstable };

/// lambda -> a(lambda, +inf) or a(lambda, -inf).
using LimitFamily = std::function<Matrix(const ParameterPoint&)>;

/// Orthonormal frames of E^s or E^u of a limit family at each mesh vertex.
/// The sampler is kept so edges can be subdivided when neighbouring frames are
/// too far apart to compare.
struct SubbundleFrames {
  ParameterMesh mesh;
  int rank = 0;
  std::vector<Matrix> frames;
  AsymptoticEnd end = AsymptoticEnd::plus_infinity;
  SubspaceKind kind = SubspaceKind::stable;
  LimitFamily sampler;
  double tol = kDefaultHyperbolicityTol;
};

struct W1Vector {
  std::vector<int> bits;

  bool operator==(const W1Vector&) const = default;
};

struct BifurcationCertificate {
  W1Vector w1_plus;
  W1Vector w1_minus;
  std::vector<bool> mismatch;
  bool any_mismatch = false;
  std::optional<int> dimension_bound;  // k - 1 when k >= 2 and some w1 component differs
};

struct Transition {
  int sign = 1;
  double quality = 1.0;
};

/// Minimum |det(F_i^T F_j)| accepted when comparing neighbouring frames.
inline constexpr double kMinOverlapQuality = 0.5;
/// Largest subdivision factor tried on a single edge.
inline constexpr int kMaxEdgeRefinement = 16;

Matrix subspace_frame(const Matrix& a, SubspaceKind kind, double tol);

SubbundleFrames sample_subbundle(const LimitFamily& limit_family, const ParameterMesh& mesh, SubspaceKind kind,
                                 AsymptoticEnd end, double tol = kDefaultHyperbolicityTol);

/// Sign and quality of det(F_i^T F_j); throws FramesNotAdjacent below kMinOverlapQuality.
Transition transition_sign(const Matrix& from, const Matrix& to);

/// Orientation holonomy around one generator loop: 1 when the bundle restricted
/// to the loop is non-orientable.
int w1_along_loop(const SubbundleFrames& frames, int loop_index);

W1Vector w1_vector(const SubbundleFrames& frames);

BifurcationCertificate certify(const SubbundleFrames& plus, const SubbundleFrames& minus, int k);

}  // namespace dichotomy
