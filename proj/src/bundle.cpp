#include "dichotomy/bundle.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dichotomy/parallel.hpp"
#include "dichotomy/spectral.hpp"

namespace dichotomy {

namespace {

double wrap_angle(double theta) {
  if (theta > std::numbers::pi) theta -= 2.0 * std::numbers::pi;
  if (theta <= -std::numbers::pi) theta += 2.0 * std::numbers::pi;
  return theta;
}

// Sign product over one edge subdivided into `factor` pieces, or nullopt if
// some piece is still too coarse.
std::optional<int> subdivided_edge_sign(const SubbundleFrames& frames, int coordinate, std::size_t from,
                                        std::size_t to, int factor) {
  const ParameterPoint& start = frames.mesh.vertices[from];
  const double step =
      forward_increment(start.theta[coordinate], frames.mesh.vertices[to].theta[coordinate]) / factor;
  int sign = 1;
  Matrix previous = frames.frames[from];
  for (int t = 1; t <= factor; ++t) {
    Matrix current;
    if (t == factor) {
      current = frames.frames[to];
    } else {
      ParameterPoint p = start;
      p.theta[coordinate] = wrap_angle(start.theta[coordinate] + t * step);
      current = subspace_frame(frames.sampler(p), frames.kind, frames.tol);
      if (current.cols() != frames.rank) {
        throw Error(ErrorKind::RankDiscontinuity, "subspace rank changes inside a loop edge");
      }
    }
    try {
      sign *= transition_sign(previous, current).sign;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FramesNotAdjacent) throw;
      return std::nullopt;
    }
    previous = std::move(current);
  }
  return sign;
}

}  // namespace

Matrix subspace_frame(const Matrix& a, SubspaceKind kind, double tol) {
  HyperbolicSplitting split = hyperbolic_splitting(a, tol);
  return kind == SubspaceKind::stable ? std::move(split.stable_basis) : std::move(split.unstable_basis);
}

SubbundleFrames sample_subbundle(const LimitFamily& limit_family, const ParameterMesh& mesh, SubspaceKind kind,
                                 AsymptoticEnd end, double tol) {
  SubbundleFrames out;
  out.mesh = mesh;
  out.end = end;
  out.kind = kind;
  out.sampler = limit_family;
  out.tol = tol;
  out.frames.resize(mesh.vertices.size());
  parallel_for(mesh.vertices.size(),
               [&](std::size_t v) { out.frames[v] = subspace_frame(limit_family(mesh.vertices[v]), kind, tol); });

  out.rank = out.frames.empty() ? 0 : static_cast<int>(out.frames.front().cols());
  for (std::size_t v = 0; v < out.frames.size(); ++v) {
    if (out.frames[v].cols() != out.rank) {
      throw Error(ErrorKind::RankDiscontinuity, "subspace rank " + std::to_string(out.frames[v].cols()) +
                                                    " at vertex " + std::to_string(v) + ", expected " +
                                                    std::to_string(out.rank));
    }
  }
  return out;
}

Transition transition_sign(const Matrix& from, const Matrix& to) {
  if (from.rows() != to.rows() || from.cols() != to.cols()) {
    throw Error(ErrorKind::InvalidArgument, "frames have different shapes");
  }
  if (from.cols() == 0) return {};
  const double det = (from.transpose() * to).determinant();
  const double quality = std::abs(det);
  if (quality < kMinOverlapQuality) {
    throw Error(ErrorKind::FramesNotAdjacent, "frame overlap " + format_number(quality));
  }
  return {det > 0.0 ? 1 : -1, std::min(quality, 1.0)};
}

int w1_along_loop(const SubbundleFrames& frames, int loop_index) {
  if (loop_index < 0 || loop_index >= static_cast<int>(frames.mesh.loops.size())) {
    throw Error(ErrorKind::BadLoopIndex, "loop " + std::to_string(loop_index) + " not in mesh");
  }
  const auto& loop = frames.mesh.loops[loop_index];
  int holonomy = 1;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const std::size_t from = loop[i];
    const std::size_t to = loop[(i + 1) % loop.size()];
    try {
      holonomy *= transition_sign(frames.frames[from], frames.frames[to]).sign;
      continue;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::FramesNotAdjacent) throw;
    }
    if (!frames.sampler) {
      throw Error(ErrorKind::MeshUnresolvable, "frames too far apart and no sampler to refine with");
    }
    std::optional<int> sign;
    for (int factor = 2; factor <= kMaxEdgeRefinement && !sign; factor *= 2) {
      sign = subdivided_edge_sign(frames, loop_index, from, to, factor);
    }
    if (!sign) {
      throw Error(ErrorKind::MeshUnresolvable, "edge " + std::to_string(i) + " of loop " +
                                                   std::to_string(loop_index) + " unresolved after " +
                                                   std::to_string(kMaxEdgeRefinement) + "x refinement");
    }
    holonomy *= *sign;
  }
  return holonomy < 0 ? 1 : 0;
}

W1Vector w1_vector(const SubbundleFrames& frames) {
  W1Vector w1;
  for (int j = 0; j < static_cast<int>(frames.mesh.loops.size()); ++j) w1.bits.push_back(w1_along_loop(frames, j));
  return w1;
}

BifurcationCertificate certify(const SubbundleFrames& plus, const SubbundleFrames& minus, int k) {
  if (plus.kind != SubspaceKind::stable || minus.kind != SubspaceKind::stable) {
    throw Error(ErrorKind::InvalidArgument, "certificate compares stable bundles");
  }
  if (plus.mesh.loops != minus.mesh.loops || plus.mesh.vertices.size() != minus.mesh.vertices.size()) {
    throw Error(ErrorKind::InvalidArgument, "bundles sampled on different meshes");
  }
  if (plus.rank != minus.rank) {
    throw Error(ErrorKind::RankMismatch, "stable ranks differ at the two ends (" + std::to_string(plus.rank) +
                                             " vs " + std::to_string(minus.rank) + ")");
  }
  if (k != plus.mesh.k) throw Error(ErrorKind::InvalidArgument, "k does not match the mesh");

  BifurcationCertificate cert;
  cert.w1_plus = w1_vector(plus);
  cert.w1_minus = w1_vector(minus);
  for (std::size_t j = 0; j < cert.w1_plus.bits.size(); ++j) {
    const bool differs = cert.w1_plus.bits[j] != cert.w1_minus.bits[j];
    cert.mismatch.push_back(differs);
    cert.any_mismatch = cert.any_mismatch || differs;
  }
  if (k >= 2 && cert.any_mismatch) cert.dimension_bound = k - 1;
  return cert;
}

}  // namespace dichotomy
