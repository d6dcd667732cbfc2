#include "dichotomy/param_mesh.hpp"

#include <map>
#include <numbers>
#include <string>

namespace dichotomy {

double loop_angle(int i, int resolution) {
  // pi * (2i - M) / M keeps dyadic refinements bit-identical on shared vertices.
  double theta = std::numbers::pi * static_cast<double>(2 * i - resolution) / static_cast<double>(resolution);
  if (theta <= -std::numbers::pi) theta += 2.0 * std::numbers::pi;
  return theta;
}

double forward_increment(double from, double to) {
  double d = to - from;
  if (d <= 0.0) d += 2.0 * std::numbers::pi;
  return d;
}

ParameterMesh make_generator_mesh(int k, const std::vector<int>& resolutions) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "parameter dimension k must be at least 1");
  if (static_cast<int>(resolutions.size()) != k) {
    throw Error(ErrorKind::InvalidArgument, "need one resolution per generator loop");
  }
  for (int m : resolutions) {
    if (m < kMinLoopResolution) {
      throw Error(ErrorKind::MeshTooCoarse, "loop resolution " + std::to_string(m) + " < " +
                                                std::to_string(kMinLoopResolution));
    }
  }

  ParameterMesh mesh;
  mesh.k = k;
  mesh.resolution = resolutions;
  std::map<std::vector<double>, std::size_t> index_of;
  for (int j = 0; j < k; ++j) {
    std::vector<std::size_t> loop;
    loop.reserve(resolutions[j]);
    for (int i = 0; i < resolutions[j]; ++i) {
      ParameterPoint p{std::vector<double>(k, 0.0)};
      p.theta[j] = loop_angle(i, resolutions[j]);
      auto [it, inserted] = index_of.try_emplace(p.theta, mesh.vertices.size());
      if (inserted) mesh.vertices.push_back(std::move(p));
      loop.push_back(it->second);
    }
    mesh.loops.push_back(std::move(loop));
  }
  return mesh;
}

ParameterMesh make_circle_mesh(int resolution) { return make_generator_mesh(1, {resolution}); }

ParameterMesh make_torus_mesh(int k, int resolution) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "parameter dimension k must be at least 1");
  return make_generator_mesh(k, std::vector<int>(k, resolution));
}

ParameterMesh refine_loop(const ParameterMesh& mesh, int loop_index, int factor) {
  if (loop_index < 0 || loop_index >= mesh.k) {
    throw Error(ErrorKind::BadLoopIndex, "loop " + std::to_string(loop_index) + " not in mesh");
  }
  if (factor != 2 && factor != 4 && factor != 8 && factor != 16) {
    throw Error(ErrorKind::InvalidArgument, "refinement factor must be 2, 4, 8 or 16");
  }
  std::vector<int> resolutions = mesh.resolution;
  resolutions[loop_index] *= factor;
  return make_generator_mesh(mesh.k, resolutions);
}

}  // namespace dichotomy
