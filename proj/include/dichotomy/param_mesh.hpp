#pragma once

#include <cstddef>
#include <vector>

#include "dichotomy/types.hpp"

namespace dichotomy {

/// The 1-skeleton of T^k made of its k generator circles through the base
/// point theta = 0. Loop j varies only coordinate j; loops are stored as cyclic
/// vertex-index sequences without repeating the first vertex.
struct ParameterMesh {
  int k = 0;
  std::vector<ParameterPoint> vertices;
  std::vector<std::vector<std::size_t>> loops;
  std::vector<int> resolution;  // number of vertices on each loop
};

inline constexpr int kMinLoopResolution = 8;

/// theta_i = -pi + 2 pi i / M wrapped into (-pi, pi].
double loop_angle(int i, int resolution);

ParameterMesh make_circle_mesh(int resolution);
ParameterMesh make_torus_mesh(int k, int resolution);
ParameterMesh make_generator_mesh(int k, const std::vector<int>& resolutions);
ParameterMesh refine_loop(const ParameterMesh& mesh, int loop_index, int factor);

/// Forward angle increment from a to b along a loop, in (0, 2 pi].
double forward_increment(double from, double to);

}  // namespace dichotomy
