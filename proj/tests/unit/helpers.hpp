#pragma once

#include "slabflow/geometry.hpp"

#include <random>

namespace test_support {

using slabflow::Mat3;
using slabflow::Vec3;

inline Vec3 random_vec(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

/// Random rotation times positive diagonal times its transpose; eigenvalues
/// log-uniform in [lo, hi].
inline Mat3 random_spd(std::mt19937_64& rng, double lo = 0.1, double hi = 10.0) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  Eigen::Quaterniond q(Eigen::Vector4d(random_vec(rng).x(), random_vec(rng).y(), random_vec(rng).z(), 0.5).normalized());
  const Mat3 r = q.toRotationMatrix();
  const Vec3 d(std::exp(u(rng)), std::exp(u(rng)), std::exp(u(rng)));
  return r * d.asDiagonal() * r.transpose();
}

/// Regular tet with unit edges, positively oriented.
inline std::array<Vec3, 4> regular_tet(double edge = 1.0) {
  std::array<Vec3, 4> v = {Vec3(1, 1, 1), Vec3(1, -1, -1), Vec3(-1, 1, -1), Vec3(-1, -1, 1)};
  const double scale = edge / std::sqrt(8.0);
  for (auto& p : v) p *= scale;
  if (slabflow::orient3d(v[0], v[1], v[2], v[3]) < 0) std::swap(v[2], v[3]);
  return v;
}

}  // namespace test_support
