#pragma once

#include <Eigen/Dense>
#include <random>

#include "linereg/types.hpp"

namespace linereg::testing {

inline Eigen::Vector3d random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = {gauss(rng), gauss(rng), gauss(rng)};
  } while (v.norm() < 1e-6);
  return v.normalized();
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, M_PI);
  const Eigen::Vector3d axis = random_unit(rng);
  return Eigen::AngleAxisd(angle(rng), axis).toRotationMatrix();
}

inline Eigen::Matrix3d rot_z(double rad) {
  return Eigen::AngleAxisd(rad, Eigen::Vector3d::UnitZ()).toRotationMatrix();
}

}  // namespace linereg::testing
