#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>

namespace streetsim {

template <typename Scalar> using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3T = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using IsometryT = Eigen::Transform<Scalar, 3, Eigen::Isometry>;
template <typename Scalar> using AlignedBox3T = Eigen::AlignedBox<Scalar, 3>;

using Vec2 = Vec2T<double>;
using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;
using Isometry3 = IsometryT<double>;
using AlignedBox3 = AlignedBox3T<double>;

/// Normalizes an angle to [-pi, pi).
template <typename Scalar>
Scalar wrap_to_pi(Scalar a) {
  constexpr Scalar pi = static_cast<Scalar>(EIGEN_PI);
  Scalar w = std::remainder(a, Scalar(2) * pi);  // (-pi, pi]
  return w == pi ? -pi : w;
}

enum class ActorKind { Pedestrian = 0, Vehicle = 1 };

inline const char* to_string(ActorKind k) {
  return k == ActorKind::Pedestrian ? "pedestrian" : "vehicle";
}

}  // namespace streetsim
