#pragma once

#include <Eigen/Dense>

namespace boltz {

/// Largest velocity dimension supported. Vectors live on the stack.
inline constexpr int kMaxDim = 8;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Frame = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;

/// Japanese bracket <v> = sqrt(1 + |v|^2).
template <typename Derived>
double bracket(const Eigen::MatrixBase<Derived>& v) {
  return std::sqrt(1.0 + v.squaredNorm());
}

inline Vec unit_axis(int dim, int axis) {
  Vec e = Vec::Zero(dim);
  e[axis] = 1.0;
  return e;
}

}  // namespace boltz
