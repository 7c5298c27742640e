#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace ril {

using Cplx = std::complex<double>;

using Mat2 = Eigen::Matrix<Cplx, 2, 2>;
using HalfBlock = Eigen::Matrix<Cplx, 5, 5>;
using ThreeHalfBlock = Eigen::Matrix<Cplx, 4, 4>;
using HalfColumns = Eigen::Matrix<Cplx, 5, 2>;
using ThreeHalfColumn = Eigen::Matrix<Cplx, 4, 1>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Max-abs deviation of M^dagger M from the identity. Works for isometries too.
template <typename Derived>
double unitarity_deviation(const Eigen::MatrixBase<Derived>& m) {
  const auto gram = (m.adjoint() * m).eval();
  using Gram = std::decay_t<decltype(gram)>;
  return (gram - Gram::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

// Closest unitary in Frobenius norm (polar factor W V^dagger of the SVD).
inline Mat2 polar_unitary(const Mat2& m) {
  Eigen::JacobiSVD<Mat2> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

// Frobenius distance between a and b after removing the best global phase.
inline double phase_distance(const Mat2& a, const Mat2& b) {
  const Cplx overlap = (b.adjoint() * a).trace();
  const Cplx phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Cplx{1.0, 0.0};
  return (a - phase * b).norm();
}

// Reduce an angle into [0, 2pi).
inline double wrap_two_pi(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r + 0.0;  // no -0
}

// Absolute distance between two angles on the circle, in [0, pi].
inline double circular_difference(double a, double b) {
  double d = std::remainder(a - b, kTwoPi);
  return std::abs(d);
}

namespace pauli {

inline Mat2 identity() { return Mat2::Identity(); }

inline Mat2 x() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Mat2 y() {
  Mat2 m;
  m << 0.0, Cplx(0.0, -1.0), Cplx(0.0, 1.0), 0.0;
  return m;
}

inline Mat2 z() {
  Mat2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace pauli

}  // namespace ril
