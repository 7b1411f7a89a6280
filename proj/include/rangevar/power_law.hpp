#pragma once

#include <cmath>

#include <Eigen/Core>

namespace rangevar {

/// Parameter vector (a, b, c) of sigma(I) = a * I^b + c.
template <typename Scalar>
using PowerLawParams = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
Scalar power_law(const PowerLawParams<Scalar>& p, Scalar intensity) {
  using std::pow;
  return p(0) * pow(intensity, p(1)) + p(2);
}

/// Row of partial derivatives (d/da, d/db, d/dc) at one intensity.
template <typename Scalar>
Eigen::Matrix<Scalar, 1, 3> power_law_gradient(const PowerLawParams<Scalar>& p, Scalar intensity) {
  using std::log;
  using std::pow;
  const Scalar ib = pow(intensity, p(1));
  Eigen::Matrix<Scalar, 1, 3> row;
  row << ib, p(0) * ib * log(intensity), Scalar(1);
  return row;
}

/// Model values over a column of intensities.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> power_law(
    const PowerLawParams<typename Derived::Scalar>& p, const Eigen::ArrayBase<Derived>& intensities) {
  return (p(0) * intensities.pow(p(1)) + p(2)).matrix();
}

/// m x 3 Jacobian of the model over a column of intensities.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 3> power_law_jacobian(
    const PowerLawParams<typename Derived::Scalar>& p, const Eigen::ArrayBase<Derived>& intensities) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> jac(intensities.size(), 3);
  const auto ib = intensities.pow(p(1)).eval();
  jac.col(0) = ib.matrix();
  jac.col(1) = (p(0) * ib * intensities.log()).matrix();
  jac.col(2).setOnes();
  return jac;
}

}  // namespace rangevar
