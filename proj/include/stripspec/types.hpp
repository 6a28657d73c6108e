#pragma once

#include <Eigen/Dense>
#include <complex>

namespace stripspec {

using cxd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Open interval (lo, hi).
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
  bool contains(double x) const { return lo < x && x < hi; }
};

// Spectral norm (largest singular value). Matrices here are small, so a
// Jacobi SVD is cheap and accurate.
inline double op_norm(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

inline double smallest_sv(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  auto sv = m.jacobiSvd().singularValues();
  return sv(sv.size() - 1);
}

}  // namespace stripspec
