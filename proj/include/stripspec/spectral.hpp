#pragma once

#include <cstdint>
#include <vector>

#include "stripspec/channels.hpp"
#include "stripspec/model.hpp"
#include "stripspec/types.hpp"

namespace stripspec {

// sigma_min(M B) below this fraction of ||M (I;0)|| marks the density
// least-squares step as degenerate: the minimum is approached along a
// direction of unbounded norm, the signature of a point mass.
inline constexpr double kDensityRankTol = 1e-13;

// Unit vector x in C^l with an orthonormal basis of ker(x^*).
struct RootVector {
  CVector x;
  CMatrix kernel_basis;  // l x (l-1)
};

RootVector make_root_vector(const CVector& x);

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;            // f_n >= 0, zero where degenerate
  std::vector<std::uint8_t> degenerate;  // 1 where the minimization broke down
  int n = 0;
  RootVector x;
};

// f_n(lambda) = 1 / (pi * min_{v perp x} ||T^lambda_{0,n} (x + v; 0)||^2)
// with the product's log_scale folded in, so hyperbolic growth cannot
// overflow. Grid points must stay kParabolicTol away from every band edge.
DensityEstimate density_estimate(const OperatorModel& model, const PotentialSample& sample,
                                 const RootVector& x, const std::vector<double>& grid, int n);

struct ACReport {
  std::vector<double> grid;
  std::vector<int> n_list;
  RMatrix orbit4;  // n_list.size() x grid.size(): ||T^lambda_{0,n}(u;x)||^4, NaN where excluded
  RMatrix x4;      // same shape: ||X^lambda_{m,n}||^4
  std::vector<double> integrals;    // trapezoid of orbit4 over admitted lambdas, per n
  std::vector<double> x_integrals;  // same for x4
  double liminf_estimate = 0;       // min over n_list of integrals
  std::vector<double> excluded;     // lambdas dropped: matching rank failed at some n
};

// Bounded-orbit criterion over a window [a,b] already known to be admissible:
// for each n the initial data u is rebuilt from the depth-n Schur data and
// the fourth power of the orbit norm is integrated over the grid. Excluded
// lambdas are candidate embedded eigenvalues; they are dropped from the
// quadrature of every n so the integrals stay comparable.
ACReport ac_criterion(const OperatorModel& model, const PotentialSample& sample,
                      const RootVector& x, double a, double b,
                      const std::vector<double>& grid, const std::vector<int>& n_list, int m);

// Eigen-decomposition view of the dense restriction H_{0,N} at the root
// vector embedded at site 0.
struct SpectralOracle {
  RVector eigenvalues;  // ascending
  RVector weights;      // |<x (+) 0, psi_i>|^2, summing to ~1
  double eta = 0;

  // (1/pi) sum_i w_i eta / ((lambda - e_i)^2 + eta^2)
  double eval(double lambda) const;
  std::vector<double> eval_grid(const std::vector<double>& grid) const;
};

// Smoothed spectral density of the truncated operator. eta <= 0 selects the
// default 4/N. Real-symmetric restrictions take a banded LAPACK path; the
// general Hermitian case falls back to a dense solve.
SpectralOracle truncation_spectral_oracle(const OperatorModel& model,
                                          const PotentialSample& sample, int N,
                                          const RootVector& x, double eta);

}  // namespace stripspec
