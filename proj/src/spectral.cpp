#include "stripspec/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "lapack_eig.hpp"
#include "stripspec/errors.hpp"
#include "stripspec/schur.hpp"
#include "stripspec/transfer.hpp"

namespace stripspec {

namespace {

void require_edge_distance(const OperatorModel& model, double lambda) {
  for (int j = 0; j < model.l; ++j) {
    if (std::abs(std::abs(model.alpha(j) - lambda) - 2.0) <= kParabolicTol) {
      std::ostringstream os;
      os << "grid point " << lambda << " sits on a band edge of channel " << j;
      throw std::invalid_argument(os.str());
    }
  }
}

double pow4(double v) {
  double s = v * v;
  return s * s;
}

double trapezoid(const std::vector<double>& xs, const std::vector<double>& ys) {
  double acc = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    acc += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
  return acc;
}

bool exactly_decoupled(const PotentialSample& sample) {
  for (const CMatrix& v : sample.matrices)
    for (int r = 0; r < v.rows(); ++r)
      for (int c = 0; c < v.cols(); ++c)
        if (r != c && v(r, c) != 0.0) return false;
  return true;
}

struct ChannelFactors {
  std::vector<OperatorModel> models;
  std::vector<PotentialSample> samples;
};

ChannelFactors split_channels(const OperatorModel& model, const PotentialSample& sample) {
  ChannelFactors f;
  for (int j = 0; j < model.l; ++j) {
    CMatrix a(1, 1);
    a(0, 0) = model.alpha(j);
    PotentialSpec spec;  // factor potentials are injected below, kind is irrelevant
    f.models.push_back(build_model(a, spec));
    PotentialSample sub;
    sub.l = 1;
    sub.N = sample.N;
    sub.seed = sample.seed;
    sub.matrices.reserve(sample.matrices.size());
    for (const CMatrix& v : sample.matrices) {
      CMatrix d(1, 1);
      d(0, 0) = v(j, j);
      sub.matrices.push_back(d);
    }
    f.samples.push_back(std::move(sub));
  }
  return f;
}

}  // namespace

RootVector make_root_vector(const CVector& x) {
  if (x.size() < 1) throw std::invalid_argument("root vector must be nonempty");
  double nrm = x.norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm))
    throw std::invalid_argument("root vector must have positive finite norm");
  RootVector rv;
  rv.x = x / nrm;
  Eigen::HouseholderQR<CMatrix> qr(CMatrix(rv.x));
  CMatrix q = qr.householderQ();
  rv.kernel_basis = q.rightCols(x.size() - 1);
  return rv;
}

DensityEstimate density_estimate(const OperatorModel& model, const PotentialSample& sample,
                                 const RootVector& x, const std::vector<double>& grid, int n) {
  const int l = model.l;
  if (x.x.size() != l || x.kernel_basis.rows() != l || x.kernel_basis.cols() != l - 1)
    throw std::invalid_argument("root vector does not match the strip width");
  if (n < 0 || n >= sample.N)
    throw std::invalid_argument("density depth must satisfy 0 <= n < sample.N");
  for (double lam : grid) require_edge_distance(model, lam);

  DensityEstimate est;
  est.grid = grid;
  est.n = n;
  est.x = x;
  est.values.assign(grid.size(), 0.0);
  est.degenerate.assign(grid.size(), 0);

  // Diagonal potential samples decouple the channels exactly: the measure at x
  // is then the |x_c|^2-weighted sum of scalar channel measures and the
  // minimization has a closed form, min = (sum_c |x_c|^2 / d_c)^{-1} with d_c
  // the de-scaled squared norm of the channel orbit of (1; 0). Evaluating it
  // channel by channel keeps every channel at its own log scale; the generic
  // projection below cannot, and loses the small channels once the
  // renormalized slice spans more than the double-precision range.
  const bool decoupled = l > 1 && exactly_decoupled(sample);
  ChannelFactors factors;
  if (decoupled) factors = split_channels(model, sample);

  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (decoupled) {
      RVector logd(l);
      for (int c = 0; c < l; ++c) {
        TransferMatrix t =
            transfer_product(factors.models[c], factors.samples[c], 0, n, cxd(grid[j], 0.0));
        logd(c) = 2.0 * t.log_scale + std::log(t.entries.leftCols(1).squaredNorm());
      }
      double dmax = logd.maxCoeff();
      if (!std::isfinite(dmax)) {
        est.degenerate[j] = 1;
        continue;
      }
      // same gate as the generic branch: sigma_min(M B) <= tol * op_norm(M),
      // squared and expressed through the channel weights d_c / d_max
      RVector dhat(l);
      for (int c = 0; c < l; ++c) dhat(c) = std::exp(logd(c) - dmax);
      CMatrix gram = x.kernel_basis.adjoint() * dhat.asDiagonal() * x.kernel_basis;
      Eigen::SelfAdjointEigenSolver<CMatrix> es(gram);
      if (es.eigenvalues()(0) <= kDensityRankTol * kDensityRankTol) {
        est.degenerate[j] = 1;
        continue;
      }
      double val = 0.0;
      for (int c = 0; c < l; ++c) {
        double w = std::norm(x.x(c));
        if (w > 0.0) val += w * std::exp(-logd(c)) / M_PI;
      }
      if (!std::isfinite(val)) {
        est.degenerate[j] = 1;
        continue;
      }
      est.values[j] = val;
      continue;
    }

    TransferMatrix t = transfer_product(model, sample, 0, n, cxd(grid[j], 0.0));
    CMatrix slice = t.entries.leftCols(l);  // T (I; 0) in renormalized units
    CVector residual = slice * x.x;
    if (l > 1) {
      CMatrix mb = slice * x.kernel_basis;
      Eigen::JacobiSVD<CMatrix> svd(mb, Eigen::ComputeThinU);
      if (svd.singularValues()(l - 2) <= kDensityRankTol * op_norm(slice)) {
        est.degenerate[j] = 1;
        continue;
      }
      // minimum over the kernel directions is the orthogonal projection
      // residual; no coefficient solve, so near-degeneracy cannot amplify
      residual -= svd.matrixU() * (svd.matrixU().adjoint() * residual);
    }
    double min2 = residual.squaredNorm();
    if (!(min2 > 0.0)) {
      est.degenerate[j] = 1;
      continue;
    }
    est.values[j] = std::exp(-2.0 * t.log_scale) / (M_PI * min2);
  }
  return est;
}

ACReport ac_criterion(const OperatorModel& model, const PotentialSample& sample,
                      const RootVector& x, double a, double b,
                      const std::vector<double>& grid, const std::vector<int>& n_list, int m) {
  const int l = model.l;
  if (x.x.size() != l) throw std::invalid_argument("root vector does not match the strip width");
  if (!(a < b)) throw std::invalid_argument("window must satisfy a < b");
  if (grid.size() < 2) throw std::invalid_argument("criterion grid needs at least two points");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (grid[j] < a || grid[j] > b) throw std::invalid_argument("criterion grid leaves the window");
    if (j > 0 && grid[j] <= grid[j - 1])
      throw std::invalid_argument("criterion grid must be strictly increasing");
  }
  if (n_list.empty()) throw std::invalid_argument("depth list must be nonempty");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("depth list must be strictly increasing");
  if (m < 0 || n_list.front() < m || n_list.back() >= sample.N)
    throw std::invalid_argument("depths must satisfy m <= n < sample.N");

  GapEstimate gap = spectral_gap(model, a, b);
  ChannelSplit mid = channel_split(model, cxd(0.5 * (a + b), 0.0), gap);
  TruncationResult trunc = truncate_potential(sample, mid);
  if (m < trunc.m_star) {
    std::ostringstream os;
    os << "start index " << m << " sits inside the truncation region (m* = " << trunc.m_star
       << ")";
    throw std::invalid_argument(os.str());
  }

  const int rows = static_cast<int>(n_list.size());
  const int cols = static_cast<int>(grid.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  ACReport rep;
  rep.grid = grid;
  rep.n_list = n_list;
  rep.orbit4 = RMatrix::Constant(rows, cols, nan);
  rep.x4 = RMatrix::Constant(rows, cols, nan);
  std::vector<char> bad(cols, 0);

  for (int j = 0; j < cols; ++j) {
    try {
      ChannelSplit split = channel_split(model, cxd(grid[j], 0.0), gap);
      SchurParams p = schur_params(split);
      SchurState st = schur_init(p);
      HeadBlocks head = head_blocks(model, sample, split, m);
      std::size_t idx = 0;
      for (int k = m; k <= n_list.back() && idx < n_list.size(); ++k) {
        schur_step(st, p, conjugated_step(split, sample, k).W);
        if (k != n_list[idx]) continue;
        MatchingRank mr = matching_rank(head, st.DinvC);
        if (!mr.full) {
          bad[j] = 1;
          break;
        }
        InitialData data = bounded_initial_data(head, st.DinvC, x.x);
        CVector conj = CVector::Zero(2 * l);
        conj.head(p.l0) = st.X * data.y;
        rep.orbit4(static_cast<int>(idx), j) = pow4((split.Q * conj).norm());
        rep.x4(static_cast<int>(idx), j) = pow4(op_norm(st.X));
        ++idx;
      }
    } catch (const NumericalError&) {
      bad[j] = 1;
    }
    if (bad[j]) {
      rep.orbit4.col(j).setConstant(nan);
      rep.x4.col(j).setConstant(nan);
      rep.excluded.push_back(grid[j]);
    }
  }

  std::vector<double> xs;
  for (int j = 0; j < cols; ++j)
    if (!bad[j]) xs.push_back(grid[j]);
  rep.integrals.assign(rows, 0.0);
  rep.x_integrals.assign(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    std::vector<double> o, xq;
    o.reserve(xs.size());
    xq.reserve(xs.size());
    for (int j = 0; j < cols; ++j) {
      if (bad[j]) continue;
      o.push_back(rep.orbit4(i, j));
      xq.push_back(rep.x4(i, j));
    }
    if (xs.size() >= 2) {
      rep.integrals[i] = trapezoid(xs, o);
      rep.x_integrals[i] = trapezoid(xs, xq);
    }
  }
  rep.liminf_estimate = *std::min_element(rep.integrals.begin(), rep.integrals.end());
  return rep;
}

double SpectralOracle::eval(double lambda) const {
  const double eta2 = eta * eta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    double d = lambda - eigenvalues(i);
    acc += weights(i) * eta / (d * d + eta2);
  }
  return acc / M_PI;
}

std::vector<double> SpectralOracle::eval_grid(const std::vector<double>& grid) const {
  std::vector<double> out(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = eval(grid[j]);
  return out;
}

SpectralOracle truncation_spectral_oracle(const OperatorModel& model,
                                          const PotentialSample& sample, int N,
                                          const RootVector& x, double eta) {
  const int l = model.l;
  if (x.x.size() != l) throw std::invalid_argument("root vector does not match the strip width");
  if (N < 1 || N >= sample.N)
    throw std::invalid_argument("oracle depth must satisfy 1 <= N < sample.N");
  if (N > 5000 * l) throw std::invalid_argument("oracle depth too large for a dense eigensolve");

  SpectralOracle orc;
  orc.eta = eta > 0.0 ? eta : 4.0 / N;

  const int L = (N + 1) * l;
  bool real_case = true;
  for (int s = 0; real_case && s <= N; ++s)
    real_case = sample.matrices[s].imag().cwiseAbs().maxCoeff() == 0.0;

  if (real_case) {
    const int kd = l;
    RMatrix ab = RMatrix::Zero(kd + 1, L);
    for (int jg = 0; jg < L; ++jg) {
      const int sj = jg / l, cj = jg % l;
      const int top = std::min(L - 1, jg + kd);
      for (int ig = jg; ig <= top; ++ig) {
        const int si = ig / l, ci = ig % l;
        double v = 0.0;
        if (si == sj) {
          cxd h = sample.matrices[sj](ci, cj);
          if (ci == cj) h += model.alpha(ci);
          v = h.real();
        } else if (ci == cj) {
          v = -1.0;
        }
        ab(ig - jg, jg) = v;
      }
    }
    RVector w;
    RMatrix z;
    detail::banded_symmetric_eigen(L, kd, ab, w, z);
    orc.eigenvalues = std::move(w);
    orc.weights.resize(L);
    for (int i = 0; i < L; ++i) {
      cxd p = 0.0;
      for (int r = 0; r < l; ++r) p += std::conj(x.x(r)) * z(r, i);
      orc.weights(i) = std::norm(p);
    }
  } else {
    CMatrix h = restriction(model, sample, 0, N);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("dense Hermitian eigensolve failed");
    orc.eigenvalues = es.eigenvalues();
    orc.weights.resize(L);
    for (int i = 0; i < L; ++i)
      orc.weights(i) = std::norm((x.x.adjoint() * es.eigenvectors().col(i).head(l)).value());
  }
  return orc;
}

}  // namespace stripspec
