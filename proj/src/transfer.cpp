#include "stripspec/transfer.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <string>

#include "stripspec/errors.hpp"
#include "stripspec/rng.hpp"

namespace stripspec {

namespace {

void require_site(const PotentialSample& sample, int n, const char* who) {
  if (n < 0 || n >= sample.N)
    throw std::invalid_argument(std::string(who) + ": site " + std::to_string(n) +
                                " outside sampled range [0, " + std::to_string(sample.N) + ")");
}

void require_stamped(const ChannelSplit& split, const char* who) {
  if (!(split.gap > 0) || !(split.CQ > 0))
    throw std::invalid_argument(std::string(who) +
                                ": channel split carries no gap estimate (gap, CQ must be > 0)");
}

}  // namespace

void renormalize(TransferMatrix& t) {
  double maxabs = t.entries.cwiseAbs().maxCoeff();
  if (maxabs >= 0.5 && maxabs <= 2.0) return;
  if (!(maxabs > 0) || !std::isfinite(maxabs)) return;  // caller checks finiteness
  // Exact power-of-two scaling: mantissas are untouched, so rescaling never
  // leaks rounding error into small columns of a long product.
  int e = std::ilogb(maxabs);
  t.entries /= std::ldexp(1.0, e);
  t.log_scale += e * M_LN2;
}

TransferMatrix transfer_single(const OperatorModel& model, const PotentialSample& sample,
                               int n, cxd z) {
  require_site(sample, n, "transfer_single");
  int l = model.l;
  TransferMatrix t;
  t.entries = CMatrix::Zero(2 * l, 2 * l);
  t.entries.topLeftCorner(l, l) = sample.matrices[n];
  t.entries.topLeftCorner(l, l) += model.alpha.cast<cxd>().asDiagonal();
  t.entries.topLeftCorner(l, l) -= z * CMatrix::Identity(l, l);
  t.entries.topRightCorner(l, l) = -CMatrix::Identity(l, l);
  t.entries.bottomLeftCorner(l, l) = CMatrix::Identity(l, l);
  return t;
}

TransferMatrix transfer_product(const OperatorModel& model, const PotentialSample& sample,
                                int m, int n, cxd z) {
  require_site(sample, m, "transfer_product");
  require_site(sample, n, "transfer_product");
  if (m > n) throw std::invalid_argument("transfer_product: m > n");
  int l = model.l;
  TransferMatrix acc{CMatrix::Identity(2 * l, 2 * l), 0.0};
  for (int k = m; k <= n; ++k) {
    TransferMatrix step = transfer_single(model, sample, k, z);
    acc.entries = step.entries * acc.entries;
    if (!acc.entries.allFinite())
      throw NumericalError("transfer_product: non-finite entries after step " +
                           std::to_string(k));
    renormalize(acc);
  }
  return acc;
}

TruncationResult truncate_potential(const PotentialSample& sample, const ChannelSplit& split) {
  require_stamped(split, "truncate_potential");
  TruncationResult tr;
  tr.sample = sample;
  double eg = std::exp(split.gap);
  tr.threshold = (eg * eg - eg) / (4.0 * split.CQ * split.CQ);
  int last_zeroed = -1;
  for (int k = 0; k < sample.N; ++k) {
    if (op_norm(sample.matrices[k]) >= tr.threshold) {
      tr.sample.matrices[k].setZero();
      last_zeroed = k;
    }
  }
  tr.m_star = last_zeroed + 1;
  return tr;
}

ConjugatedStep conjugated_step(const ChannelSplit& split, const PotentialSample& sample, int n) {
  require_stamped(split, "conjugated_step");
  require_site(sample, n, "conjugated_step");
  int l = split.l;
  CMatrix embedded = CMatrix::Zero(2 * l, 2 * l);
  embedded.topLeftCorner(l, l) = sample.matrices[n];
  ConjugatedStep cst;
  cst.tdiag = split.tdiag;
  cst.W = split.Qinv * embedded * split.Q;
  double eg = std::exp(split.gap);
  double cap = (eg * eg - eg) / 4.0;
  double w_norm = op_norm(cst.W);
  if (w_norm >= cap)
    throw NumericalError("conjugated_step: perturbation norm " + std::to_string(w_norm) +
                         " at site " + std::to_string(n) + " reaches the admissibility cap " +
                         std::to_string(cap) + "; truncate the potential first");
  return cst;
}

BoundaryData boundary_data(const OperatorModel& model, const PotentialSample& sample,
                           int m, int n, cxd z) {
  require_site(sample, m, "boundary_data");
  require_site(sample, n, "boundary_data");
  if (m > n) throw std::invalid_argument("boundary_data: m > n");
  int l = model.l;
  int L = l * (n - m + 1);
  CMatrix M = restriction(model, sample, m, n);
  M -= z * CMatrix::Identity(L, L);

  Eigen::PartialPivLU<CMatrix> lu(M);

  // Two-step inverse-iteration estimate of ||(H_{m,n} - z)^{-1}||. The probe
  // vector is a fixed pseudo-random draw keyed by the dimension, so the
  // estimate is deterministic and has generic overlap with every mode.
  Xoshiro256ss probe_rng(derive_stream(0x70726f6265ULL, static_cast<uint64_t>(L)));
  CVector probe(L);
  for (int i = 0; i < L; ++i) probe(i) = cxd(probe_rng.normal(), probe_rng.normal());
  probe /= probe.norm();
  double est = 0.0;
  for (int it = 0; it < 2; ++it) {
    CVector grown = lu.solve(probe);
    double gn = grown.norm();
    if (!std::isfinite(gn))
      throw SingularSolveError("boundary_data: singular shifted truncation at z", 0.0);
    est = std::max(est, gn);
    if (gn == 0.0) break;
    probe = grown / gn;
  }
  if (est > 1e10)
    throw SingularSolveError(
        "boundary_data: z within ~" + std::to_string(1.0 / est) +
            " of the truncation spectrum, resolvent solve untrustworthy",
        1.0 / est);

  CMatrix rhs = CMatrix::Zero(L, 2 * l);
  rhs.topLeftCorner(l, l) = CMatrix::Identity(l, l);
  rhs.bottomRightCorner(l, l) = CMatrix::Identity(l, l);
  CMatrix g = lu.solve(rhs);

  BoundaryData bd;
  bd.m = m;
  bd.n = n;
  bd.z = z;
  bd.alpha_blk = g.topLeftCorner(l, l);
  bd.beta = g.topRightCorner(l, l);
  bd.gamma_blk = g.block(L - l, 0, l, l);
  bd.delta = g.bottomRightCorner(l, l);
  return bd;
}

TransferMatrix transfer_from_boundary(const BoundaryData& bd) {
  int l = static_cast<int>(bd.beta.rows());
  Eigen::JacobiSVD<CMatrix> svd(bd.beta, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  double smax = sv(0);
  double smin = sv(l - 1);
  if (smin <= 1e-12 * smax)
    throw RankDeficiencyError("transfer_from_boundary: upper-corner resolvent block is "
                              "numerically rank deficient",
                              smin, smax);
  CMatrix beta_inv =
      svd.matrixV() * sv.cwiseInverse().cast<cxd>().asDiagonal() * svd.matrixU().adjoint();

  TransferMatrix t;
  t.entries = CMatrix::Zero(2 * l, 2 * l);
  t.entries.topLeftCorner(l, l) = beta_inv;
  t.entries.topRightCorner(l, l) = -beta_inv * bd.alpha_blk;
  t.entries.bottomLeftCorner(l, l) = bd.delta * beta_inv;
  t.entries.bottomRightCorner(l, l) = bd.gamma_blk - bd.delta * beta_inv * bd.alpha_blk;
  renormalize(t);
  return t;
}

BlockSplit block_split(const TransferMatrix& conjugated, int l0) {
  int dim = static_cast<int>(conjugated.entries.rows());
  if (l0 < 0 || l0 > dim) throw std::invalid_argument("block_split: l0 outside [0, dim]");
  int l1 = dim - l0;
  BlockSplit bs;
  bs.A = conjugated.entries.topLeftCorner(l0, l0);
  bs.B = conjugated.entries.topRightCorner(l0, l1);
  bs.C = conjugated.entries.bottomLeftCorner(l1, l0);
  bs.D = conjugated.entries.bottomRightCorner(l1, l1);
  bs.log_scale = conjugated.log_scale;
  return bs;
}

}  // namespace stripspec
