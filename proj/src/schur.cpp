#include "stripspec/schur.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stripspec/errors.hpp"
#include "stripspec/transfer.hpp"

namespace stripspec {

namespace {

constexpr double kAdmitSlack = 1e-12;

double max_modulus(const CVector& v) {
  double m = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v(i)));
  return m;
}

double min_modulus(const CVector& v) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::min(m, std::abs(v(i)));
  return m;
}

CMatrix stacked_head_columns(const HeadBlocks& head) {
  CMatrix st(head.a.rows() + head.c.rows(), head.a.cols());
  st.topRows(head.a.rows()) = head.a;
  st.bottomRows(head.c.rows()) = head.c;
  return st;
}

}  // namespace

double perturbation_cap(double gap) {
  double eg = std::exp(gap);
  return (eg * eg - eg) / 4.0;
}

double dinv_step_bound(double gap) {
  double eg = std::exp(gap);
  return 2.0 / (eg * eg + eg);
}

SchurParams schur_params(const ChannelSplit& split) {
  if (!(split.gap > 0) || !(split.CQ > 0))
    throw std::invalid_argument("schur_params: channel split carries no gap estimate");
  SchurParams p;
  p.l0 = 2 * split.l_e + split.l_h;
  p.l1 = split.l_h;
  p.s = split.tdiag.head(p.l0);
  p.g = split.tdiag.tail(p.l1);
  p.gap = split.gap;
  return p;
}

SchurState schur_init(const SchurParams& p) {
  if (p.l0 < 0 || p.l1 < 0 || p.l0 + p.l1 < 1)
    throw std::invalid_argument("schur_init: need at least one channel");
  if (p.s.size() != p.l0 || p.g.size() != p.l1)
    throw std::invalid_argument("schur_init: diagonal sizes disagree with l0, l1");
  if (!(p.gap > 0)) throw std::invalid_argument("schur_init: gap must be positive");
  double eg = std::exp(p.gap);
  if (max_modulus(p.s) > eg * (1 + kAdmitSlack))
    throw NumericalError("schur_init: slow diagonal exceeds e^{gap}");
  if (p.l1 > 0 && min_modulus(p.g) < eg * eg / (1 + kAdmitSlack))
    throw NumericalError("schur_init: growing diagonal below e^{2 gap}");

  SchurState st;
  st.X = CMatrix::Identity(p.l0, p.l0);
  st.Z = CMatrix::Zero(p.l0, p.l1);
  st.DinvC = CMatrix::Zero(p.l1, p.l0);
  st.Dinv = CMatrix::Identity(p.l1, p.l1);
  return st;
}

void schur_step(SchurState& st, const SchurParams& p, const CMatrix& W) {
  int dim = p.l0 + p.l1;
  if (W.rows() != dim || W.cols() != dim)
    throw std::invalid_argument("schur_step: perturbation must be (l0+l1) square");
  double cap = perturbation_cap(p.gap);
  double w_norm = op_norm(W);
  if (w_norm > cap * (1 + kAdmitSlack))
    throw NumericalError("schur_step: perturbation norm " + std::to_string(w_norm) +
                         " exceeds admissibility cap " + std::to_string(cap));

  CMatrix SA = W.topLeftCorner(p.l0, p.l0);
  SA += p.s.asDiagonal();
  if (p.l1 == 0) {
    st.X = SA * st.X;
    ++st.n;
    return;
  }

  CMatrix b = W.topRightCorner(p.l0, p.l1);
  CMatrix c = W.bottomLeftCorner(p.l1, p.l0);
  CMatrix M = W.bottomRightCorner(p.l1, p.l1);
  M += c * st.Z;
  M += p.g.asDiagonal();
  CMatrix Minv = M.partialPivLu().inverse();

  CMatrix z_new = (SA * st.Z + b) * Minv;
  CMatrix cX = c * st.X;
  CMatrix x_new = SA * st.X - z_new * cX;
  CMatrix dinv_new = st.Dinv * Minv;
  st.DinvC += dinv_new * cX;
  st.Z = z_new;
  st.X = x_new;
  st.Dinv = dinv_new;
  st.dinv_norm_bound *= op_norm(Minv);
  ++st.n;
}

SchurTrace schur_run(const OperatorModel&, const PotentialSample& sample,
                     const ChannelSplit& split, int m, int N) {
  if (m < 0 || m > N || N >= sample.N)
    throw std::invalid_argument("schur_run: need 0 <= m <= N < sample.N");
  SchurParams p = schur_params(split);
  SchurTrace tr;
  SchurState st = schur_init(p);
  int mid = m + (N - m) / 2;
  for (int k = m; k <= N; ++k) {
    ConjugatedStep cst = conjugated_step(split, sample, k);
    schur_step(st, p, cst.W);
    if (k == mid) tr.dinvc_mid = st.DinvC;
  }
  tr.certificate = op_norm(CMatrix(st.DinvC - tr.dinvc_mid));
  tr.state = std::move(st);
  return tr;
}

HeadBlocks head_blocks(const OperatorModel& model, const PotentialSample& sample,
                       const ChannelSplit& split, int m) {
  if (m < 0 || m > sample.N)
    throw std::invalid_argument("head_blocks: head length outside sampled range");
  int l = split.l;
  int l0 = 2 * split.l_e + split.l_h;
  CMatrix conj;
  HeadBlocks h;
  if (m == 0) {
    conj = split.Qinv;
    h.log_scale = 0.0;
  } else {
    TransferMatrix t = transfer_product(model, sample, 0, m - 1, split.z);
    conj = split.Qinv * t.entries;
    h.log_scale = t.log_scale;
  }
  h.a = conj.block(0, 0, l0, l);
  h.b = conj.block(0, l, l0, l);
  h.c = conj.block(l0, 0, split.l_h, l);
  h.d = conj.block(l0, l, split.l_h, l);
  return h;
}

CMatrix matching_matrix(const HeadBlocks& head, const CMatrix& Y) {
  if (Y.rows() != head.c.rows() || Y.cols() != head.a.rows())
    throw std::invalid_argument("matching_matrix: Y shape disagrees with the head blocks");
  return Y * head.a + head.c;
}

MatchingRank matching_rank(const HeadBlocks& head, const CMatrix& Y) {
  MatchingRank mr;
  mr.smax_ref = op_norm(stacked_head_columns(head));
  if (head.c.rows() == 0) {
    mr.full = true;  // nothing to match
    return mr;
  }
  mr.smin = smallest_sv(matching_matrix(head, Y));
  mr.full = mr.smin > kRankTol * mr.smax_ref;
  return mr;
}

InitialData bounded_initial_data(const HeadBlocks& head, const CMatrix& Y, const CVector& x) {
  int l = static_cast<int>(head.a.cols());
  if (x.size() != l)
    throw std::invalid_argument("bounded_initial_data: boundary vector has wrong size");
  InitialData out;
  int lh = static_cast<int>(head.c.rows());
  if (lh == 0) {
    out.u = CVector::Zero(l);
  } else {
    CMatrix mm = matching_matrix(head, Y);
    CVector rhs = -(Y * head.b + head.d) * x;
    // Cutoff relative to the head scale, not to ||mm||: at an embedded bound
    // state mm collapses entirely and a self-relative pseudoinverse would
    // amplify noise into an enormous "solution" instead of failing the
    // residual test below.
    double scale = op_norm(stacked_head_columns(head));
    Eigen::JacobiSVD<CMatrix> svd(mm, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double cutoff = kPinvTol * scale;
    out.u = CVector::Zero(l);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      double sv = svd.singularValues()(i);
      if (sv <= cutoff) continue;
      out.u += svd.matrixV().col(i) * (svd.matrixU().col(i).dot(rhs) / sv);
    }
    out.residual = (mm * out.u - rhs).norm();
  }
  out.y = std::exp(head.log_scale) * (head.a * out.u + head.b * x);
  if (out.residual > kMatchResidualTol * (1 + out.y.norm()))
    throw NumericalError(
        "bounded_initial_data: growing component cannot be cancelled, residual " +
        std::to_string(out.residual));
  return out;
}

RankScan scan_matching_rank(const OperatorModel& model, const PotentialSample& sample,
                            const GapEstimate& gap, const std::vector<double>& lambdas,
                            int m, int depth) {
  RankScan scan;
  scan.points.reserve(lambdas.size());
  for (double lam : lambdas) {
    ChannelSplit split = channel_split(model, cxd(lam, 0.0), gap);
    SchurTrace tr = schur_run(model, sample, split, m, depth);
    HeadBlocks head = head_blocks(model, sample, split, m);
    MatchingRank mr = matching_rank(head, tr.state.DinvC);
    scan.points.push_back({lam, mr.smin, mr.smax_ref, !mr.full});
    if (!mr.full) scan.deficient_lambdas.push_back(lam);
  }
  return scan;
}

}  // namespace stripspec
