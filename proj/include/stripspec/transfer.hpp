#pragma once

#include "stripspec/channels.hpp"
#include "stripspec/model.hpp"
#include "stripspec/types.hpp"

namespace stripspec {

// One-step and accumulated transfer matrices. A product over a hyperbolic
// window grows like e^{2 gamma n} and overflows doubles near n ~ 350, so
// products carry a separated scale: true matrix = e^{log_scale} * entries.
struct TransferMatrix {
  CMatrix entries;  // 2l x 2l
  double log_scale = 0.0;
};

inline CMatrix descaled(const TransferMatrix& t) {
  return std::exp(t.log_scale) * t.entries;
}

// Rescales entries to unit max-abs whenever they leave [1/2, 2].
void renormalize(TransferMatrix& t);

TransferMatrix transfer_single(const OperatorModel& model, const PotentialSample& sample,
                               int n, cxd z);

// T_n T_{n-1} ... T_m with per-step renormalization.
TransferMatrix transfer_product(const OperatorModel& model, const PotentialSample& sample,
                                int m, int n, cxd z);

// Potential with every site of norm >= (e^{2 gamma} - e^{gamma}) / (4 CQ^2)
// zeroed; m_star is the first index from which nothing was touched.
struct TruncationResult {
  PotentialSample sample;
  int m_star = 0;
  double threshold = 0.0;
};

TruncationResult truncate_potential(const PotentialSample& sample, const ChannelSplit& split);

// Conjugated one-step data: diagonal free part and the perturbation
// W = Qinv (V 0; 0 0) Q, refused outright if it exceeds the admissibility
// cap (e^{2 gamma} - e^{gamma}) / 4.
struct ConjugatedStep {
  CVector tdiag;
  CMatrix W;
};

ConjugatedStep conjugated_step(const ChannelSplit& split, const PotentialSample& sample, int n);

// Corner blocks of the resolvent of the truncation H_{m,n}:
// [alpha beta; gamma delta] = [P_m^*; P_n^*] (H_{m,n} - z)^{-1} [P_m P_n].
struct BoundaryData {
  int m = 0, n = 0;
  cxd z;
  CMatrix alpha_blk, beta, gamma_blk, delta;
};

BoundaryData boundary_data(const OperatorModel& model, const PotentialSample& sample,
                           int m, int n, cxd z);

// Transfer product recovered from resolvent boundary data:
// [[beta^{-1}, -beta^{-1} alpha], [delta beta^{-1}, gamma - delta beta^{-1} alpha]].
TransferMatrix transfer_from_boundary(const BoundaryData& bd);

// View of a conjugated product split at row/column l0.
struct BlockSplit {
  CMatrix A, B, C, D;
  double log_scale = 0.0;
};

BlockSplit block_split(const TransferMatrix& conjugated, int l0);

}  // namespace stripspec
