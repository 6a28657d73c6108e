#pragma once

#include <optional>
#include <vector>

#include "stripspec/model.hpp"
#include "stripspec/types.hpp"

namespace stripspec {

// Tolerance for deciding that an energy sits on a band edge.
inline constexpr double kParabolicTol = 1e-9;

enum class ChannelType { Elliptic, Hyperbolic, Parabolic };

struct BandStructure {
  std::vector<Interval> bands;  // [alpha_j - 2, alpha_j + 2] per channel
  std::vector<Interval> sigma;  // open components: band union split at edges
  std::optional<Interval> sigma0;  // intersection of all open bands, if nonempty
};

BandStructure band_structure(const OperatorModel& model);

// Per-channel type at real energy lambda: |alpha_j - lambda| <, >, = 2.
std::vector<ChannelType> classify_channels(const OperatorModel& model, double lambda,
                                           double tol = kParabolicTol);

// Largest gamma > 0 and height c > 0 such that on a verification grid over
// [a,b] x [-c,c] the hyperbolic multipliers satisfy ||Gamma^{-1}|| <= e^{-2 gamma}
// and the elliptic ones ||e^{+-iK}|| <= e^{gamma}, with multiplicative safety
// margin e^{-gamma/100}. CQ bounds ||Q||, ||Q^{-1}|| over the same grid.
struct GapEstimate {
  double gamma = 0;
  double height = 0;
  double CQ = 0;
  Interval window;  // the [a,b] the estimate was computed for
};

GapEstimate spectral_gap(const OperatorModel& model, double a, double b);

// Channel data at z = lambda + i eta; classification is taken at Re z.
// Q and Qinv live in the original (unpermuted) channel basis and satisfy
// Qinv * T_free(z) * Q = diag(tdiag) with tdiag = (e^{iK}, e^{-iK}, G^{-1}, G)
// in the permuted ordering, elliptic channels first.
struct ChannelSplit {
  cxd z;
  int l = 0, l_e = 0, l_h = 0;
  std::vector<int> perm;  // perm[slot] = original channel index
  CVector k;              // elliptic momenta, Re k in (0, pi) at real z
  CVector gamma_mult;     // hyperbolic multipliers, |gamma| > 1
  CMatrix Q, Qinv;        // 2l x 2l
  CVector tdiag;          // 2l conjugated diagonal
  double gap = 0, height = 0, CQ = 0;  // stamped from a GapEstimate when given
};

ChannelSplit channel_split(const OperatorModel& model, cxd z);
ChannelSplit channel_split(const OperatorModel& model, cxd z, const GapEstimate& gap);

}  // namespace stripspec
