#pragma once

#include <vector>

#include "stripspec/channels.hpp"
#include "stripspec/model.hpp"
#include "stripspec/types.hpp"

namespace stripspec {

// Relative rank threshold for the matching operator.
inline constexpr double kRankTol = 1e-8;
// Singular value cutoff for the least-squares pseudoinverse.
inline constexpr double kPinvTol = 1e-10;
// Acceptable relative residual when solving for bounded initial data.
inline constexpr double kMatchResidualTol = 1e-8;

// Diagonal data and certified rate for the conjugated recursion: s carries
// the l0 = 2 l_e + l_h slow entries (elliptic pairs plus the decaying
// hyperbolic multipliers), g the l1 = l_h growing ones.
struct SchurParams {
  int l0 = 0, l1 = 0;
  CVector s;   // |s_i| <= e^{gap}
  CVector g;   // |g_i| >= e^{2 gap}
  double gap = 0;
};

SchurParams schur_params(const ChannelSplit& split);

// Per-step admissibility cap on the perturbation norm.
double perturbation_cap(double gap);
// Certified bound on ||M^{-1}|| for one update, 2 / (e^{2 gap} + e^{gap}).
double dinv_step_bound(double gap);

// Running Schur-type factorization of the conjugated product
// P = (diag(s,g) + W_{n-1}) ... (diag(s,g) + W_0) split at l0:
//   X = A - B D^{-1} C,  Z = B D^{-1},  DinvC = D^{-1} C,  Dinv = D^{-1}.
// Along admissible steps ||Z|| <= 1 and ||Dinv|| <= dinv_norm_bound, which
// itself contracts at least like dinv_step_bound(gap)^n.
struct SchurState {
  CMatrix X, Z, DinvC, Dinv;
  double dinv_norm_bound = 1.0;
  int n = 0;  // steps consumed
};

SchurState schur_init(const SchurParams& p);

// One multiplicative update by diag(s,g) + W. Refuses the step before
// touching the state if ||W|| exceeds perturbation_cap(gap).
void schur_step(SchurState& st, const SchurParams& p, const CMatrix& W);

struct SchurTrace {
  SchurState state;        // after consuming sites m..N
  CMatrix dinvc_mid;       // D^{-1}C snapshot after site m + (N - m) / 2
  double certificate = 0;  // ||DinvC_end - dinvc_mid||, Cauchy convergence gauge
};

// Drives the recursion over sites m..N inclusive of the sampled potential.
SchurTrace schur_run(const OperatorModel& model, const PotentialSample& sample,
                     const ChannelSplit& split, int m, int N);

// Blocks of the conjugated head Qinv T_{0,m-1}, rows split (l0 | l_h),
// columns split (l | l); the head is the identity for m = 0. Entries are
// renormalized, true head = e^{log_scale} [a b; c d].
struct HeadBlocks {
  CMatrix a, b, c, d;
  double log_scale = 0;
};

HeadBlocks head_blocks(const OperatorModel& model, const PotentialSample& sample,
                       const ChannelSplit& split, int m);

// Matching operator Y a + c. Its range decides for which boundary vectors x
// the growing hyperbolic component of the orbit can be cancelled; Y is the
// DinvC block of the recursion at the depth under study.
CMatrix matching_matrix(const HeadBlocks& head, const CMatrix& Y);

struct MatchingRank {
  double smin = 0;      // smallest singular value of the matching operator
  double smax_ref = 0;  // largest singular value of the stacked (a; c) block
  bool full = true;     // smin > kRankTol * smax_ref; vacuous when l_h = 0
};

// The reference scale is sigma_max of the stacked (a; c) block rather than of
// the matching operator itself: a single hyperbolic channel gives a one-row
// matching operator whose smin and smax coincide, so a self-relative test
// could never fail.
MatchingRank matching_rank(const HeadBlocks& head, const CMatrix& Y);

// Initial data (u; x) whose orbit avoids the growing sector: least-squares
// solution of (Y a + c) u = -(Y b + d) x plus the conjugated seed y. With
// Y = DinvC at depth n the orbit satisfies T_{0,n} (u; x) = Q (X_n y; 0).
// Throws NumericalError when no u cancels the growing component to within
// kMatchResidualTol.
struct InitialData {
  CVector u, y;
  double residual = 0;
};

InitialData bounded_initial_data(const HeadBlocks& head, const CMatrix& Y, const CVector& x);

// Grid scan flagging energies where the matching operator loses rank.
struct RankScanPoint {
  double lambda = 0;
  double smin = 0, smax_ref = 0;
  bool deficient = false;
};

struct RankScan {
  std::vector<RankScanPoint> points;
  std::vector<double> deficient_lambdas;
};

// Potential sites m..depth must be admissible for the stamped gap; sites
// before m enter only through the head product.
RankScan scan_matching_rank(const OperatorModel& model, const PotentialSample& sample,
                            const GapEstimate& gap, const std::vector<double>& lambdas,
                            int m, int depth);

}  // namespace stripspec
