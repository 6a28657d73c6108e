#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stripspec/rng.hpp"
#include "stripspec/types.hpp"

namespace stripspec {

// Half-strip operator (H psi)_n = -psi_{n-1} - psi_{n+1} + A psi_n + V_n psi_n
// acting on square-summable C^l valued sequences, Dirichlet at the boundary.
// The model stores A in diagonalized form: alpha ascending, `basis` the
// unitary taking the original frame to the diagonal one. Potentials are
// sampled directly in the diagonal frame.

enum class PotentialKind { Zero, DiagonalIid, HermitianGaussian, UserSequence };

// Per-site scale sigma * (n+1)^-p.
struct DecayRule {
  double sigma = 1.0;
  double p = 1.0;
  double scale_at(int site) const;
};

struct MeanShift {
  CMatrix matrix;  // Hermitian l x l
  DecayRule decay;
};

struct PotentialSpec {
  PotentialKind kind = PotentialKind::Zero;
  DecayRule decay;
  std::optional<MeanShift> mean_shift;
  std::vector<CMatrix> user_matrices;  // UserSequence only, diagonal frame applied on sampling
};

struct OperatorModel {
  int l = 1;
  RVector alpha;  // ascending eigenvalues of A
  CMatrix basis;  // basis^* A basis = diag(alpha)
  PotentialSpec potential;
  std::vector<std::string> warnings;  // e.g. non-summable decay
};

struct PotentialSample {
  int l = 1;
  int N = 0;  // sites 0..N-1
  uint64_t seed = 0;
  std::vector<CMatrix> matrices;  // Hermitian, diagonal frame
};

// Validates Hermiticity, diagonalizes A (stable ascending sort for diagonal
// input, ties keep original channel order), runs the summability check.
OperatorModel build_model(const CMatrix& a, PotentialSpec potential);

// Deterministic: per-site streams keyed by (seed, site), so regeneration with
// the same (spec, seed, N) is bit-identical and prefix-stable.
PotentialSample sample_potential(const OperatorModel& model, uint64_t seed, int N);

// Dense truncation H_{m,n}, size l*(n-m+1), exactly Hermitian.
CMatrix restriction(const OperatorModel& model, const PotentialSample& sample, int m, int n);

struct FoldedPair {
  OperatorModel model;
  PotentialSample sample;
};

// Folds a full-line operator over the window -(N+1)..N (given as 2N+2
// potentials, ascending site order) onto the half line with doubled width:
// site n >= 1 carries diag(V_n, V_{-n-1}) and the boundary site couples the
// two copies with -I off-diagonal blocks.
FoldedPair fold_full_line(const CMatrix& a_full, const std::vector<CMatrix>& potentials);

}  // namespace stripspec
