#include "stripspec/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace stripspec {

double DecayRule::scale_at(int site) const { return sigma * std::pow(site + 1.0, -p); }

namespace {

void check_hermitian(const CMatrix& a, const char* what) {
  double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
  double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (asym > 1e-12 * scale) {
    std::ostringstream os;
    os << what << " must be Hermitian, asymmetry norm " << asym;
    throw std::invalid_argument(os.str());
  }
}

std::vector<std::string> summability_warnings(const PotentialSpec& pot) {
  std::vector<std::string> w;
  bool random_part =
      pot.kind == PotentialKind::DiagonalIid || pot.kind == PotentialKind::HermitianGaussian;
  if (random_part && pot.decay.p <= 0.5) {
    std::ostringstream os;
    os << "decay exponent p=" << pot.decay.p
       << " leaves sum E||V_n||^2 divergent (needs p > 1/2)";
    w.push_back(os.str());
  }
  if (pot.mean_shift && pot.mean_shift->decay.p <= 1.0 &&
      pot.mean_shift->matrix.cwiseAbs().maxCoeff() > 0) {
    std::ostringstream os;
    os << "mean decay exponent p=" << pot.mean_shift->decay.p
       << " leaves sum ||E(V_n)|| divergent (needs p > 1)";
    w.push_back(os.str());
  }
  return w;
}

// Stable ascending sort of diagonal entries; returns the permutation as a
// unitary so the same code path serves the general case.
void diagonalize(const CMatrix& a, RVector& alpha, CMatrix& basis) {
  int l = static_cast<int>(a.rows());
  double offdiag = 0.0;
  for (int i = 0; i < l; ++i)
    for (int j = 0; j < l; ++j)
      if (i != j) offdiag = std::max(offdiag, std::abs(a(i, j)));

  if (offdiag <= 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    std::vector<int> idx(l);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int i, int j) { return a(i, i).real() < a(j, j).real(); });
    alpha.resize(l);
    basis = CMatrix::Zero(l, l);
    for (int k = 0; k < l; ++k) {
      alpha(k) = a(idx[k], idx[k]).real();
      basis(idx[k], k) = 1.0;
    }
    return;
  }

  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition of A failed");
  alpha = es.eigenvalues();  // ascending already
  basis = es.eigenvectors();
}

CMatrix hermitize(const CMatrix& v) { return 0.5 * (v + v.adjoint()); }

}  // namespace

OperatorModel build_model(const CMatrix& a, PotentialSpec potential) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("A must be a square matrix of width >= 1");
  check_hermitian(a, "A");
  int l = static_cast<int>(a.rows());

  if (potential.kind == PotentialKind::UserSequence) {
    if (potential.mean_shift)
      throw std::invalid_argument("mean shift is not applicable to a user matrix sequence");
    for (const auto& v : potential.user_matrices) {
      if (v.rows() != l || v.cols() != l)
        throw std::invalid_argument("user potential matrix has wrong dimensions");
      check_hermitian(v, "user potential matrix");
    }
  }
  if (potential.mean_shift) {
    if (potential.mean_shift->matrix.rows() != l || potential.mean_shift->matrix.cols() != l)
      throw std::invalid_argument("mean shift matrix has wrong dimensions");
    check_hermitian(potential.mean_shift->matrix, "mean shift matrix");
  }

  OperatorModel m;
  m.l = l;
  diagonalize(a, m.alpha, m.basis);
  m.potential = std::move(potential);
  m.warnings = summability_warnings(m.potential);
  return m;
}

PotentialSample sample_potential(const OperatorModel& model, uint64_t seed, int N) {
  if (N < 0) throw std::invalid_argument("sample length must be nonnegative");
  const int l = model.l;
  const PotentialSpec& pot = model.potential;
  if (pot.kind == PotentialKind::UserSequence &&
      static_cast<int>(pot.user_matrices.size()) < N) {
    std::ostringstream os;
    os << "user potential sequence has " << pot.user_matrices.size() << " sites, need " << N;
    throw std::invalid_argument(os.str());
  }

  bool identity_basis =
      (model.basis - CMatrix::Identity(l, l)).cwiseAbs().maxCoeff() < 1e-15;

  PotentialSample s;
  s.l = l;
  s.N = N;
  s.seed = seed;
  s.matrices.reserve(N);
  for (int n = 0; n < N; ++n) {
    CMatrix v = CMatrix::Zero(l, l);
    switch (pot.kind) {
      case PotentialKind::Zero:
        break;
      case PotentialKind::DiagonalIid: {
        Xoshiro256ss rng(derive_stream(seed, static_cast<uint64_t>(n)));
        double a_n = pot.decay.scale_at(n);
        for (int i = 0; i < l; ++i) v(i, i) = a_n * rng.uniform(-1.0, 1.0);
        break;
      }
      case PotentialKind::HermitianGaussian: {
        Xoshiro256ss rng(derive_stream(seed, static_cast<uint64_t>(n)));
        double a_n = pot.decay.scale_at(n);
        const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
        for (int i = 0; i < l; ++i) {
          v(i, i) = a_n * rng.normal();
          for (int j = i + 1; j < l; ++j) {
            cxd g(rng.normal() * inv_sqrt2, rng.normal() * inv_sqrt2);
            v(i, j) = a_n * g;
            v(j, i) = std::conj(a_n * g);
          }
        }
        break;
      }
      case PotentialKind::UserSequence:
        v = pot.user_matrices[n];
        break;
    }
    if (pot.mean_shift)
      v += pot.mean_shift->decay.scale_at(n) * pot.mean_shift->matrix;
    if (!identity_basis) v = hermitize(model.basis.adjoint() * v * model.basis);
    s.matrices.push_back(std::move(v));
  }
  return s;
}

CMatrix restriction(const OperatorModel& model, const PotentialSample& sample, int m, int n) {
  if (m < 0 || n < m || n >= sample.N)
    throw std::invalid_argument("restriction window must satisfy 0 <= m <= n < sample.N");
  const int l = model.l;
  const int sites = n - m + 1;
  CMatrix h = CMatrix::Zero(l * sites, l * sites);
  CMatrix a = model.alpha.cast<cxd>().asDiagonal();
  for (int s = 0; s < sites; ++s) {
    h.block(s * l, s * l, l, l) = hermitize(a + sample.matrices[m + s]);
    if (s + 1 < sites) {
      h.block(s * l, (s + 1) * l, l, l) = -CMatrix::Identity(l, l);
      h.block((s + 1) * l, s * l, l, l) = -CMatrix::Identity(l, l);
    }
  }
  return h;
}

FoldedPair fold_full_line(const CMatrix& a_full, const std::vector<CMatrix>& potentials) {
  if (a_full.rows() != a_full.cols() || a_full.rows() < 1)
    throw std::invalid_argument("A must be a square matrix of width >= 1");
  check_hermitian(a_full, "A");
  if (potentials.empty() || potentials.size() % 2 != 0)
    throw std::invalid_argument(
        "full-line window must be symmetric: need an even, positive number of potentials");
  const int l = static_cast<int>(a_full.rows());
  const int half = static_cast<int>(potentials.size()) / 2;  // folded sites 0..half-1
  for (const auto& v : potentials) {
    if (v.rows() != l || v.cols() != l)
      throw std::invalid_argument("potential matrix has wrong dimensions");
    check_hermitian(v, "potential matrix");
  }

  // potentials[i] sits at full-line site i - half; folded site n pairs
  // full-line sites n and -n-1.
  auto at_site = [&](int s) -> const CMatrix& { return potentials[s + half]; };

  CMatrix a2 = CMatrix::Zero(2 * l, 2 * l);
  a2.topLeftCorner(l, l) = a_full;
  a2.bottomRightCorner(l, l) = a_full;

  std::vector<CMatrix> folded;
  folded.reserve(half);
  for (int n = 0; n < half; ++n) {
    CMatrix v = CMatrix::Zero(2 * l, 2 * l);
    v.topLeftCorner(l, l) = at_site(n);
    v.bottomRightCorner(l, l) = at_site(-n - 1);
    if (n == 0) {
      v.topRightCorner(l, l) = -CMatrix::Identity(l, l);
      v.bottomLeftCorner(l, l) = -CMatrix::Identity(l, l);
    }
    folded.push_back(std::move(v));
  }

  PotentialSpec spec;
  spec.kind = PotentialKind::UserSequence;
  spec.user_matrices = folded;

  FoldedPair out;
  out.model = build_model(a2, std::move(spec));
  out.sample = sample_potential(out.model, 0, half);
  return out;
}

}  // namespace stripspec
