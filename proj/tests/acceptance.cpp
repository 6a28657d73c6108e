// Acceptance runner: eleven end-to-end checks of the library against
// independent oracles and the certified bounds, each with tolerances and
// a runtime budget pinned here. Prints one line per criterion; exit 0 only
// when every line is a PASS.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stripspec/channels.hpp"
#include "stripspec/errors.hpp"
#include "stripspec/model.hpp"
#include "stripspec/montecarlo.hpp"
#include "stripspec/rng.hpp"
#include "stripspec/schur.hpp"
#include "stripspec/spectral.hpp"
#include "stripspec/transfer.hpp"

using namespace stripspec;

namespace {

using cxl = std::complex<long double>;
using LMatrix = Eigen::Matrix<cxl, Eigen::Dynamic, Eigen::Dynamic>;

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail, double secs,
            double budget) {
  bool ok = pass && secs <= budget;
  if (!ok) ++g_failures;
  std::printf("criterion %2d %-34s %s  %s  (%.1fs, budget %.0fs)\n", idx, name,
              ok ? "PASS" : "FAIL", detail.c_str(), secs, budget);
  std::fflush(stdout);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double secs() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

double rel_err(const CMatrix& a, const CMatrix& b) {
  double scale = op_norm(b);
  return scale > 0 ? op_norm(a - b) / scale : op_norm(a - b);
}

CMatrix random_hermitian(Xoshiro256ss& rng, int l, double diag_span, double off_scale) {
  CMatrix a = CMatrix::Zero(l, l);
  for (int r = 0; r < l; ++r) {
    a(r, r) = rng.uniform(-diag_span, diag_span);
    for (int c = r + 1; c < l; ++c) {
      a(r, c) = off_scale * cxd(rng.normal(), rng.normal());
      a(c, r) = std::conj(a(r, c));
    }
  }
  return a;
}

LMatrix widen(const CMatrix& m) {
  LMatrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      out(i, j) = cxl(m(i, j).real(), m(i, j).imag());
  return out;
}

CMatrix narrow(const LMatrix& m) {
  CMatrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      out(i, j) = cxd(static_cast<double>(m(i, j).real()),
                      static_cast<double>(m(i, j).imag()));
  return out;
}

// 1. Channel conjugation brings the free transfer matrix to the stamped
//    diagonal normal form.
void criterion_1() {
  Timer t;
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    Xoshiro256ss rng(derive_stream(101, i));
    int l = 1 + i % 4;
    CMatrix a = CMatrix::Zero(l, l);
    for (int j = 0; j < l; ++j) a(j, j) = rng.uniform(-3.0, 3.0);
    OperatorModel model = build_model(a, {});
    cxd z(rng.uniform(-4.5, 4.5), rng.uniform(0.05, 0.5));
    ChannelSplit split = channel_split(model, z);
    PotentialSample s = sample_potential(model, 0, 1);
    CMatrix free_t = descaled(transfer_single(model, s, 0, z));
    CMatrix diag = CMatrix::Zero(2 * l, 2 * l);
    diag.diagonal() = split.tdiag;
    worst = std::max(worst, op_norm(split.Qinv * free_t * split.Q - diag));
  }
  report(1, "conjugation normal form", worst <= 1e-10,
         "max_dev " + fmt(worst) + " tol 1e-10", t.secs(), 5);
}

// 2. Transfer product reconstructed from resolvent boundary data.
void criterion_2() {
  Timer t;
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    Xoshiro256ss rng(derive_stream(202, i));
    int l = 1 + i % 3;
    CMatrix a = random_hermitian(rng, l, 3.0, 0.4);
    PotentialSpec spec;
    spec.kind = PotentialKind::HermitianGaussian;
    spec.decay = {0.5, 1.0};
    OperatorModel model = build_model(a, spec);
    int m = i % 4;
    int n = m + static_cast<int>(rng.next() % 11);
    cxd z(rng.uniform(-4.0, 4.0), i % 2 ? 0.5 : 0.1);
    PotentialSample sample = sample_potential(model, derive_stream(202, 7000 + i), n + 1);
    TransferMatrix via = transfer_from_boundary(boundary_data(model, sample, m, n, z));
    TransferMatrix direct = transfer_product(model, sample, m, n, z);
    double f = std::exp(via.log_scale - direct.log_scale);
    worst = std::max(worst, rel_err(f * via.entries, direct.entries));
  }
  report(2, "boundary-data reconstruction", worst <= 1e-8,
         "max_rel " + fmt(worst) + " tol 1e-8", t.secs(), 10);
}

// 3. The Schur recursion against dense long-double Schur complements of the
//    accumulated product. Two regimes keep the oracle itself honest: long
//    sequences need the slow moduli close to e^{0.95 gap}.
void criterion_3() {
  Timer t;
  double worst = 0;
  for (int seq = 0; seq < 100; ++seq) {
    Xoshiro256ss rng(derive_stream(303, seq));
    int l1 = seq % 3;
    int l0 = 1 + static_cast<int>(rng.next() % 5);
    bool wide = seq >= 70;
    double gap = wide ? rng.uniform(0.3, 0.5) : rng.uniform(0.25, 0.4);
    int len = wide ? 1 + static_cast<int>(rng.next() % 9)
                   : 1 + static_cast<int>(rng.next() % 30);
    double s_floor = wide ? 0.3 : 0.85 * std::exp(0.95 * gap);
    SchurParams p;
    p.l0 = l0;
    p.l1 = l1;
    p.gap = gap;
    p.s = CVector(l0);
    p.g = CVector(l1);
    for (int i = 0; i < l0; ++i)
      p.s(i) = std::polar(rng.uniform(s_floor, std::exp(0.95 * gap)),
                          rng.uniform(0, 2 * M_PI));
    for (int i = 0; i < l1; ++i)
      p.g(i) = std::polar(std::exp(2 * gap) * rng.uniform(1.001, 1.3),
                          rng.uniform(0, 2 * M_PI));
    double cap = perturbation_cap(gap);

    LMatrix base = LMatrix::Zero(l0 + l1, l0 + l1);
    for (int i = 0; i < l0; ++i) base(i, i) = cxl(p.s(i).real(), p.s(i).imag());
    for (int i = 0; i < l1; ++i)
      base(l0 + i, l0 + i) = cxl(p.g(i).real(), p.g(i).imag());

    SchurState st = schur_init(p);
    LMatrix prod = LMatrix::Identity(l0 + l1, l0 + l1);
    for (int k = 0; k < len; ++k) {
      CMatrix w(l0 + l1, l0 + l1);
      for (int j = 0; j < l0 + l1; ++j)
        for (int i = 0; i < l0 + l1; ++i) w(i, j) = cxd(rng.normal(), rng.normal());
      double nrm = op_norm(w);
      if (nrm > 0) w *= rng.uniform(0.0, 0.9) * cap / nrm;
      schur_step(st, p, w);
      prod = (base + widen(w)) * prod;

      LMatrix A = prod.topLeftCorner(l0, l0);
      if (l1 == 0) {
        worst = std::max(worst, rel_err(st.X, narrow(A)));
        continue;
      }
      LMatrix B = prod.topRightCorner(l0, l1);
      LMatrix C = prod.bottomLeftCorner(l1, l0);
      LMatrix D = prod.bottomRightCorner(l1, l1);
      LMatrix Dinv = Eigen::PartialPivLU<LMatrix>(D).inverse();
      worst = std::max(worst, rel_err(st.X, narrow(A - B * (Dinv * C))));
      worst = std::max(worst, rel_err(st.Z, narrow(B * Dinv)));
      worst = std::max(worst, rel_err(st.DinvC, narrow(Dinv * C)));
    }
  }
  report(3, "schur recursion vs dense oracle", worst <= 1e-8,
         "max_rel " + fmt(worst) + " tol 1e-8", t.secs(), 10);
}

const BoundRecord* find_record(const BoundReport& rep, const std::string& name) {
  for (const auto& r : rep.bounds)
    if (r.name == name) return &r;
  return nullptr;
}

// 4 + 5. One ensemble serves both trajectory bounds: Z stays a contraction
//        and D^{-1} decays at the certified rate.
void criteria_4_5() {
  Timer t;
  CMatrix a = CMatrix::Zero(2, 2);
  a(1, 1) = 5.0;
  PotentialSpec spec;
  spec.kind = PotentialKind::DiagonalIid;
  spec.decay = {0.3, 1.0};
  OperatorModel model = build_model(a, spec);
  EnsembleConfig cfg;
  cfg.num_samples = 1000;
  cfg.N = 200;
  cfg.m = 0;
  cfg.lambda_grid = {1.0};
  cfg.master_seed = 404;
  cfg.threads = 1;
  BoundReport rep = ensemble_run(model, cfg);
  double secs = t.secs();

  const BoundRecord* z = find_record(rep, "z_contraction");
  bool p4 = z && z->pass && rep.failed == 0;
  report(4, "ensemble Z contraction", p4,
         "max_Z " + fmt(z ? z->empirical : -1) + " tol 1+1e-12", secs, 30);

  const BoundRecord* d = find_record(rep, "dinv_decay");
  bool p5 = d && d->pass;
  report(5, "ensemble Dinv decay rate", p5,
         "max_ratio " + fmt(d ? d->empirical : -1) + " tol 1+1e-9", 0.0, 30);
}

// 6. The fourth-moment curve plateaus, consistently across master seeds.
void criterion_6() {
  Timer t;
  CMatrix a = CMatrix::Zero(2, 2);
  a(1, 1) = 5.0;
  PotentialSpec spec;
  spec.kind = PotentialKind::DiagonalIid;
  spec.decay = {0.3, 1.0};
  OperatorModel model = build_model(a, spec);

  double ratio_worst = 0, peak_min = 1e300, peak_max = 0;
  bool finite = true;
  for (uint64_t seed : {61u, 62u, 63u}) {
    EnsembleConfig cfg;
    cfg.num_samples = 400;
    cfg.N = 500;
    cfg.m = 0;
    cfg.lambda_grid = {1.0};
    cfg.master_seed = seed;
    cfg.threads = 1;
    BoundReport rep = ensemble_run(model, cfg);
    double peak = 0;
    for (double v : rep.tables.x4_mean) {
      if (!std::isfinite(v)) finite = false;
      peak = std::max(peak, v);
    }
    ratio_worst = std::max(ratio_worst, rep.tables.x4_mean[499] / rep.tables.x4_mean[249]);
    peak_min = std::min(peak_min, peak);
    peak_max = std::max(peak_max, peak);
  }
  bool pass = finite && ratio_worst <= 1.5 && peak_max / peak_min <= 1.5;
  report(6, "fourth-moment plateau", pass,
         "ratio " + fmt(ratio_worst) + " tol 1.5, seed_spread " + fmt(peak_max / peak_min),
         t.secs(), 120);
}

// 7. Free scalar half line: density integral against the closed-form value
//    and the exact midpoint 1/pi.
void criterion_7() {
  Timer t;
  CMatrix a = CMatrix::Zero(1, 1);
  OperatorModel model = build_model(a, {});
  PotentialSample sample = sample_potential(model, 0, 4001);
  const int pts = 2049;
  std::vector<double> grid(pts);
  for (int j = 0; j < pts; ++j) grid[j] = -1.0 + 2.0 * j / (pts - 1);
  CVector x = CVector::Ones(1);
  DensityEstimate est = density_estimate(model, sample, make_root_vector(x), grid, 4000);

  double integral = 0;
  bool clean = true;
  for (int j = 1; j < pts; ++j)
    integral += 0.5 * (est.values[j] + est.values[j - 1]) * (grid[j] - grid[j - 1]);
  for (int j = 0; j < pts; ++j) clean = clean && est.degenerate[j] == 0;
  double target = (std::sqrt(3.0) + 2.0 * M_PI / 3.0) / (2.0 * M_PI);
  double mid_err = std::abs(est.values[(pts - 1) / 2] - 1.0 / M_PI);
  bool pass = clean && std::abs(integral - target) <= 0.03 * target && mid_err <= 1e-12;
  report(7, "free half-line density", pass,
         "rel_int " + fmt(std::abs(integral - target) / target) + " tol 0.03, f(0)_err " +
             fmt(mid_err) + " tol 1e-12",
         t.secs(), 30);
}

double bump(double lam, double center, double width) {
  double u = (lam - center) / width;
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

// 8. Density against the eta-smoothed eigenvalue comb of the dense
//    truncation, tested weakly with three bump functions.
void criterion_8() {
  Timer t;
  CMatrix a = CMatrix::Zero(2, 2);
  a(1, 1) = 1.0;
  PotentialSpec spec;
  spec.kind = PotentialKind::DiagonalIid;
  spec.decay = {0.1, 1.5};
  OperatorModel model = build_model(a, spec);
  const int N = 2000;
  PotentialSample sample = sample_potential(model, 808, N + 1);

  const int pts = 1051;
  std::vector<double> grid(pts);
  for (int j = 0; j < pts; ++j) grid[j] = -0.6 + 2.1 * j / (pts - 1);
  CVector x = CVector::Zero(2);
  x(0) = 1.0;
  RootVector root = make_root_vector(x);
  DensityEstimate est = density_estimate(model, sample, root, grid, N);
  SpectralOracle oracle = truncation_spectral_oracle(model, sample, N, root, 4.0 / N);
  std::vector<double> smooth = oracle.eval_grid(grid);

  const double centers[3] = {-0.2, 0.45, 1.0};
  const double widths[3] = {0.35, 0.3, 0.4};
  double worst = 0;
  for (int b = 0; b < 3; ++b) {
    double num = 0, den = 0;
    for (int j = 1; j < pts; ++j) {
      double g1 = bump(grid[j], centers[b], widths[b]);
      double g0 = bump(grid[j - 1], centers[b], widths[b]);
      double h = grid[j] - grid[j - 1];
      num += 0.5 * (g1 * est.values[j] + g0 * est.values[j - 1]) * h;
      den += 0.5 * (g1 * smooth[j] + g0 * smooth[j - 1]) * h;
    }
    worst = std::max(worst, std::abs(num - den) / den);
  }
  report(8, "density vs truncation oracle", worst <= 0.05,
         "max_rel " + fmt(worst) + " tol 0.05", t.secs(), 120);
}

// 9. Bounded-orbit criterion: the fourth-power integrals stay within a
//    factor 10 across depths, and the density couples to the orbit norm by
//    the Cauchy-Schwarz inequality at every computed grid point.
void criterion_9() {
  Timer t;
  CMatrix a = CMatrix::Zero(2, 2);
  a(1, 1) = 5.0;
  PotentialSpec spec;
  spec.kind = PotentialKind::DiagonalIid;
  spec.decay = {0.3, 1.0};
  OperatorModel model = build_model(a, spec);
  GapEstimate gap = spectral_gap(model, 0.6, 1.4);
  double eg = std::exp(gap.gamma);
  double threshold = (eg * eg - eg) / (4.0 * gap.CQ * gap.CQ);

  const int pts = 41;
  std::vector<double> grid(pts);
  for (int j = 0; j < pts; ++j) grid[j] = 0.6 + 0.8 * j / (pts - 1);
  std::vector<int> n_list = {100, 200, 400, 800};
  CVector x = CVector::Zero(2);
  x(0) = 1.0;
  RootVector root = make_root_vector(x);

  int good = 0;
  double worst_spread = 0, worst_coupling = 0;
  for (int i = 0; i < 20; ++i) {
    PotentialSample sample = sample_potential(model, derive_stream(909, i), 801);
    int m = 20;
    for (int k = 0; k < 801; ++k)
      if (op_norm(sample.matrices[k]) >= threshold) m = std::max(m, k + 1);
    ACReport ac = ac_criterion(model, sample, root, 0.6, 1.4, grid, n_list, m);

    double lo = 1e300, hi = 0;
    bool ok = true;
    for (double v : ac.integrals) {
      if (!std::isfinite(v) || v <= 0) ok = false;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    ok = ok && hi / lo <= 10.0;
    worst_spread = std::max(worst_spread, hi / lo);

    for (std::size_t ni = 0; ni < n_list.size() && ok; ++ni) {
      DensityEstimate est = density_estimate(model, sample, root, grid, n_list[ni]);
      for (int j = 0; j < pts; ++j) {
        if (est.degenerate[j]) continue;
        double orbit = ac.orbit4(ni, j);
        if (!std::isfinite(orbit)) continue;  // lambda excluded at this depth
        double pf = M_PI * est.values[j];
        if (pf * pf > orbit * (1.0 + 1e-9) + 1e-300) ok = false;
        if (orbit > 0) worst_coupling = std::max(worst_coupling, pf * pf / orbit);
      }
    }
    if (ok) ++good;
  }
  report(9, "bounded-orbit criterion", good == 20,
         std::to_string(good) + "/20 samples, spread " + fmt(worst_spread) +
             " tol 10, coupling " + fmt(worst_coupling) + " tol 1+1e-9",
         t.secs(), 300);
}

// 10. Folding the full line onto the doubled-width half line preserves the
//     truncation spectrum.
void criterion_10() {
  Timer t;
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    Xoshiro256ss rng(derive_stream(1010, i));
    int l = 1 + i % 2;
    int half = 3 + static_cast<int>(rng.next() % 23);
    CMatrix a = random_hermitian(rng, l, 2.0, 0.3);
    std::vector<CMatrix> pots;
    for (int k = 0; k < 2 * half; ++k) {
      CMatrix g(l, l);
      for (int c = 0; c < l; ++c)
        for (int r = 0; r < l; ++r) g(r, c) = cxd(rng.normal(), rng.normal());
      pots.push_back(0.3 * (g + g.adjoint()));
    }
    FoldedPair folded = fold_full_line(a, pots);
    CMatrix h_folded = restriction(folded.model, folded.sample, 0, half - 1);
    CMatrix h_full = CMatrix::Zero(2 * half * l, 2 * half * l);
    for (int s = 0; s < 2 * half; ++s) {
      h_full.block(s * l, s * l, l, l) = a + pots[s];
      if (s + 1 < 2 * half) {
        h_full.block(s * l, (s + 1) * l, l, l) = -CMatrix::Identity(l, l);
        h_full.block((s + 1) * l, s * l, l, l) = -CMatrix::Identity(l, l);
      }
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> ef(h_folded), eh(h_full);
    worst = std::max(worst, (ef.eigenvalues() - eh.eigenvalues()).cwiseAbs().maxCoeff());
  }
  report(10, "full-line folding spectra", worst <= 1e-10,
         "max_dev " + fmt(worst) + " tol 1e-10", t.secs(), 5);
}

// 11. Rank scan: vacuous without hyperbolic channels; the engineered
//     decoupled well is flagged exactly at its embedded eigenvalue.
void criterion_11() {
  Timer t;
  bool pass = true;
  std::string detail;

  {  // fully elliptic configurations scan clean
    CMatrix a1 = CMatrix::Zero(1, 1);
    OperatorModel m1 = build_model(a1, {});
    PotentialSample s1 = sample_potential(m1, 0, 80);
    GapEstimate g1 = spectral_gap(m1, -0.5, 0.5);
    std::vector<double> lams1;
    for (int j = 0; j <= 20; ++j) lams1.push_back(-0.5 + 0.05 * j);
    RankScan scan1 = scan_matching_rank(m1, s1, g1, lams1, 0, 60);
    pass = pass && scan1.deficient_lambdas.empty();

    CMatrix a2 = CMatrix::Zero(2, 2);
    a2(1, 1) = 0.5;
    PotentialSpec spec;
    spec.kind = PotentialKind::DiagonalIid;
    spec.decay = {0.01, 1.5};
    OperatorModel m2 = build_model(a2, spec);
    PotentialSample s2 = sample_potential(m2, 5, 80);
    GapEstimate g2 = spectral_gap(m2, -0.9, 0.9);
    std::vector<double> lams2;
    for (int j = 0; j <= 20; ++j) lams2.push_back(-0.9 + 0.09 * j);
    RankScan scan2 = scan_matching_rank(m2, s2, g2, lams2, 0, 60);
    pass = pass && scan2.deficient_lambdas.empty();
    detail += std::string("elliptic_clean ") +
              (scan1.deficient_lambdas.empty() && scan2.deficient_lambdas.empty() ? "yes"
                                                                                  : "no");
  }

  {  // decoupled two-strip well: site-0 potential diag(0,-3) on alpha=[-5,0]
     // plants the second strip's bound state at -10/3 inside the first
     // strip's band
    const double estar = -10.0 / 3.0;
    PotentialSpec pot;
    pot.kind = PotentialKind::UserSequence;
    pot.user_matrices.assign(80, CMatrix::Zero(2, 2));
    pot.user_matrices[0] = CMatrix::Zero(2, 2);
    pot.user_matrices[0](1, 1) = -3.0;
    CMatrix a = CMatrix::Zero(2, 2);
    a(0, 0) = -5.0;
    OperatorModel model = build_model(a, pot);
    PotentialSample sample = sample_potential(model, 0, 80);
    GapEstimate gap = spectral_gap(model, estar - 0.3, estar + 0.2);

    const int pts = 101;
    std::vector<double> grid(pts);
    for (int j = 0; j < pts; ++j) grid[j] = estar - 0.3 + 0.5 * j / (pts - 1);
    grid[60] = estar;  // force the exact double onto the grid
    RankScan scan = scan_matching_rank(model, sample, gap, grid, 1, 60);

    // independent eigensolve of the dense truncation, restricted to the window
    CMatrix h = restriction(model, sample, 0, 79);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    double e_embedded = 0, best = 1e300;
    for (int j = 0; j < es.eigenvalues().size(); ++j) {
      double e = es.eigenvalues()(j);
      if (e > estar - 0.3 && e < estar + 0.2 && std::abs(e - estar) < best) {
        best = std::abs(e - estar);
        e_embedded = e;
      }
    }
    double step = 0.5 / (pts - 1);
    double nearest = 1e300;
    for (double v : scan.deficient_lambdas)
      nearest = std::min(nearest, std::abs(v - e_embedded));
    pass = pass && !scan.deficient_lambdas.empty() && nearest <= step;
    detail += ", embedded_hit " + fmt(nearest) + " tol " + fmt(step);
  }
  report(11, "rank scan deficiencies", pass, detail, t.secs(), 60);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criteria_4_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  std::printf("acceptance: %d/11 PASS\n", 11 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
