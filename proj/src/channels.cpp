#include "stripspec/channels.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <set>
#include <sstream>
#include <stdexcept>

#include "stripspec/errors.hpp"

namespace stripspec {

namespace {

// Elliptic momentum, principal branch: analytic for (alpha - z)/2 away from
// the real rays beyond +-1, real and in (0, pi) at real z inside the band.
cxd momentum(double alpha, cxd z) { return std::acos((alpha - z) / 2.0); }

// Hyperbolic multiplier: the root of g + 1/g = alpha - z with |g| > 1.
// The two roots multiply to 1 and can only swap magnitude where both are
// unimodular, which is the excluded parabolic set, so picking the larger
// root is a continuous (indeed analytic) choice on the working rectangle.
cxd multiplier(double alpha, cxd z) {
  cxd w = alpha - z;
  cxd s = std::sqrt(w * w - 4.0);
  cxd r = (w + s) / 2.0;
  if (std::abs(r) < 1.0) r = 1.0 / r;  // equals (w - s)/2, computed stably
  return r;
}

}  // namespace

BandStructure band_structure(const OperatorModel& model) {
  BandStructure bs;
  std::set<double> edges;
  double lo_max = -1e300, hi_min = 1e300;
  for (int j = 0; j < model.l; ++j) {
    double a = model.alpha(j);
    bs.bands.push_back({a - 2.0, a + 2.0});
    edges.insert(a - 2.0);
    edges.insert(a + 2.0);
    lo_max = std::max(lo_max, a - 2.0);
    hi_min = std::min(hi_min, a + 2.0);
  }

  // Merge open bands, then split the merged components at every band edge
  // that falls strictly inside.
  std::vector<Interval> sorted = bs.bands;
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  std::vector<Interval> merged;
  for (const auto& b : sorted) {
    if (!merged.empty() && b.lo < merged.back().hi) {
      merged.back().hi = std::max(merged.back().hi, b.hi);
    } else {
      merged.push_back(b);
    }
  }
  for (const auto& comp : merged) {
    std::vector<double> cuts = {comp.lo};
    for (double e : edges)
      if (comp.lo < e && e < comp.hi) cuts.push_back(e);
    cuts.push_back(comp.hi);
    for (size_t i = 0; i + 1 < cuts.size(); ++i) bs.sigma.push_back({cuts[i], cuts[i + 1]});
  }

  if (lo_max < hi_min) bs.sigma0 = Interval{lo_max, hi_min};
  return bs;
}

std::vector<ChannelType> classify_channels(const OperatorModel& model, double lambda,
                                           double tol) {
  std::vector<ChannelType> types(model.l);
  for (int j = 0; j < model.l; ++j) {
    double d = std::abs(model.alpha(j) - lambda);
    if (std::abs(d - 2.0) <= tol)
      types[j] = ChannelType::Parabolic;
    else
      types[j] = d < 2.0 ? ChannelType::Elliptic : ChannelType::Hyperbolic;
  }
  return types;
}

ChannelSplit channel_split(const OperatorModel& model, cxd z) {
  const int l = model.l;
  auto types = classify_channels(model, z.real());
  for (int j = 0; j < l; ++j) {
    if (types[j] == ChannelType::Parabolic) {
      std::ostringstream os;
      os << "Re z = " << z.real() << " is within " << kParabolicTol
         << " of a band edge of channel " << j;
      throw std::invalid_argument(os.str());
    }
  }

  ChannelSplit cs;
  cs.z = z;
  cs.l = l;
  for (int j = 0; j < l; ++j)
    if (types[j] == ChannelType::Elliptic) cs.perm.push_back(j);
  cs.l_e = static_cast<int>(cs.perm.size());
  for (int j = 0; j < l; ++j)
    if (types[j] == ChannelType::Hyperbolic) cs.perm.push_back(j);
  cs.l_h = l - cs.l_e;

  cs.k.resize(cs.l_e);
  cs.gamma_mult.resize(cs.l_h);
  for (int i = 0; i < cs.l_e; ++i) cs.k(i) = momentum(model.alpha(cs.perm[i]), z);
  for (int h = 0; h < cs.l_h; ++h)
    cs.gamma_mult(h) = multiplier(model.alpha(cs.perm[cs.l_e + h]), z);

  const int le = cs.l_e, lh = cs.l_h;
  CMatrix qp = CMatrix::Zero(2 * l, 2 * l);   // permuted-basis Q
  CMatrix qip = CMatrix::Zero(2 * l, 2 * l);  // its inverse
  cs.tdiag.resize(2 * l);

  for (int i = 0; i < le; ++i) {
    cxd ep = std::exp(cxd(0, 1) * cs.k(i));   // e^{ik}
    cxd em = 1.0 / ep;                        // e^{-ik}
    qp(i, i) = ep;
    qp(i, le + i) = em;
    qp(l + i, i) = 1.0;
    qp(l + i, le + i) = 1.0;
    cxd qk = 1.0 / (ep - em);
    qip(i, i) = qk;
    qip(i, l + i) = -em * qk;
    qip(le + i, i) = -qk;
    qip(le + i, l + i) = qk * ep;
    cs.tdiag(i) = ep;
    cs.tdiag(le + i) = em;
  }
  for (int h = 0; h < lh; ++h) {
    cxd g = cs.gamma_mult(h);
    cxd gi = 1.0 / g;
    int rt = le + h;           // top row slot of this channel
    int c1 = 2 * le + h;       // contracting column group
    int c2 = 2 * le + lh + h;  // expanding column group
    qp(rt, c1) = gi;
    qp(rt, c2) = g;
    qp(l + rt, c1) = 1.0;
    qp(l + rt, c2) = 1.0;
    cxd qg = 1.0 / (gi - g);
    qip(c1, rt) = qg;
    qip(c1, l + rt) = -g * qg;
    qip(c2, rt) = -qg;
    qip(c2, l + rt) = gi * qg;
    cs.tdiag(c1) = gi;
    cs.tdiag(c2) = g;
  }

  // Scatter from the permuted basis back to original channel coordinates:
  // permuted slot s (top) corresponds to original row perm[s].
  auto rowmap = [&](int s) { return s < l ? cs.perm[s] : l + cs.perm[s - l]; };
  cs.Q = CMatrix::Zero(2 * l, 2 * l);
  cs.Qinv = CMatrix::Zero(2 * l, 2 * l);
  for (int r = 0; r < 2 * l; ++r)
    for (int c = 0; c < 2 * l; ++c) {
      cs.Q(rowmap(r), c) = qp(r, c);
      cs.Qinv(r, rowmap(c)) = qip(r, c);
    }
  return cs;
}

ChannelSplit channel_split(const OperatorModel& model, cxd z, const GapEstimate& gap) {
  ChannelSplit cs = channel_split(model, z);
  cs.gap = gap.gamma;
  cs.height = gap.height;
  cs.CQ = gap.CQ;
  return cs;
}

namespace {

// Bound check over the lambda grid at a fixed set of heights.
bool bounds_hold(const OperatorModel& model, const std::vector<double>& grid,
                 double c, double gamma) {
  const double margin = std::exp(-gamma / 100.0);
  const double ell_cap = std::exp(gamma) * margin;
  const double hyp_cap = std::exp(-2.0 * gamma) * margin;
  const int eta_levels = 9;
  for (int e = 0; e < eta_levels; ++e) {
    double eta = -c + 2.0 * c * e / (eta_levels - 1);
    for (double lam : grid) {
      cxd z(lam, eta);
      for (int j = 0; j < model.l; ++j) {
        double d = std::abs(model.alpha(j) - lam);
        if (d < 2.0) {
          cxd k = momentum(model.alpha(j), z);
          if (std::exp(std::abs(k.imag())) > ell_cap) return false;
        } else {
          cxd g = multiplier(model.alpha(j), z);
          if (1.0 / std::abs(g) > hyp_cap) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

GapEstimate spectral_gap(const OperatorModel& model, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("spectral_gap needs a < b");
  const int points = 1001;  // step = (b-a)/1000 <= 1e-3 (b-a)
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = a + (b - a) * i / (points - 1);

  // channel types must be constant over the window and non-parabolic
  auto types0 = classify_channels(model, grid.front());
  for (double lam : grid) {
    auto t = classify_channels(model, lam);
    for (int j = 0; j < model.l; ++j) {
      if (t[j] == ChannelType::Parabolic) {
        std::ostringstream os;
        os << "[a,b] touches a band edge of channel " << j << " near lambda = " << lam;
        throw std::invalid_argument(os.str());
      }
      if (t[j] != types0[j])
        throw std::invalid_argument(
            "channel types are not constant over [a,b]; split the window at band edges");
    }
  }

  int l_h = 0;
  for (auto t : types0)
    if (t == ChannelType::Hyperbolic) ++l_h;

  // gamma cap from the real axis; 2% shrink provides the e^{-gamma/100}
  // margin at eta = 0 with room to spare.
  double gamma_cap = 1.0;  // conventional value when no hyperbolic channel constrains it
  if (l_h > 0) {
    double worst = 0.0;  // max of ||Gamma^{-1}||
    for (double lam : grid) {
      for (int j = 0; j < model.l; ++j) {
        if (std::abs(model.alpha(j) - lam) > 2.0) {
          double inv = 1.0 / std::abs(multiplier(model.alpha(j), cxd(lam, 0.0)));
          worst = std::max(worst, inv);
        }
      }
    }
    gamma_cap = -0.5 * std::log(worst);
  }
  double gamma = gamma_cap * 0.98;
  if (!(gamma > 0)) throw NumericalError("no positive gap on [a,b]");

  // largest feasible height by bisection
  const double c_min = 1e-6, c_max = 1.0;
  if (!bounds_hold(model, grid, c_min, gamma))
    throw NumericalError("no positive strip height sustains the gap bounds");
  double height;
  if (bounds_hold(model, grid, c_max, gamma)) {
    height = c_max;
  } else {
    double lo = c_min, hi = c_max;
    for (int it = 0; it < 40; ++it) {
      double mid = 0.5 * (lo + hi);
      (bounds_hold(model, grid, mid, gamma) ? lo : hi) = mid;
    }
    height = lo;
  }

  // CQ over the accepted grid
  double cq = 0.0;
  const int eta_levels = 9;
  for (int e = 0; e < eta_levels; ++e) {
    double eta = -height + 2.0 * height * e / (eta_levels - 1);
    for (double lam : grid) {
      ChannelSplit cs = channel_split(model, cxd(lam, eta));
      cq = std::max(cq, std::max(op_norm(cs.Q), op_norm(cs.Qinv)));
    }
  }

  GapEstimate g;
  g.gamma = gamma;
  g.height = height;
  g.CQ = 1.01 * cq;
  g.window = {a, b};
  return g;
}

}  // namespace stripspec
