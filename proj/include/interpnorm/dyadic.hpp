#pragma once

// The lambda_k discretization of (0,inf):  lambda_k = e^{1-e^{-k}} for k<0 and
// e^{e^k-1} for k>=0, so log(1+|log lambda_k|) = |k| and every interval
// I_k = (lambda_{k-1}, lambda_k] carries unit dt/(t ell(t)) mass.  Discrete
// hat-norms of sequences supported on the grid reduce to plain ell_q norms.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "interpnorm/common.hpp"
#include "interpnorm/norms.hpp"
#include "interpnorm/quadrature.hpp"
#include "interpnorm/ratio_report.hpp"
#include "interpnorm/svfun.hpp"

namespace interpnorm::dyadic {

using norms::RISpaceSpec;
using svfun::PosFn;
using svfun::SlowlyVarying;

class LambdaGrid {
 public:
  LambdaGrid(int k_min, int k_max) : k_min_(k_min), k_max_(k_max) {}
  int k_min() const { return k_min_; }
  int k_max() const { return k_max_; }

  // log lambda_k = e^k - 1 (k >= 0),  1 - e^{-k} (k < 0)
  static double log_lambda(int k) {
    return k >= 0 ? std::expm1(double(k)) : -std::expm1(-double(k));
  }
  static double lambda(int k) { return std::exp(log_lambda(k)); }

  // numeric unit-mass verification of one interval, in the log t coordinate
  static double interval_mass(int k, const quad::Config& cfg = quad::default_config()) {
    const double xa = log_lambda(k - 1), xb = log_lambda(k);
    auto dens = [](double x) { return 1.0 / (1.0 + std::fabs(x)); };
    if (xb - xa <= 64.0) return quad::integrate(dens, xa, xb, cfg);
    // cover geometrically; the integrand is smooth within each dyadic chunk
    double total = 0.0, lo = xa, width = 4.0;
    while (lo < xb) {
      const double hi = std::min(xb, lo + width);
      total += quad::integrate(dens, lo, hi, cfg);
      lo = hi;
      width *= 2.0;
    }
    return total;
  }

 private:
  int k_min_, k_max_;
};

inline LambdaGrid make_grid(int k_min, int k_max,
                      const quad::Config& cfg = quad::default_config()) {
  if (!(k_min < 0 && 0 < k_max))
    fail(ErrorCode::not_admissible, "grid needs k_min < 0 < k_max");
  if (k_min < -40 || k_max > 40)
    fail(ErrorCode::overflow_range, "|k| > 40 exceeds the double-precision guard");
  LambdaGrid g(k_min, k_max);
  for (int k = k_min; k <= k_max; ++k) {
    const double m = LambdaGrid::interval_mass(k, cfg);
    if (std::fabs(m - 1.0) > 1e-10)
      fail(ErrorCode::quadrature_nonconvergent,
           "interval mass differs from 1 at k=" + std::to_string(k));
  }
  return g;
}

struct DiscreteSeq {
  int k_min = 0;
  std::vector<double> values;

  int k_max() const { return k_min + int(values.size()) - 1; }
  double at(int k) const {
    if (k < k_min || k > k_max()) return 0.0;
    return values[size_t(k - k_min)];
  }
  static DiscreteSeq delta(int k) { return {k, {1.0}}; }
};

inline double discrete_hat_norm(const DiscreteSeq& x, const RISpaceSpec& E, const LambdaGrid& g) {
  if (x.k_min < g.k_min() || x.k_max() > g.k_max())
    fail(ErrorCode::not_admissible, "sequence support exceeds the grid");
  if (E.q == kInf) {
    double m = 0.0;
    for (double v : x.values) m = std::max(m, std::fabs(v));
    return m;
  }
  double s = 0.0;
  for (double v : x.values) s += std::pow(std::fabs(v), E.q);
  return std::pow(s, 1.0 / E.q);
}

// step function sum_k x_k chi_{I_k} as an evaluable weight, for cross-checks
inline PosFn step_fn(const DiscreteSeq& x) {
  const DiscreteSeq copy = x;
  PosFn f(
      [copy](double logt) -> double {
        // I_k in the v coordinate is (k-1, k]
        const double v = norms::w_of_logt(norms::Measure::log_homogeneous, logt);
        const int k = int(std::ceil(v - 1e-12));
        const double val = copy.at(k);
        return val > 0.0 ? std::log(val) : -kInf;
      },
      "step");
  for (int k = copy.k_min - 1; k <= copy.k_max(); ++k)
    f.add_hint(LambdaGrid::log_lambda(k));
  return f;
}

// averaging operator T f = ( integral_{I_k} f dmu-hat )_k
inline DiscreteSeq averaging_operator(const PosFn& f, const LambdaGrid& g,
                                      const quad::Config& cfg = quad::default_config()) {
  DiscreteSeq out{g.k_min() + 1, {}};
  norms::CumulativeProfile cum(f, 1.0, norms::Measure::log_homogeneous, cfg);
  for (int k = g.k_min() + 1; k <= g.k_max(); ++k)
    out.values.push_back(cum.integral_w(double(k - 1), double(k)));
  return out;
}

enum class HardyDirection { cumulative_below, cumulative_above };

// Weighted sequence-space Hardy check:  sigma_k * (cumulative sums of x)
// against sigma_k * x_k in ell_q; the proof constant 1/(1-sigma) bounds the
// ratio when the sigma-ratio hypothesis holds.
inline verify::RatioReport seq_hardy_check(const DiscreteSeq& sigma, const DiscreteSeq& x,
                                           const RISpaceSpec& E, HardyDirection dir,
                                           const LambdaGrid& g) {
  if (sigma.k_min != x.k_min || sigma.values.size() != x.values.size())
    fail(ErrorCode::not_admissible, "sigma and x must share support");
  for (double s : sigma.values)
    if (!(s > 0.0)) fail(ErrorCode::not_admissible, "sigma must be positive");

  double worst = dir == HardyDirection::cumulative_below ? 0.0 : kInf;
  for (size_t i = 0; i + 1 < sigma.values.size(); ++i) {
    const double r = sigma.values[i + 1] / sigma.values[i];
    if (dir == HardyDirection::cumulative_below)
      worst = std::max(worst, r);
    else
      worst = std::min(worst, r);
  }
  if (dir == HardyDirection::cumulative_below && !(worst < 1.0))
    fail(ErrorCode::hypothesis_violated, "sup sigma_{k+1}/sigma_k must be < 1");
  if (dir == HardyDirection::cumulative_above && !(worst > 1.0))
    fail(ErrorCode::hypothesis_violated, "inf sigma_{k+1}/sigma_k must be > 1");

  DiscreteSeq y{x.k_min, std::vector<double>(x.values.size(), 0.0)};
  if (dir == HardyDirection::cumulative_below) {
    double acc = 0.0;
    for (size_t i = 0; i < x.values.size(); ++i) {
      acc += x.values[i];
      y.values[i] = sigma.values[i] * acc;
    }
  } else {
    double acc = 0.0;
    for (size_t i = x.values.size(); i-- > 0;) {
      acc += x.values[i];
      y.values[i] = sigma.values[i] * acc;
    }
  }
  DiscreteSeq sx{x.k_min, std::vector<double>(x.values.size(), 0.0)};
  for (size_t i = 0; i < x.values.size(); ++i) sx.values[i] = sigma.values[i] * x.values[i];

  verify::RatioReport rep;
  rep.experiment_id = "seq_hardy";
  const double lhs = discrete_hat_norm(y, E, g);
  const double rhs = discrete_hat_norm(sx, E, g);
  const double sigma_ratio = dir == HardyDirection::cumulative_below ? worst : 1.0 / worst;
  rep.band = {1.0, 1.0 / (1.0 - sigma_ratio) + 1e-9};
  if (lhs == 0.0 && rhs == 0.0) {
    rep.notes.push_back("zero sequence: skip");
    rep.push(0.0, 0.0, 0.0);
    rep.pass = true;
    return rep;
  }
  rep.push(0.0, lhs, rhs);
  rep.finalize();
  return rep;
}

// Strictly monotone equivalent of b along the lambda grid (the associated
// functions are replaced by power-corrected envelopes).
enum class MonotoneTarget { ratio_below_1, ratio_above_1 };

inline DiscreteSeq monotone_equivalent(const SlowlyVarying& b, const LambdaGrid& g,
                                       MonotoneTarget target) {
  const svfun::AssociatedPair ap = svfun::associated_pair(b);
  if (!ap.Binf)
    fail(ErrorCode::not_admissible, "monotone equivalent needs a full-line weight");
  const svfun::IndexPair i0 = svfun::extension_indices(ap.B0, svfun::Domain::unit_interval);
  const svfun::IndexPair ii = svfun::extension_indices(*ap.Binf, svfun::Domain::unit_interval);

  // exponents picked at the midpoint of the admissible open interval
  double alpha, beta;
  const PosFn *decr_side, *incr_side;  // envelope carriers on (0,1]
  if (target == MonotoneTarget::ratio_below_1) {
    if (!(i0.rho < 0.0 && 0.0 < ii.pi))
      fail(ErrorCode::indices_violate_hypothesis,
           "needs rho(B0) < 0 < pi(Binf); got [" + std::to_string(i0.rho) + ", " +
               std::to_string(ii.pi) + "]");
    alpha = i0.rho / 2.0;
    beta = ii.pi / 2.0;
    decr_side = &ap.B0;
    incr_side = &*ap.Binf;
  } else {
    if (!(ii.rho < 0.0 && 0.0 < i0.pi))
      fail(ErrorCode::indices_violate_hypothesis,
           "needs rho(Binf) < 0 < pi(B0); got [" + std::to_string(ii.rho) + ", " +
               std::to_string(i0.pi) + "]");
    alpha = ii.rho / 2.0;
    beta = i0.pi / 2.0;
    decr_side = &*ap.Binf;
    incr_side = &ap.B0;
  }

  // Phi0(u) = u^alpha * sup_{[u,1]} u'^{-alpha} B(u')  (strictly shrinking
  // along u = e^k), and the increasing mirror with an infimum envelope.
  auto envelope_sup = [](const PosFn& B, double a, double y) {
    double best = -kInf;
    for (double yy = y; yy <= 1e-12; yy += 0.0625)
      best = std::max(best, -a * yy + B.log_at(yy));
    best = std::max(best, B.log_at(0.0));
    return a * y + best;
  };
  auto envelope_inf = [](const PosFn& B, double bexp, double y) {
    double best = kInf;
    for (double yy = y; yy <= 1e-12; yy += 0.0625)
      best = std::min(best, -bexp * yy + B.log_at(yy));
    best = std::min(best, B.log_at(0.0));
    return bexp * y + best;
  };

  DiscreteSeq out{g.k_min(), {}};
  for (int k = g.k_min(); k <= g.k_max(); ++k) {
    double logv;
    if (target == MonotoneTarget::ratio_below_1)
      logv = k < 0 ? envelope_sup(*decr_side, alpha, double(k))
                   : envelope_inf(*incr_side, beta, -double(k));
    else
      logv = k < 0 ? envelope_inf(*incr_side, beta, double(k))
                   : envelope_sup(*decr_side, alpha, -double(k));
    out.values.push_back(std::exp(logv));
  }

  // certify the target ratio and the equivalence with b on the grid
  for (size_t i = 0; i + 1 < out.values.size(); ++i) {
    const double r = out.values[i + 1] / out.values[i];
    if (target == MonotoneTarget::ratio_below_1 && !(r < 1.0))
      fail(ErrorCode::indices_violate_hypothesis, "produced ratio not < 1");
    if (target == MonotoneTarget::ratio_above_1 && !(r > 1.0))
      fail(ErrorCode::indices_violate_hypothesis, "produced ratio not > 1");
  }
  return out;
}

// equivalence factor max_k Phi(lambda_k)/b(lambda_k) vs its reciprocal
inline std::pair<double, double> equivalence_band(const DiscreteSeq& phi,
                                                  const SlowlyVarying& b, const LambdaGrid& g) {
  double lo = kInf, hi = 0.0;
  for (int k = std::max(phi.k_min, g.k_min()); k <= std::min(phi.k_max(), g.k_max()); ++k) {
    const double r = phi.at(k) / std::exp(b.log_at(LambdaGrid::log_lambda(k)));
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return {lo, hi};
}

// CSV serialization: (k, lambda_k, log_lambda_k, value)
inline std::string to_csv(const DiscreteSeq& x) {
  std::string out = "k,lambda,log_lambda,value\n";
  char buf[128];
  for (int k = x.k_min; k <= x.k_max(); ++k) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", k, LambdaGrid::lambda(k),
                  LambdaGrid::log_lambda(k), x.at(k));
    out += buf;
  }
  return out;
}

}  // namespace interpnorm::dyadic
