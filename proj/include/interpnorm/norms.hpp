#pragma once

// Weighted-norm engine for the measures dt, dt/t and dt/(t*ell(t)) with
// E = L_q, 0 < q <= inf.
//
// Each measure gets a coordinate in which it becomes (essentially) Lebesgue:
//   dt/t          ->  x = log t
//   dt/(t ell(t)) ->  v = sign(log t) * log(1 + |log t|)
//   dt            ->  x = log t with density e^x
// All integrands are evaluated from log t, so intervals far outside double
// range (the hat coordinate reaches log t ~ -1e15) stay representable.

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "interpnorm/common.hpp"
#include "interpnorm/quadrature.hpp"
#include "interpnorm/svfun.hpp"

namespace interpnorm::norms {

using svfun::PosFn;
using svfun::SlowlyVarying;

enum class Measure { lebesgue, homogeneous, log_homogeneous };

struct MeasuredInterval {
  double lo = 0.0;  // 0 means "from 0"
  double hi = kInf;
  Measure measure = Measure::homogeneous;
};

enum class RIKind { lebesgue_q };

struct RISpaceSpec {
  double q = 2.0;  // exponent in (0, inf]
  RIKind kind = RIKind::lebesgue_q;
};

inline double fundamental_function(const RISpaceSpec& E, double lam) {
  if (!(lam > 0.0)) fail(ErrorCode::not_admissible, "fundamental function needs lambda > 0");
  if (E.q == kInf) return 1.0;
  return std::pow(lam, 1.0 / E.q);
}

inline double phi_E_index(const RISpaceSpec& E) { return E.q == kInf ? 0.0 : 1.0 / E.q; }

// ---------------------------------------------------------------------------
// coordinates

inline double w_of_logt(Measure m, double x) {
  if (m == Measure::log_homogeneous) {
    if (x == kInf || x == -kInf) return x;
    return x >= 0.0 ? std::log1p(x) : -std::log1p(-x);
  }
  return x;  // homogeneous and lebesgue use x = log t
}

inline double logt_of_w(Measure m, double w) {
  if (m == Measure::log_homogeneous) {
    if (w == kInf || w == -kInf) return w;
    return w >= 0.0 ? std::expm1(w) : -std::expm1(-w);
  }
  return w;
}

inline double log_density(Measure m, double w) {
  switch (m) {
    case Measure::homogeneous: return 0.0;
    case Measure::log_homogeneous: return 0.0;
    case Measure::lebesgue: return w;  // dt = e^x dx
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// one-shot integration in the w coordinate

namespace detail {

// Covers [a,b] by chunks whose width doubles away from the anchor; every
// chunk is integrated adaptively, none is skipped.
template <class F>
double cover_finite(const F& f, double a, double b, const quad::Config& cfg) {
  double total = 0.0, lo = a, width = 4.0;
  while (lo < b) {
    const double hi = std::min(b, lo + width);
    total += quad::integrate(f, lo, hi, cfg, std::fabs(total));
    lo = hi;
    width *= 2.0;
  }
  return total;
}

}  // namespace detail

// Integral over (wa, wb) in the w coordinate; either end may be infinite.
template <class F>
double integrate_w(const F& f, double wa, double wb, const quad::Config& cfg) {
  if (!(wa < wb)) return 0.0;
  if (wa == -kInf && wb == kInf)
    return quad::integrate_lower_tail(f, 0.0, cfg) + quad::integrate_upper_tail(f, 0.0, cfg);
  if (wa == -kInf) return quad::integrate_lower_tail(f, wb, cfg);
  if (wb == kInf) return quad::integrate_upper_tail(f, wa, cfg);
  if (wb - wa <= 64.0) return quad::integrate(f, wa, wb, cfg);
  const double mid = 0.5 * (wa + wb);
  return detail::cover_finite([&](double w) { return f(wa + wb - w); }, mid, wb, cfg) +
         detail::cover_finite(f, mid, wb, cfg);
}

// ||f||_{E(iv)} for E = L_q over the measured interval; returns +inf when the
// integral diverges (a value, not an error) and throws
// quadrature_nonconvergent when refinement fails to decide.
inline double weighted_norm(const PosFn& f, const MeasuredInterval& iv, const RISpaceSpec& E,
                            const quad::Config& cfg = quad::default_config()) {
  if (!(iv.lo >= 0.0) || !(iv.lo < iv.hi))
    fail(ErrorCode::not_admissible, "interval must satisfy 0 <= lo < hi");
  const double xa = iv.lo == 0.0 ? -kInf : std::log(iv.lo);
  const double xb = iv.hi == kInf ? kInf : std::log(iv.hi);
  const double wa = w_of_logt(iv.measure, xa);
  const double wb = w_of_logt(iv.measure, xb);

  if (E.q == kInf) {
    // sup over a log grid, golden refinement around the running argmax
    const double lo = std::max(wa, -1e18), hi = std::min(wb, 1e18);
    const double step = std::log(10.0) / cfg.sup_per_decade;
    double best = -kInf, best_w = lo;
    auto logf_w = [&](double w) { return f.log_at(logt_of_w(iv.measure, w)); };
    auto consider = [&](double w) {
      const double v = logf_w(w);
      if (v > best) {
        best = v;
        best_w = w;
      }
    };
    // dense scan on the core, geometric probes into the tails
    const double core_lo = std::max(lo, -64.0), core_hi = std::min(hi, 64.0);
    if (core_lo < core_hi) {
      const int n = int((core_hi - core_lo) / step) + 1;
      for (int i = 0; i <= n; ++i) consider(std::min(core_hi, core_lo + i * step));
    }
    for (double w = 96.0; w < hi; w *= 1.5) consider(w);
    for (double w = -96.0; w > lo; w *= 1.5) consider(w);
    if (std::isfinite(wa)) consider(wa);
    if (std::isfinite(wb)) consider(wb);
    const double a = std::max(lo, best_w - 2 * step), b = std::min(hi, best_w + 2 * step);
    if (a < b) best = std::max(best, quad::golden_max(logf_w, a, b, cfg.golden_iters));
    return std::exp(best);
  }

  const double q = E.q;
  auto integrand = [&](double w) {
    const double lv = q * f.log_at(logt_of_w(iv.measure, w)) + log_density(iv.measure, w);
    return std::exp(lv);
  };
  // split at the integrand's kinks so jumps land on segment boundaries
  std::vector<double> cuts{wa};
  for (double h : f.hints()) {
    const double w = w_of_logt(iv.measure, h);
    if (w > wa && w < wb) cuts.push_back(w);
  }
  cuts.push_back(wb);
  std::sort(cuts.begin(), cuts.end());
  double I = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) I += integrate_w(integrand, cuts[i], cuts[i + 1], cfg);
  if (std::isnan(I)) fail(ErrorCode::quadrature_nonconvergent, "integral evaluated to NaN");
  return std::pow(I, 1.0 / q);
}

// ---------------------------------------------------------------------------
// cumulative profile: prefix-summed panels of  integral exp(q log f) dmu,
// extended lazily into either tail.  Lets every inner norm ||f||_{(a,b)} be a
// prefix difference, which is what collapses the nested-norm quadrature cost.
// Instances are built and used within a single experiment thread.

class CumulativeProfile {
 public:
  CumulativeProfile(PosFn f, double q, Measure mu,
                    quad::Config cfg = quad::default_config(), double core_step = 0.25,
                    double core_span = 48.0)
      : f_(std::move(f)), q_(q), mu_(mu), cfg_(cfg) {
    std::vector<double> e;
    for (double w = -core_span; w <= core_span + 1e-9; w += core_step) e.push_back(w);
    for (double h : f_.hints()) {
      const double w = w_of_logt(mu_, h);
      if (w > -core_span && w < core_span) e.push_back(w);
    }
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end(),
                        [](double a, double b) { return std::fabs(a - b) < 1e-12; }),
            e.end());
    edges_ = std::move(e);
    prefix_.assign(edges_.size(), 0.0);
    for (size_t i = 1; i < edges_.size(); ++i)
      prefix_[i] = prefix_[i - 1] + panel(edges_[i - 1], edges_[i]);
  }

  // integral of exp(q log f) dmu over (wa, wb), in the w coordinate
  double integral_w(double wa, double wb) {
    if (!(wa < wb)) return 0.0;
    double extra = 0.0;
    auto direct = [this](double a, double b) {
      return integrate_w([this](double w) { return integrand(w); }, a, b, cfg_);
    };
    if (wa == -kInf) {
      extend_down(-kInf);
      if (lower_diverged_) return kInf;
      wa = edges_.front();
    } else {
      extend_down(wa);
      if (wa < edges_.front()) {
        // a divergence flag stops the walk; truncated mass is still finite
        if (lower_diverged_) extra += direct(wa, std::min(wb, edges_.front()));
        wa = edges_.front();
      }
    }
    if (wb == kInf) {
      extend_up(kInf);
      if (upper_diverged_) return kInf;
      wb = edges_.back();
    } else {
      extend_up(wb);
      if (wb > edges_.back()) {
        if (upper_diverged_) extra += direct(std::max(wa, edges_.back()), wb);
        wb = edges_.back();
      }
    }
    if (!(wa < wb)) return extra;
    const size_t ia = locate(wa), ib = locate(wb);
    if (ia == ib) return extra + partial(wa, wb);
    double s = prefix_[ib] - prefix_[ia + 1];
    s += partial(wa, edges_[ia + 1]);
    s += partial(edges_[ib], wb);
    return extra + s;
  }

  double integral_logt(double xa, double xb) {
    return integral_w(w_of_logt(mu_, xa), w_of_logt(mu_, xb));
  }

  double q_exponent() const { return q_; }

 private:
  PosFn f_;
  double q_;
  Measure mu_;
  quad::Config cfg_;
  std::vector<double> edges_;
  std::vector<double> prefix_;
  bool lower_saturated_ = false, lower_diverged_ = false;
  bool upper_saturated_ = false, upper_diverged_ = false;

  double integrand(double w) const {
    return std::exp(q_ * f_.log_at(logt_of_w(mu_, w)) + log_density(mu_, w));
  }

  double panel(double a, double b) const {
    if (!(a < b)) return 0.0;
    return quad::integrate([this](double w) { return integrand(w); }, a, b, cfg_,
                           std::fabs(prefix_.empty() ? 0.0 : prefix_.back()));
  }

  // sub-panel remainders: narrow panels take a single low-order rule
  double partial(double a, double b) const {
    if (!(a < b)) return 0.0;
    if (b - a <= 0.5) return quad::gl7([this](double w) { return integrand(w); }, a, b);
    return panel(a, b);
  }

  size_t locate(double w) const {
    auto it = std::upper_bound(edges_.begin(), edges_.end(), w);
    size_t i = size_t(it - edges_.begin());
    return i == 0 ? 0 : i - 1;
  }

  // shared walk bookkeeping for both tails; divergence requires growing
  // totals with non-decaying per-doubling masses (slowly convergent tails
  // grow early but their doubling masses shrink)
  struct TailWalk {
    double width = 4.0, covered = 0.0, next_mark = 8.0;
    double last_total = -1.0, last_mass = -1.0;
    int quiet = 0, growing = 0;
    bool saturated = false, diverged = false;

    void observe(double chunk, double total, const quad::Config& cfg, bool open_ended) {
      covered += width;
      if (std::fabs(chunk) <= cfg.tail_cut * std::max(std::fabs(total), 1e-300)) {
        if (++quiet >= cfg.tail_quiet && open_ended) saturated = true;
      } else
        quiet = 0;
      if (covered >= next_mark) {
        if (last_total >= 0.0) {
          const double mass = total - last_total;
          const bool grew =
              last_total > 0.0 && total >= last_total * (1.0 + cfg.diverge_growth);
          const bool mass_decaying = last_mass >= 0.0 && mass <= 0.85 * last_mass;
          if (grew && !mass_decaying)
            ++growing;
          else
            growing = 0;
          if (growing >= cfg.diverge_count) diverged = true;
          last_mass = mass;
        }
        last_total = total;
        next_mark *= 2.0;
      }
      width *= 2.0;
    }
  };

  void extend_down(double target) {
    if (lower_saturated_ || lower_diverged_) return;
    TailWalk walk;
    double total = prefix_.back() - prefix_.front();
    std::vector<double> new_edges, new_vals;
    double lo = edges_.front();
    const bool open = target == -kInf;
    while ((open || lo > target) && std::fabs(lo) < cfg_.tail_limit) {
      const double nlo = lo - walk.width;
      const double chunk = panel(nlo, lo);
      if (!std::isfinite(chunk)) {
        lower_diverged_ = true;
        break;
      }
      new_edges.push_back(nlo);
      new_vals.push_back(chunk);
      total += chunk;
      walk.observe(chunk, total, cfg_, open);
      if (walk.saturated || (open && walk.diverged)) break;
      lo = nlo;
    }
    lower_saturated_ = lower_saturated_ || walk.saturated;
    lower_diverged_ = lower_diverged_ || (open && walk.diverged);
    if (open && !lower_saturated_ && !lower_diverged_) {
      if (walk.quiet > 0)
        lower_saturated_ = true;  // contributions were already negligible
      else
        fail(ErrorCode::quadrature_nonconvergent, "lower tail did not stabilize");
    }
    if (!new_edges.empty()) {
      std::vector<double> e2(new_edges.rbegin(), new_edges.rend());
      e2.insert(e2.end(), edges_.begin(), edges_.end());
      std::vector<double> p2(e2.size(), 0.0);
      double run = 0.0;
      for (size_t i = 0; i + 1 < e2.size(); ++i) {
        double pv;
        if (i < new_vals.size())
          pv = new_vals[new_vals.size() - 1 - i];
        else
          pv = prefix_[i - new_vals.size() + 1] - prefix_[i - new_vals.size()];
        run += pv;
        p2[i + 1] = run;
      }
      edges_ = std::move(e2);
      prefix_ = std::move(p2);
    }
  }

  void extend_up(double target) {
    if (upper_saturated_ || upper_diverged_) return;
    TailWalk walk;
    double total = prefix_.back() - prefix_.front();
    double hi = edges_.back();
    const bool open = target == kInf;
    while ((open || hi < target) && std::fabs(hi) < cfg_.tail_limit) {
      const double nhi = hi + walk.width;
      const double chunk = panel(hi, nhi);
      if (!std::isfinite(chunk)) {
        upper_diverged_ = true;
        break;
      }
      edges_.push_back(nhi);
      prefix_.push_back(prefix_.back() + chunk);
      total += chunk;
      walk.observe(chunk, total, cfg_, open);
      if (walk.saturated || (open && walk.diverged)) break;
      hi = nhi;
    }
    upper_saturated_ = upper_saturated_ || walk.saturated;
    upper_diverged_ = upper_diverged_ || (open && walk.diverged);
    if (open && !upper_saturated_ && !upper_diverged_) {
      if (walk.quiet > 0)
        upper_saturated_ = true;
      else
        fail(ErrorCode::quadrature_nonconvergent, "upper tail did not stabilize");
    }
  }
};

// ---------------------------------------------------------------------------
// sup profile for q = inf inner norms: sampled log-values with running
// refinement around the best bracketing samples of each query.

class SupProfile {
 public:
  SupProfile(PosFn f, Measure mu, quad::Config cfg = quad::default_config(),
             double core_span = 48.0)
      : f_(std::move(f)), mu_(mu), cfg_(cfg) {
    const double step = std::log(10.0) / cfg_.sup_per_decade;
    for (double w = -core_span; w <= core_span + 1e-9; w += step) ws_.push_back(w);
    for (double h : f_.hints()) {
      const double w = w_of_logt(mu_, h);
      if (w > -core_span && w < core_span) {
        ws_.push_back(w - 1e-9);
        ws_.push_back(w + 1e-9);
      }
    }
    double lim = core_span * 2;
    while (lim < cfg_.tail_limit) {
      ws_.push_back(lim);
      ws_.push_back(-lim);
      lim *= 2.0;
    }
    std::sort(ws_.begin(), ws_.end());
    vals_.reserve(ws_.size());
    for (double w : ws_) vals_.push_back(logf_w(w));
  }

  double logf_w(double w) const { return f_.log_at(logt_of_w(mu_, w)); }

  // log of sup over (wa, wb)
  double log_sup_w(double wa, double wb) const {
    if (!(wa < wb)) return -kInf;
    auto lo = std::lower_bound(ws_.begin(), ws_.end(), wa);
    auto hi = std::upper_bound(ws_.begin(), ws_.end(), wb);
    double best = -kInf;
    size_t best_i = ws_.size();
    for (auto it = lo; it != hi; ++it) {
      const size_t i = size_t(it - ws_.begin());
      if (vals_[i] > best) {
        best = vals_[i];
        best_i = i;
      }
    }
    if (std::isfinite(wa)) best = std::max(best, logf_w(wa));
    if (std::isfinite(wb)) best = std::max(best, logf_w(wb));
    if (best_i < ws_.size()) {
      const double a = std::max(wa, best_i > 0 ? ws_[best_i - 1] : wa);
      const double b = std::min(wb, best_i + 1 < ws_.size() ? ws_[best_i + 1] : wb);
      if (std::isfinite(a) && std::isfinite(b) && a < b)
        best = std::max(best, quad::golden_max([this](double w) { return logf_w(w); }, a, b,
                                               cfg_.golden_iters));
    }
    return best;
  }

 private:
  PosFn f_;
  Measure mu_;
  quad::Config cfg_;
  std::vector<double> ws_;
  std::vector<double> vals_;
};

// ---------------------------------------------------------------------------
// IntervalNorm: repeated ||f||_{E(a,b)} queries against one fixed f.

class IntervalNorm {
 public:
  IntervalNorm(PosFn f, RISpaceSpec E, Measure mu,
               quad::Config cfg = quad::default_config())
      : E_(E), mu_(mu) {
    if (E.q == kInf)
      sup_ = std::make_shared<SupProfile>(std::move(f), mu, cfg);
    else
      cum_ = std::make_shared<CumulativeProfile>(std::move(f), E.q, mu, cfg);
  }

  // log of the norm over (e^{xa}, e^{xb});  xa=-inf / xb=+inf allowed
  double log_norm_logt(double xa, double xb) const {
    const double wa = w_of_logt(mu_, xa), wb = w_of_logt(mu_, xb);
    if (E_.q == kInf) return sup_->log_sup_w(wa, wb);
    const double I = cum_->integral_w(wa, wb);
    if (I == 0.0) return -kInf;
    return std::log(I) / E_.q;
  }

  double norm_logt(double xa, double xb) const { return std::exp(log_norm_logt(xa, xb)); }

 private:
  RISpaceSpec E_;
  Measure mu_;
  std::shared_ptr<CumulativeProfile> cum_;  // shared so PosFn wrappers stay cheap
  std::shared_ptr<SupProfile> sup_;
};

// u -> ||b||_{E~(0,u)} (side below) or ||b||_{E~(u,T)} (side above) as an
// evaluable weight; slowly varying whenever b is.
enum class Side { below, above };

inline PosFn norm_profile_fn(const PosFn& f, const RISpaceSpec& E, Side side,
                             double log_T = kInf, Measure mu = Measure::homogeneous,
                             const quad::Config& cfg = quad::default_config()) {
  auto in = std::make_shared<IntervalNorm>(f, E, mu, cfg);
  std::string lbl = "norm_profile[" + f.label() + "]";
  if (side == Side::below)
    return PosFn([in](double x) { return in->log_norm_logt(-kInf, x); }, lbl);
  return PosFn([in, log_T](double x) { return in->log_norm_logt(x, log_T); }, lbl);
}

// ---------------------------------------------------------------------------
// scaling pairs of the slow-variation norm estimates

struct ScalingPair {
  double lhs, rhs;
};

// lhs = ||s^alpha b(s)||_{E~(0,t)} for alpha>0, ||s^alpha b(s)||_{E~(t,inf)}
// for alpha<0; rhs = t^alpha b(t).
inline ScalingPair sv_norm_scaling(const SlowlyVarying& b, double alpha, const RISpaceSpec& E,
                                   double t, const quad::Config& cfg = quad::default_config()) {
  if (alpha == 0.0) fail(ErrorCode::not_admissible, "alpha must be nonzero");
  const PosFn g = svfun::mul(svfun::power_fn(alpha), b.fn());
  MeasuredInterval iv;
  iv.measure = Measure::homogeneous;
  if (alpha > 0.0) {
    iv.lo = 0.0;
    iv.hi = t;
  } else {
    iv.lo = t;
    iv.hi = kInf;
  }
  const double lhs = weighted_norm(g, iv, E, cfg);
  const double rhs = std::exp(alpha * std::log(t) + b.log_at(std::log(t)));
  return {lhs, rhs};
}

// the (t,2t) band variant, defined for every real alpha
inline ScalingPair sv_norm_scaling_band(const SlowlyVarying& b, double alpha,
                                        const RISpaceSpec& E, double t,
                                        const quad::Config& cfg = quad::default_config()) {
  const PosFn g = svfun::mul(svfun::power_fn(alpha), b.fn());
  MeasuredInterval iv{t, 2.0 * t, Measure::homogeneous};
  const double lhs = weighted_norm(g, iv, E, cfg);
  const double rhs = std::exp(alpha * std::log(t) + b.log_at(std::log(t)));
  return {lhs, rhs};
}

}  // namespace interpnorm::norms
