#pragma once

// Interpolation-space norm functionals over a couple with K-profile K:
//   theta : || t^-theta b(t) K(t) ||_E~
//   R     : || b(t) || s^-theta a(s) K(s) ||_F~(t,T) ||_E
//   L     : || b(t) || s^-theta a(s) K(s) ||_F~(0,t) ||_E
//   RL    : || c(u) || b(t) ||...||_G~(t,u) ||_F~(0,u) ||_E^
//   LR    : || c(u) || b(t) ||...||_G~(u,t) ||_F~(u,T) ||_E^
// plus the grand/small Lebesgue norms over ([0,1], L1, Linf), where the
// kernel s^-theta a(s) K(s,f) specializes to s^{1/p} a(s) f*(s).
// T = 1 for ordered couples, T = inf on the full line.  Divergent norms are
// values (+inf), not errors; triviality is observable behavior.

#include <cmath>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "interpnorm/common.hpp"
#include "interpnorm/kcalc.hpp"
#include "interpnorm/norms.hpp"
#include "interpnorm/quadrature.hpp"
#include "interpnorm/svfun.hpp"

namespace interpnorm::spaces {

using kcalc::FunctionSample;
using kcalc::KProfile;
using norms::IntervalNorm;
using norms::Measure;
using norms::RISpaceSpec;
using svfun::PosFn;
using svfun::SlowlyVarying;

enum class Kind { theta, R, L, RL, LR, grand, small };
enum class IntervalMode { full_line, ordered_unit };

struct SpaceSpec {
  Kind kind = Kind::theta;
  double theta = 0.5;  // p in (1,inf) for grand/small
  double alpha = 1.0;  // grand/small only
  SlowlyVarying b, a, c;
  RISpaceSpec E, F, G;
  Measure outer = Measure::homogeneous;  // tilde or hat; RL/LR always hat
  IntervalMode mode = IntervalMode::full_line;

  double log_T() const { return mode == IntervalMode::ordered_unit ? 0.0 : kInf; }
};

struct NormValue {
  double value = 0.0;
  std::vector<std::pair<double, double>> breakdown;  // optional (t, inner profile)
};

// ---------------------------------------------------------------------------
// kernels

inline PosFn kernel_from_kprofile(const KProfile& K, double theta, const SlowlyVarying& a) {
  return svfun::mul(svfun::power_fn(-theta), svfun::mul(a.fn(), K.fn()));
}

// s^{1/p} a(s) f*(s), the (L1,Linf) kernel after the rearrangement reduction
inline PosFn kernel_lp(const FunctionSample& f, double p, const SlowlyVarying& a) {
  const FunctionSample fs = kcalc::rearrange(f);
  return svfun::mul(svfun::power_fn(1.0 / p), svfun::mul(a.fn(), kcalc::fstar_fn(fs)));
}

// ---------------------------------------------------------------------------
// shared nested layers

namespace detail {

// outer || w(t) ||_{E(lo,hi)} for an already-assembled log-integrand
inline double outer_norm(const PosFn& w, const RISpaceSpec& E, Measure mu, double log_lo,
                         double log_hi, const quad::Config& cfg) {
  norms::MeasuredInterval iv;
  iv.lo = log_lo == -kInf ? 0.0 : std::exp(log_lo);
  iv.hi = log_hi == kInf ? kInf : std::exp(log_hi);
  iv.measure = mu;
  return norms::weighted_norm(w, iv, E, cfg);
}

}  // namespace detail

// log of || b(t) ||g||_{inner(t,u)} ||_{F(0,u)}   (from_below = true), or
// log of || b(t) ||g||_{inner(u,t)} ||_{F(u,T)}   (from_below = false)
//
// Far outside the kernel's mass the inner norm saturates, so the open end of
// the middle integral factors into (saturated inner value) * (cumulative of
// b alone), which is walked once and cached.
class NestedMiddle {
 public:
  NestedMiddle(PosFn b, RISpaceSpec F, std::shared_ptr<IntervalNorm> inner, bool from_below,
               double log_T, quad::Config cfg)
      : b_(std::make_shared<PosFn>(std::move(b))),
        F_(F),
        inner_(std::move(inner)),
        from_below_(from_below),
        log_T_(log_T),
        cfg_(cfg.nested()) {
    const bool open_ended = from_below_ || log_T_ == kInf;
    if (open_ended) {
      if (F_.q == kInf)
        bsup_ = std::make_shared<norms::SupProfile>(*b_, Measure::homogeneous, cfg_);
      else
        bcum_ = std::make_shared<norms::CumulativeProfile>(*b_, F_.q, Measure::homogeneous,
                                                           cfg_);
    }
  }

  double log_at(double log_u) const {
    const double full = from_below_ ? inner_->log_norm_logt(-kInf, log_u)
                                    : inner_->log_norm_logt(log_u, log_T_);
    if (full == -kInf) return -kInf;  // kernel vanishes on the whole window
    if (full == kInf) return kInf;
    if (F_.q == kInf) return sup_side(log_u, full);
    return integral_side(log_u, full);
  }

  PosFn as_posfn(const std::string& label) const {
    auto self = *this;
    return PosFn([self](double x) { return self.log_at(x); }, label);
  }

 private:
  std::shared_ptr<PosFn> b_;
  RISpaceSpec F_;
  std::shared_ptr<IntervalNorm> inner_;
  bool from_below_;
  double log_T_;
  quad::Config cfg_;
  std::shared_ptr<norms::CumulativeProfile> bcum_;
  std::shared_ptr<norms::SupProfile> bsup_;

  double point_log(double x, double log_u) const {
    const double in =
        from_below_ ? inner_->log_norm_logt(x, log_u) : inner_->log_norm_logt(log_u, x);
    return b_->log_at(x) + in;
  }

  // frontier beyond which the inner norm agrees with its saturated value
  double frontier(double log_u, double full) const {
    if (from_below_) {
      double xs = std::min(log_u, -52.0);
      for (int i = 0; i < 40; ++i) {
        const double v = inner_->log_norm_logt(xs, log_u);
        if (std::fabs(v - full) <= 1e-12 * std::max(1.0, std::fabs(full))) return xs;
        xs -= 16.0;
      }
      return xs;
    }
    double xs = std::max(log_u, 52.0);
    for (int i = 0; i < 40; ++i) {
      const double v = inner_->log_norm_logt(log_u, xs);
      if (std::fabs(v - full) <= 1e-12 * std::max(1.0, std::fabs(full))) return xs;
      xs += 16.0;
    }
    return xs;
  }

  double integral_side(double log_u, double full) const {
    const double q = F_.q;
    auto integrand = [&](double x) { return std::exp(q * point_log(x, log_u)); };
    double I = 0.0;
    if (from_below_) {
      const double xs = frontier(log_u, full);
      if (xs < log_u) I += norms::integrate_w(integrand, xs, log_u, cfg_);
      I += std::exp(q * full) * bcum_->integral_w(-kInf, xs);
    } else if (log_T_ == kInf) {
      const double xs = frontier(log_u, full);
      if (log_u < xs) I += norms::integrate_w(integrand, log_u, xs, cfg_);
      I += std::exp(q * full) * bcum_->integral_w(xs, kInf);
    } else {
      I = norms::integrate_w(integrand, log_u, log_T_, cfg_);
    }
    if (I == 0.0) return -kInf;
    return std::log(I) / q;
  }

  double sup_side(double log_u, double full) const {
    double lo, hi, tail = -kInf;
    if (from_below_) {
      lo = frontier(log_u, full);
      hi = log_u;
      tail = bsup_->log_sup_w(-1e18, lo) + full;
    } else if (log_T_ == kInf) {
      lo = log_u;
      hi = frontier(log_u, full);
      tail = bsup_->log_sup_w(hi, 1e18) + full;
    } else {
      // finite window; the kernel carries no mass far below the core, so the
      // scan can be clamped there (the inner norm vanishes with it)
      lo = std::max(log_u, std::min(log_T_, -72.0));
      hi = log_T_;
    }
    double best = tail, best_x = lo;
    const double step = 0.25;
    const double span = hi - lo;
    const int n = span > 4096.0 ? 4096 : std::max(2, int(span / step));
    for (int i = 0; i <= n; ++i) {
      const double x = lo + span * double(i) / double(n);
      const double v = point_log(x, log_u);
      if (v > best) {
        best = v;
        best_x = x;
      }
    }
    const double a = std::max(lo, best_x - span / n), b2 = std::min(hi, best_x + span / n);
    if (std::isfinite(a) && std::isfinite(b2) && a < b2)
      best = std::max(best, quad::golden_max([&](double x) { return point_log(x, log_u); }, a,
                                             b2, cfg_.golden_iters));
    return best;
  }
};

// ---------------------------------------------------------------------------
// kernel-level norms

inline NormValue norm_theta_kernel(const PosFn& weighted_K /* t^-theta b K */,
                                   const SpaceSpec& spec, const quad::Config& cfg) {
  NormValue out;
  out.value = detail::outer_norm(weighted_K, spec.E, spec.outer, -kInf, spec.log_T(), cfg);
  return out;
}

inline NormValue norm_R_kernel(const PosFn& g, const SpaceSpec& spec, const quad::Config& cfg,
                               int breakdown_points = 0) {
  auto inner = std::make_shared<IntervalNorm>(g, spec.F, Measure::homogeneous, cfg);
  const double log_T = spec.log_T();
  PosFn w(
      [b = spec.b.fn(), inner, log_T](double x) {
        return b.log_at(x) + inner->log_norm_logt(x, log_T);
      },
      "R_outer");
  w.add_hints(spec.b.fn().hints()).add_hints(g.hints());
  NormValue out;
  out.value = detail::outer_norm(w, spec.E, spec.outer, -kInf, log_T, cfg);
  if (breakdown_points > 0) {
    for (int i = 0; i < breakdown_points; ++i) {
      const double x = -40.0 + (40.0 + (log_T == kInf ? 40.0 : log_T)) * i /
                                   double(breakdown_points - 1);
      out.breakdown.emplace_back(std::exp(x), std::exp(inner->log_norm_logt(x, log_T)));
    }
  }
  return out;
}

inline NormValue norm_L_kernel(const PosFn& g, const SpaceSpec& spec, const quad::Config& cfg,
                               int breakdown_points = 0) {
  auto inner = std::make_shared<IntervalNorm>(g, spec.F, Measure::homogeneous, cfg);
  const double log_T = spec.log_T();
  PosFn w(
      [b = spec.b.fn(), inner](double x) {
        return b.log_at(x) + inner->log_norm_logt(-kInf, x);
      },
      "L_outer");
  w.add_hints(spec.b.fn().hints()).add_hints(g.hints());
  NormValue out;
  out.value = detail::outer_norm(w, spec.E, spec.outer, -kInf, log_T, cfg);
  if (breakdown_points > 0) {
    for (int i = 0; i < breakdown_points; ++i) {
      const double x = -40.0 + (40.0 + (log_T == kInf ? 40.0 : log_T)) * i /
                                   double(breakdown_points - 1);
      out.breakdown.emplace_back(std::exp(x), std::exp(inner->log_norm_logt(-kInf, x)));
    }
  }
  return out;
}

inline NormValue norm_RL_kernel(const PosFn& g, const SpaceSpec& spec,
                                const quad::Config& cfg) {
  auto inner = std::make_shared<IntervalNorm>(g, spec.G, Measure::homogeneous, cfg);
  NestedMiddle mid(spec.b.fn(), spec.F, inner, /*from_below=*/true, spec.log_T(), cfg);
  PosFn w(
      [c = spec.c.fn(), mid](double x) { return c.log_at(x) + mid.log_at(x); }, "RL_outer");
  w.add_hints(spec.c.fn().hints()).add_hints(g.hints());
  NormValue out;
  out.value = detail::outer_norm(w, spec.E, Measure::log_homogeneous, -kInf, spec.log_T(),
                                 cfg.nested());
  return out;
}

inline NormValue norm_LR_kernel(const PosFn& g, const SpaceSpec& spec,
                                const quad::Config& cfg) {
  auto inner = std::make_shared<IntervalNorm>(g, spec.G, Measure::homogeneous, cfg);
  NestedMiddle mid(spec.b.fn(), spec.F, inner, /*from_below=*/false, spec.log_T(), cfg);
  PosFn w(
      [c = spec.c.fn(), mid](double x) { return c.log_at(x) + mid.log_at(x); }, "LR_outer");
  w.add_hints(spec.c.fn().hints()).add_hints(g.hints());
  NormValue out;
  out.value = detail::outer_norm(w, spec.E, Measure::log_homogeneous, -kInf, spec.log_T(),
                                 cfg.nested());
  return out;
}

// ---------------------------------------------------------------------------
// K-profile entry points

inline NormValue norm_theta(const KProfile& K, double theta, const SlowlyVarying& b,
                            const RISpaceSpec& E, Measure outer, IntervalMode mode,
                            const quad::Config& cfg = quad::default_config()) {
  if (!(theta >= 0.0 && theta <= 1.0))
    fail(ErrorCode::not_admissible, "theta must lie in [0,1]");
  SpaceSpec spec;
  spec.kind = Kind::theta;
  spec.theta = theta;
  spec.b = b;
  spec.E = E;
  spec.outer = outer;
  spec.mode = mode;
  const PosFn w = svfun::mul(svfun::power_fn(-theta), svfun::mul(b.fn(), K.fn()));
  return norm_theta_kernel(w, spec, cfg);
}

inline NormValue norm_R(const KProfile& K, const SpaceSpec& spec,
                        const quad::Config& cfg = quad::default_config()) {
  return norm_R_kernel(kernel_from_kprofile(K, spec.theta, spec.a), spec, cfg);
}

inline NormValue norm_L(const KProfile& K, const SpaceSpec& spec,
                        const quad::Config& cfg = quad::default_config()) {
  return norm_L_kernel(kernel_from_kprofile(K, spec.theta, spec.a), spec, cfg);
}

inline NormValue norm_RL(const KProfile& K, const SpaceSpec& spec,
                         const quad::Config& cfg = quad::default_config()) {
  return norm_RL_kernel(kernel_from_kprofile(K, spec.theta, spec.a), spec, cfg);
}

inline NormValue norm_LR(const KProfile& K, const SpaceSpec& spec,
                         const quad::Config& cfg = quad::default_config()) {
  return norm_LR_kernel(kernel_from_kprofile(K, spec.theta, spec.a), spec, cfg);
}

// ---------------------------------------------------------------------------
// grand and small Lebesgue spaces

inline SpaceSpec grand_spec(double p, double alpha,
                            IntervalMode mode = IntervalMode::ordered_unit) {
  if (!(p > 1.0 && std::isfinite(p)) || !(alpha > 0.0))
    fail(ErrorCode::not_admissible, "grand space needs 1<p<inf, alpha>0");
  SpaceSpec s;
  s.kind = Kind::R;
  s.theta = 1.0 - 1.0 / p;
  s.alpha = alpha;
  s.b = svfun::make_ell(-alpha / p);
  s.a = svfun::make_const(1.0);
  s.E = RISpaceSpec{kInf};
  s.F = RISpaceSpec{p};
  s.outer = Measure::homogeneous;
  s.mode = mode;
  return s;
}

inline SpaceSpec small_spec(double p, double alpha,
                            IntervalMode mode = IntervalMode::ordered_unit) {
  if (!(p > 1.0 && std::isfinite(p)) || !(alpha > 0.0))
    fail(ErrorCode::not_admissible, "small space needs 1<p<inf, alpha>0");
  const double pp = p / (p - 1.0);
  SpaceSpec s;
  s.kind = Kind::L;
  s.theta = 1.0 - 1.0 / p;
  s.alpha = alpha;
  s.b = svfun::make_ell(alpha / pp - 1.0);
  s.a = svfun::make_const(1.0);
  s.E = RISpaceSpec{1.0};
  s.F = RISpaceSpec{p};
  s.outer = Measure::homogeneous;
  s.mode = mode;
  return s;
}

// Direct evaluation of the grand/small norms from the rearrangement, with
// exact piecewise antiderivatives of (f*)^p; an independent code path from
// the generic nested machinery above.
struct GrandSmall {
  NormValue grand, small;
};

namespace detail {

struct StarPower {  // prefix integrals of (f*)^p over [0,1]
  std::vector<double> breaks, cum;
  double total = 0.0;

  StarPower(const FunctionSample& fstar, double p) {
    breaks = fstar.breaks();
    cum.assign(breaks.size(), 0.0);
    for (size_t i = 0; i + 1 < breaks.size(); ++i)
      cum[i + 1] =
          cum[i] + std::pow(fstar.values()[i], p) * (breaks[i + 1] - breaks[i]);
    total = cum.back();
  }

  double below(double t) const {  // integral_0^t (f*)^p
    if (t <= 0.0) return 0.0;
    if (t >= breaks.back()) return total;
    auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
    size_t i = size_t(it - breaks.begin()) - 1;
    const double seg = (cum[i + 1] - cum[i]) / (breaks[i + 1] - breaks[i]);
    return cum[i] + seg * (t - breaks[i]);
  }

  double above(double t) const { return total - below(t); }
};

}  // namespace detail

inline GrandSmall grand_small_norms(const FunctionSample& f, double p, double alpha,
                                    const quad::Config& cfg = quad::default_config()) {
  if (!(p > 1.0 && std::isfinite(p)) || !(alpha > 0.0))
    fail(ErrorCode::not_admissible, "grand/small norms need 1<p<inf, alpha>0");
  const double pp = p / (p - 1.0);
  const FunctionSample fs = kcalc::rearrange(f);
  const detail::StarPower S(fs, p);

  GrandSmall out;

  // grand: sup over t in (0,1) of ell^{-alpha/p}(t) (integral_t^1 f*^p)^{1/p}
  {
    auto val = [&](double x) {
      const double tail = S.above(std::exp(x));
      if (tail <= 0.0) return -kInf;
      return (-alpha / p) * svfun::log_ell(x) + std::log(tail) / p;
    };
    std::vector<double> xs{-60.0, 0.0};
    for (size_t i = 1; i + 1 < S.breaks.size(); ++i)
      if (S.breaks[i] > 0.0) xs.push_back(std::log(S.breaks[i]));
    std::sort(xs.begin(), xs.end());
    double best = -kInf;
    for (size_t j = 0; j + 1 < xs.size(); ++j) {
      const double a = xs[j], b = xs[j + 1];
      for (int i = 0; i <= 32; ++i) best = std::max(best, val(a + (b - a) * i / 32.0));
      best = std::max(best, quad::golden_max(val, a, b, cfg.golden_iters));
    }
    out.grand.value = std::exp(best);
  }

  // small: integral_0^1 ell^{alpha/p'-1}(t) (integral_0^t f*^p)^{1/p} dt/t
  {
    auto integrand = [&](double x) {
      const double head = S.below(std::exp(x));
      if (head <= 0.0) return 0.0;
      return std::exp((alpha / pp - 1.0) * svfun::log_ell(x) + std::log(head) / p);
    };
    double total = 0.0;
    std::vector<double> xs{0.0};
    for (size_t i = 1; i + 1 < S.breaks.size(); ++i)
      if (S.breaks[i] > 0.0) xs.push_back(std::log(S.breaks[i]));
    std::sort(xs.begin(), xs.end());
    for (size_t j = 0; j + 1 < xs.size(); ++j)
      total += quad::integrate(integrand, xs[j], xs[j + 1], cfg);
    total += quad::integrate_lower_tail(integrand, xs.front(), cfg);
    out.small.value = total;
  }
  return out;
}

// ---------------------------------------------------------------------------
// triviality conditions

struct Nontrivial {
  bool nontrivial = true;
  std::vector<std::string> reasons;  // failed conditions
};

namespace detail {

inline bool finite_norm(const PosFn& w, const RISpaceSpec& E, Measure mu, double lo, double hi,
                        const quad::Config& cfg) {
  norms::MeasuredInterval iv{lo, hi, mu};
  return std::isfinite(norms::weighted_norm(w, iv, E, cfg));
}

}  // namespace detail

inline Nontrivial check_nontrivial(const SpaceSpec& spec,
                                   const quad::Config& cfg = quad::default_config()) {
  Nontrivial out;
  auto require = [&](bool ok, const std::string& what) {
    if (!ok) {
      out.nontrivial = false;
      out.reasons.push_back(what);
    }
  };
  const bool ordered = spec.mode == IntervalMode::ordered_unit;
  const Measure tilde = Measure::homogeneous;
  const PosFn b = spec.b.fn(), a = spec.a.fn();
  const double th = spec.theta;

  switch (spec.kind) {
    case Kind::theta: {
      if (th > 0.0 && th < 1.0) break;
      if (th == 0.0 && !ordered)
        require(detail::finite_norm(b, spec.E, tilde, 1.0, kInf, cfg),
                "||b||_E~(1,inf) = inf with theta = 0");
      if (th == 1.0)
        require(detail::finite_norm(b, spec.E, tilde, 0.0, 1.0, cfg),
                "||b||_E~(0,1) = inf with theta = 1");
      break;
    }
    case Kind::R: {
      require(detail::finite_norm(b, spec.E, tilde, 0.0, 1.0, cfg), "||b||_E~(0,1) = inf");
      auto inner = std::make_shared<IntervalNorm>(a, spec.F, tilde, cfg);
      if (th == 0.0 && !ordered) {
        PosFn w([b, inner](double x) { return b.log_at(x) + inner->log_norm_logt(x, kInf); },
                "b*||a||(t,inf)");
        require(detail::finite_norm(w, spec.E, tilde, 1.0, kInf, cfg),
                "|| b ||a||_F~(t,inf) ||_E~(1,inf) = inf with theta = 0");
      }
      if (th == 1.0) {
        PosFn w([b, inner](double x) { return b.log_at(x) + inner->log_norm_logt(x, 0.0); },
                "b*||a||(t,1)");
        require(detail::finite_norm(w, spec.E, tilde, 0.0, 1.0, cfg),
                "|| b ||a||_F~(t,1) ||_E~(0,1) = inf with theta = 1");
        require(detail::finite_norm(svfun::mul(a, b), spec.E, tilde, 0.0, 1.0, cfg),
                "||ab||_E~(0,1) = inf with theta = 1");
        if (ordered)
          require(detail::finite_norm(a, spec.F, tilde, 0.0, 1.0, cfg),
                  "||a||_F~(0,1) = inf with theta = 1 (ordered couple)");
      }
      break;
    }
    case Kind::L: {
      if (!ordered)
        if (th > 0.0 && th < 1.0)
          require(detail::finite_norm(b, spec.E, tilde, 1.0, kInf, cfg),
                  "||b||_E~(1,inf) = inf");
      auto inner = std::make_shared<IntervalNorm>(a, spec.F, tilde, cfg);
      if (th == 0.0 && !ordered) {
        PosFn w([b, inner](double x) { return b.log_at(x) + inner->log_norm_logt(0.0, x); },
                "b*||a||(1,t)");
        require(detail::finite_norm(w, spec.E, tilde, 1.0, kInf, cfg),
                "|| b ||a||_F~(1,t) ||_E~(1,inf) = inf with theta = 0");
      }
      if (th == 1.0) {
        if (!ordered)
          require(detail::finite_norm(b, spec.E, tilde, 1.0, kInf, cfg),
                  "||b||_E~(1,inf) = inf with theta = 1");
        PosFn w([b, inner](double x) { return b.log_at(x) + inner->log_norm_logt(-kInf, x); },
                "b*||a||(0,t)");
        require(detail::finite_norm(w, spec.E, tilde, 0.0, 1.0, cfg),
                "|| b ||a||_F~(0,t) ||_E~(0,1) = inf with theta = 1");
        if (ordered)
          require(detail::finite_norm(a, spec.F, tilde, 0.0, 1.0, cfg),
                  "||a||_F~(0,1) = inf with theta = 1 (ordered couple)");
      }
      break;
    }
    case Kind::RL:
    case Kind::LR: {
      require(th > 0.0 && th < 1.0, "extreme constructions need 0 < theta < 1");
      require(detail::finite_norm(spec.c.fn(), spec.E, Measure::log_homogeneous, 0.0, 1.0, cfg),
              "||c||_E^(0,1) = inf");
      break;
    }
    case Kind::grand:
    case Kind::small: {
      require(spec.theta > 1.0 && std::isfinite(spec.theta), "grand/small need 1 < p < inf");
      require(spec.alpha > 0.0, "grand/small need alpha > 0");
      break;
    }
  }
  return out;
}

}  // namespace interpnorm::spaces
