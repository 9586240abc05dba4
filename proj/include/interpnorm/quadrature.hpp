#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "interpnorm/common.hpp"

namespace interpnorm::quad {

// Numeric budgets used by every norm computation.  Defaults are the pinned
// values; experiment descriptors and the CLI config file may override them.
struct Config {
  double panel_rel_tol = 1e-8;
  double panel_abs_tol = 1e-8;
  int max_depth = 28;
  // infinite-tail policy: stop once a chunk is below tail_cut * running total
  // for tail_quiet consecutive chunks; declare divergence when the integral
  // grows by >= diverge_growth across diverge_count successive doublings.
  double tail_cut = 1e-14;
  int tail_quiet = 3;
  double diverge_growth = 0.01;
  int diverge_count = 3;
  double tail_limit = 1.0e18;  // furthest coordinate probed before giving up
  // sup-norm sampling density (points per decade) and refinement iterations
  int sup_per_decade = 64;
  int golden_iters = 80;
  // relaxed tolerances for the innermost layers of triple-nested norms
  double nested_rel_tol = 1e-7;
  double nested_tail_cut = 1e-12;

  Config nested() const {
    Config c = *this;
    c.panel_rel_tol = std::max(panel_rel_tol, nested_rel_tol);
    c.tail_cut = std::max(tail_cut, nested_tail_cut);
    return c;
  }
};

inline const Config& default_config() {
  static const Config cfg{};
  return cfg;
}

// 15-point Gauss-Legendre on [-1,1].
struct GL15 {
  static constexpr int n = 15;
  static constexpr double x[n] = {
      -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
      -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
      -0.2011940939974345, 0.0,                 0.2011940939974345,
      0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
      0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
  static constexpr double w[n] = {
      0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
      0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
      0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
      0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
      0.1071592204671719, 0.0703660474881081, 0.0307532419961173};
};

template <class F>
double gl15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < GL15::n; ++i) s += GL15::w[i] * f(c + h * GL15::x[i]);
  return s * h;
}

// 7-point Gauss-Legendre; enough for sub-panel remainders of narrow panels.
struct GL7 {
  static constexpr int n = 7;
  static constexpr double x[n] = {-0.9491079123427585, -0.7415311855993945,
                                  -0.4058451513773972, 0.0,
                                  0.4058451513773972,  0.7415311855993945,
                                  0.9491079123427585};
  static constexpr double w[n] = {0.1294849661688697, 0.2797053914892766,
                                  0.3818300505051189, 0.4179591836734694,
                                  0.3818300505051189, 0.2797053914892766,
                                  0.1294849661688697};
};

template <class F>
double gl7(const F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < GL7::n; ++i) s += GL7::w[i] * f(c + h * GL7::x[i]);
  return s * h;
}

namespace detail {
template <class F>
double adapt(const F& f, double a, double b, double whole, double tol, double noise_floor,
             int depth, const Config& cfg, bool* ok) {
  const double m = 0.5 * (a + b);
  const double left = gl15(f, a, m), right = gl15(f, m, b);
  const double sum = left + right;
  const double err = std::fabs(sum - whole);
  if (!std::isfinite(sum)) return sum;  // propagate inf
  if (err <= tol || err <= noise_floor || depth >= cfg.max_depth) {
    // a leaf at max depth contributes err to the total; only flag when that
    // alone already busts the top-level budget
    if (depth >= cfg.max_depth && err > std::max(tol * std::pow(2.0, depth), noise_floor))
      *ok = false;
    return sum;
  }
  return adapt(f, a, m, left, 0.5 * tol, noise_floor, depth + 1, cfg, ok) +
         adapt(f, m, b, right, 0.5 * tol, noise_floor, depth + 1, cfg, ok);
}
}  // namespace detail

// Adaptive integral of f over the finite interval [a,b].
template <class F>
double integrate(const F& f, double a, double b, const Config& cfg = default_config(),
                 double scale_hint = 0.0) {
  if (!(a < b)) return 0.0;
  bool ok = true;
  const double whole = gl15(f, a, b);
  const double tol =
      std::max(cfg.panel_abs_tol, cfg.panel_rel_tol * std::max(std::fabs(whole), scale_hint));
  // leaf refinement cannot beat roundoff of the running values
  const double noise_floor = 1e-14 * std::max(std::fabs(whole), scale_hint);
  double v = detail::adapt(f, a, b, whole, tol, noise_floor, 0, cfg, &ok);
  if (!ok)
    fail(ErrorCode::quadrature_nonconvergent,
         "adaptive quadrature failed to stabilize on [" + std::to_string(a) + ", " +
             std::to_string(b) + "], whole=" + std::to_string(whole));
  return v;
}

// Integral of f over [a, +inf) in a coordinate where chunks can be taken
// geometrically.  Divergence is declared when successive doublings of the
// truncation keep growing the total AND the mass added per doubling is not
// decaying; slowly convergent tails grow early but their doubling masses
// shrink geometrically.
template <class F>
double integrate_upper_tail(const F& f, double a, const Config& cfg = default_config()) {
  double total = 0.0;
  double lo = a, width = 1.0;
  int quiet = 0, growing = 0;
  double last_total = -1.0, last_mass = -1.0;
  double next_mark = 8.0;  // in accumulated width units
  double covered = 0.0;
  while (lo - a < cfg.tail_limit) {
    const double hi = lo + width;
    const double chunk = integrate(f, lo, hi, cfg, std::fabs(total));
    if (!std::isfinite(chunk)) return kInf;
    total += chunk;
    covered += width;
    if (std::fabs(chunk) <= cfg.tail_cut * std::max(std::fabs(total), 1e-300)) {
      if (++quiet >= cfg.tail_quiet) return total;
    } else {
      quiet = 0;
    }
    if (covered >= next_mark) {
      if (last_total >= 0.0) {
        const double mass = total - last_total;
        const bool grew = last_total > 0.0 && total >= last_total * (1.0 + cfg.diverge_growth);
        const bool mass_decaying = last_mass >= 0.0 && mass <= 0.85 * last_mass;
        if (grew && !mass_decaying)
          ++growing;
        else
          growing = 0;
        if (growing >= cfg.diverge_count) return kInf;
        last_mass = mass;
      }
      last_total = total;
      next_mark *= 2.0;
    }
    lo = hi;
    width = std::min(width * 2.0, 0.25 * std::max(lo - a, 4.0));
  }
  fail(ErrorCode::quadrature_nonconvergent, "tail refinement exhausted its budget");
}

template <class F>
double integrate_lower_tail(const F& f, double b, const Config& cfg = default_config()) {
  return integrate_upper_tail([&](double w) { return f(2.0 * b - w); }, b, cfg);
}

// Golden-section maximizer on [a,b] for a unimodal bump; used to polish the
// argmax found by grid sampling.
template <class F>
double golden_max(const F& f, double a, double b, int iters) {
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && b - a > 1e-13 * (1.0 + std::fabs(a) + std::fabs(b)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace interpnorm::quad
