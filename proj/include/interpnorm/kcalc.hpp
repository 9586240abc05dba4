#pragma once

// Decreasing rearrangements and K-functional profiles for the couple
// (L1, Linf) on a probability measure space; profiles are constant for t >= 1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "interpnorm/common.hpp"
#include "interpnorm/svfun.hpp"

namespace interpnorm::kcalc {

using svfun::PosFn;

class FunctionSample {
 public:
  enum class Form { closure, piecewise_constant };

  static FunctionSample piecewise(std::vector<double> breaks, std::vector<double> values) {
    if (breaks.size() != values.size() + 1)
      fail(ErrorCode::parse_error, "piecewise function needs n+1 breakpoints for n values");
    for (size_t i = 0; i + 1 < breaks.size(); ++i)
      if (!(breaks[i] < breaks[i + 1]))
        fail(ErrorCode::parse_error, "breakpoints must be strictly increasing");
    if (breaks.front() < 0.0 || breaks.back() > 1.0 + 1e-12)
      fail(ErrorCode::parse_error, "breakpoints must lie within [0,1]");
    FunctionSample f;
    f.form_ = Form::piecewise_constant;
    // normalize to a partition of [0,1]
    if (breaks.front() > 0.0) {
      breaks.insert(breaks.begin(), 0.0);
      values.insert(values.begin(), 0.0);
    }
    if (breaks.back() < 1.0) {
      breaks.push_back(1.0);
      values.push_back(0.0);
    }
    f.breaks_ = std::move(breaks);
    f.values_ = std::move(values);
    f.nonnegative_ = std::all_of(f.values_.begin(), f.values_.end(),
                                 [](double v) { return v >= 0.0; });
    return f;
  }

  static FunctionSample closure(std::function<double(double)> f) {
    FunctionSample s;
    s.form_ = Form::closure;
    s.closure_ = std::move(f);
    s.nonnegative_ = true;  // verified when sampled
    return s;
  }

  static FunctionSample zero() { return piecewise({0.0, 1.0}, {0.0}); }
  static FunctionSample constant(double c) { return piecewise({0.0, 1.0}, {c}); }
  static FunctionSample indicator(double a, double b) {
    if (!(0.0 <= a && a < b && b <= 1.0))
      fail(ErrorCode::parse_error, "indicator needs 0 <= a < b <= 1");
    return piecewise({a, b}, {1.0});  // normalization pads the ends
  }

  Form form() const { return form_; }
  bool nonnegative() const { return nonnegative_; }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double x) const {
    if (form_ == Form::closure) return closure_(x);
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    size_t i = size_t(it - breaks_.begin());
    if (i == 0) return values_.front();
    if (i >= breaks_.size()) return values_.back();
    return values_[i - 1];
  }

 private:
  Form form_ = Form::piecewise_constant;
  std::vector<double> breaks_{0.0, 1.0};
  std::vector<double> values_{0.0};
  std::function<double(double)> closure_;
  bool nonnegative_ = true;
};

// distribution function mu_f(lambda) = |{ f > lambda }| for piecewise samples
inline double distribution_function(const FunctionSample& f, double lambda) {
  if (f.form() != FunctionSample::Form::piecewise_constant)
    fail(ErrorCode::not_admissible, "distribution function needs a piecewise sample");
  double m = 0.0;
  for (size_t i = 0; i < f.values().size(); ++i)
    if (f.values()[i] > lambda) m += f.breaks()[i + 1] - f.breaks()[i];
  return m;
}

inline constexpr int kClosureTabulation = 1 << 14;

// Nonincreasing rearrangement.  Exact for piecewise samples; closures go
// through a fixed tabulation whose sorted values are monotone by construction.
inline FunctionSample rearrange(const FunctionSample& f) {
  if (f.form() == FunctionSample::Form::piecewise_constant) {
    if (!f.nonnegative()) fail(ErrorCode::not_nonnegative, "rearrange needs f >= 0");
    std::vector<std::pair<double, double>> seg;  // (value, length)
    for (size_t i = 0; i < f.values().size(); ++i)
      seg.emplace_back(f.values()[i], f.breaks()[i + 1] - f.breaks()[i]);
    std::sort(seg.begin(), seg.end(), [](auto& a, auto& b) { return a.first > b.first; });
    std::vector<double> breaks{0.0}, values;
    for (auto& [v, len] : seg) {
      values.push_back(v);
      breaks.push_back(std::min(1.0, breaks.back() + len));
    }
    breaks.back() = 1.0;
    return FunctionSample::piecewise(std::move(breaks), std::move(values));
  }
  const int n = kClosureTabulation;
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) {
    vals[i] = f((i + 0.5) / n);
    if (vals[i] < 0.0) fail(ErrorCode::not_nonnegative, "rearrange needs f >= 0");
  }
  std::sort(vals.begin(), vals.end(), std::greater<>());
  std::vector<double> breaks(n + 1);
  for (int i = 0; i <= n; ++i) breaks[i] = double(i) / n;
  return FunctionSample::piecewise(std::move(breaks), std::move(vals));
}

// f* as an evaluable weight (log t -> log f*(t)); zero beyond the support.
inline PosFn fstar_fn(const FunctionSample& fstar) {
  const auto breaks = fstar.breaks();
  const auto values = fstar.values();
  PosFn g(
      [breaks, values](double x) -> double {
        if (x >= 0.0) return values.empty() || x > 0.0 ? -kInf : std::log(values.back());
        const double t = std::exp(x);
        auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
        size_t i = size_t(it - breaks.begin());
        const double v = i == 0 ? values.front()
                                : (i >= breaks.size() ? 0.0 : values[i - 1]);
        return v > 0.0 ? std::log(v) : -kInf;
      },
      "fstar");
  for (size_t i = 1; i + 1 < breaks.size(); ++i)
    if (breaks[i] > 0.0) g.add_hint(std::log(breaks[i]));
  g.add_hint(0.0);
  return g;
}

// ---------------------------------------------------------------------------
// K-profiles

class KProfile {
 public:
  enum class Source { from_function, synthetic };

  KProfile() = default;
  KProfile(PosFn fn, Source src, std::string name)
      : fn_(std::move(fn)), source_(src), name_(std::move(name)) {}

  double log_at(double log_t) const { return fn_.log_at(log_t); }
  double operator()(double t) const { return fn_(t); }
  const PosFn& fn() const { return fn_; }
  Source source() const { return source_; }
  const std::string& name() const { return name_; }

 private:
  PosFn fn_ = PosFn([](double) { return -kInf; }, "K0");
  Source source_ = Source::synthetic;
  std::string name_ = "zero";
};

// K(t,f; L1,Linf) = integral_0^min(t,1) f*(s) ds, exact piecewise antiderivative.
inline KProfile k_functional(const FunctionSample& f) {
  const FunctionSample fs = rearrange(f);
  const std::vector<double> breaks = fs.breaks();
  const std::vector<double> values = fs.values();
  std::vector<double> cum(breaks.size(), 0.0);
  for (size_t i = 0; i + 1 < breaks.size(); ++i)
    cum[i + 1] = cum[i] + values[i] * (breaks[i + 1] - breaks[i]);
  const double total = cum.back();
  const double v0 = values.empty() ? 0.0 : values.front();

  PosFn fn(
      [breaks, values, cum, total, v0](double x) -> double {
        if (total <= 0.0) return -kInf;
        if (x >= 0.0) return std::log(total);
        const double lead = breaks[1];
        if (x <= std::log(lead)) {
          // K(t) = f*(0+) t on the first segment; stays exact for huge -x
          return v0 > 0.0 ? std::log(v0) + x : -kInf;
        }
        const double t = std::exp(x);
        auto it = std::upper_bound(breaks.begin(), breaks.end(), t);
        size_t i = size_t(it - breaks.begin()) - 1;
        if (i >= values.size()) return std::log(total);
        const double K = cum[i] + values[i] * (t - breaks[i]);
        return K > 0.0 ? std::log(K) : -kInf;
      },
      "K[" + std::to_string(values.size()) + "seg]");
  for (size_t i = 1; i < breaks.size(); ++i)
    if (breaks[i] > 0.0 && breaks[i] <= 1.0) fn.add_hint(std::log(breaks[i]));
  return KProfile(std::move(fn), KProfile::Source::from_function, "K");
}

// quasi-concavity probe: K >= 0, nondecreasing, K(t)/t nonincreasing
inline bool kprofile_invariants_ok(const PosFn& K, double rel_tol = 1e-9) {
  double prev = -kInf, prev_over_t = kInf;
  for (double x = -40.0; x <= 40.0 + 1e-9; x += 0.125) {
    const double lk = K.log_at(x);
    if (std::isnan(lk)) return false;
    if (lk != -kInf) {
      if (lk < prev - rel_tol) return false;
      const double over_t = lk - x;
      if (over_t > prev_over_t + rel_tol) return false;
      prev = std::max(prev, lk);
      prev_over_t = std::min(prev_over_t, over_t);
    }
  }
  return true;
}

struct SyntheticSpec {
  enum class Family { min1t, power, random_concave } family = Family::min1t;
  double sigma = 0.5, gamma = 0.0;  // power family: t^sigma ell^gamma, clipped
  int knots = 20;
  std::uint64_t seed = 7;
};

inline KProfile synthetic_kprofile(const SyntheticSpec& spec) {
  using Family = SyntheticSpec::Family;
  switch (spec.family) {
    case Family::min1t: {
      PosFn fn([](double x) { return std::min(0.0, x); }, "min1t");
      fn.add_hint(0.0);
      return KProfile(std::move(fn), KProfile::Source::synthetic, "min1t");
    }
    case Family::power: {
      if (spec.sigma < 0.0 || spec.sigma > 1.0)
        fail(ErrorCode::not_quasiconcave, "power profile needs sigma in [0,1]");
      // tabulate log K over a log grid and clamp slopes into [0,1]
      const double lo = -60.0, hi = 60.0, h = 1.0 / 16.0;
      std::vector<double> xs, ys;
      for (double x = lo; x <= hi + 1e-9; x += h) {
        xs.push_back(x);
        ys.push_back(spec.sigma * x + spec.gamma * svfun::log_ell(x));
      }
      for (size_t i = 1; i < ys.size(); ++i) {
        const double dx = xs[i] - xs[i - 1];
        ys[i] = std::min(ys[i - 1] + dx, std::max(ys[i - 1], ys[i]));
      }
      PosFn fn(
          [xs, ys](double x) -> double {
            if (x <= xs.front()) return ys.front() + (x - xs.front());  // slope 1 at 0
            if (x >= xs.back()) return ys.back();                       // flat at inf
            size_t i = size_t((x - xs.front()) / (xs[1] - xs[0]));
            i = std::min(i, xs.size() - 2);
            const double s = (x - xs[i]) / (xs[i + 1] - xs[i]);
            return ys[i] * (1.0 - s) + ys[i + 1] * s;
          },
          "powerK");
      if (!kprofile_invariants_ok(fn))
        fail(ErrorCode::not_quasiconcave, "power profile failed the invariant check");
      return KProfile(std::move(fn), KProfile::Source::synthetic, "power");
    }
    case Family::random_concave: {
      Rng rng(spec.seed);
      std::vector<double> breaks{0.0};
      for (int i = 0; i < spec.knots; ++i) breaks.push_back(rng.uniform(0.01, 1.0));
      std::sort(breaks.begin(), breaks.end());
      breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
      if (breaks.back() < 1.0) breaks.push_back(1.0);
      std::vector<double> values(breaks.size() - 1);
      for (auto& v : values) v = rng.uniform(0.05, 2.0);
      std::sort(values.begin(), values.end(), std::greater<>());
      KProfile k = k_functional(FunctionSample::piecewise(breaks, values));
      return KProfile(k.fn(), KProfile::Source::synthetic, "random_concave");
    }
  }
  fail(ErrorCode::parse_error, "unknown synthetic profile family");
}

// ---------------------------------------------------------------------------
// plain-text piecewise format: lines of "breakpoint value"

inline FunctionSample parse_piecewise_text(std::istream& in) {
  std::vector<double> breaks, values;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    double b, v;
    if (!(ls >> b)) continue;  // blank line
    if (!(ls >> v)) fail(ErrorCode::parse_error, "piecewise line needs 'breakpoint value'");
    breaks.push_back(b);
    values.push_back(v);
  }
  if (breaks.empty()) return FunctionSample::zero();
  breaks.push_back(1.0);
  if (breaks[breaks.size() - 2] >= 1.0) {
    breaks.pop_back();
    values.pop_back();
  }
  return FunctionSample::piecewise(std::move(breaks), std::move(values));
}

inline std::string format_piecewise_text(const FunctionSample& f) {
  std::ostringstream out;
  char buf[64];
  for (size_t i = 0; i < f.values().size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g %.12g\n", f.breaks()[i], f.values()[i]);
    out << buf;
  }
  return out.str();
}

}  // namespace interpnorm::kcalc
