#pragma once

// Algebra of positive functions on (0,inf) and of slowly varying weights.
//
// Every function is carried as an evaluable closure in log-log form:
// x = log t  ->  log f(t).  Working in log space keeps compositions exact and
// lets the quadrature engine probe arguments far beyond double range (the
// hat-measure coordinate reaches log t ~ -1e15).  Sampling happens only inside
// quadrature and index estimation, never in the representation itself.

#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "interpnorm/common.hpp"

namespace interpnorm::svfun {

using LogEval = std::function<double(double)>;  // log t -> log f(t)

struct IndexPair {
  double pi = 0.0;
  double rho = 0.0;
  enum class Method { analytic, numeric } method = Method::analytic;
  double uncertainty = 0.0;
};

// Positive function of t>0, optionally tagged with exact extension indices
// and with a pure-power marker (t^sigma), which composition rules exploit.
class PosFn {
 public:
  PosFn() : PosFn([](double) { return 0.0; }, "1") {}
  PosFn(LogEval f, std::string label) : log_(std::move(f)), label_(std::move(label)) {}

  double log_at(double log_t) const { return log_(log_t); }
  double at_log(double log_t) const { return std::exp(log_(log_t)); }
  double operator()(double t) const { return at_log(std::log(t)); }

  const std::optional<std::array<double, 2>>& exact_indices() const { return indices_; }
  bool is_power() const { return is_power_; }
  double power_exponent() const { return power_exp_; }
  const std::string& label() const { return label_; }

  PosFn& tag_indices(double pi, double rho) {
    indices_ = {pi, rho};
    return *this;
  }
  PosFn& tag_power(double sigma) {
    is_power_ = true;
    power_exp_ = sigma;
    indices_ = {sigma, sigma};
    return *this;
  }

  // kinks/jumps in log-t coordinates; quadrature panels split here
  const std::vector<double>& hints() const { return hints_; }
  PosFn& add_hint(double x) {
    if (hints_.size() < 64) hints_.push_back(x);
    return *this;
  }
  PosFn& add_hints(const std::vector<double>& xs) {
    for (double x : xs) add_hint(x);
    return *this;
  }

 private:
  LogEval log_;
  std::string label_;
  std::optional<std::array<double, 2>> indices_;
  std::vector<double> hints_;
  bool is_power_ = false;
  double power_exp_ = 0.0;
};

inline PosFn const_fn(double c) {
  if (!(c > 0.0)) fail(ErrorCode::not_admissible, "constant weight must be positive");
  const double lc = std::log(c);
  PosFn f([lc](double) { return lc; }, c == 1.0 ? "1" : "const");
  f.tag_indices(0.0, 0.0);
  return f;
}

inline PosFn power_fn(double sigma) {
  PosFn f([sigma](double x) { return sigma * x; }, "power");
  f.tag_power(sigma);
  return f;
}

// ell(t) = 1 + |log t|
inline double log_ell(double log_t) { return std::log1p(std::fabs(log_t)); }

inline PosFn ell_fn(double gamma = 1.0) {
  PosFn f([gamma](double x) { return gamma * log_ell(x); }, "ell");
  f.tag_indices(0.0, 0.0);
  f.add_hint(0.0);
  return f;
}

// Broken logarithm: ell^alpha on (0,1], ell^beta on (1,inf).
inline PosFn broken_log_fn(double alpha, double beta) {
  PosFn f([alpha, beta](double x) { return (x <= 0.0 ? alpha : beta) * log_ell(x); },
          "broken_log");
  f.tag_indices(0.0, 0.0);
  f.add_hint(0.0);
  return f;
}

inline PosFn mul(const PosFn& a, const PosFn& b) {
  PosFn r([a, b](double x) { return a.log_at(x) + b.log_at(x); },
          a.label() + "*" + b.label());
  r.add_hints(a.hints()).add_hints(b.hints());
  const auto& ia = a.exact_indices();
  const auto& ib = b.exact_indices();
  if (ia && ib) {
    // exact when each factor has coinciding indices; otherwise only bounds hold
    if ((*ia)[0] == (*ia)[1] && (*ib)[0] == (*ib)[1])
      r.tag_indices((*ia)[0] + (*ib)[0], (*ia)[1] + (*ib)[1]);
  }
  return r;
}

inline PosFn pow_fn(const PosFn& a, double rexp) {
  PosFn r([a, rexp](double x) { return rexp * a.log_at(x); }, a.label() + "^r");
  r.add_hints(a.hints());
  if (a.is_power()) {
    r.tag_power(rexp * a.power_exponent());
  } else if (const auto& ia = a.exact_indices()) {
    if (rexp >= 0.0)
      r.tag_indices(rexp * (*ia)[0], rexp * (*ia)[1]);
    else
      r.tag_indices(rexp * (*ia)[1], rexp * (*ia)[0]);
  }
  return r;
}

inline PosFn recip(const PosFn& a) { return pow_fn(a, -1.0); }

// f(g(t)) for positive g; in log space this is plain composition.
inline PosFn compose(const PosFn& f, const PosFn& g) {
  PosFn r([f, g](double x) { return f.log_at(g.log_at(x)); },
          f.label() + "o" + g.label());
  r.add_hints(g.hints());
  if (g.is_power() && g.power_exponent() > 0.0) {
    const double c = g.power_exponent();
    for (double h : f.hints()) r.add_hint(h / c);
    if (const auto& fi = f.exact_indices())
      r.tag_indices(c * (*fi)[0], c * (*fi)[1]);
  }
  return r;
}

inline PosFn argument_inverse(const PosFn& f) {  // t -> f(1/t)
  PosFn r([f](double x) { return f.log_at(-x); }, f.label() + "(1/t)");
  for (double h : f.hints()) r.add_hint(-h);
  if (const auto& fi = f.exact_indices()) r.tag_indices(-(*fi)[1], -(*fi)[0]);
  return r;
}

// ---------------------------------------------------------------------------
// monotonicity probes ("almost increasing" tested with constant C on a grid)

struct Probe {
  double lo = -40.0, hi = 40.0, step = 0.25;
  double C = 10.0;  // almost-monotone slack
};

inline bool almost_increasing(const PosFn& f, const Probe& p = {}) {
  double run_max = -kInf;
  for (double x = p.lo; x <= p.hi + 1e-12; x += p.step) {
    const double v = f.log_at(x);
    if (std::isnan(v)) return false;
    if (v < run_max - std::log(p.C)) return false;
    run_max = std::max(run_max, v);
  }
  return true;
}

inline bool almost_decreasing(const PosFn& f, const Probe& p = {}) {
  return almost_increasing(recip(f), p);
}

// ---------------------------------------------------------------------------
// slowly varying weights

enum class Domain { full_line, unit_interval };

class SlowlyVarying {
 public:
  SlowlyVarying() : SlowlyVarying(const_fn(1.0), Domain::full_line, true, {{0.0, 0.0}}) {}
  SlowlyVarying(PosFn f, Domain d, bool squares_ok,
                std::optional<std::array<double, 2>> log_exponents)
      : fn_(std::move(f)), dom_(d), squares_ok_(squares_ok), log_exps_(log_exponents) {}

  double log_at(double log_t) const { return fn_.log_at(log_t); }
  double at_log(double log_t) const { return fn_.at_log(log_t); }
  double operator()(double t) const { return fn_(t); }

  const PosFn& fn() const { return fn_; }
  Domain domain() const { return dom_; }
  bool squares_equivalent() const { return squares_ok_; }
  // exponents (alpha,beta) when b behaves as ell^alpha near 0 and ell^beta
  // near infinity up to factors of zero index
  const std::optional<std::array<double, 2>>& log_exponents() const { return log_exps_; }
  const std::string& label() const { return fn_.label(); }

 private:
  PosFn fn_;
  Domain dom_;
  bool squares_ok_;
  std::optional<std::array<double, 2>> log_exps_;
};

namespace detail {

inline void check_sv_property(const PosFn& f, Domain dom) {
  Probe p;
  if (dom == Domain::unit_interval) p.hi = 0.0;
  for (double x = p.lo; x <= p.hi + 1e-12; x += p.step)
    if (!std::isfinite(f.log_at(x)))
      fail(ErrorCode::not_admissible,
           "weight is zero or infinite at an interior point: " + f.label());
  for (double eps : {0.1, 0.5, 1.0}) {
    if (!almost_increasing(mul(power_fn(eps), f), p) ||
        !almost_decreasing(mul(power_fn(-eps), f), p))
      fail(ErrorCode::not_admissible, "not slowly varying: " + f.label());
  }
}

inline bool squares_equivalent_probe(const PosFn& f, Domain dom) {
  const double hi = dom == Domain::unit_interval ? 0.0 : 40.0;
  double worst = 0.0;
  for (double x = -40.0; x <= hi + 1e-12; x += 0.25)
    worst = std::max(worst, std::fabs(f.log_at(2.0 * x) - f.log_at(x)));
  return worst <= std::log(16.0);
}

}  // namespace detail

// Validating constructor for arbitrary expressions.
inline SlowlyVarying make_sv(PosFn f, Domain dom = Domain::full_line,
                             std::optional<std::array<double, 2>> log_exps = std::nullopt) {
  detail::check_sv_property(f, dom);
  const bool sq = detail::squares_equivalent_probe(f, dom);
  PosFn tagged = std::move(f);
  tagged.tag_indices(0.0, 0.0);
  return SlowlyVarying(std::move(tagged), dom, sq, log_exps);
}

inline SlowlyVarying make_broken_log(double alpha, double beta) {
  PosFn f = broken_log_fn(alpha, beta);
  return SlowlyVarying(std::move(f), Domain::full_line, true, {{alpha, beta}});
}

inline SlowlyVarying make_const(double c = 1.0) {
  return SlowlyVarying(const_fn(c), Domain::full_line, true, {{0.0, 0.0}});
}

inline SlowlyVarying make_ell(double gamma = 1.0) { return make_broken_log(gamma, gamma); }

inline SlowlyVarying sv_mul(const SlowlyVarying& a, const SlowlyVarying& b) {
  std::optional<std::array<double, 2>> exps;
  if (a.log_exponents() && b.log_exponents())
    exps = {{(*a.log_exponents())[0] + (*b.log_exponents())[0],
             (*a.log_exponents())[1] + (*b.log_exponents())[1]}};
  const Domain dom = (a.domain() == Domain::unit_interval || b.domain() == Domain::unit_interval)
                         ? Domain::unit_interval
                         : Domain::full_line;
  PosFn f = mul(a.fn(), b.fn());
  f.tag_indices(0.0, 0.0);
  return SlowlyVarying(std::move(f), dom, a.squares_equivalent() && b.squares_equivalent(), exps);
}

inline SlowlyVarying sv_pow(const SlowlyVarying& a, double r) {
  std::optional<std::array<double, 2>> exps;
  if (a.log_exponents()) exps = {{r * (*a.log_exponents())[0], r * (*a.log_exponents())[1]}};
  PosFn f = pow_fn(a.fn(), r);
  f.tag_indices(0.0, 0.0);
  return SlowlyVarying(std::move(f), a.domain(), a.squares_equivalent(), exps);
}

// b o mu for admissible monotone mu (mu and t/mu^delta almost increasing).
inline SlowlyVarying sv_compose(const SlowlyVarying& b, const PosFn& mu) {
  Probe p;
  if (!almost_increasing(mu, p))
    fail(ErrorCode::not_admissible, "composition argument must be almost increasing");
  bool ratio_ok = false;
  for (double delta : {1.0, 0.5, 0.25, 2.0})
    if (almost_increasing(mul(power_fn(1.0), pow_fn(mu, -delta)), p)) {
      ratio_ok = true;
      break;
    }
  if (!ratio_ok)
    fail(ErrorCode::not_admissible, "t/mu^delta is not almost increasing for probed delta");

  std::optional<std::array<double, 2>> exps;
  if (mu.is_power() && mu.power_exponent() > 0.0)
    exps = b.log_exponents();
  else if (mu.exact_indices() && (*mu.exact_indices())[0] == 0.0 &&
           (*mu.exact_indices())[1] == 0.0)
    exps = {{0.0, 0.0}};
  PosFn f = compose(b.fn(), mu);
  f.tag_indices(0.0, 0.0);
  const bool sq = detail::squares_equivalent_probe(f, b.domain());
  return SlowlyVarying(std::move(f), b.domain(), sq, exps);
}

// ---------------------------------------------------------------------------
// associated functions B0(u) = b(e^{1-1/u}), Binf(u) = b(e^{1/u-1}) on (0,1]

struct AssociatedPair {
  PosFn B0;
  std::optional<PosFn> Binf;  // absent when the source lives on (0,1)
  bool delta2_ok = true;      // numeric Delta_2 probe outcome
  bool source_squares_ok = true;
};

namespace detail {
inline bool delta2_probe(const PosFn& B) {
  double worst = 0.0;
  for (double y = -40.0; y <= -std::log(2.0) + 1e-12; y += 0.25)
    worst = std::max(worst, std::fabs(B.log_at(y + std::log(2.0)) - B.log_at(y)));
  return worst <= std::log(16.0);
}
}  // namespace detail

inline AssociatedPair associated_pair(const SlowlyVarying& b) {
  const PosFn bf = b.fn();
  PosFn B0([bf](double y) { return bf.log_at(1.0 - std::exp(-y)); }, "B0[" + b.label() + "]");
  if (b.log_exponents()) {
    const double a = (*b.log_exponents())[0];
    B0.tag_indices(-a, -a);
  }
  AssociatedPair out{std::move(B0), std::nullopt, true, b.squares_equivalent()};
  if (b.domain() == Domain::full_line) {
    PosFn Bi([bf](double y) { return bf.log_at(std::exp(-y) - 1.0); },
             "Binf[" + b.label() + "]");
    if (b.log_exponents()) {
      const double be = (*b.log_exponents())[1];
      Bi.tag_indices(-be, -be);
    }
    out.Binf = std::move(Bi);
  }
  out.delta2_ok = detail::delta2_probe(out.B0) && (!out.Binf || detail::delta2_probe(*out.Binf));
  return out;
}

// ---------------------------------------------------------------------------
// extension indices via the dilation function, fitted in log-log coordinates

struct IndexGrid {
  int k_max = 40;          // dyadic dilation arguments t = 2^{+-k}
  double sigma_span = 55;  // range of log s probed inside the sup
  double sigma_step = 0.25;
  double budget = 0.1;  // instability tolerance between refinements
};

namespace detail {

// log m_phi(tau) = sup_sigma [ log phi(sigma+tau) - log phi(sigma) ]
inline double log_dilation(const PosFn& phi, double tau, double hi_cap, const IndexGrid& g) {
  double best = -kInf;
  const double lo = -g.sigma_span;
  const double hi = std::min(hi_cap, std::min(g.sigma_span, hi_cap - tau + g.sigma_span));
  for (double s = lo; s <= hi + 1e-12; s += g.sigma_step) {
    if (s + tau > hi_cap + 1e-12) continue;
    const double v = phi.log_at(s + tau) - phi.log_at(s);
    if (std::isfinite(v)) best = std::max(best, v);
  }
  return best;
}

inline double slope_fit(const PosFn& phi, double sign, int k_lo, int k_hi, double hi_cap,
                        const IndexGrid& g) {
  // least squares of log m_phi against log t over the outer dyadic block
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double tau = sign * k * std::log(2.0);
    const double y = log_dilation(phi, tau, hi_cap, g);
    if (!std::isfinite(y)) continue;
    sx += tau;
    sy += y;
    sxx += tau * tau;
    sxy += tau * y;
    ++n;
  }
  if (n < 3) fail(ErrorCode::index_unstable, "dilation function not finite on the fit block");
  const double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace detail

namespace detail {
// Slow-variation factors bias the finite-range slope by O(1/tau); two fit
// blocks with well-separated tau let that leading correction be removed.
inline double richardson(double s_far, double tau_far, double s_near, double tau_near) {
  const double c = (s_near - s_far) / (1.0 / tau_near - 1.0 / tau_far);
  return s_far - c / tau_far;
}
}  // namespace detail

inline IndexPair extension_indices(const PosFn& phi, Domain dom = Domain::full_line,
                                   const IndexGrid& g = {}) {
  if (const auto& idx = phi.exact_indices())
    return IndexPair{(*idx)[0], (*idx)[1], IndexPair::Method::analytic, 0.0};

  const double hi_cap = dom == Domain::unit_interval ? 0.0 : g.sigma_span;
  const int k = g.k_max;
  const double ln2 = std::log(2.0);
  const double tau_far = (k - 5) * ln2;
  const double tau_near = (k / 2 - 2.5) * ln2;
  const double tau_mid = (3 * k / 4 - 2.5) * ln2;

  auto estimate = [&](double sign, double* unc) {
    const double s_far = detail::slope_fit(phi, sign, k - 10, k, hi_cap, g);
    const double s_near = detail::slope_fit(phi, sign, k / 2 - 5, k / 2, hi_cap, g);
    const double s_mid = detail::slope_fit(phi, sign, 3 * k / 4 - 5, 3 * k / 4, hi_cap, g);
    const double e1 = detail::richardson(s_far, tau_far, s_near, tau_near);
    const double e2 = detail::richardson(s_far, tau_far, s_mid, tau_mid);
    // residual after removing the 1/tau term scales like |correction|/tau
    *unc = std::fabs(e1 - e2) + std::fabs(e1 - s_far) / tau_near + 1e-6;
    return e1;
  };
  double unc_pi = 0.0, unc_rho = 0.0;
  const double pi = estimate(-1.0, &unc_pi);
  const double rho = estimate(+1.0, &unc_rho);
  const double unc = std::max(unc_pi, unc_rho);
  if (unc > g.budget)
    fail(ErrorCode::index_unstable, "index estimates did not stabilize under refinement");
  return IndexPair{pi, rho, IndexPair::Method::numeric, unc};
}

inline IndexPair extension_indices(const SlowlyVarying& b, const IndexGrid& g = {}) {
  return extension_indices(b.fn(), b.domain(), g);
}

// Indices of the associated functions; these gate every limiting lemma.
struct AssociatedIndices {
  IndexPair b0;
  std::optional<IndexPair> binf;
};

inline AssociatedIndices associated_indices(const SlowlyVarying& b, const IndexGrid& g = {}) {
  AssociatedPair ap = associated_pair(b);
  AssociatedIndices out;
  out.b0 = extension_indices(ap.B0, Domain::unit_interval, g);
  if (ap.Binf) out.binf = extension_indices(*ap.Binf, Domain::unit_interval, g);
  return out;
}

// sampled constant for b(st) <= C_eps max(s^eps, s^-eps) b(t)
inline double dilation_constant(const SlowlyVarying& b, double eps, const Probe& p = {}) {
  double worst = -kInf;
  const double hi = b.domain() == Domain::unit_interval ? 0.0 : p.hi;
  for (double ls = p.lo; ls <= p.hi + 1e-12; ls += 4 * p.step)
    for (double lt = p.lo; lt <= hi + 1e-12; lt += 4 * p.step) {
      if (b.domain() == Domain::unit_interval && ls + lt > 0.0) continue;
      const double v = b.log_at(ls + lt) - eps * std::fabs(ls) - b.log_at(lt);
      worst = std::max(worst, v);
    }
  return std::exp(worst);
}

// ---------------------------------------------------------------------------
// registry: names -> weights, with a tiny expression grammar
//   expr := term (('*'|'/') term)*
//   term := atom ('^' number)?
//   atom := 'ell' | 'const' | number | 'broken_log(a,b)'
//         | 'compose(expr, arg)' | '(' expr ')'
//   arg  := expr | 'power(c)'           (composition arguments may be powers)

class WeightParser {
 public:
  explicit WeightParser(std::string s) : s_(std::move(s)) {}

  SlowlyVarying parse_sv() {
    SlowlyVarying v = expr();
    skip_ws();
    if (pos_ != s_.size()) fail(ErrorCode::parse_error, "trailing input in weight: " + s_);
    return v;
  }

 private:
  std::string s_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(ErrorCode::parse_error, std::string("expected '") + c + "' in weight: " + s_);
  }
  double number() {
    skip_ws();
    size_t used = 0;
    double v;
    try {
      v = std::stod(s_.substr(pos_), &used);
    } catch (...) {
      fail(ErrorCode::parse_error, "expected number in weight: " + s_);
    }
    pos_ += used;
    return v;
  }
  std::string ident() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    return s_.substr(start, pos_ - start);
  }

  SlowlyVarying expr() {
    SlowlyVarying v = term();
    for (;;) {
      if (eat('*'))
        v = sv_mul(v, term());
      else if (eat('/'))
        v = sv_mul(v, sv_pow(term(), -1.0));
      else
        return v;
    }
  }

  SlowlyVarying term() {
    SlowlyVarying v = atom();
    if (eat('^')) v = sv_pow(v, number());
    return v;
  }

  SlowlyVarying atom() {
    skip_ws();
    if (pos_ >= s_.size()) fail(ErrorCode::parse_error, "unexpected end of weight: " + s_);
    if (eat('(')) {
      SlowlyVarying v = expr();
      expect(')');
      return v;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return make_const(number());
    const std::string id = ident();
    if (id == "ell") return make_ell();
    if (id == "const") return make_const(1.0);
    if (id == "broken_log") {
      expect('(');
      const double a = number();
      expect(',');
      const double b = number();
      expect(')');
      return make_broken_log(a, b);
    }
    if (id == "compose") {
      expect('(');
      SlowlyVarying b = expr();
      expect(',');
      PosFn m = comp_arg();
      expect(')');
      return sv_compose(b, m);
    }
    fail(ErrorCode::parse_error, "unknown weight atom '" + id + "' in: " + s_);
  }

  PosFn comp_arg() {
    skip_ws();
    const size_t save = pos_;
    const std::string id = ident();
    if (id == "power") {
      expect('(');
      const double c = number();
      expect(')');
      return power_fn(c);
    }
    pos_ = save;
    return expr().fn();
  }
};

inline SlowlyVarying parse_weight(const std::string& expr) {
  return WeightParser(expr).parse_sv();
}

inline std::vector<std::string> registry_names() {
  return {"const", "ell", "ell^<g>", "broken_log(<a>,<b>)", "compose(<b>,<mu>)",
          "<w>*<w>", "<w>/<w>", "power(<c>)  (inside compose)"};
}

}  // namespace interpnorm::svfun
