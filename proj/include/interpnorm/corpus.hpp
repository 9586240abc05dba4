#pragma once

// Test corpora: the 12-member profile corpus on (0,1) with fixed seeds, and a
// full-line family of compactly supported functions for the abstract
// equivalence experiments.

#include <string>
#include <vector>

#include "interpnorm/common.hpp"
#include "interpnorm/kcalc.hpp"
#include "interpnorm/svfun.hpp"

namespace interpnorm::verify {

using kcalc::FunctionSample;
using kcalc::KProfile;
using svfun::PosFn;

struct CorpusEntry {
  std::string name;
  FunctionSample f;
  KProfile K;
};

struct Corpus {
  std::vector<CorpusEntry> entries;
};

inline FunctionSample random_piecewise(std::uint64_t seed) {
  Rng rng(seed);
  const int n = rng.uniform_int(6, 14);
  std::vector<double> breaks{0.0};
  for (int i = 0; i < n - 1; ++i) breaks.push_back(rng.uniform(0.02, 0.98));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  breaks.push_back(1.0);
  std::vector<double> values(breaks.size() - 1);
  for (auto& v : values) v = rng.uniform(0.0, 3.0);
  return FunctionSample::piecewise(std::move(breaks), std::move(values));
}

inline Corpus default_corpus(std::uint64_t seed = 0) {
  Corpus c;
  auto add = [&](std::string name, FunctionSample f) {
    KProfile K = kcalc::k_functional(f);
    c.entries.push_back({std::move(name), std::move(f), std::move(K)});
  };
  add("chi04", FunctionSample::indicator(0.0, 0.4));
  add("linear", FunctionSample::closure([](double x) { return x; }));
  for (int i = 1; i <= 8; ++i)
    add("pw_seed" + std::to_string(i), random_piecewise(seed * 1000003ull + std::uint64_t(i)));
  // f == 1 realizes the min(1,t) profile exactly
  add("min1t", FunctionSample::constant(1.0));
  // decreasing random step function: equals its own rearrangement, so the
  // profile is a generic concave interpolant
  {
    FunctionSample g = random_piecewise(seed * 1000003ull + 7700ull);
    std::vector<double> vals = g.values();
    std::sort(vals.begin(), vals.end(), std::greater<>());
    add("concave7", FunctionSample::piecewise(g.breaks(), vals));
  }
  return c;
}

// full-line indicator chi_{(e^{xa}, e^{xb})} as an evaluable weight
inline PosFn indicator_fn(double log_a, double log_b) {
  PosFn f(
      [log_a, log_b](double x) { return (x > log_a && x <= log_b) ? 0.0 : -kInf; },
      "chi");
  f.add_hint(log_a);
  f.add_hint(log_b);
  return f;
}

// Compactly supported full-line family: dyadic-shifted indicators plus a few
// power-weighted cutoffs, exercising uniformity of the constants in position.
inline std::vector<std::pair<std::string, PosFn>> fullline_family() {
  std::vector<std::pair<std::string, PosFn>> fam;
  fam.emplace_back("chi_1_e", indicator_fn(0.0, 1.0));
  for (int j : {-16, -8, -4, -2, 2, 4, 8, 16})
    fam.emplace_back("chi_shift" + std::to_string(j),
                     indicator_fn(j * std::log(2.0), j * std::log(2.0) + 1.0));
  {
    PosFn f = svfun::mul(svfun::power_fn(0.5), indicator_fn(-40.0, 0.0));
    fam.emplace_back("sqrt_cut", f);
  }
  {
    PosFn f = svfun::mul(svfun::power_fn(-0.5), indicator_fn(0.0, 40.0));
    fam.emplace_back("invsqrt_cut", f);
  }
  {
    PosFn f = svfun::mul(svfun::broken_log_fn(1.0, -3.0), indicator_fn(-20.0, 20.0));
    fam.emplace_back("log_bump", f);
  }
  return fam;
}

}  // namespace interpnorm::verify
