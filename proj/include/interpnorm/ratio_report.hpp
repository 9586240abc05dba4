#pragma once

// Record of one two-sided (or one-sided) equivalence experiment.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "interpnorm/common.hpp"

namespace interpnorm::verify {

struct Band {
  double lo = 0.0;
  double hi = kInf;
};

struct RatioReport {
  std::string experiment_id;
  std::vector<double> grid;  // sweep points: t, u, or corpus index
  std::vector<double> lhs, rhs, ratio;
  double ratio_min = kInf, ratio_max = -kInf;
  Band band;                // configured acceptance band
  bool one_sided = false;   // only ratio <= band.hi is claimed
  bool stable = true;       // grid-doubling stability (when probed)
  bool pass = false;
  std::vector<std::string> notes;

  void push(double g, double l, double r) {
    grid.push_back(g);
    lhs.push_back(l);
    rhs.push_back(r);
    double q;
    if (l == 0.0 && r == 0.0) {
      notes.push_back("skip 0/0 at grid point");
      q = 1.0;
    } else {
      q = l / r;
    }
    ratio.push_back(q);
    if (std::isfinite(q)) {
      ratio_min = std::min(ratio_min, q);
      ratio_max = std::max(ratio_max, q);
    } else {
      notes.push_back("divergent ratio at grid point");
    }
  }

  bool has_divergence() const {
    for (double q : ratio)
      if (!std::isfinite(q)) return true;
    for (double v : lhs)
      if (!std::isfinite(v)) return true;
    for (double v : rhs)
      if (!std::isfinite(v)) return true;
    return false;
  }

  void finalize() {
    if (ratio.empty()) {
      pass = false;
      notes.push_back("empty sweep");
      return;
    }
    if (ratio_min > ratio_max) {  // every point was skipped or divergent
      pass = false;
      return;
    }
    if (one_sided)
      pass = ratio_max <= band.hi && !has_divergence();
    else
      pass = ratio_min >= band.lo && ratio_max <= band.hi && !has_divergence() && stable;
  }

  double width() const { return ratio_min > 0.0 ? ratio_max / ratio_min : kInf; }
};

inline std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < points; ++i)
    g[i] = std::exp(a + (b - a) * double(i) / double(points - 1));
  return g;
}

}  // namespace interpnorm::verify
