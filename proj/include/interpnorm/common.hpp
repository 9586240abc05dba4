#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace interpnorm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class ErrorCode {
  parse_error,
  quadrature_nonconvergent,
  hypothesis_violated,
  not_admissible,
  not_nonnegative,
  not_quasiconcave,
  not_delta2,
  indices_violate_hypothesis,
  index_unstable,
  overflow_range,
  case_gate_failed,
  triviality,
  io_error,
};

struct Error : std::runtime_error {
  ErrorCode code;
  Error(ErrorCode c, const std::string& what) : std::runtime_error(what), code(c) {}
};

[[noreturn]] inline void fail(ErrorCode c, const std::string& what) { throw Error(c, what); }

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::quadrature_nonconvergent: return "quadrature_nonconvergent";
    case ErrorCode::hypothesis_violated: return "hypothesis_violated";
    case ErrorCode::not_admissible: return "not_admissible";
    case ErrorCode::not_nonnegative: return "not_nonnegative";
    case ErrorCode::not_quasiconcave: return "not_quasiconcave";
    case ErrorCode::not_delta2: return "not_delta2";
    case ErrorCode::indices_violate_hypothesis: return "indices_violate_hypothesis";
    case ErrorCode::index_unstable: return "index_unstable";
    case ErrorCode::overflow_range: return "overflow_range";
    case ErrorCode::case_gate_failed: return "case_gate_failed";
    case ErrorCode::triviality: return "triviality";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

// Deterministic RNG: fixed engine, uniforms derived by explicit division so
// sequences do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next_u64() {
    // xorshift64* : tiny, stable across platforms
    s_ ^= s_ >> 12;
    s_ ^= s_ << 25;
    s_ ^= s_ >> 27;
    return s_ * 0x2545f4914f6cdd1dull;
  }

  double uniform() {  // in [0,1)
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int uniform_int(int lo, int hi) {  // inclusive
    return lo + int(next_u64() % std::uint64_t(hi - lo + 1));
  }

 private:
  std::uint64_t s_;
};

// log(e^a + e^b) without overflow; -inf acts as log(0).
inline double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = a > b ? a : b;
  return m + std::log1p(std::exp(-std::fabs(a - b)));
}

inline double sq(double x) { return x * x; }

}  // namespace interpnorm
