#pragma once

#include <string>
#include <utility>
#include <vector>

#include "deanon/graph.hpp"

namespace deanon {

// Finite-n evaluation of an asymptotic condition. The hidden constants are
// caller inputs, so `satisfied` is a heuristic diagnostic, not a guarantee.
struct ConditionReport {
  std::string name;
  Mode mode = Mode::bilateral;  // both modes share the same displayed condition
  std::vector<std::pair<std::string, double>> quantities;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  std::string advisory;

  // Throws when `key` is absent.
  double get(const std::string& key) const;
};

// lhs = alpha (1-beta)^2 s1^2 s2^2 log(1/alpha) / (s1+s2)
// rhs = constant * gamma * log(n)^2 / n
ConditionReport thm41_condition(const ModelParams& params, std::size_t n, double constant,
                                Mode mode = Mode::bilateral);

// Partial-recovery variant for a fraction delta of tolerated mistakes:
// eps = constant (delta - delta^2/2) alpha (1-beta) s1 s2 log(1/alpha) and the
// right-hand side is divided by (1 - delta/2).
ConditionReport cor41_condition(const ModelParams& params, std::size_t n, double delta,
                                double constant, Mode mode = Mode::bilateral);

// Upper bound on the expected number of incorrect mappings whose cost does not
// exceed the correct one:
//   sum_{k=2}^{n} 2 n^k exp(-k^2 [(n-k/2-1) w_lo alpha (1-beta) s1 s2]^2
//                          / (6 (nk - k^2/2 - k) w_hi alpha (s1+s2)))
// with w_hi, w_lo the bound-variant weights at alpha and beta. Evaluated in
// log space and saturated at 1e300.
double appendixA_bound(const ModelParams& params, std::size_t n);

}  // namespace deanon
