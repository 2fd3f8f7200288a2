#include "deanon/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "deanon/cost.hpp"
#include "deanon/error.hpp"

namespace deanon {

namespace {

constexpr const char* kAdvisory =
    "asymptotic condition evaluated at finite n with caller-chosen constants; heuristic only";

struct Common {
  double alpha, beta, gamma, s1, s2, log_n, n;
};

Common common(const ModelParams& params, std::size_t n) {
  require(n >= 2, "condition: n must be at least 2");
  const double alpha = params.alpha();
  require(alpha < 1.0, "condition: alpha must be below 1");
  return {alpha,       params.beta(), params.gamma(), params.s1(), params.s2(),
          std::log(static_cast<double>(n)), static_cast<double>(n)};
}

}  // namespace

double ConditionReport::get(const std::string& key) const {
  for (const auto& [k, v] : quantities)
    if (k == key) return v;
  throw Error("condition report has no quantity '" + key + "'");
}

ConditionReport thm41_condition(const ModelParams& params, std::size_t n, double constant,
                                Mode mode) {
  require(constant > 0.0, "condition: constant must be positive");
  const Common c = common(params, n);
  ConditionReport rep;
  rep.name = "thm41";
  rep.mode = mode;
  rep.lhs = c.alpha * (1.0 - c.beta) * (1.0 - c.beta) * c.s1 * c.s1 * c.s2 * c.s2 *
            std::log(1.0 / c.alpha) / (c.s1 + c.s2);
  rep.rhs = constant * c.gamma * c.log_n * c.log_n / c.n;
  rep.satisfied = rep.lhs >= rep.rhs;
  rep.advisory = kAdvisory;
  rep.quantities = {{"alpha", c.alpha},
                    {"beta", c.beta},
                    {"gamma", c.gamma},
                    {"w_hi", weight(c.alpha, c.s1, c.s2)},
                    {"w_lo", weight(c.beta, c.s1, c.s2)},
                    {"lhs", rep.lhs},
                    {"rhs", rep.rhs},
                    {"n", c.n}};
  return rep;
}

ConditionReport cor41_condition(const ModelParams& params, std::size_t n, double delta,
                                double constant, Mode mode) {
  require(delta >= 0.0 && delta <= 1.0, "condition: delta must lie in [0,1]");
  ConditionReport rep = thm41_condition(params, n, constant, mode);
  const Common c = common(params, n);
  const double slack = delta - delta * delta / 2.0;
  const double eps = constant * slack * c.alpha * (1.0 - c.beta) * c.s1 * c.s2 *
                     std::log(1.0 / c.alpha);
  rep.name = "cor41";
  rep.rhs /= 1.0 - delta / 2.0;
  rep.satisfied = rep.lhs >= rep.rhs;
  for (auto& [k, v] : rep.quantities)
    if (k == "rhs") v = rep.rhs;
  rep.quantities.emplace_back("delta", delta);
  rep.quantities.emplace_back("eps", eps);
  return rep;
}

double appendixA_bound(const ModelParams& params, std::size_t n) {
  const Common c = common(params, n);
  const double w_hi = weight(c.alpha, c.s1, c.s2, WeightVariant::bound);
  const double w_lo = weight(c.beta, c.s1, c.s2, WeightVariant::bound);
  const double log2 = std::log(2.0);

  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(n);
  for (std::size_t kk = 2; kk <= n; ++kk) {
    const double k = static_cast<double>(kk);
    const double pairs = c.n * k - k * k / 2.0 - k;
    const double x = (c.n - k / 2.0 - 1.0) * w_lo * c.alpha * (1.0 - c.beta) * c.s1 * c.s2;
    double term = -std::numeric_limits<double>::infinity();
    if (pairs > 0.0) {
      term = log2 + k * c.log_n - k * k * x * x / (6.0 * pairs * w_hi * c.alpha * (c.s1 + c.s2));
    }
    terms.push_back(term);
    top = std::max(top, term);
  }
  if (!std::isfinite(top)) return 0.0;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  const double log_sum = top + std::log(acc);
  return log_sum >= std::log(1e300) ? 1e300 : std::exp(log_sum);
}

}  // namespace deanon
