#include "deanon/cost.hpp"

#include <algorithm>
#include <cmath>

#include "deanon/error.hpp"

namespace deanon {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    carry_ += (sum_ - t) + x;
  } else {
    carry_ += (x - t) + sum_;
  }
  sum_ = t;
}

double weight(double p, double s1, double s2, WeightVariant variant) {
  require(p > 0.0 && p < 1.0, "weight: p must lie in (0,1)");
  require(s1 > 0.0 && s1 < 1.0 && s2 > 0.0 && s2 < 1.0, "weight: s1, s2 must lie in (0,1)");
  // numerator - denominator is 1-p (main) or 1-p(1-s1 s2) (bound); writing
  // the ratio as 1 + gap/denominator keeps the p -> 1 limit accurate.
  // Ordered product so that swapping s1 and s2 is bitwise symmetric.
  const double r1 = 1.0 - s1, r2 = 1.0 - s2;
  const double denominator = p * (std::min(r1, r2) * std::max(r1, r2));
  const double gap = variant == WeightVariant::main ? 1.0 - p : 1.0 - p * (1.0 - s1 * s2);
  return std::log1p(gap / denominator);
}

WeightMatrix::WeightMatrix(int kappa, std::vector<double> table, std::vector<int> labels)
    : kappa_(kappa), table_(std::move(table)), labels_(std::move(labels)),
      sizes_(kappa > 0 ? kappa : 0, 0) {
  require(kappa >= 1, "weight matrix needs at least one community");
  require(table_.size() == static_cast<std::size_t>(kappa) * kappa,
          "weight table must be kappa x kappa");
  for (int a = 0; a < kappa; ++a) {
    for (int b = 0; b < kappa; ++b) {
      require(table_[a * kappa + b] > 0.0, "weights must be positive");
      require(table_[a * kappa + b] == table_[b * kappa + a], "weight table must be symmetric");
    }
  }
  for (int a : labels_) {
    require(a >= 1 && a <= kappa, "weight matrix label out of range");
    ++sizes_[a - 1];
  }
}

WeightMatrix WeightMatrix::from_params(const ModelParams& params, const CommunityAssignment& c,
                                       WeightVariant variant) {
  require(params.kappa() == c.kappa(), "weights: community count differs from model");
  const int k = params.kappa();
  std::vector<double> table(static_cast<std::size_t>(k) * k);
  for (int a = 1; a <= k; ++a) {
    for (int b = 1; b <= k; ++b) {
      table[(a - 1) * k + (b - 1)] = weight(params.p(a, b), params.s1(), params.s2(), variant);
    }
  }
  return WeightMatrix(k, std::move(table), {c.labels().begin(), c.labels().end()});
}

WeightMatrix WeightMatrix::uniform(std::size_t n, double value) {
  return WeightMatrix(1, {value}, std::vector<int>(n, 1));
}

WeightMatrix WeightMatrix::relabeled(std::span<const int> labels) const {
  return WeightMatrix(kappa_, table_, {labels.begin(), labels.end()});
}

namespace {
bool realizable(const std::vector<std::size_t>& sizes, int a, int b) {
  return a == b ? sizes[a] >= 2 : sizes[a] >= 1 && sizes[b] >= 1;
}
}  // namespace

double WeightMatrix::max_weight() const {
  double best = 0.0;
  for (int a = 0; a < kappa_; ++a)
    for (int b = 0; b < kappa_; ++b)
      if (realizable(sizes_, a, b)) best = std::max(best, table_[a * kappa_ + b]);
  return best;
}

double WeightMatrix::min_weight() const {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < kappa_; ++a)
    for (int b = 0; b < kappa_; ++b)
      if (realizable(sizes_, a, b)) best = std::min(best, table_[a * kappa_ + b]);
  return best;
}

double WeightMatrix::total_pair_weight() const {
  CompensatedSum sum;
  for (int a = 0; a < kappa_; ++a) {
    const double na = static_cast<double>(sizes_[a]);
    sum.add(na * (na - 1.0) / 2.0 * table_[a * kappa_ + a]);
    for (int b = a + 1; b < kappa_; ++b) {
      sum.add(na * static_cast<double>(sizes_[b]) * table_[a * kappa_ + b]);
    }
  }
  return sum.value();
}

double WeightMatrix::edge_weight(const Graph& g) const {
  require(g.size() == size(), "edge_weight: size mismatch");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(kappa_) * kappa_, 0);
  for (const auto& [u, v] : g.edges()) ++counts[(labels_[u] - 1) * kappa_ + (labels_[v] - 1)];
  CompensatedSum sum;
  for (std::size_t t = 0; t < counts.size(); ++t) sum.add(static_cast<double>(counts[t]) * table_[t]);
  return sum.value();
}

namespace {

// Disagreements are counted per community pair with integers and only then
// weighted, so the result is reproducible bit-for-bit.
template <typename Indicator>
double weighted_pair_sum(const Graph& g1, const Graph& g2, const WeightMatrix& w, const Mapping& m,
                         Indicator&& fires) {
  const std::size_t n = g1.size();
  require(g2.size() == n && w.size() == n && m.size() == n, "cost: size mismatch");
  const int k = w.kappa();
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k) * k, 0);
  for (NodeId i = 0; i < n; ++i) {
    const NodeId mi = m[i];
    const std::size_t row = static_cast<std::size_t>(w.label(i) - 1) * k;
    for (NodeId j = i + 1; j < n; ++j) {
      if (fires(g1.has_edge(i, j), g2.has_edge(mi, m[j]))) ++counts[row + (w.label(j) - 1)];
    }
  }
  return sum_weighted_counts(counts, w);
}

}  // namespace

double sum_weighted_counts(std::span<const std::uint64_t> counts, const WeightMatrix& w) {
  const int k = w.kappa();
  CompensatedSum sum;
  for (int a = 1; a <= k; ++a) {
    for (int b = 1; b <= k; ++b) {
      const auto c = counts[(a - 1) * k + (b - 1)];
      if (c != 0) sum.add(static_cast<double>(c) * w.community_weight(a, b));
    }
  }
  return sum.value();
}

double bilateral_cost(const Graph& g1, const Graph& g2, const WeightMatrix& w, const Mapping& m) {
  return weighted_pair_sum(g1, g2, w, m, [](bool a, bool b) { return a != b; });
}

double unilateral_cost(const Graph& g1, const Graph& g2, const WeightMatrix& w, const Mapping& m) {
  return weighted_pair_sum(g1, g2, w, m, [](bool a, bool b) { return !a && b; });
}

double unweighted_cost(const Graph& g1, const Graph& g2, const Mapping& m) {
  return bilateral_cost(g1, g2, WeightMatrix::uniform(g1.size()), m);
}

double accuracy(const Mapping& m, const Mapping& truth) {
  require(m.size() == truth.size(), "accuracy: size mismatch");
  if (m.size() == 0) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < m.size(); ++i) hits += m[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(m.size());
}

double relative_value(double delta, double delta_ref) {
  require(delta >= 0.0 && delta_ref >= 0.0, "relative_value: costs must be nonnegative");
  if (delta_ref == 0.0) return delta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (delta - delta_ref) / delta_ref;
}

}  // namespace deanon
