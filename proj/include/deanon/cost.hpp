#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deanon/graph.hpp"

namespace deanon {

// Which sampling term enters the weight logarithm. `main` uses s1+s2-s1*s2 and
// is the estimator minimized everywhere; `bound` uses s1+s2-2*s1*s2 and is
// only consumed by the finite-n bound evaluator.
enum class WeightVariant { main, bound };

// w(p, s1, s2) = log((1 - p(s1+s2-s1 s2)) / (p (1-s1)(1-s2))), in nats.
double weight(double p, double s1, double s2, WeightVariant variant = WeightVariant::main);

// Symmetric per-node-pair weights w_ij that depend only on (c(i), c(j)).
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(int kappa, std::vector<double> table, std::vector<int> labels);

  static WeightMatrix from_params(const ModelParams& params, const CommunityAssignment& c,
                                  WeightVariant variant = WeightVariant::main);
  static WeightMatrix uniform(std::size_t n, double value = 1.0);

  std::size_t size() const { return labels_.size(); }
  int kappa() const { return kappa_; }
  double at(std::size_t i, std::size_t j) const {
    return table_[(labels_[i] - 1) * kappa_ + (labels_[j] - 1)];
  }
  double community_weight(int a, int b) const { return table_[(a - 1) * kappa_ + (b - 1)]; }
  int label(std::size_t i) const { return labels_[i]; }
  std::span<const int> labels() const { return labels_; }

  // Same community table re-indexed through another labelling (e.g. G2's).
  WeightMatrix relabeled(std::span<const int> labels) const;

  double max_weight() const;  // over realizable node pairs i != j
  double min_weight() const;
  // Sum of w_ij over all unordered node pairs i < j.
  double total_pair_weight() const;
  // Sum of w_ij over the edges of g.
  double edge_weight(const Graph& g) const;

 private:
  int kappa_ = 0;
  std::vector<double> table_;
  std::vector<int> labels_;
  std::vector<std::size_t> sizes_;
};

// Sum of w_ij |1{(i,j) in E1} - 1{(m(i),m(j)) in E2}| over i < j.
double bilateral_cost(const Graph& g1, const Graph& g2, const WeightMatrix& w, const Mapping& m);
// Sum of w_ij 1{(i,j) not in E1, (m(i),m(j)) in E2} over i < j.
double unilateral_cost(const Graph& g1, const Graph& g2, const WeightMatrix& w, const Mapping& m);
// Bilateral cost with every weight equal to one.
double unweighted_cost(const Graph& g1, const Graph& g2, const Mapping& m);

double accuracy(const Mapping& m, const Mapping& truth);

// (delta - delta_ref) / delta_ref; 0 when both vanish, +infinity when only the
// reference vanishes.
double relative_value(double delta, double delta_ref);

struct CostReport {
  double delta = 0.0;
  Mode mode = Mode::bilateral;
  std::string mapping_id;
  std::optional<double> accuracy;
  std::optional<double> relative_value;
};

// Sum of counts[(a-1)*kappa + (b-1)] * w(a, b), the final reduction shared by
// every cost function so that equal counts give bit-identical costs.
double sum_weighted_counts(std::span<const std::uint64_t> counts, const WeightMatrix& w);

// Neumaier-compensated accumulator.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

}  // namespace deanon
