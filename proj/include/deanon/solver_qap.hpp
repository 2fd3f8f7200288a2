#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deanon/instance.hpp"

namespace deanon {

// Quadratic-assignment form of the estimation problem. Coefficients are
// evaluated on demand from the graphs, labels and weights; nothing of size n^4
// is ever stored.
//
// bilateral (maximize): q(i,j,k,l) = w_ij  if (i,j) in E1, (k,l) in E2 and the
//                                          labels of i,k and of j,l agree
//                                  = -1    if c1(i) != c2(k) or c1(j) != c2(l)
//                                  = 0     otherwise
// unilateral (minimize): q(i,j,k,l) = w_ij if (i,j) not in E1 and (k,l) in E2.
class QapInstance {
 public:
  QapInstance(const DeanonInstance& inst, Mode mode);

  std::size_t size() const { return g1_->size(); }
  Mode mode() const { return mode_; }
  bool maximize() const { return mode_ == Mode::bilateral; }

  double q(NodeId i, NodeId j, NodeId k, NodeId l) const;

  // Sum over all ordered (i, j), i == j included, of q(i, j, f(i), f(j)).
  double value(std::span<const NodeId> forward) const;
  // Change in value when the images of u and v are exchanged; O(n).
  double swap_delta(std::span<const NodeId> forward, NodeId u, NodeId v) const;

  // True when `candidate` is strictly better than `incumbent` in this sense.
  bool improves(double candidate, double incumbent) const {
    return maximize() ? candidate > incumbent : candidate < incumbent;
  }

  std::span<const int> labels1() const { return labels1_; }
  std::span<const int> labels2() const { return labels2_; }  // empty for unilateral

 private:
  const Graph* g1_;
  const Graph* g2_;
  const WeightMatrix* w_;
  Mode mode_;
  std::vector<int> labels1_;
  std::vector<int> labels2_;
};

struct AssignmentSolution {
  Mapping mapping;
  double value = 0.0;
  std::size_t violations = 0;  // nodes with c1(i) != c2(x(i)); bilateral only
};

QapInstance build_qap(const DeanonInstance& inst, Mode mode);

enum class InnerSolver { exhaustive, local_search, annealing };

InnerSolver parse_inner_solver(const std::string& text);
std::string to_string(InnerSolver inner);

// Bilateral: every node goes to the lowest unused V2 node with its label.
// Unilateral: identity.
Mapping greedy_start(const QapInstance& qi);

// `budget` counts swap evaluations for the two heuristics (0 returns the
// greedy start); it is ignored by the exhaustive solver, which is limited to
// n <= 8.
AssignmentSolution solve_qap(const QapInstance& qi, InnerSolver inner, std::size_t budget,
                             std::uint64_t seed);

// Default swap-evaluation budget used by the CLI and the harness.
std::size_t default_qap_budget(std::size_t n);

struct CycleRepair {
  AssignmentSolution solution;
  // Violation count before any reversal and after each one; strictly
  // decreasing.
  std::vector<std::size_t> violation_trace;
};

// Repairs a bilateral assignment into a community-observing one by reversing
// cycles of violating entries. Only violating nodes are reassigned, so the
// objective cannot decrease.
CycleRepair reverse_violation_cycles(const QapInstance& qi, const AssignmentSolution& sol);

struct Algorithm1Result {
  Mapping mapping;
  double delta = 0.0;
  double qap_value = 0.0;              // value of the inner solver's assignment
  std::size_t initial_violations = 0;  // before repair
};

Algorithm1Result algorithm1(const DeanonInstance& inst, Mode mode, InnerSolver inner,
                            std::size_t budget, std::uint64_t seed);

}  // namespace deanon
