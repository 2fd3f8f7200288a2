#include "deanon/solver_qap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deanon/error.hpp"
#include "deanon/rng.hpp"

namespace deanon {

QapInstance::QapInstance(const DeanonInstance& inst, Mode mode)
    : g1_(&inst.g1), g2_(&inst.g2), w_(&inst.weights), mode_(mode),
      labels1_(inst.c1.labels().begin(), inst.c1.labels().end()) {
  inst.validate();
  if (mode == Mode::bilateral) {
    const auto& c2 = inst.require_c2();
    require(c2.kappa() == inst.c1.kappa(), "qap: community tables disagree on kappa");
    labels2_.assign(c2.labels().begin(), c2.labels().end());
  }
}

QapInstance build_qap(const DeanonInstance& inst, Mode mode) { return QapInstance(inst, mode); }

double QapInstance::q(NodeId i, NodeId j, NodeId k, NodeId l) const {
  if (mode_ == Mode::bilateral) {
    if (labels1_[i] != labels2_[k] || labels1_[j] != labels2_[l]) return -1.0;
    return g1_->has_edge(i, j) && g2_->has_edge(k, l) ? w_->at(i, j) : 0.0;
  }
  return !g1_->has_edge(i, j) && g2_->has_edge(k, l) ? w_->at(i, j) : 0.0;
}

double QapInstance::value(std::span<const NodeId> f) const {
  const std::size_t n = size();
  require(f.size() == n, "qap: assignment has the wrong size");
  CompensatedSum sum;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      const double c = q(i, j, f[i], f[j]);
      if (c != 0.0) sum.add(c);
    }
  }
  return sum.value();
}

double QapInstance::swap_delta(std::span<const NodeId> f, NodeId u, NodeId v) const {
  // q(i,j,k,l) == q(j,i,l,k), so the column terms mirror the row terms.
  const std::size_t n = size();
  const NodeId fu = f[u];
  const NodeId fv = f[v];
  double d = 0.0;
  for (NodeId j = 0; j < n; ++j) {
    if (j == u || j == v) continue;
    const NodeId fj = f[j];
    d += q(u, j, fv, fj) - q(u, j, fu, fj);
    d += q(v, j, fu, fj) - q(v, j, fv, fj);
  }
  d *= 2.0;
  d += q(u, u, fv, fv) - q(u, u, fu, fu);
  d += q(v, v, fu, fu) - q(v, v, fv, fv);
  d += q(u, v, fv, fu) - q(u, v, fu, fv);
  d += q(v, u, fu, fv) - q(v, u, fv, fu);
  return d;
}

InnerSolver parse_inner_solver(const std::string& text) {
  if (text == "exhaustive") return InnerSolver::exhaustive;
  if (text == "local_search") return InnerSolver::local_search;
  if (text == "annealing") return InnerSolver::annealing;
  throw Error("unknown QAP inner solver '" + text + "'");
}

std::string to_string(InnerSolver inner) {
  switch (inner) {
    case InnerSolver::exhaustive: return "exhaustive";
    case InnerSolver::local_search: return "local_search";
    case InnerSolver::annealing: return "annealing";
  }
  return "?";
}

std::size_t default_qap_budget(std::size_t n) { return std::max<std::size_t>(1000, 50 * n * n); }

namespace {

std::size_t violation_count(const QapInstance& qi, std::span<const NodeId> f) {
  if (qi.mode() != Mode::bilateral) return 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < f.size(); ++i) count += qi.labels1()[i] != qi.labels2()[f[i]];
  return count;
}

AssignmentSolution make_solution(const QapInstance& qi, std::vector<NodeId> f) {
  AssignmentSolution sol;
  sol.value = qi.value(f);
  sol.violations = violation_count(qi, f);
  sol.mapping = Mapping(std::move(f));
  return sol;
}

// Ordering used to pick among equally good candidates: value first, then the
// lexicographically smaller mapping.
bool preferred(const QapInstance& qi, double value, std::span<const NodeId> f, double best_value,
               std::span<const NodeId> best) {
  if (qi.improves(value, best_value)) return true;
  if (value != best_value) return false;
  return std::lexicographical_compare(f.begin(), f.end(), best.begin(), best.end());
}

// Random restart point; bilateral restarts keep every node inside its label.
std::vector<NodeId> random_start(const QapInstance& qi, Rng& rng) {
  const std::size_t n = qi.size();
  std::vector<NodeId> f(n);
  if (qi.mode() == Mode::unilateral) {
    std::iota(f.begin(), f.end(), NodeId{0});
    rng.shuffle(std::span<NodeId>(f));
    return f;
  }
  const Mapping greedy = greedy_start(qi);
  f.assign(greedy.forward().begin(), greedy.forward().end());
  const int kappa = *std::max_element(qi.labels1().begin(), qi.labels1().end());
  for (int a = 1; a <= kappa; ++a) {
    std::vector<NodeId> pos;
    for (NodeId i = 0; i < n; ++i)
      if (qi.labels1()[i] == a) pos.push_back(i);
    std::vector<NodeId> images(pos.size());
    for (std::size_t t = 0; t < pos.size(); ++t) images[t] = f[pos[t]];
    rng.shuffle(std::span<NodeId>(images));
    for (std::size_t t = 0; t < pos.size(); ++t) f[pos[t]] = images[t];
  }
  return f;
}

AssignmentSolution solve_exhaustive(const QapInstance& qi) {
  const std::size_t n = qi.size();
  require(n <= 8, "qap: exhaustive inner solver is limited to n <= 8");
  std::vector<NodeId> f(n);
  std::iota(f.begin(), f.end(), NodeId{0});
  std::vector<NodeId> best = f;
  double best_value = qi.value(f);
  while (std::next_permutation(f.begin(), f.end())) {
    const double v = qi.value(f);
    if (qi.improves(v, best_value)) {
      best_value = v;
      best = f;
    }
  }
  return make_solution(qi, std::move(best));
}

AssignmentSolution solve_local_search(const QapInstance& qi, std::size_t budget, Rng& rng) {
  const std::size_t n = qi.size();
  const Mapping start = greedy_start(qi);
  std::vector<NodeId> f(start.forward().begin(), start.forward().end());
  double current = qi.value(f);
  std::vector<NodeId> best = f;
  double best_value = current;

  std::size_t evals = 0;
  while (evals < budget) {
    bool improved = false;
    for (NodeId u = 0; u < n && evals < budget; ++u) {
      for (NodeId v = u + 1; v < n && evals < budget; ++v) {
        const double d = qi.swap_delta(f, u, v);
        ++evals;
        if (qi.maximize() ? d > 1e-12 : d < -1e-12) {
          std::swap(f[u], f[v]);
          current += d;
          improved = true;
        }
      }
    }
    if (improved) continue;
    // Local optimum: keep it if it wins, then restart.
    current = qi.value(f);
    if (preferred(qi, current, f, best_value, best)) {
      best_value = current;
      best = f;
    }
    f = random_start(qi, rng);
    current = qi.value(f);
  }
  current = qi.value(f);
  if (preferred(qi, current, f, best_value, best)) best = f;
  return make_solution(qi, std::move(best));
}

AssignmentSolution solve_annealing(const QapInstance& qi, std::size_t budget, Rng& rng,
                                   double scale) {
  const std::size_t n = qi.size();
  const Mapping start = greedy_start(qi);
  std::vector<NodeId> f(start.forward().begin(), start.forward().end());
  double current = qi.value(f);
  std::vector<NodeId> best = f;
  double best_value = current;
  if (n < 2 || budget == 0) return make_solution(qi, std::move(best));

  const double t0 = 2.0 * scale;
  const double t_end = 1e-3 * t0;
  const double cooling = std::log(t_end / t0) / static_cast<double>(budget);
  for (std::size_t t = 0; t < budget; ++t) {
    const double temperature = t0 * std::exp(cooling * static_cast<double>(t));
    const NodeId u = static_cast<NodeId>(rng.index(n));
    NodeId v = static_cast<NodeId>(rng.index(n - 1));
    if (v >= u) ++v;
    const double d = qi.swap_delta(f, u, v);
    const double gain = qi.maximize() ? d : -d;
    if (gain >= 0.0 || rng.uniform() < std::exp(gain / temperature)) {
      std::swap(f[u], f[v]);
      current += d;
      if (qi.improves(current, best_value)) {
        current = qi.value(f);  // resynchronize the running sum
        if (qi.improves(current, best_value)) {
          best_value = current;
          best = f;
        }
      }
    }
  }
  return make_solution(qi, std::move(best));
}

}  // namespace

Mapping greedy_start(const QapInstance& qi) {
  const std::size_t n = qi.size();
  if (qi.mode() == Mode::unilateral) return Mapping::identity(n);
  std::vector<NodeId> f(n);
  std::vector<bool> used(n, false);
  for (NodeId i = 0; i < n; ++i) {
    NodeId k = 0;
    while (k < n && (used[k] || qi.labels2()[k] != qi.labels1()[i])) ++k;
    require(k < n, "qap: community " + std::to_string(qi.labels1()[i]) +
                       " is larger in g1 than in g2");
    used[k] = true;
    f[i] = k;
  }
  return Mapping(std::move(f));
}

AssignmentSolution solve_qap(const QapInstance& qi, InnerSolver inner, std::size_t budget,
                             std::uint64_t seed) {
  Rng rng(seed);
  switch (inner) {
    case InnerSolver::exhaustive: return solve_exhaustive(qi);
    case InnerSolver::local_search: return solve_local_search(qi, budget, rng);
    case InnerSolver::annealing: {
      double scale = 1.0;
      for (NodeId i = 0; i < qi.size(); ++i)
        for (NodeId j = i + 1; j < qi.size(); ++j) scale = std::max(scale, std::abs(qi.q(i, j, i, j)));
      return solve_annealing(qi, budget, rng, scale);
    }
  }
  throw Error("qap: unknown inner solver");
}

CycleRepair reverse_violation_cycles(const QapInstance& qi, const AssignmentSolution& sol) {
  require(qi.mode() == Mode::bilateral, "cycle reversal only applies to bilateral assignments");
  const std::size_t n = qi.size();
  const auto l1 = qi.labels1();
  const auto l2 = qi.labels2();
  require(sol.mapping.size() == n, "cycle reversal: assignment has the wrong size");

  const int kappa = std::max(*std::max_element(l1.begin(), l1.end()),
                             *std::max_element(l2.begin(), l2.end()));
  std::vector<std::size_t> count1(kappa + 1, 0), count2(kappa + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++count1[l1[i]];
    ++count2[l2[i]];
  }
  require(count1 == count2, "cycle reversal: community sizes differ between g1 and g2");

  std::vector<NodeId> f(sol.mapping.forward().begin(), sol.mapping.forward().end());
  CycleRepair out;
  out.violation_trace.push_back(violation_count(qi, f));

  for (NodeId i = 0; i < n; ++i) {
    if (l1[i] == l2[f[i]]) continue;
    // Detach i, then let violating nodes take the freed image one at a time
    // until a freed image carries i's own label.
    NodeId freed = f[i];
    while (l2[freed] != l1[i]) {
      NodeId next = 0;
      while (next < n && (next == i || l1[next] == l2[f[next]] || l1[next] != l2[freed])) ++next;
      require(next < n, "cycle reversal: no violating node can take the freed image");
      std::swap(f[next], freed);
    }
    f[i] = freed;
    out.violation_trace.push_back(violation_count(qi, f));
  }
  out.solution = make_solution(qi, std::move(f));
  return out;
}

Algorithm1Result algorithm1(const DeanonInstance& inst, Mode mode, InnerSolver inner,
                            std::size_t budget, std::uint64_t seed) {
  const QapInstance qi = build_qap(inst, mode);
  const AssignmentSolution sol = solve_qap(qi, inner, budget, seed);
  Algorithm1Result result;
  result.qap_value = sol.value;
  result.initial_violations = sol.violations;
  result.mapping = mode == Mode::bilateral ? reverse_violation_cycles(qi, sol).solution.mapping
                                           : sol.mapping;
  result.delta = inst.cost(mode, result.mapping);
  return result;
}

}  // namespace deanon
