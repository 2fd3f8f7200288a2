#pragma once

#include <optional>

#include "deanon/cost.hpp"
#include "deanon/graph.hpp"

namespace deanon {

// One experiment unit: published graph g1, auxiliary graph g2 and everything
// an adversary (or an evaluator) may know about them.
struct DeanonInstance {
  std::optional<Graph> underlying;  // synthetic instances only
  Graph g1;
  Graph g2;
  std::optional<Mapping> truth;
  CommunityAssignment c1;
  std::optional<CommunityAssignment> c2;  // absent with unilateral information
  ModelParams params;
  WeightMatrix weights;  // indexed by g1's communities

  std::size_t size() const { return g1.size(); }

  // Throws when the structural invariants are violated.
  void validate() const;

  // The cost function of `mode` evaluated at `m`.
  double cost(Mode mode, const Mapping& m) const;

  const CommunityAssignment& require_c2() const;
};

}  // namespace deanon
