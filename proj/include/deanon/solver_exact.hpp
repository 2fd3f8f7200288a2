#pragma once

#include <cstdint>
#include <vector>

#include "deanon/instance.hpp"

namespace deanon {

struct SolveResult {
  Mapping mapping;
  double delta = 0.0;
};

// Exhaustive minimizer of the mode's cost. Bilateral search ranges over
// community-observing mappings only; ties go to the lexicographically smallest
// forward array. Throws when the search space exceeds `max_mappings`.
SolveResult brute_force(const DeanonInstance& inst, Mode mode, double max_mappings = 1e7);

// Number of mappings brute_force would enumerate.
double brute_force_cardinality(const DeanonInstance& inst, Mode mode);

struct GaConfig {
  std::size_t population = 100;
  std::size_t generations = 1000;
  std::size_t tournament_size = 4;
  double crossover_rate = 0.9;
  double mutation_rate = 0.2;
  std::size_t elitism = 1;
  // First-improvement swap descent applied to offspring; 0 disables it and
  // leaves the plain genetic algorithm.
  std::size_t local_search_passes = 0;
  std::uint64_t seed = 1;
  Mode mode = Mode::bilateral;
};

struct GaResult {
  Mapping mapping;
  double delta = 0.0;
  std::vector<double> best_trace;  // best-ever cost after each generation
};

GaResult genetic_algorithm(const DeanonInstance& inst, const GaConfig& cfg);

// Incremental evaluation of a mode's cost under transpositions of images.
// Shared by the genetic algorithm's local refinement and its tests.
class SwapEvaluator {
 public:
  SwapEvaluator(const DeanonInstance& inst, Mode mode);

  double cost(std::span<const NodeId> forward) const;
  // Change in cost when the images of u and v are exchanged.
  double swap_delta(std::span<const NodeId> forward, NodeId u, NodeId v) const;

  // Bit-parallel variant: bind() caches g2 pulled back through a mapping,
  // after which bound_swap_delta costs O(kappa n / 64) and apply_swap keeps
  // the cache in sync.
  void bind(std::span<const NodeId> forward);
  double bound_cost() const;
  double bound_swap_delta(NodeId u, NodeId v) const;
  void apply_swap(NodeId u, NodeId v);

 private:
  bool fires(bool in_g1, bool in_g2) const {
    return mode_ == Mode::bilateral ? in_g1 != in_g2 : (!in_g1 && in_g2);
  }
  std::uint64_t fires(std::uint64_t in_g1, std::uint64_t in_g2) const {
    return mode_ == Mode::bilateral ? in_g1 ^ in_g2 : (~in_g1 & in_g2);
  }

  const DeanonInstance* inst_;
  Mode mode_;
  std::vector<double> dense_weights_;  // n x n
  std::size_t words_ = 0;
  int kappa_ = 0;
  std::vector<int> labels_;               // 0-based community of each g1 node
  std::vector<double> table_;             // kappa x kappa
  std::vector<std::uint64_t> masks_;      // kappa x words, members of each community
  std::vector<std::uint64_t> pulled_;     // n x words, g2 edge (f(i), f(j)) at bit j of row i
};

}  // namespace deanon
