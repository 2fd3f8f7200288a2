#pragma once

#include <cstdint>
#include <vector>

#include "deanon/graph.hpp"
#include "deanon/instance.hpp"

namespace deanon {

enum class DegreeFamily { poisson, powerlaw, exponential };

DegreeFamily parse_degree_family(const std::string& text);

struct DegreePreset {
  DegreeFamily family = DegreeFamily::poisson;
  double target_mean_degree = 10.0;
  int kappa = 1;
};

struct SbmSample {
  Graph graph;
  CommunityAssignment communities;
};

// Nodes are laid out community by community: sizes[0] nodes with label 1, then
// sizes[1] nodes with label 2, and so on.
SbmSample generate_sbm(const ModelParams& params, std::span<const std::size_t> sizes,
                       std::uint64_t seed);

// Keeps each edge independently with probability s (s in [0,1]).
Graph sample_edges(const Graph& g, double s, std::uint64_t seed);

// Average size n/kappa with +-10% uniform jitter, renormalized to sum to n.
std::vector<std::size_t> jittered_sizes(std::size_t n, int kappa, std::uint64_t seed);

DeanonInstance make_instance(const ModelParams& params, std::span<const std::size_t> sizes,
                             Mode mode, std::uint64_t seed);

// Same construction starting from a given underlying network (e.g. ingested).
DeanonInstance make_instance_from_graph(const Graph& underlying, const CommunityAssignment& c,
                                        const ModelParams& params, Mode mode,
                                        std::uint64_t seed);

struct PresetAffinity {
  ModelParams params;
  bool clamped = false;  // some entry was moved into [1e-6, 1 - 1e-6]
};

// Per-community target degrees d_a from the family, rescaled to the requested
// node-weighted mean, combined as p_ab = d_a d_b / (mean (n - 1)).
PresetAffinity preset_affinity(const DegreePreset& preset, std::span<const std::size_t> sizes,
                               double s1, double s2);

struct CounterexamplePreset {
  ModelParams params;
  std::vector<std::size_t> sizes;
};

// Three communities |C1| = |C2| = small_size, |C3| = n - 2 small_size with
// p11 = p22 = p33 = p12 = p23 = 5 log n / n, p13 = log n / sqrt n, s1 = s2 = 2/3.
CounterexamplePreset preset_appendix_b(std::size_t n, std::size_t small_size = 5);

}  // namespace deanon
