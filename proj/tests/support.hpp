#pragma once

#include <numeric>
#include <vector>

#include "deanon/graph.hpp"
#include "deanon/instance.hpp"
#include "deanon/rng.hpp"
#include "deanon/sbm.hpp"

namespace deanon::testing {

inline Graph random_graph(std::size_t n, double p, Rng& rng) {
  Graph g(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (rng.bernoulli(p)) g.add_edge(u, v);
  return g;
}

inline Mapping random_mapping(std::size_t n, Rng& rng) {
  std::vector<NodeId> f(n);
  std::iota(f.begin(), f.end(), NodeId{0});
  rng.shuffle(std::span<NodeId>(f));
  return Mapping(std::move(f));
}

// Uniform among mappings that send every node to a g2 node with its label.
inline Mapping random_observing(const CommunityAssignment& c1, const CommunityAssignment& c2,
                                Rng& rng) {
  std::vector<NodeId> f(c1.size());
  for (int a = 1; a <= c1.kappa(); ++a) {
    auto from = c1.members(a);
    auto to = c2.members(a);
    rng.shuffle(std::span<NodeId>(to));
    for (std::size_t t = 0; t < from.size(); ++t) f[from[t]] = to[t];
  }
  return Mapping(std::move(f));
}

// Planted-partition instance with explicit community sizes.
inline DeanonInstance planted_instance(std::vector<std::size_t> sizes, double p_in, double p_out,
                                       double s, Mode mode, std::uint64_t seed) {
  const auto params = ModelParams::planted(static_cast<int>(sizes.size()), p_in, p_out, s, s);
  return make_instance(params, sizes, mode, seed);
}

// g2 is exactly g1 relabelled through the truth, so B~ = X^T A~ X with no
// perturbation. Two communities of 8 with distinct block weights.
inline DeanonInstance zero_perturbation_instance(std::uint64_t seed) {
  auto inst = planted_instance({8, 8}, 0.6, 0.3, 0.9, Mode::bilateral, seed);
  inst.g2 = apply_mapping(inst.g1, *inst.truth);
  return inst;
}

}  // namespace deanon::testing
