#include "deanon/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "deanon/error.hpp"

namespace deanon {

std::string to_string(Mode mode) {
  return mode == Mode::bilateral ? "bilateral" : "unilateral";
}

Mode parse_mode(const std::string& text) {
  if (text == "bilateral" || text == "bi") return Mode::bilateral;
  if (text == "unilateral" || text == "uni") return Mode::unilateral;
  throw Error("unknown mode '" + text + "' (expected bilateral or unilateral)");
}

Graph::Graph(std::size_t n) : n_(n), words_((n + 63) / 64), bits_(n * ((n + 63) / 64), 0) {
  require(n <= kMaxNodes, "graph too large for dense representation: n=" + std::to_string(n));
}

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges) {
  Graph g(n);
  for (const auto& [u, v] : edges) g.add_edge(u, v);
  return g;
}

bool Graph::add_edge(NodeId u, NodeId v) {
  require(u < n_ && v < n_, "edge endpoint out of range");
  require(u != v, "self-loops are not allowed");
  if (has_edge(u, v)) return false;
  bits_[u * words_ + (v >> 6)] |= 1ULL << (v & 63);
  bits_[v * words_ + (u >> 6)] |= 1ULL << (u & 63);
  ++edge_count_;
  return true;
}

std::size_t Graph::degree(NodeId u) const {
  std::size_t d = 0;
  for (std::uint64_t w : row(u)) d += static_cast<std::size_t>(std::popcount(w));
  return d;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (NodeId u = 0; u < n_; ++u) {
    for (NodeId v = u + 1; v < n_; ++v) {
      if (has_edge(u, v)) out.emplace_back(u, v);
    }
  }
  return out;
}

bool is_permutation(std::span<const NodeId> forward) {
  std::vector<bool> seen(forward.size(), false);
  for (NodeId k : forward) {
    if (k >= forward.size() || seen[k]) return false;
    seen[k] = true;
  }
  return true;
}

Mapping::Mapping(std::vector<NodeId> forward) : forward_(std::move(forward)) {
  require(is_permutation(forward_), "mapping is not a bijection");
}

Mapping Mapping::identity(std::size_t n) {
  std::vector<NodeId> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = static_cast<NodeId>(i);
  return Mapping(std::move(f));
}

CommunityAssignment::CommunityAssignment(std::vector<int> labels, int kappa,
                                         std::vector<std::string> names)
    : labels_(std::move(labels)), kappa_(kappa), sizes_(kappa > 0 ? kappa : 0, 0),
      names_(std::move(names)) {
  require(kappa >= 1, "community count must be at least 1");
  for (int a : labels_) {
    require(a >= 1 && a <= kappa, "community label " + std::to_string(a) + " outside 1.." +
                                      std::to_string(kappa));
    ++sizes_[a - 1];
  }
  for (int a = 1; a <= kappa; ++a) {
    require(sizes_[a - 1] > 0, "community " + std::to_string(a) + " is empty");
  }
  require(names_.empty() || names_.size() == static_cast<std::size_t>(kappa),
          "community name dictionary has the wrong size");
}

std::vector<NodeId> CommunityAssignment::members(int label) const {
  std::vector<NodeId> out;
  out.reserve(community_size(label));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

ModelParams::ModelParams(int kappa, std::vector<double> affinity, double s1, double s2)
    : kappa_(kappa), affinity_(std::move(affinity)), s1_(s1), s2_(s2) {
  require(kappa >= 1, "community count must be at least 1");
  require(affinity_.size() == static_cast<std::size_t>(kappa) * kappa,
          "affinity matrix must be kappa x kappa");
  for (int a = 1; a <= kappa; ++a) {
    for (int b = 1; b <= kappa; ++b) {
      const double pab = p(a, b);
      require(pab > 0.0 && pab < 1.0, "affinity values must lie strictly in (0,1)");
      require(pab == p(b, a), "affinity matrix must be symmetric");
    }
  }
  require(s1 > 0.0 && s1 < 1.0 && s2 > 0.0 && s2 < 1.0,
          "sampling probabilities must lie strictly in (0,1)");
}

ModelParams ModelParams::uniform(double p, double s1, double s2) {
  return ModelParams(1, {p}, s1, s2);
}

ModelParams ModelParams::planted(int kappa, double p_in, double p_out, double s1, double s2) {
  std::vector<double> aff(static_cast<std::size_t>(kappa) * kappa, p_out);
  for (int a = 0; a < kappa; ++a) aff[a * kappa + a] = p_in;
  return ModelParams(kappa, std::move(aff), s1, s2);
}

double ModelParams::alpha() const { return *std::min_element(affinity_.begin(), affinity_.end()); }
double ModelParams::beta() const { return *std::max_element(affinity_.begin(), affinity_.end()); }
double ModelParams::gamma() const { return std::log(alpha()) / std::log(beta()); }

Graph apply_mapping(const Graph& g, const Mapping& m) {
  require(g.size() == m.size(), "apply_mapping: size mismatch");
  Graph out(g.size());
  for (const auto& [u, v] : g.edges()) out.add_edge(m[u], m[v]);
  return out;
}

Mapping invert(const Mapping& m) {
  std::vector<NodeId> inv(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) inv[m[i]] = static_cast<NodeId>(i);
  return Mapping(std::move(inv));
}

Mapping compose(const Mapping& first, const Mapping& second) {
  require(first.size() == second.size(), "compose: size mismatch");
  std::vector<NodeId> f(first.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = second[first[i]];
  return Mapping(std::move(f));
}

std::size_t count_violations(const Mapping& m, const CommunityAssignment& c1,
                             const CommunityAssignment& c2) {
  require(m.size() == c1.size() && m.size() == c2.size(),
          "community check: size mismatch");
  std::size_t bad = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (c1.label(i) != c2.label(m[i])) ++bad;
  }
  return bad;
}

bool observes_communities(const Mapping& m, const CommunityAssignment& c1,
                          const CommunityAssignment& c2) {
  return count_violations(m, c1, c2) == 0;
}

}  // namespace deanon
