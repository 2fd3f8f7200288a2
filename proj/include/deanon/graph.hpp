#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace deanon {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

enum class Mode { bilateral, unilateral };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

// Undirected simple graph over nodes 0..n-1, stored as bit-packed dense rows.
class Graph {
 public:
  static constexpr std::size_t kMaxNodes = 16384;

  Graph() = default;
  explicit Graph(std::size_t n);

  static Graph from_edges(std::size_t n, std::span<const Edge> edges);

  std::size_t size() const { return n_; }
  std::size_t edge_count() const { return edge_count_; }

  bool has_edge(NodeId u, NodeId v) const {
    return (bits_[u * words_ + (v >> 6)] >> (v & 63)) & 1ULL;
  }

  // Returns false when the edge already existed. Self-loops are rejected.
  bool add_edge(NodeId u, NodeId v);

  std::span<const std::uint64_t> row(NodeId u) const {
    return {bits_.data() + u * words_, words_};
  }

  std::size_t degree(NodeId u) const;

  // Edges with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  bool operator==(const Graph& other) const = default;

 private:
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::size_t edge_count_ = 0;
  std::vector<std::uint64_t> bits_;
};

// Bijection V1 -> V2; forward[i] is the image of node i.
class Mapping {
 public:
  Mapping() = default;
  explicit Mapping(std::vector<NodeId> forward);

  static Mapping identity(std::size_t n);

  std::size_t size() const { return forward_.size(); }
  NodeId operator[](std::size_t i) const { return forward_[i]; }
  std::span<const NodeId> forward() const { return forward_; }

  // Permutation-matrix view: entry (i, k) is 1 iff forward[i] == k.
  int matrix_entry(std::size_t i, std::size_t k) const { return forward_[i] == k ? 1 : 0; }

  bool operator==(const Mapping& other) const = default;
  auto operator<=>(const Mapping& other) const = default;

 private:
  std::vector<NodeId> forward_;
};

bool is_permutation(std::span<const NodeId> forward);

// Community labels are dense integers 1..kappa. Interned string labels keep
// their original names in `names` (names[a-1] is the name of label a).
class CommunityAssignment {
 public:
  CommunityAssignment() = default;
  CommunityAssignment(std::vector<int> labels, int kappa, std::vector<std::string> names = {});

  std::size_t size() const { return labels_.size(); }
  int kappa() const { return kappa_; }
  int label(std::size_t node) const { return labels_[node]; }
  std::span<const int> labels() const { return labels_; }
  std::size_t community_size(int label) const { return sizes_[label - 1]; }
  std::span<const std::size_t> sizes() const { return sizes_; }
  std::span<const std::string> names() const { return names_; }

  // Nodes carrying `label`, ascending.
  std::vector<NodeId> members(int label) const;

  bool operator==(const CommunityAssignment& other) const {
    return labels_ == other.labels_ && kappa_ == other.kappa_;
  }

 private:
  std::vector<int> labels_;
  int kappa_ = 0;
  std::vector<std::size_t> sizes_;
  std::vector<std::string> names_;
};

// Affinity matrix {p_ab} plus sampling probabilities s1, s2.
class ModelParams {
 public:
  ModelParams() = default;
  // `affinity` is row-major kappa x kappa.
  ModelParams(int kappa, std::vector<double> affinity, double s1, double s2);

  static ModelParams uniform(double p, double s1, double s2);
  static ModelParams planted(int kappa, double p_in, double p_out, double s1, double s2);

  int kappa() const { return kappa_; }
  double p(int a, int b) const { return affinity_[(a - 1) * kappa_ + (b - 1)]; }
  std::span<const double> affinity() const { return affinity_; }
  double s1() const { return s1_; }
  double s2() const { return s2_; }

  double alpha() const;  // min p_ab
  double beta() const;   // max p_ab
  double gamma() const;  // log(alpha) / log(beta)

  ModelParams with_sampling(double s1, double s2) const {
    return ModelParams(kappa_, affinity_, s1, s2);
  }

 private:
  int kappa_ = 0;
  std::vector<double> affinity_;
  double s1_ = 0.5;
  double s2_ = 0.5;
};

Graph apply_mapping(const Graph& g, const Mapping& m);
Mapping invert(const Mapping& m);
Mapping compose(const Mapping& first, const Mapping& second);  // second ∘ first
bool observes_communities(const Mapping& m, const CommunityAssignment& c1,
                          const CommunityAssignment& c2);
// Count of nodes i with c1(i) != c2(m(i)).
std::size_t count_violations(const Mapping& m, const CommunityAssignment& c1,
                             const CommunityAssignment& c2);

}  // namespace deanon
