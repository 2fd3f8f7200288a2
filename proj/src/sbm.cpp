#include "deanon/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deanon/error.hpp"
#include "deanon/rng.hpp"

namespace deanon {

DegreeFamily parse_degree_family(const std::string& text) {
  if (text == "poisson") return DegreeFamily::poisson;
  if (text == "powerlaw") return DegreeFamily::powerlaw;
  if (text == "exponential") return DegreeFamily::exponential;
  throw Error("unknown degree preset '" + text + "'");
}

SbmSample generate_sbm(const ModelParams& params, std::span<const std::size_t> sizes,
                       std::uint64_t seed) {
  require(sizes.size() == static_cast<std::size_t>(params.kappa()),
          "generate_sbm: one size per community required");
  std::vector<int> labels;
  for (std::size_t a = 0; a < sizes.size(); ++a) {
    require(sizes[a] > 0, "generate_sbm: community " + std::to_string(a + 1) + " is empty");
    labels.insert(labels.end(), sizes[a], static_cast<int>(a + 1));
  }
  const std::size_t n = labels.size();
  require(n > 1, "generate_sbm: need at least two nodes");

  Rng rng(seed);
  Graph g(n);
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      if (rng.bernoulli(params.p(labels[u], labels[v]))) g.add_edge(u, v);
    }
  }
  const int kappa = params.kappa();
  return {std::move(g), CommunityAssignment(std::move(labels), kappa)};
}

Graph sample_edges(const Graph& g, double s, std::uint64_t seed) {
  require(s >= 0.0 && s <= 1.0, "sample_edges: s must lie in [0,1]");
  Rng rng(seed);
  Graph out(g.size());
  for (const auto& [u, v] : g.edges()) {
    if (rng.bernoulli(s)) out.add_edge(u, v);
  }
  return out;
}

std::vector<std::size_t> jittered_sizes(std::size_t n, int kappa, std::uint64_t seed) {
  require(kappa >= 1 && static_cast<std::size_t>(kappa) <= n,
          "jittered_sizes: need 1 <= kappa <= n");
  Rng rng(seed);
  std::vector<double> factor(kappa);
  for (double& f : factor) f = rng.uniform(0.9, 1.1);
  const double total = std::accumulate(factor.begin(), factor.end(), 0.0);

  std::vector<std::size_t> sizes(kappa);
  std::vector<std::pair<double, int>> remainder(kappa);
  std::size_t assigned = 0;
  for (int a = 0; a < kappa; ++a) {
    const double exact = static_cast<double>(n) * factor[a] / total;
    sizes[a] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(exact)));
    remainder[a] = {exact - std::floor(exact), a};
    assigned += sizes[a];
  }
  // Largest remainders get the leftover nodes; ties go to the lowest index.
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t t = 0; assigned < n; ++t, ++assigned) ++sizes[remainder[t % kappa].second];
  for (std::size_t t = 0; assigned > n; ++t) {
    auto& s = sizes[remainder[kappa - 1 - t % kappa].second];
    if (s > 1) {
      --s;
      --assigned;
    }
  }
  return sizes;
}

DeanonInstance make_instance_from_graph(const Graph& underlying, const CommunityAssignment& c,
                                        const ModelParams& params, Mode mode,
                                        std::uint64_t seed) {
  require(underlying.size() == c.size(), "make_instance: communities do not cover the graph");
  const Rng root(seed);
  const std::size_t n = underlying.size();

  DeanonInstance inst;
  inst.g1 = sample_edges(underlying, params.s1(), root.split("sample-g1").next_u64());
  const Graph hidden = sample_edges(underlying, params.s2(), root.split("sample-g2").next_u64());

  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), NodeId{0});
  Rng perm_rng = root.split("truth");
  perm_rng.shuffle(std::span<NodeId>(perm));
  Mapping truth(std::move(perm));

  inst.g2 = apply_mapping(hidden, truth);
  inst.c1 = c;
  if (mode == Mode::bilateral) {
    std::vector<int> labels2(n);
    for (std::size_t i = 0; i < n; ++i) labels2[truth[i]] = c.label(i);
    inst.c2 = CommunityAssignment(std::move(labels2), c.kappa(),
                                  {c.names().begin(), c.names().end()});
  }
  inst.truth = std::move(truth);
  inst.underlying = underlying;
  inst.params = params;
  inst.weights = WeightMatrix::from_params(params, c);
  inst.validate();
  return inst;
}

DeanonInstance make_instance(const ModelParams& params, std::span<const std::size_t> sizes,
                             Mode mode, std::uint64_t seed) {
  const Rng root(seed);
  auto sample = generate_sbm(params, sizes, root.split("sbm").next_u64());
  return make_instance_from_graph(sample.graph, sample.communities, params, mode,
                                  root.split("instance").next_u64());
}

PresetAffinity preset_affinity(const DegreePreset& preset, std::span<const std::size_t> sizes,
                               double s1, double s2) {
  require(preset.target_mean_degree > 0.0, "preset: target mean degree must be positive");
  require(preset.kappa >= 1 && sizes.size() == static_cast<std::size_t>(preset.kappa),
          "preset: one size per community required");
  const int k = preset.kappa;
  const double n = static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}));
  require(n > 1.0, "preset: need at least two nodes");

  std::vector<double> d(k);
  for (int a = 1; a <= k; ++a) {
    switch (preset.family) {
      case DegreeFamily::poisson: d[a - 1] = 1.0; break;
      case DegreeFamily::powerlaw: d[a - 1] = std::pow(static_cast<double>(a), -2.5); break;
      case DegreeFamily::exponential: d[a - 1] = std::exp(-static_cast<double>(a) / 2.0); break;
    }
  }
  double weighted = 0.0;
  for (int a = 0; a < k; ++a) weighted += static_cast<double>(sizes[a]) * d[a];
  const double scale = preset.target_mean_degree * n / weighted;
  for (double& x : d) x *= scale;

  constexpr double kLo = 1e-6;
  constexpr double kHi = 1.0 - 1e-6;
  bool clamped = false;
  std::vector<double> aff(static_cast<std::size_t>(k) * k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      double p = d[a] * d[b] / (preset.target_mean_degree * (n - 1.0));
      if (p >= 1.0) {
        throw Error("preset: infeasible target, affinity p" + std::to_string(a + 1) +
                    std::to_string(b + 1) + " = " + std::to_string(p) + " >= 1");
      }
      if (p < kLo || p > kHi) {
        p = std::clamp(p, kLo, kHi);
        clamped = true;
      }
      aff[a * k + b] = p;
    }
  }
  return {ModelParams(k, std::move(aff), s1, s2), clamped};
}

CounterexamplePreset preset_appendix_b(std::size_t n, std::size_t small_size) {
  require(small_size >= 1 && n > 2 * small_size,
          "counterexample preset: need n > 2C so the third community is non-empty");
  const double nd = static_cast<double>(n);
  const double p_low = 5.0 * std::log(nd) / nd;
  const double p_13 = std::log(nd) / std::sqrt(nd);
  require(p_low < 1.0 && p_13 < 1.0,
          "counterexample preset: n too small, 5 log n / n must be below 1");
  std::vector<double> aff = {p_low, p_low, p_13,  //
                             p_low, p_low, p_low,  //
                             p_13,  p_low, p_low};
  return {ModelParams(3, std::move(aff), 2.0 / 3.0, 2.0 / 3.0),
          {small_size, small_size, n - 2 * small_size}};
}

}  // namespace deanon
