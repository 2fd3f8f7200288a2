#include "deanon/solver_exact.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cmath>
#include <numeric>

#include "deanon/error.hpp"
#include "deanon/rng.hpp"

namespace deanon {

namespace {

// V2 candidates per V1 node: same-label nodes (bilateral) or everything.
std::vector<std::vector<NodeId>> candidate_images(const DeanonInstance& inst, Mode mode) {
  const std::size_t n = inst.size();
  std::vector<std::vector<NodeId>> out(n);
  if (mode == Mode::unilateral) {
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), NodeId{0});
    std::fill(out.begin(), out.end(), all);
    return out;
  }
  const auto& c2 = inst.require_c2();
  require(c2.kappa() == inst.c1.kappa(), "community tables disagree on kappa");
  for (int a = 1; a <= inst.c1.kappa(); ++a) {
    require(inst.c1.community_size(a) == c2.community_size(a),
            "community " + std::to_string(a) + " has different sizes in g1 and g2");
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = c2.members(inst.c1.label(i));
  return out;
}

double log_factorial(std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace

double brute_force_cardinality(const DeanonInstance& inst, Mode mode) {
  if (mode == Mode::unilateral) return std::exp(log_factorial(inst.size()));
  double log_card = 0.0;
  for (int a = 1; a <= inst.c1.kappa(); ++a) log_card += log_factorial(inst.c1.community_size(a));
  return std::exp(log_card);
}

namespace {
std::string short_count(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}
}  // namespace

SolveResult brute_force(const DeanonInstance& inst, Mode mode, double max_mappings) {
  inst.validate();
  const std::size_t n = inst.size();
  const auto candidates = candidate_images(inst, mode);
  const double card = brute_force_cardinality(inst, mode);
  if (mode == Mode::unilateral) {
    require(n <= 8, "brute_force: unilateral search limited to n <= 8 (" + short_count(card) +
                        " mappings requested)");
  }
  require(card <= max_mappings, "brute_force: search space of " + short_count(card) +
                                    " mappings exceeds the cap of " + short_count(max_mappings));

  const int k = inst.weights.kappa();
  const auto& w = inst.weights;
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(k) * k, 0);
  std::vector<NodeId> forward(n);
  std::vector<bool> used(n, false);
  std::vector<NodeId> best_forward;
  double best = std::numeric_limits<double>::infinity();

  auto fires = [mode](bool a, bool b) { return mode == Mode::bilateral ? a != b : (!a && b); };

  // Depth-first in ascending candidate order visits forward arrays
  // lexicographically, so keeping only strict improvements breaks ties toward
  // the smallest array.
  std::vector<std::size_t> touched;
  touched.reserve(n * n);
  auto dfs = [&](auto&& self, std::size_t i) -> void {
    if (i == n) {
      const double value = sum_weighted_counts(counts, w);
      if (value < best) {
        best = value;
        best_forward = forward;
      }
      return;
    }
    for (NodeId img : candidates[i]) {
      if (used[img]) continue;
      used[img] = true;
      forward[i] = img;
      const std::size_t mark = touched.size();
      for (NodeId j = 0; j < i; ++j) {
        if (fires(inst.g1.has_edge(j, static_cast<NodeId>(i)), inst.g2.has_edge(forward[j], img))) {
          const std::size_t slot = static_cast<std::size_t>(w.label(j) - 1) * k + (w.label(i) - 1);
          ++counts[slot];
          touched.push_back(slot);
        }
      }
      self(self, i + 1);
      while (touched.size() > mark) {
        --counts[touched.back()];
        touched.pop_back();
      }
      used[img] = false;
    }
  };
  dfs(dfs, 0);
  require(!best_forward.empty() || n == 0, "brute_force: no feasible mapping");
  return {Mapping(std::move(best_forward)), best};
}

SwapEvaluator::SwapEvaluator(const DeanonInstance& inst, Mode mode)
    : inst_(&inst), mode_(mode), dense_weights_(inst.size() * inst.size()) {
  const std::size_t n = inst.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) dense_weights_[i * n + j] = inst.weights.at(i, j);
  words_ = (n + 63) / 64;
  kappa_ = inst.weights.kappa();
  labels_.resize(n);
  for (std::size_t i = 0; i < n; ++i) labels_[i] = inst.weights.label(i) - 1;
  table_.resize(static_cast<std::size_t>(kappa_) * kappa_);
  for (int a = 0; a < kappa_; ++a)
    for (int b = 0; b < kappa_; ++b) table_[a * kappa_ + b] = inst.weights.community_weight(a + 1, b + 1);
  masks_.assign(static_cast<std::size_t>(kappa_) * words_, 0);
  for (std::size_t i = 0; i < n; ++i) masks_[labels_[i] * words_ + (i >> 6)] |= 1ULL << (i & 63);
}

double SwapEvaluator::cost(std::span<const NodeId> f) const {
  const std::size_t n = inst_->size();
  double total = 0.0;
  for (NodeId i = 0; i < n; ++i) {
    const double* wi = dense_weights_.data() + i * n;
    for (NodeId j = i + 1; j < n; ++j) {
      if (fires(inst_->g1.has_edge(i, j), inst_->g2.has_edge(f[i], f[j]))) total += wi[j];
    }
  }
  return total;
}

double SwapEvaluator::swap_delta(std::span<const NodeId> f, NodeId u, NodeId v) const {
  const std::size_t n = inst_->size();
  const Graph& a = inst_->g1;
  const Graph& b = inst_->g2;
  const NodeId fu = f[u];
  const NodeId fv = f[v];
  const double* wu = dense_weights_.data() + u * n;
  const double* wv = dense_weights_.data() + v * n;
  double d = 0.0;
  for (NodeId j = 0; j < n; ++j) {
    if (j == u || j == v) continue;
    const NodeId fj = f[j];
    const bool auj = a.has_edge(u, j);
    const bool avj = a.has_edge(v, j);
    const bool bu = b.has_edge(fu, fj);
    const bool bv = b.has_edge(fv, fj);
    if (bu != bv) {
      d += wu[j] * (static_cast<int>(fires(auj, bv)) - static_cast<int>(fires(auj, bu)));
      d += wv[j] * (static_cast<int>(fires(avj, bu)) - static_cast<int>(fires(avj, bv)));
    }
  }
  return d;
}

void SwapEvaluator::bind(std::span<const NodeId> f) {
  const std::size_t n = inst_->size();
  const Graph& b = inst_->g2;
  pulled_.assign(n * words_, 0);
  for (NodeId i = 0; i < n; ++i) {
    std::uint64_t* row = pulled_.data() + i * words_;
    for (NodeId j = 0; j < n; ++j)
      if (b.has_edge(f[i], f[j])) row[j >> 6] |= 1ULL << (j & 63);
  }
}

double SwapEvaluator::bound_cost() const {
  const std::size_t n = inst_->size();
  const Graph& a = inst_->g1;
  double total = 0.0;
  std::vector<long> counts(kappa_);
  for (NodeId i = 0; i < n; ++i) {
    const auto arow = a.row(i);
    const std::uint64_t* prow = pulled_.data() + i * words_;
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t t = 0; t < words_; ++t) {
      const std::uint64_t hit = fires(arow[t], prow[t]);
      for (int c = 0; c < kappa_; ++c) counts[c] += std::popcount(hit & masks_[c * words_ + t]);
    }
    for (int c = 0; c < kappa_; ++c) total += table_[labels_[i] * kappa_ + c] * static_cast<double>(counts[c]);
  }
  return 0.5 * total;  // every pair was seen from both ends
}

double SwapEvaluator::bound_swap_delta(NodeId u, NodeId v) const {
  const auto au = inst_->g1.row(u);
  const auto av = inst_->g1.row(v);
  const std::uint64_t* pu = pulled_.data() + u * words_;
  const std::uint64_t* pv = pulled_.data() + v * words_;
  // Per community: (fires after - fires before) seen from u and from v.
  long du[64] = {}, dv[64] = {};
  std::vector<long> du_big, dv_big;
  long* cu = du;
  long* cv = dv;
  if (kappa_ > 64) {
    du_big.assign(kappa_, 0);
    dv_big.assign(kappa_, 0);
    cu = du_big.data();
    cv = dv_big.data();
  }
  for (std::size_t t = 0; t < words_; ++t) {
    std::uint64_t keep = ~0ULL;
    if ((u >> 6) == t) keep &= ~(1ULL << (u & 63));
    if ((v >> 6) == t) keep &= ~(1ULL << (v & 63));
    const std::uint64_t gain_u = fires(au[t], pv[t]) & keep, loss_u = fires(au[t], pu[t]) & keep;
    const std::uint64_t gain_v = fires(av[t], pu[t]) & keep, loss_v = fires(av[t], pv[t]) & keep;
    if (!((gain_u ^ loss_u) | (gain_v ^ loss_v))) continue;
    for (int c = 0; c < kappa_; ++c) {
      const std::uint64_t m = masks_[c * words_ + t];
      cu[c] += std::popcount(gain_u & m) - std::popcount(loss_u & m);
      cv[c] += std::popcount(gain_v & m) - std::popcount(loss_v & m);
    }
  }
  const double* wu = table_.data() + labels_[u] * kappa_;
  const double* wv = table_.data() + labels_[v] * kappa_;
  double d = 0.0;
  for (int c = 0; c < kappa_; ++c) d += wu[c] * static_cast<double>(cu[c]) + wv[c] * static_cast<double>(cv[c]);
  return d;
}

void SwapEvaluator::apply_swap(NodeId u, NodeId v) {
  const std::size_t n = inst_->size();
  std::swap_ranges(pulled_.begin() + u * words_, pulled_.begin() + (u + 1) * words_,
                   pulled_.begin() + v * words_);
  const std::size_t wu = u >> 6, wv = v >> 6;
  const std::uint64_t bu = 1ULL << (u & 63), bv = 1ULL << (v & 63);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t* row = pulled_.data() + i * words_;
    const bool hu = row[wu] & bu, hv = row[wv] & bv;
    if (hu == hv) continue;
    row[wu] ^= bu;
    row[wv] ^= bv;
  }
}

namespace {

struct Block {
  std::vector<NodeId> positions;  // V1 nodes, ascending
  std::vector<NodeId> values;     // admissible V2 images
};

std::vector<Block> make_blocks(const DeanonInstance& inst, Mode mode) {
  const std::size_t n = inst.size();
  std::vector<Block> blocks;
  if (mode == Mode::unilateral) {
    Block all;
    all.positions.resize(n);
    std::iota(all.positions.begin(), all.positions.end(), NodeId{0});
    all.values = all.positions;
    blocks.push_back(std::move(all));
    return blocks;
  }
  const auto& c2 = inst.require_c2();
  for (int a = 1; a <= inst.c1.kappa(); ++a) {
    Block b{inst.c1.members(a), c2.members(a)};
    require(b.positions.size() == b.values.size(),
            "community " + std::to_string(a) + " has different sizes in g1 and g2");
    blocks.push_back(std::move(b));
  }
  return blocks;
}

// Order crossover on one block: a slice of `first` is kept in place and the
// remaining slots are filled in the order the values appear in `second`,
// starting right after the slice.
void order_crossover(const Block& block, std::span<const NodeId> first,
                     std::span<const NodeId> second, std::span<NodeId> child,
                     std::vector<char>& taken, Rng& rng) {
  const std::size_t len = block.positions.size();
  if (len < 2) {
    for (NodeId p : block.positions) child[p] = first[p];
    return;
  }
  std::size_t lo = rng.index(len);
  std::size_t hi = rng.index(len);
  if (lo > hi) std::swap(lo, hi);
  for (std::size_t t = lo; t <= hi; ++t) {
    const NodeId p = block.positions[t];
    child[p] = first[p];
    taken[first[p]] = 1;
  }
  std::size_t write = (hi + 1) % len;
  for (std::size_t step = 0; step < len; ++step) {
    const NodeId value = second[block.positions[(hi + 1 + step) % len]];
    if (taken[value]) continue;
    child[block.positions[write]] = value;
    write = (write + 1) % len;
  }
  for (std::size_t t = lo; t <= hi; ++t) taken[first[block.positions[t]]] = 0;
}

struct Individual {
  std::vector<NodeId> genes;
  double delta = 0.0;
};

}  // namespace

GaResult genetic_algorithm(const DeanonInstance& inst, const GaConfig& cfg) {
  require(cfg.population >= 2, "GA: population must be at least 2");
  require(cfg.tournament_size >= 1, "GA: tournament size must be positive");
  require(cfg.crossover_rate >= 0.0 && cfg.crossover_rate <= 1.0 && cfg.mutation_rate >= 0.0 &&
              cfg.mutation_rate <= 1.0,
          "GA: rates must lie in [0,1]");
  require(cfg.elitism < cfg.population, "GA: elitism must be below the population size");
  inst.validate();
  const std::size_t n = inst.size();
  const auto blocks = make_blocks(inst, cfg.mode);
  SwapEvaluator eval(inst, cfg.mode);

  // Mutation picks a position among blocks that can actually be permuted.
  std::vector<std::pair<std::size_t, std::size_t>> swappable;  // (block, slot)
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].positions.size() < 2) continue;
    for (std::size_t t = 0; t < blocks[b].positions.size(); ++t) swappable.emplace_back(b, t);
  }

  Rng rng(cfg.seed);

  auto refine = [&](Individual& ind) {
    if (cfg.local_search_passes == 0) {
      ind.delta = eval.cost(ind.genes);
      return;
    }
    eval.bind(ind.genes);
    ind.delta = eval.bound_cost();
    for (std::size_t pass = 0; pass < cfg.local_search_passes; ++pass) {
      bool improved = false;
      for (const Block& block : blocks) {
        const std::size_t len = block.positions.size();
        for (std::size_t s = 0; s < len; ++s) {
          for (std::size_t t = s + 1; t < len; ++t) {
            const NodeId u = block.positions[s];
            const NodeId v = block.positions[t];
            const double d = eval.bound_swap_delta(u, v);
            if (d < -1e-12) {
              std::swap(ind.genes[u], ind.genes[v]);
              eval.apply_swap(u, v);
              ind.delta += d;
              improved = true;
            }
          }
        }
      }
      if (!improved) break;
    }
  };

  std::vector<Individual> pop(cfg.population);
  for (auto& ind : pop) {
    ind.genes.assign(n, 0);
    for (const Block& block : blocks) {
      std::vector<NodeId> values = block.values;
      rng.shuffle(std::span<NodeId>(values));
      for (std::size_t t = 0; t < values.size(); ++t) ind.genes[block.positions[t]] = values[t];
    }
    refine(ind);
  }

  auto better = [&](std::size_t x, std::size_t y) {
    return pop[x].delta < pop[y].delta || (pop[x].delta == pop[y].delta && x < y);
  };
  std::size_t best_index = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (better(i, best_index)) best_index = i;
  Individual best = pop[best_index];

  auto tournament = [&]() -> std::size_t {
    std::size_t winner = rng.index(pop.size());
    for (std::size_t t = 1; t < cfg.tournament_size; ++t) {
      const std::size_t challenger = rng.index(pop.size());
      if (better(challenger, winner)) winner = challenger;
    }
    return winner;
  };

  GaResult result;
  result.best_trace.reserve(cfg.generations);
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> order(pop.size());

  for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), better);

    std::vector<Individual> next;
    next.reserve(cfg.population);
    for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);

    while (next.size() < cfg.population) {
      const std::size_t p1 = tournament();
      const std::size_t p2 = tournament();
      Individual children[2] = {pop[p1], pop[p2]};
      if (rng.uniform() < cfg.crossover_rate) {
        for (const Block& block : blocks) {
          order_crossover(block, pop[p1].genes, pop[p2].genes, children[0].genes, taken, rng);
          order_crossover(block, pop[p2].genes, pop[p1].genes, children[1].genes, taken, rng);
        }
      }
      for (Individual& child : children) {
        if (rng.uniform() < cfg.mutation_rate && !swappable.empty()) {
          const auto [b, s] = swappable[rng.index(swappable.size())];
          const std::size_t len = blocks[b].positions.size();
          std::size_t t = rng.index(len - 1);
          if (t >= s) ++t;
          std::swap(child.genes[blocks[b].positions[s]], child.genes[blocks[b].positions[t]]);
        }
        refine(child);  // also evaluates
        if (next.size() < cfg.population) next.push_back(std::move(child));
      }
    }
    pop = std::move(next);
    for (const auto& ind : pop) {
      if (ind.delta < best.delta) best = ind;
    }
    result.best_trace.push_back(best.delta);
  }

  result.mapping = Mapping(best.genes);
  result.delta = inst.cost(cfg.mode, result.mapping);
  return result;
}

}  // namespace deanon
