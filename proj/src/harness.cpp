#include "deanon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "deanon/error.hpp"
#include "deanon/rng.hpp"
#include "deanon/sbm.hpp"
#include "deanon/theory.hpp"

namespace deanon {

// ---- ingestion -------------------------------------------------------------

namespace {

struct TokenLine {
  std::size_t line = 0;
  std::string first;
  std::string second;
};

// Two whitespace-separated tokens per line; blank lines and '#' comments are
// skipped.
std::vector<TokenLine> read_pairs(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open '" + path + "'");
  std::vector<TokenLine> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    const auto start = text.find_first_not_of(" \t");
    if (start == std::string::npos || text[start] == '#') continue;
    std::istringstream fields(text);
    TokenLine t{line, {}, {}};
    std::string extra;
    if (!(fields >> t.first >> t.second) || (fields >> extra)) {
      throw Error(path + ":" + std::to_string(line) + ": expected two tokens");
    }
    out.push_back(std::move(t));
  }
  return out;
}

struct Interned {
  std::vector<std::string> tokens;
  std::unordered_map<std::string, NodeId> ids;
};

// Nodes are numbered in the order the community file lists them.
CommunityAssignment read_communities(const std::string& path, Interned& nodes,
                                     std::vector<std::string>& label_names,
                                     bool extend_labels) {
  std::unordered_map<std::string, int> label_ids;
  for (std::size_t a = 0; a < label_names.size(); ++a) label_ids[label_names[a]] = static_cast<int>(a + 1);
  std::vector<int> labels;
  for (const auto& t : read_pairs(path)) {
    const std::string where = path + ":" + std::to_string(t.line) + ": ";
    require(!nodes.ids.count(t.first), where + "node '" + t.first + "' listed twice");
    auto it = label_ids.find(t.second);
    if (it == label_ids.end()) {
      require(extend_labels, where + "community '" + t.second + "' does not occur in g1");
      label_names.push_back(t.second);
      it = label_ids.emplace(t.second, static_cast<int>(label_names.size())).first;
    }
    nodes.ids.emplace(t.first, static_cast<NodeId>(nodes.tokens.size()));
    nodes.tokens.push_back(t.first);
    labels.push_back(it->second);
  }
  require(!labels.empty(), path + ": no nodes");
  return CommunityAssignment(std::move(labels), static_cast<int>(label_names.size()), label_names);
}

Graph read_edges(const std::string& path, const Interned& nodes, std::vector<std::string>& warnings) {
  Graph g(nodes.tokens.size());
  std::size_t duplicates = 0;
  std::size_t loops = 0;
  for (const auto& t : read_pairs(path)) {
    const std::string where = path + ":" + std::to_string(t.line) + ": ";
    const auto u = nodes.ids.find(t.first);
    const auto v = nodes.ids.find(t.second);
    require(u != nodes.ids.end(), where + "node '" + t.first + "' has no community");
    require(v != nodes.ids.end(), where + "node '" + t.second + "' has no community");
    if (u->second == v->second) {
      ++loops;
      continue;
    }
    if (!g.add_edge(u->second, v->second)) ++duplicates;
  }
  if (duplicates) warnings.push_back(path + ": collapsed " + std::to_string(duplicates) + " duplicate edges");
  if (loops) warnings.push_back(path + ": dropped " + std::to_string(loops) + " self-loops");
  return g;
}

Mapping read_truth(const std::string& path, const Interned& nodes1, const Interned& nodes2) {
  const std::size_t n = nodes1.tokens.size();
  constexpr NodeId kUnset = static_cast<NodeId>(-1);
  std::vector<NodeId> f(n, kUnset);
  std::vector<bool> hit(n, false);
  for (const auto& t : read_pairs(path)) {
    const std::string where = path + ":" + std::to_string(t.line) + ": ";
    const auto u = nodes1.ids.find(t.first);
    const auto v = nodes2.ids.find(t.second);
    require(u != nodes1.ids.end(), where + "unknown g1 node '" + t.first + "'");
    require(v != nodes2.ids.end(), where + "unknown g2 node '" + t.second + "'");
    require(f[u->second] == kUnset, where + "g1 node '" + t.first + "' mapped twice");
    require(!hit[v->second], where + "g2 node '" + t.second + "' mapped twice");
    f[u->second] = v->second;
    hit[v->second] = true;
  }
  for (std::size_t i = 0; i < n; ++i)
    require(f[i] != kUnset, path + ": g1 node '" + nodes1.tokens[i] + "' is unmapped");
  return Mapping(std::move(f));
}

}  // namespace

ModelParams estimate_affinity(const Graph& g, const CommunityAssignment& c, double s1, double s2) {
  require(g.size() == c.size(), "estimate_affinity: size mismatch");
  const int k = c.kappa();
  std::vector<double> edges(static_cast<std::size_t>(k) * k, 0.0);
  for (const auto& [u, v] : g.edges()) {
    const int a = c.label(u) - 1;
    const int b = c.label(v) - 1;
    edges[a * k + b] += 1.0;
    if (a != b) edges[b * k + a] += 1.0;
  }
  std::vector<double> aff(edges.size());
  for (int a = 0; a < k; ++a) {
    const double na = static_cast<double>(c.community_size(a + 1));
    for (int b = 0; b < k; ++b) {
      const double nb = static_cast<double>(c.community_size(b + 1));
      const double pairs = a == b ? na * (na - 1.0) / 2.0 : na * nb;
      const double p = pairs > 0.0 ? edges[a * k + b] / pairs : 0.0;
      aff[a * k + b] = std::clamp(p, 1e-6, 1.0 - 1e-6);
    }
  }
  return ModelParams(k, std::move(aff), s1, s2);
}

IngestResult ingest(const IngestPaths& paths, const IngestOptions& options) {
  IngestResult result;
  if (!options.s1 || !options.s2) {
    result.warnings.push_back("sampling probabilities not configured; using s1 = s2 = 0.5");
  }
  const double s1 = options.s1.value_or(0.5);
  const double s2 = options.s2.value_or(0.5);

  std::vector<std::string> label_names;
  Interned nodes1;
  const CommunityAssignment c1 = read_communities(paths.communities1, nodes1, label_names, true);
  const Graph g1 = read_edges(paths.edges1, nodes1, result.warnings);
  result.tokens1 = nodes1.tokens;

  if (!paths.edges2) {
    require(!paths.communities2 && !paths.truth,
            "ingest: a second community or truth file needs a second edge file");
    const ModelParams params = estimate_affinity(g1, c1, s1, s2);
    result.instance = make_instance_from_graph(g1, c1, params, options.mode, options.seed);
    std::vector<std::string> permuted(nodes1.tokens.size());
    for (std::size_t i = 0; i < permuted.size(); ++i)
      permuted[(*result.instance.truth)[i]] = nodes1.tokens[i];
    result.tokens2 = std::move(permuted);
    return result;
  }

  Interned nodes2;
  DeanonInstance& inst = result.instance;
  if (paths.communities2) {
    inst.c2 = read_communities(*paths.communities2, nodes2, label_names, false);
  } else {
    require(options.mode == Mode::unilateral,
            "ingest: bilateral mode needs the community file of g2");
    // Without labels, g2's node ids follow first appearance in its edge file.
    for (const auto& t : read_pairs(*paths.edges2)) {
      for (const std::string* tok : {&t.first, &t.second}) {
        if (nodes2.ids.emplace(*tok, static_cast<NodeId>(nodes2.tokens.size())).second)
          nodes2.tokens.push_back(*tok);
      }
    }
  }
  require(nodes2.tokens.size() == nodes1.tokens.size(),
          "ingest: g1 has " + std::to_string(nodes1.tokens.size()) + " nodes but g2 has " +
              std::to_string(nodes2.tokens.size()));
  inst.g1 = g1;
  inst.g2 = read_edges(*paths.edges2, nodes2, result.warnings);
  inst.c1 = c1;
  if (paths.truth) inst.truth = read_truth(*paths.truth, nodes1, nodes2);

  // g1 keeps each underlying edge with probability s1.
  ModelParams est = estimate_affinity(g1, inst.c1, s1, s2);
  std::vector<double> aff(est.affinity().begin(), est.affinity().end());
  for (double& p : aff) p = std::clamp(p / s1, 1e-6, 1.0 - 1e-6);
  inst.params = ModelParams(est.kappa(), std::move(aff), s1, s2);
  inst.weights = WeightMatrix::from_params(inst.params, inst.c1);
  inst.validate();
  result.tokens2 = nodes2.tokens;
  return result;
}

// ---- configuration ---------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == text.size() && !text.empty(), "config: " + key + " expects a number, got '" + text + "'");
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == text.size() && !text.empty() && text[0] != '-',
          "config: " + key + " expects a non-negative integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw Error("config: " + key + " expects true or false, got '" + text + "'");
}

IngestPaths& ingest_paths(RunConfig& cfg) {
  if (!cfg.ingest) cfg.ingest.emplace();
  return *cfg.ingest;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "mode",         "solvers",        "n_list",         "kappa_list",   "s_list",
      "seeds",        "base_seed",      "preset",         "mean_degree",  "p_in",
      "p_out",        "weights",        "ga.population",  "ga.generations", "ga.local_search",
      "qap.inner",    "qap.budget",     "convex.mu",      "convex.max_iter", "convex.tol",
      "convex.nonneg", "out",           "threads",        "theory.constant", "edges",
      "communities",  "edges2",         "communities2",   "truth"};
  return keys;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "mode") {
    cfg.mode = parse_mode(value);
  } else if (key == "solvers") {
    cfg.solvers = split_list(value);
  } else if (key == "n_list") {
    cfg.n_list.clear();
    for (const auto& item : split_list(value)) cfg.n_list.push_back(to_uint(key, item));
  } else if (key == "kappa_list") {
    cfg.kappa_list.clear();
    for (const auto& item : split_list(value))
      cfg.kappa_list.push_back(static_cast<int>(to_uint(key, item)));
  } else if (key == "s_list") {
    cfg.s_list.clear();
    for (const auto& item : split_list(value)) cfg.s_list.push_back(to_double(key, item));
  } else if (key == "seeds") {
    cfg.seeds = to_uint(key, value);
  } else if (key == "base_seed") {
    cfg.base_seed = to_uint(key, value);
  } else if (key == "preset") {
    cfg.preset = value;
  } else if (key == "mean_degree") {
    cfg.mean_degree = to_double(key, value);
  } else if (key == "p_in") {
    cfg.p_in = to_double(key, value);
  } else if (key == "p_out") {
    cfg.p_out = to_double(key, value);
  } else if (key == "weights") {
    if (value == "model") {
      cfg.weights = WeightScheme::model;
    } else if (value == "unit") {
      cfg.weights = WeightScheme::unit;
    } else {
      throw Error("config: weights must be model or unit");
    }
  } else if (key == "ga.population") {
    cfg.ga.population = to_uint(key, value);
  } else if (key == "ga.generations") {
    cfg.ga.generations = to_uint(key, value);
  } else if (key == "ga.local_search") {
    cfg.ga.local_search_passes = to_uint(key, value);
  } else if (key == "qap.inner") {
    cfg.qap_inner = parse_inner_solver(value);
  } else if (key == "qap.budget") {
    cfg.qap_budget = to_uint(key, value);
  } else if (key == "convex.mu") {
    cfg.convex.mu = to_double(key, value);
  } else if (key == "convex.max_iter") {
    cfg.convex.max_iterations = to_uint(key, value);
  } else if (key == "convex.tol") {
    cfg.convex.tolerance = to_double(key, value);
  } else if (key == "convex.nonneg") {
    cfg.convex.nonneg = to_bool(key, value);
  } else if (key == "out") {
    cfg.out = value;
  } else if (key == "threads") {
    cfg.threads = to_uint(key, value);
  } else if (key == "theory.constant") {
    cfg.theory_constant = to_double(key, value);
  } else if (key == "edges") {
    ingest_paths(cfg).edges1 = value;
  } else if (key == "communities") {
    ingest_paths(cfg).communities1 = value;
  } else if (key == "edges2") {
    ingest_paths(cfg).edges2 = value;
  } else if (key == "communities2") {
    ingest_paths(cfg).communities2 = value;
  } else if (key == "truth") {
    ingest_paths(cfg).truth = value;
  } else {
    throw Error("config: unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const auto hash = text.find('#');
    if (hash != std::string::npos) text.erase(hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    require(eq != std::string::npos, "config line " + std::to_string(line) + ": expected key = value");
    try {
      apply_setting(cfg, trim(text.substr(0, eq)), text.substr(eq + 1));
    } catch (const Error& e) {
      throw Error("config line " + std::to_string(line) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "cannot open config '" + path + "'");
  return parse_config(in);
}

void validate(const RunConfig& cfg) {
  require(!cfg.solvers.empty(), "config: at least one solver is required");
  for (const auto& s : cfg.solvers) {
    require(s == "brute" || s == "ga" || s == "qap" || s == "convex",
            "config: unknown solver '" + s + "'");
  }
  require(!cfg.s_list.empty(), "config: s_list is empty");
  for (double s : cfg.s_list) require(s > 0.0 && s < 1.0, "config: sampling probabilities must lie in (0,1)");
  require(cfg.seeds >= 1, "config: seeds must be at least 1");
  require(cfg.threads >= 1, "config: threads must be at least 1");
  if (cfg.ingest) {
    require(!cfg.ingest->edges1.empty() && !cfg.ingest->communities1.empty(),
            "config: ingestion needs both edges and communities");
  } else {
    require(!cfg.n_list.empty() && !cfg.kappa_list.empty(), "config: n_list and kappa_list must be non-empty");
    const std::vector<std::string> presets = {"planted", "poisson", "powerlaw", "exponential", "appendixB"};
    require(std::find(presets.begin(), presets.end(), cfg.preset) != presets.end(),
            "config: unknown preset '" + cfg.preset + "'");
  }
}

// ---- experiment ------------------------------------------------------------

const char* const kCsvHeader =
    "algorithm,mode,n,kappa,s1,s2,seed,accuracy,delta,relative_value,runtime_ms,status";

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

bool ExperimentReport::all_ok() const {
  return std::all_of(rows.begin(), rows.end(),
                     [](const ReportRow& r) { return r.status.rfind("error", 0) != 0; });
}

DeanonInstance build_cell_instance(const RunConfig& cfg, std::size_t n, int kappa, double s,
                                   std::uint64_t seed) {
  const Rng root(seed);
  DeanonInstance inst;
  if (cfg.ingest) {
    IngestOptions opt;
    opt.s1 = s;
    opt.s2 = s;
    opt.mode = cfg.mode;
    opt.seed = root.split("ingest").next_u64();
    inst = ingest(*cfg.ingest, opt).instance;
  } else {
    std::vector<std::size_t> sizes;
    ModelParams params;
    if (cfg.preset == "appendixB") {
      auto preset = preset_appendix_b(n);
      params = preset.params.with_sampling(s, s);
      sizes = preset.sizes;
    } else {
      sizes = jittered_sizes(n, kappa, root.split("sizes").next_u64());
      if (cfg.preset == "planted") {
        params = ModelParams::planted(kappa, cfg.p_in, cfg.p_out, s, s);
      } else {
        params = preset_affinity({parse_degree_family(cfg.preset), cfg.mean_degree, kappa}, sizes, s, s)
                     .params;
      }
    }
    inst = make_instance(params, sizes, cfg.mode, root.split("instance").next_u64());
  }
  if (cfg.weights == WeightScheme::unit) {
    const int k = inst.c1.kappa();
    inst.weights = WeightMatrix(k, std::vector<double>(static_cast<std::size_t>(k) * k, 1.0),
                                {inst.c1.labels().begin(), inst.c1.labels().end()});
  }
  return inst;
}

ReportRow run_solver(const RunConfig& cfg, const std::string& solver, const DeanonInstance& inst,
                     std::uint64_t seed, Mapping* mapping_out) {
  ReportRow row;
  row.algorithm = solver;
  row.mode = cfg.mode;
  row.n = inst.size();
  row.kappa = inst.c1.kappa();
  row.s1 = inst.params.s1();
  row.s2 = inst.params.s2();
  row.seed = seed;
  const Rng root(seed);
  const auto started = std::chrono::steady_clock::now();
  try {
    Mapping mapping;
    if (solver == "brute") {
      auto r = brute_force(inst, cfg.mode);
      mapping = std::move(r.mapping);
      row.delta = r.delta;
    } else if (solver == "ga") {
      GaConfig ga = cfg.ga;
      ga.mode = cfg.mode;
      ga.seed = root.split("ga").next_u64();
      auto r = genetic_algorithm(inst, ga);
      mapping = std::move(r.mapping);
      row.delta = r.delta;
    } else if (solver == "qap") {
      const std::size_t budget = cfg.qap_budget.value_or(default_qap_budget(inst.size()));
      auto r = algorithm1(inst, cfg.mode, cfg.qap_inner, budget, root.split("qap").next_u64());
      mapping = std::move(r.mapping);
      row.delta = r.delta;
    } else if (solver == "convex") {
      auto r = algorithm2(inst, cfg.mode, cfg.convex);
      mapping = std::move(r.mapping);
      row.delta = r.delta;
      if (!r.converged) row.status = "ok;not_converged";
    } else {
      throw Error("unknown solver '" + solver + "'");
    }
    if (inst.truth) row.accuracy = accuracy(mapping, *inst.truth);
    if (mapping_out) *mapping_out = std::move(mapping);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    row.status = "error: " + msg;
    row.delta.reset();
    row.accuracy.reset();
  }
  row.runtime_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return row;
}

namespace {

struct Cell {
  std::size_t n;
  int kappa;
  double s;
  std::uint64_t seed;
};

struct CellResult {
  std::vector<ReportRow> rows;
  DiagnosticRow diag;
};

CellResult run_cell(const RunConfig& cfg, const Cell& cell) {
  CellResult out;
  out.diag.n = cell.n;
  out.diag.kappa = cell.kappa;
  out.diag.s1 = out.diag.s2 = cell.s;
  out.diag.seed = cell.seed;

  DeanonInstance inst;
  try {
    inst = build_cell_instance(cfg, cell.n, cell.kappa, cell.s, cell.seed);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    for (const auto& solver : cfg.solvers) {
      ReportRow row;
      row.algorithm = solver;
      row.mode = cfg.mode;
      row.n = cell.n;
      row.kappa = cell.kappa;
      row.s1 = row.s2 = cell.s;
      row.seed = cell.seed;
      row.status = "error: " + msg;
      out.rows.push_back(std::move(row));
    }
    return out;
  }

  out.diag.n = inst.size();
  out.diag.kappa = inst.c1.kappa();
  try {
    const auto cond = thm41_condition(inst.params, inst.size(), cfg.theory_constant, cfg.mode);
    out.diag.thm41_lhs = cond.lhs;
    out.diag.thm41_rhs = cond.rhs;
    out.diag.thm41_satisfied = cond.satisfied;
    out.diag.appendix_bound = appendixA_bound(inst.params, inst.size());
  } catch (const std::exception&) {
    out.diag.appendix_bound = std::nan("");
  }

  for (const auto& solver : cfg.solvers) out.rows.push_back(run_solver(cfg, solver, inst, cell.seed));

  const auto ga = std::find_if(out.rows.begin(), out.rows.end(),
                               [](const ReportRow& r) { return r.algorithm == "ga"; });
  if (ga != out.rows.end() && ga->delta) {
    for (auto& row : out.rows)
      if (row.delta) row.relative_value = relative_value(*row.delta, *ga->delta);
  }
  return out;
}

}  // namespace

ExperimentReport run_experiment(const RunConfig& cfg) {
  validate(cfg);
  std::vector<Cell> cells;
  // Ingested data fixes n and kappa; the lists are then not iterated.
  const std::vector<std::size_t> ns = cfg.ingest ? std::vector<std::size_t>{0} : cfg.n_list;
  const std::vector<int> ks = cfg.ingest ? std::vector<int>{0} : cfg.kappa_list;
  for (std::size_t n : ns)
    for (int k : ks)
      for (double s : cfg.s_list)
        for (std::size_t t = 0; t < cfg.seeds; ++t) cells.push_back({n, k, s, cfg.base_seed + t});

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) results[i] = run_cell(cfg, cells[i]);
  };
  const std::size_t workers = std::min(cfg.threads, std::max<std::size_t>(cells.size(), 1));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentReport report;
  for (auto& r : results) {
    for (auto& row : r.rows) report.rows.push_back(std::move(row));
    report.diagnostics.push_back(r.diag);
  }
  return report;
}

// ---- CSV -------------------------------------------------------------------

namespace {
std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }
}  // namespace

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.algorithm << ',' << to_string(r.mode) << ',' << r.n << ',' << r.kappa << ','
        << format_double(r.s1) << ',' << format_double(r.s2) << ',' << r.seed << ','
        << optional_field(r.accuracy) << ',' << optional_field(r.delta) << ','
        << optional_field(r.relative_value) << ',' << format_double(r.runtime_ms) << ','
        << r.status << '\n';
  }
}

std::vector<ReportRow> parse_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kCsvHeader, "csv: unexpected header");
  std::vector<ReportRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (int col = 0; col < 11; ++col) {
      const auto comma = line.find(',', start);
      require(comma != std::string::npos, "csv line " + std::to_string(number) + ": too few fields");
      f.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    f.push_back(line.substr(start));  // status may not contain commas
    auto opt = [&](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return std::strtod(s.c_str(), nullptr);
    };
    ReportRow r;
    r.algorithm = f[0];
    r.mode = parse_mode(f[1]);
    r.n = std::stoull(f[2]);
    r.kappa = std::stoi(f[3]);
    r.s1 = std::strtod(f[4].c_str(), nullptr);
    r.s2 = std::strtod(f[5].c_str(), nullptr);
    r.seed = std::stoull(f[6]);
    r.accuracy = opt(f[7]);
    r.delta = opt(f[8]);
    r.relative_value = opt(f[9]);
    r.runtime_ms = std::strtod(f[10].c_str(), nullptr);
    r.status = f[11];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_diagnostics(std::ostream& out, const std::vector<DiagnosticRow>& rows) {
  out << "n,kappa,s1,s2,seed,thm41_lhs,thm41_rhs,thm41_satisfied,appendix_bound\n";
  for (const auto& d : rows) {
    out << d.n << ',' << d.kappa << ',' << format_double(d.s1) << ',' << format_double(d.s2) << ','
        << d.seed << ',' << format_double(d.thm41_lhs) << ',' << format_double(d.thm41_rhs) << ','
        << (d.thm41_satisfied ? 1 : 0) << ',' << format_double(d.appendix_bound) << '\n';
  }
}

}  // namespace deanon
