#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "deanon/instance.hpp"
#include "deanon/solver_convex.hpp"
#include "deanon/solver_exact.hpp"
#include "deanon/solver_qap.hpp"

namespace deanon {

// ---- ingestion -------------------------------------------------------------

struct IngestPaths {
  std::string edges1;
  std::string communities1;
  std::optional<std::string> edges2;  // absent: edges1 is the underlying network
  std::optional<std::string> communities2;
  std::optional<std::string> truth;
};

struct IngestOptions {
  std::optional<double> s1;  // default 0.5 with a warning
  std::optional<double> s2;
  Mode mode = Mode::bilateral;
  std::uint64_t seed = 1;  // only used to sample from an underlying network
};

struct IngestResult {
  DeanonInstance instance;
  std::vector<std::string> tokens1;  // original node names, by node id
  std::vector<std::string> tokens2;
  std::vector<std::string> warnings;
};

// p_ab = e_ab / (n_a n_b) for a != b and 2 e_aa / (n_a (n_a - 1)), clamped to
// [1e-6, 1 - 1e-6].
ModelParams estimate_affinity(const Graph& g, const CommunityAssignment& c, double s1, double s2);

// With only edges1/communities1 the file is taken as the underlying network:
// affinities are estimated from it and g1, g2 are sampled from it. With a
// second edge file the pair is used as is; affinities are estimated from g1
// and divided by s1 to undo its sampling.
IngestResult ingest(const IngestPaths& paths, const IngestOptions& options);

// ---- experiment configuration ----------------------------------------------

enum class WeightScheme { model, unit };

inline GaConfig harness_ga_defaults() {
  GaConfig ga;
  ga.population = 30;
  ga.generations = 20;
  ga.local_search_passes = 2;
  return ga;
}

struct RunConfig {
  Mode mode = Mode::bilateral;
  std::vector<std::string> solvers = {"ga"};  // brute, ga, qap, convex
  std::vector<double> s_list = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::vector<std::size_t> n_list = {128};
  std::vector<int> kappa_list = {4};
  std::size_t seeds = 1;
  std::uint64_t base_seed = 1;
  std::string preset = "planted";  // planted, poisson, powerlaw, exponential, appendixB
  double mean_degree = 10.0;
  double p_in = 0.3;
  double p_out = 0.05;
  WeightScheme weights = WeightScheme::model;
  // Memetic by default: the plain GA budget does not get near the planted
  // mapping at n = 128.
  GaConfig ga = harness_ga_defaults();
  InnerSolver qap_inner = InnerSolver::local_search;
  std::optional<std::size_t> qap_budget;
  ConvexConfig convex;
  std::string out;
  std::optional<IngestPaths> ingest;
  std::size_t threads = 1;
  double theory_constant = 1.0;
};

// Keys understood by apply_setting, in documentation order.
const std::vector<std::string>& config_keys();
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
// "key = value" lines; '#' starts a comment.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

// ---- reports ---------------------------------------------------------------

struct ReportRow {
  std::string algorithm;
  Mode mode = Mode::bilateral;
  std::size_t n = 0;
  int kappa = 0;
  double s1 = 0.0;
  double s2 = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> accuracy;
  std::optional<double> delta;
  std::optional<double> relative_value;
  double runtime_ms = 0.0;
  std::string status = "ok";
};

struct DiagnosticRow {
  std::size_t n = 0;
  int kappa = 0;
  double s1 = 0.0;
  double s2 = 0.0;
  std::uint64_t seed = 0;
  double thm41_lhs = 0.0;
  double thm41_rhs = 0.0;
  bool thm41_satisfied = false;
  double appendix_bound = 0.0;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<DiagnosticRow> diagnostics;
  bool all_ok() const;
};

extern const char* const kCsvHeader;

ExperimentReport run_experiment(const RunConfig& cfg);

// Builds the instance of one grid cell (synthetic or ingested).
DeanonInstance build_cell_instance(const RunConfig& cfg, std::size_t n, int kappa, double s,
                                   std::uint64_t seed);

// Runs one named solver on an instance and fills delta, accuracy, status.
ReportRow run_solver(const RunConfig& cfg, const std::string& solver, const DeanonInstance& inst,
                     std::uint64_t seed, Mapping* mapping_out = nullptr);

void write_csv(std::ostream& out, const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_csv(std::istream& in);
void write_diagnostics(std::ostream& out, const std::vector<DiagnosticRow>& rows);

// %.17g, so a parse reproduces the double exactly.
std::string format_double(double x);

}  // namespace deanon
