#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "deanon/error.hpp"
#include "deanon/harness.hpp"

using namespace deanon;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("deanon_harness_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drops the runtime column so two reports can be compared.
std::string without_runtime(const std::vector<ReportRow>& rows) {
  std::vector<ReportRow> copy = rows;
  for (auto& r : copy) r.runtime_ms = 0.0;
  std::ostringstream out;
  write_csv(out, copy);
  return out.str();
}

RunConfig small_config() {
  RunConfig cfg;
  cfg.n_list = {24};
  cfg.kappa_list = {2};
  cfg.s_list = {0.8};
  cfg.ga.population = 20;
  cfg.ga.generations = 10;
  cfg.convex.max_iterations = 100;
  return cfg;
}

}  // namespace

TEST_CASE("ingest a single underlying network") {
  TempDir dir;
  IngestPaths paths;
  paths.edges1 = dir.write("path.edges", "# a path\n1 2\n2 3\n");
  paths.communities1 = dir.write("path.comm", "1 1\n2 1\n3 1\n");
  IngestOptions opt;
  opt.s1 = 0.9;
  opt.s2 = 0.9;
  const auto r = ingest(paths, opt);
  REQUIRE(r.instance.underlying);
  const Edge e[] = {{0, 1}, {1, 2}};
  CHECK(*r.instance.underlying == Graph::from_edges(3, e));
  CHECK(r.instance.c1.kappa() == 1);
  CHECK(r.warnings.empty());
  CHECK(r.tokens1 == std::vector<std::string>{"1", "2", "3"});
  // The tokens of g2 follow the hidden relabelling.
  for (NodeId i = 0; i < 3; ++i) CHECK(r.tokens2[(*r.instance.truth)[i]] == r.tokens1[i]);
}

TEST_CASE("ingest a labelled pair") {
  TempDir dir;
  IngestPaths paths;
  paths.edges1 = dir.write("g1.edges", "a b\nb c\nc d\na a\nb a\n");
  paths.communities1 = dir.write("g1.comm", "a cs\nb cs\nc bio\nd bio\n");
  paths.edges2 = dir.write("g2.edges", "x y\ny z\nz w\n");
  paths.communities2 = dir.write("g2.comm", "x cs\ny cs\nz bio\nw bio\n");
  paths.truth = dir.write("truth", "a x\nb y\nc z\nd w\n");
  const auto r = ingest(paths, IngestOptions{});
  const auto& inst = r.instance;
  CHECK(inst.c1.kappa() == 2);
  CHECK(inst.c1.names()[0] == "cs");
  CHECK(inst.c1.names()[1] == "bio");
  CHECK(inst.c2->label(2) == 2);
  CHECK(inst.g1.edge_count() == 3);
  CHECK(*inst.truth == Mapping::identity(4));
  CHECK(inst.cost(Mode::bilateral, *inst.truth) == 0.0);
  // Default sampling, a duplicate edge and a self-loop.
  CHECK(r.warnings.size() == 3);
  // p_11 estimated from g1 is one edge out of one pair, divided by s1 = 0.5.
  CHECK(inst.params.p(1, 1) == doctest::Approx(1.0 - 1e-6));
  CHECK(inst.params.p(1, 2) == doctest::Approx(0.25 / 0.5));
}

TEST_CASE("affinity estimator") {
  // Two blocks of four; six edges between them, none inside.
  std::vector<Edge> e;
  for (NodeId u = 0; u < 4; ++u)
    for (NodeId v = 4; v < 8 && e.size() < 6; ++v) e.push_back({u, v});
  const Graph g = Graph::from_edges(8, e);
  const CommunityAssignment c({1, 1, 1, 1, 2, 2, 2, 2}, 2);
  const auto params = estimate_affinity(g, c, 0.5, 0.5);
  CHECK(params.p(1, 2) == doctest::Approx(0.375));
  CHECK(params.p(1, 1) == 1e-6);
}

TEST_CASE("ingest errors") {
  TempDir dir;
  IngestPaths paths;
  paths.communities1 = dir.write("c", "1 a\n2 a\n3 b\n");
  SUBCASE("bad line reports file and line") {
    paths.edges1 = dir.write("e", "1 2\n\n2 3 4\n");
    try {
      (void)ingest(paths, {});
      FAIL("expected an error");
    } catch (const Error& err) {
      CHECK(std::string(err.what()).find(":3:") != std::string::npos);
    }
  }
  SUBCASE("unknown node") {
    paths.edges1 = dir.write("e", "1 9\n");
    CHECK_THROWS_AS(ingest(paths, {}), Error);
  }
  SUBCASE("unmapped truth node") {
    paths.edges1 = dir.write("e", "1 2\n");
    paths.edges2 = dir.write("e2", "x y\n");
    paths.communities2 = dir.write("c2", "x a\ny a\nz b\n");
    paths.truth = dir.write("t", "1 x\n2 y\n");
    CHECK_THROWS_AS(ingest(paths, {}), Error);
  }
  SUBCASE("size mismatch") {
    paths.edges1 = dir.write("e", "1 2\n");
    paths.edges2 = dir.write("e2", "x y\n");
    paths.communities2 = dir.write("c2", "x a\ny a\n");
    CHECK_THROWS_AS(ingest(paths, {}), Error);
  }
  SUBCASE("bilateral without labels for g2") {
    paths.edges1 = dir.write("e", "1 2\n");
    paths.edges2 = dir.write("e2", "x y\ny z\n");
    CHECK_THROWS_AS(ingest(paths, {}), Error);
    IngestOptions uni;
    uni.mode = Mode::unilateral;
    CHECK(ingest(paths, uni).instance.g2.edge_count() == 2);
  }
}

TEST_CASE("configuration") {
  std::istringstream text(
      "# sweep\nmode = unilateral\nsolvers = ga, convex\ns_list = 0.5,0.7\nn_list = 40\n"
      "kappa_list = 2\nseeds = 3\nbase_seed = 9\npreset = poisson\nga.population = 12\n"
      "qap.inner = annealing\nqap.budget = 500\nconvex.mu = 2.5\nconvex.tol = 1e-4\n");
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.mode == Mode::unilateral);
  CHECK(cfg.solvers == std::vector<std::string>{"ga", "convex"});
  CHECK(cfg.s_list == std::vector<double>{0.5, 0.7});
  CHECK(cfg.n_list == std::vector<std::size_t>{40});
  CHECK(cfg.seeds == 3);
  CHECK(cfg.base_seed == 9);
  CHECK(cfg.preset == "poisson");
  CHECK(cfg.ga.population == 12);
  CHECK(cfg.qap_inner == InnerSolver::annealing);
  CHECK(cfg.qap_budget == 500);
  CHECK(cfg.convex.mu == 2.5);
  CHECK(cfg.convex.tolerance == 1e-4);
  CHECK_NOTHROW(validate(cfg));

  RunConfig bad;
  CHECK_THROWS_AS(apply_setting(bad, "nonsense", "1"), Error);
  CHECK_THROWS_AS(apply_setting(bad, "seeds", "-2"), Error);
  CHECK_THROWS_AS(apply_setting(bad, "n_list", "12x"), Error);
  bad.solvers = {};
  CHECK_THROWS_AS(validate(bad), Error);
  RunConfig empty_s;
  empty_s.s_list = {};
  CHECK_THROWS_AS(validate(empty_s), Error);
  std::istringstream broken("mode = bilateral\nno equals sign\n");
  try {
    (void)parse_config(broken);
    FAIL("expected an error");
  } catch (const Error& err) {
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("experiment reports") {
  SUBCASE("one cell, one solver") {
    const auto report = run_experiment(small_config());
    REQUIRE(report.rows.size() == 1);
    std::ostringstream out;
    write_csv(out, report.rows);
    const std::string csv = out.str();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(csv.rfind(kCsvHeader, 0) == 0);
    CHECK(report.rows[0].relative_value == 0.0);
    CHECK(report.all_ok());
    CHECK(report.diagnostics.size() == 1);
  }
  SUBCASE("grid order, relative values and a failing solver") {
    RunConfig cfg = small_config();
    cfg.solvers = {"ga", "qap", "convex", "brute"};
    cfg.s_list = {0.5, 0.9};
    cfg.seeds = 2;
    const auto report = run_experiment(cfg);
    REQUIRE(report.rows.size() == 16);
    CHECK(report.rows[0].s1 == 0.5);
    CHECK(report.rows[8].s1 == 0.9);
    CHECK(report.rows[0].seed + 1 == report.rows[4].seed);
    for (const auto& row : report.rows) {
      if (row.algorithm == "ga") CHECK(row.relative_value == 0.0);
      if (row.algorithm == "brute") {
        CHECK(row.status.rfind("error", 0) == 0);  // n = 24 is too large
        CHECK(row.status.find(',') == std::string::npos);
      } else {
        CHECK(row.relative_value.has_value());
        CHECK(*row.accuracy >= 0.0);
        CHECK(*row.accuracy <= 1.0);
        CHECK(*row.delta >= 0.0);
      }
    }
    CHECK_FALSE(report.all_ok());
  }
  SUBCASE("no GA leaves relative values empty") {
    RunConfig cfg = small_config();
    cfg.solvers = {"qap"};
    const auto report = run_experiment(cfg);
    CHECK_FALSE(report.rows[0].relative_value.has_value());
  }
}

TEST_CASE("csv round trip is exact") {
  RunConfig cfg = small_config();
  cfg.solvers = {"ga", "convex"};
  cfg.s_list = {0.3, 0.7};
  const auto rows = run_experiment(cfg).rows;
  std::ostringstream out;
  write_csv(out, rows);
  std::istringstream in(out.str());
  const auto back = parse_csv(in);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].algorithm == rows[i].algorithm);
    CHECK(back[i].s1 == rows[i].s1);
    CHECK(back[i].delta == rows[i].delta);
    CHECK(back[i].accuracy == rows[i].accuracy);
    CHECK(back[i].relative_value == rows[i].relative_value);
    CHECK(back[i].runtime_ms == rows[i].runtime_ms);
    CHECK(back[i].status == rows[i].status);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr) == 1.0 / 3.0);
}

TEST_CASE("same config, same report") {
  RunConfig cfg = small_config();
  cfg.solvers = {"ga", "qap", "convex"};
  cfg.seeds = 2;
  const auto a = run_experiment(cfg);
  cfg.threads = 2;
  const auto b = run_experiment(cfg);
  CHECK(without_runtime(a.rows) == without_runtime(b.rows));
}

TEST_CASE("command-line front end") {
  TempDir dir;
  const std::string cli = DEANON_CLI;
  const auto prefix = (dir.path / "inst").string();
  auto run = [](const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); };

  CHECK(run(cli + " generate --n_list 30 --kappa_list 3 --s_list 0.8 --prefix " + prefix) == 0);
  CHECK(fs::exists(prefix + ".g1.edges"));
  CHECK(fs::exists(prefix + ".truth"));
  CHECK(run(cli + " ingest --edges " + prefix + ".g1.edges --communities " + prefix + ".g1.comm --edges2 " +
            prefix + ".g2.edges --communities2 " + prefix + ".g2.comm --truth " + prefix + ".truth") == 0);

  const auto cfg = dir.write("sweep.cfg", "n_list = 20\nkappa_list = 2\ns_list = 0.7\nga.generations = 5\n");
  const auto out = (dir.path / "report.csv").string();
  CHECK(run(cli + " sweep --config " + cfg + " --solvers ga,qap --out " + out) == 0);
  const std::string csv = read_file(out);
  CHECK(csv.rfind(kCsvHeader, 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(fs::exists(out + ".diag.csv"));

  const auto params = dir.write("p.txt", "kappa = 1\naffinity = 0.3\ns1 = 0.9\ns2 = 0.9\n");
  CHECK(run(cli + " check --params " + params + " --n 128") == 0);
  CHECK(run(cli + " solve --solvers qap --n_list 16 --kappa_list 2 --s_list 0.8 --mapping-out " +
            (dir.path / "m.txt").string()) == 0);
  CHECK(fs::exists(dir.path / "m.txt"));
  CHECK(run(cli + " sweep --solvers nothing") != 0);
  CHECK(run(cli + " frobnicate") != 0);
}

TEST_CASE("accuracy rises with the sampling probability") {
  RunConfig cfg;
  cfg.preset = "poisson";
  cfg.n_list = {200};
  cfg.kappa_list = {4};
  cfg.seeds = 10;
  const auto report = run_experiment(cfg);
  std::vector<double> mean(cfg.s_list.size(), 0.0);
  for (const auto& row : report.rows) {
    const auto at = std::find(cfg.s_list.begin(), cfg.s_list.end(), row.s1) - cfg.s_list.begin();
    mean[at] += *row.accuracy / static_cast<double>(cfg.seeds);
  }
  int rising = 0;
  for (std::size_t i = 1; i < mean.size(); ++i) rising += mean[i] >= mean[i - 1] ? 1 : 0;
  std::ostringstream shown;
  for (double m : mean) shown << m << ' ';
  MESSAGE("mean accuracy by s: " << shown.str());
  CHECK(rising >= 5);
}
