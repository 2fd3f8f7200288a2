#include <doctest.h>

#include <cmath>

#include "deanon/error.hpp"
#include "deanon/solver_convex.hpp"
#include "support.hpp"

using namespace deanon;
using Eigen::MatrixXd;

namespace {

DeanonInstance self_pair(std::size_t n, std::uint64_t seed) {
  auto inst = testing::planted_instance({n / 2, n - n / 2}, 0.4, 0.1, 0.8, Mode::bilateral, seed);
  inst.g2 = inst.g1;
  inst.c2 = inst.c1;
  inst.truth = Mapping::identity(n);
  return inst;
}

MatrixXd random_row_stochastic(std::size_t n, Rng& rng) {
  MatrixXd x(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) total += x(i, k) = rng.uniform();
    x.row(i) /= total;
  }
  return x;
}

void check_gradient(const RelaxedProblem& p, const MatrixXd& x, Rng& rng) {
  const MatrixXd g = p.gradient(x);
  const std::size_t n = p.size();
  for (int t = 0; t < 20; ++t) {
    const auto i = rng.index(n), k = rng.index(n);
    const double h = 1e-6;
    MatrixXd up = x, down = x;
    up(i, k) += h;
    down(i, k) -= h;
    const double fd = (p.objective(up) - p.objective(down)) / (2.0 * h);
    CHECK(std::abs(fd - g(i, k)) <= 1e-5 * std::max(1.0, std::abs(g(i, k))));
  }
}

}  // namespace

TEST_CASE("weighted adjacency") {
  CHECK(weighted_adjacency(Graph(4), WeightMatrix::uniform(4, 3.0)).isZero());
  Rng rng(1);
  const Graph g = testing::random_graph(9, 0.4, rng);
  CHECK(weighted_adjacency(g, WeightMatrix::uniform(9)) == adjacency(g));
  Graph one(3);
  one.add_edge(0, 1);
  const MatrixXd a = weighted_adjacency(one, WeightMatrix::uniform(3, 4.0));
  CHECK(a(0, 1) == 2.0);
  CHECK(a(1, 0) == 2.0);
  CHECK(a.sum() == 4.0);
  CHECK_THROWS_AS(weighted_adjacency(one, WeightMatrix::uniform(4)), Error);
  CHECK(sqrt_weights(WeightMatrix::uniform(3, 9.0)).diagonal().isZero());
}

TEST_CASE("weighted-norm transform") {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const auto inst = testing::planted_instance({7, 6, 7}, 0.5, 0.15, 0.6, Mode::bilateral, t);
    const auto& c2 = *inst.c2;
    const MatrixXd at = weighted_adjacency(inst.g1, inst.weights);
    const MatrixXd bt = weighted_adjacency(inst.g2, inst.weights.relabeled(c2.labels()));
    const MatrixXd w = sqrt_weights(inst.weights);
    const Mapping pi = testing::random_observing(inst.c1, c2, rng);
    const auto [lhs, rhs] = lemma52_check(at, bt, w, inst.g1, inst.g2, pi, inst.c1, c2);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + lhs));
    if (t == 0) {
      const auto same = lemma52_check(at, at, w, inst.g1, inst.g1, Mapping::identity(20), inst.c1,
                                      inst.c1);
      CHECK(same.lhs == 0.0);
      CHECK(same.rhs == 0.0);
      CHECK_THROWS_AS(lemma52_check(at, bt, w, inst.g1, inst.g2, testing::random_mapping(20, rng),
                                    inst.c1, c2),
                      Error);
    }
  }
}

TEST_CASE("gradients match central differences") {
  Rng rng(3);
  const auto inst = testing::planted_instance({7, 6, 7}, 0.5, 0.15, 0.6, Mode::bilateral, 3);
  for (Mode mode : {Mode::bilateral, Mode::unilateral}) {
    const RelaxedProblem p(inst, mode);
    check_gradient(p, random_row_stochastic(20, rng), rng);
    // Unconstrained point with mixed signs.
    check_gradient(p, MatrixXd::Random(20, 20), rng);
    double f;
    MatrixXd g;
    const MatrixXd x = random_row_stochastic(20, rng);
    f = p.value_and_gradient(x, g);
    CHECK(f == doctest::Approx(p.objective(x)).epsilon(1e-12));
    CHECK((g - p.gradient(x)).norm() <= 1e-12 * (1.0 + g.norm()));
  }
}

TEST_CASE("relaxed objectives are midpoint convex") {
  Rng rng(4);
  const auto inst = testing::planted_instance({6, 8, 6}, 0.5, 0.15, 0.6, Mode::bilateral, 4);
  for (Mode mode : {Mode::bilateral, Mode::unilateral}) {
    const RelaxedProblem p(inst, mode);
    int passed = 0;
    for (int t = 0; t < 100; ++t) {
      const MatrixXd x = random_row_stochastic(20, rng);
      const MatrixXd y = t % 2 ? random_row_stochastic(20, rng) : MatrixXd(MatrixXd::Random(20, 20));
      const double mid = p.objective(0.5 * (x + y));
      passed += mid <= 0.5 * (p.objective(x) + p.objective(y)) + 1e-9 ? 1 : 0;
    }
    CHECK(passed == 100);
  }
}

TEST_CASE("integral objective equals twice the cost") {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const auto inst = testing::planted_instance({6, 7, 7}, 0.5, 0.15, 0.6, Mode::bilateral, t);
    const RelaxedProblem p(inst, Mode::bilateral);
    const Mapping pi = testing::random_observing(inst.c1, *inst.c2, rng);
    const MatrixXd x = mapping_matrix(pi);
    CHECK(0.5 * p.objective(x) == doctest::Approx(inst.cost(Mode::bilateral, pi)).epsilon(1e-6));
    // Uniform weights make the unilateral weighting exact.
    const auto flat = testing::planted_instance({20}, 0.3, 0.3, 0.6, Mode::unilateral, t);
    const RelaxedProblem u(flat, Mode::unilateral);
    const Mapping any = testing::random_mapping(20, rng);
    CHECK(0.5 * u.objective(mapping_matrix(any)) ==
          doctest::Approx(flat.cost(Mode::unilateral, any)).epsilon(1e-9));
  }
}

TEST_CASE("floor norm") {
  Rng rng(6);
  MatrixXd m(2, 2);
  m << -3.0, 4.0, 0.0, -4.0;
  CHECK(floor_norm(m) == 5.0);
  for (int t = 0; t < 100; ++t) {
    const MatrixXd x = MatrixXd::Random(6, 6), y = MatrixXd::Random(6, 6);
    const double c = 3.0 * rng.uniform();
    CHECK(floor_norm(x + y) <= floor_norm(x) + floor_norm(y) + 1e-9);
    CHECK(std::abs(floor_norm(c * x) - c * floor_norm(x)) <= 1e-9);
    CHECK(floor_norm(x) >= 0.0);
  }
}

TEST_CASE("projections") {
  Rng rng(7);
  MatrixXd x = 3.0 * MatrixXd::Random(10, 10);
  MatrixXd y = x;
  project_rows_simplex(x);
  for (int i = 0; i < 10; ++i) CHECK(x.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(x.minCoeff() >= 0.0);
  project_rows_affine(y);
  for (int i = 0; i < 10; ++i) CHECK(y.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  // Already on the simplex: unchanged.
  MatrixXd z = random_row_stochastic(5, rng), z0 = z;
  project_rows_simplex(z);
  CHECK((z - z0).norm() <= 1e-12);
}

TEST_CASE("solver behaviour") {
  SUBCASE("objective trace never increases") {
    const auto inst = testing::planted_instance({10, 12, 8}, 0.4, 0.1, 0.7, Mode::bilateral, 8);
    for (Mode mode : {Mode::bilateral, Mode::unilateral})
      for (StepRule rule : {StepRule::backtracking, StepRule::fixed}) {
        ConvexConfig cfg;
        cfg.step_rule = rule;
        cfg.max_iterations = 300;
        cfg.keep_trace = true;
        const auto r = solve_relaxed(inst, mode, cfg);
        REQUIRE(r.objective_trace.size() >= 2);
        for (std::size_t t = 1; t < r.objective_trace.size(); ++t)
          CHECK(r.objective_trace[t] <= r.objective_trace[t - 1]);
        for (Eigen::Index i = 0; i < r.x.rows(); ++i)
          CHECK(r.x.row(i).sum() == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(r.x.minCoeff() >= -1e-10);
      }
  }
  SUBCASE("affine relaxation keeps unit row sums") {
    const auto inst = testing::planted_instance({6, 6}, 0.4, 0.1, 0.7, Mode::bilateral, 8);
    ConvexConfig cfg;
    cfg.nonneg = false;
    cfg.max_iterations = 200;
    const auto r = solve_relaxed(inst, Mode::bilateral, cfg);
    for (Eigen::Index i = 0; i < r.x.rows(); ++i)
      CHECK(r.x.row(i).sum() == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("identical graphs from the identity start") {
    const auto inst = self_pair(30, 2);
    ConvexConfig cfg;
    cfg.start = ConvexStart::identity;
    const auto r = solve_relaxed(inst, Mode::bilateral, cfg);
    CHECK(r.objective <= 1e-6);
    CHECK(r.converged);
  }
  SUBCASE("unilateral with an empty g2 stays at the start") {
    auto inst = testing::planted_instance({6, 6}, 0.4, 0.1, 0.7, Mode::unilateral, 3);
    inst.g2 = Graph(12);
    const auto r = solve_relaxed(inst, Mode::unilateral, ConvexConfig{});
    CHECK(r.objective == 0.0);
    CHECK(r.converged);
    CHECK((r.x - MatrixXd::Constant(12, 12, 1.0 / 12)).norm() <= 1e-12);
  }
  SUBCASE("invalid configuration") {
    const auto inst = testing::planted_instance({6, 6}, 0.4, 0.1, 0.7, Mode::unilateral, 3);
    ConvexConfig cfg;
    cfg.tolerance = 0.0;
    CHECK_THROWS_AS(solve_relaxed(inst, Mode::unilateral, cfg), Error);
    CHECK_THROWS_AS(RelaxedProblem(inst, Mode::bilateral), Error);
    CHECK_THROWS_AS(RelaxedProblem(self_pair(8, 1), Mode::bilateral, -1.0), Error);
  }
}

TEST_CASE("greedy rounding") {
  MatrixXd rows(3, 3);
  rows << 0.6, 0.3, 0.1, 0.5, 0.5, 0.0, 0.2, 0.2, 0.6;
  CHECK(project_to_mapping(rows) == Mapping({0, 1, 2}));
  MatrixXd tie(3, 3);
  tie << 0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0;
  CHECK(project_to_mapping(tie) == Mapping({0, 1, 2}));
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const Mapping m = testing::random_mapping(15, rng);
    CHECK(project_to_mapping(mapping_matrix(m)) == m);
    const MatrixXd back = mapping_matrix(project_to_mapping(random_row_stochastic(15, rng)));
    CHECK(back.rowwise().sum() == Eigen::VectorXd::Ones(15));
    CHECK(back.colwise().sum() == Eigen::RowVectorXd::Ones(15));
  }
  // Labels restrict the choice even against larger entries.
  const CommunityAssignment c1({1, 2}, 2), c2({2, 1}, 2);
  MatrixXd pref = MatrixXd::Identity(2, 2);
  CHECK(project_to_mapping(pref, &c1, &c2) == Mapping({1, 0}));
  const CommunityAssignment lopsided({1, 1}, 1);
  CHECK_THROWS_AS(project_to_mapping(pref, &c1, &lopsided), Error);
}

TEST_CASE("algorithm2") {
  SUBCASE("identical graphs") {
    const auto inst = self_pair(50, 4);
    ConvexConfig cfg;
    cfg.start = ConvexStart::identity;
    const auto r = algorithm2(inst, Mode::bilateral, cfg);
    CHECK(r.delta == 0.0);
  }
  SUBCASE("zero perturbation returns the planted mapping") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto inst = testing::zero_perturbation_instance(seed);
      ConvexConfig cfg;
      cfg.mu = 1e-6;
      const auto r = algorithm2(inst, Mode::bilateral, cfg);
      CHECK(r.mapping == *inst.truth);
      CHECK(r.delta == 0.0);
    }
  }
  SUBCASE("bilateral output observes the communities") {
    const auto inst = testing::planted_instance({10, 12, 8}, 0.4, 0.1, 0.7, Mode::bilateral, 8);
    ConvexConfig cfg;
    cfg.max_iterations = 200;
    const auto r = algorithm2(inst, Mode::bilateral, cfg);
    CHECK(observes_communities(r.mapping, inst.c1, *inst.c2));
    CHECK(r.delta == inst.cost(Mode::bilateral, r.mapping));
  }
}

TEST_CASE("spectral condition quantities") {
  SUBCASE("no perturbation") {
    const auto inst = testing::zero_perturbation_instance(1);
    const MatrixXd a = weighted_adjacency(inst.g1, inst.weights);
    const MatrixXd b = weighted_adjacency(inst.g2, inst.weights.relabeled(inst.c2->labels()));
    Eigen::VectorXd m(16);
    for (int i = 0; i < 16; ++i) m(i) = inst.c1.label(i);
    const auto rep = thm51_quantities(a, b, *inst.truth, m, 1e-9);
    CHECK(rep.xi <= 1e-12);
    CHECK_FALSE(rep.degenerate);
    CHECK(rep.delta > 0.0);
    CHECK(rep.satisfied);
    // Eigenvalues ascending and eigenvectors with a positive leading entry.
    for (Eigen::Index k = 1; k < 16; ++k) CHECK(rep.eigenvalues(k) >= rep.eigenvalues(k - 1));
    const MatrixXd recon = rep.eigenvectors * rep.eigenvalues.asDiagonal() * rep.eigenvectors.transpose();
    const MatrixXd x = mapping_matrix(*inst.truth);
    CHECK((recon - x.transpose() * a * x).norm() <= 1e-9);
    CHECK(rep.eps1 >= rep.eps2);
    CHECK(rep.big_m == doctest::Approx(m.squaredNorm()));
  }
  SUBCASE("repeated spectrum") {
    const MatrixXd zero = MatrixXd::Zero(6, 6);
    const auto rep = thm51_quantities(zero, zero, Mapping::identity(6), Eigen::VectorXd::Ones(6), 1e-6);
    CHECK(rep.degenerate);
    CHECK_FALSE(rep.satisfied);
    CHECK(rep.delta == 0.0);
  }
  SUBCASE("perturbation norm computed two ways") {
    Rng rng(10);
    for (int t = 0; t < 10; ++t) {
      const auto inst = testing::planted_instance({8, 8}, 0.5, 0.2, 0.6, Mode::bilateral, t);
      const MatrixXd a = weighted_adjacency(inst.g1, inst.weights);
      const MatrixXd b = weighted_adjacency(inst.g2, inst.weights.relabeled(inst.c2->labels()));
      const auto rep = thm51_quantities(a, b, testing::random_observing(inst.c1, *inst.c2, rng),
                                        Eigen::VectorXd::Ones(16), 1.0);
      CHECK(std::abs(rep.xi - rep.xi_direct) <= 1e-8 * (1.0 + rep.xi_direct));
      CHECK_FALSE(rep.satisfied);  // mu = 1 alone makes the left side large
    }
  }
}

TEST_CASE("desk-scale accuracy at s = 0.95") {
  double total = 0.0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto sizes = jittered_sizes(128, 4, seed);
    const auto params = ModelParams::planted(4, 0.3, 0.05, 0.95, 0.95);
    const auto inst = make_instance(params, sizes, Mode::bilateral, 1000 + seed);
    const auto r = algorithm2(inst, Mode::bilateral, ConvexConfig{});
    total += accuracy(r.mapping, *inst.truth);
  }
  MESSAGE("mean accuracy " << total / seeds);
  CHECK(total / seeds >= 0.6);
}
