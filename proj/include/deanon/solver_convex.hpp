#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "deanon/instance.hpp"

namespace deanon {

// Relaxed matrices use the orientation X(i, k) = 1 iff node i of g1 maps to
// node k of g2, so a mapping's matrix has unit rows and columns.

// Entrywise sqrt(w_ij) * A_ij.
Eigen::MatrixXd weighted_adjacency(const Graph& g, const WeightMatrix& w);
// Entrywise sqrt(w_ij), zero diagonal.
Eigen::MatrixXd sqrt_weights(const WeightMatrix& w);
Eigen::MatrixXd adjacency(const Graph& g);
Eigen::MatrixXd mapping_matrix(const Mapping& m);

struct NormPair {
  double lhs = 0.0;  // || W o (A - pulled-back B) ||_F
  double rhs = 0.0;  // || A~ X - X B~ ||_F
};

// Both sides of the weighted-norm transform. Throws when pi does not observe
// the communities, where the two norms need not agree.
NormPair lemma52_check(const Eigen::MatrixXd& a_tilde, const Eigen::MatrixXd& b_tilde,
                       const Eigen::MatrixXd& w, const Graph& a, const Graph& b,
                       const Mapping& pi, const CommunityAssignment& c1,
                       const CommunityAssignment& c2);

enum class StepRule { fixed, backtracking };
enum class ConvexStart { block_uniform, identity };

struct ConvexConfig {
  std::size_t max_iterations = 3000;
  StepRule step_rule = StepRule::backtracking;
  double tolerance = 1e-6;          // projected-gradient residual
  std::optional<double> mu;         // default: sum of w_ij over i < j
  bool nonneg = true;               // false: affine row-sum constraints only
  ConvexStart start = ConvexStart::block_uniform;
  bool keep_trace = false;
};

// Sum of squares of the non-positive entries.
double floor_norm_squared(const Eigen::MatrixXd& m);
double floor_norm(const Eigen::MatrixXd& m);

// Objective and gradient of the relaxed problem for one instance and mode.
//   bilateral:  ||A~ X - X B~||_F^2 + mu ||X m2 - m1||^2
//   unilateral: ||W o (A X - X B)||_floor^2
// The unilateral weight W(i, k) uses g1's labels on both indices, which is
// exact when all communities share one weight.
class RelaxedProblem {
 public:
  RelaxedProblem(const DeanonInstance& inst, Mode mode, std::optional<double> mu = std::nullopt);

  Mode mode() const { return mode_; }
  std::size_t size() const { return static_cast<std::size_t>(a_.rows()); }
  double mu() const { return mu_; }

  double objective(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd gradient(const Eigen::MatrixXd& x) const;
  // Both at once, sharing the residual product.
  double value_and_gradient(const Eigen::MatrixXd& x, Eigen::MatrixXd& grad) const;
  // Upper bound on the gradient's Lipschitz constant.
  double lipschitz_bound() const;

  Eigen::MatrixXd start_point(ConvexStart start) const;

  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }
  const Eigen::VectorXd& m1() const { return m1_; }
  const Eigen::VectorXd& m2() const { return m2_; }

 private:
  Eigen::MatrixXd commutator(const Eigen::MatrixXd& x) const;

  Mode mode_;
  double mu_ = 0.0;
  Eigen::MatrixXd a_;   // A~ (bilateral) or A (unilateral)
  Eigen::MatrixXd b_;
  Eigen::SparseMatrix<double> a_sparse_;  // same matrices, for the products
  Eigen::SparseMatrix<double> b_sparse_;
  Eigen::MatrixXd w2_;  // unilateral: squared entrywise weights
  Eigen::VectorXd m1_;  // label vectors as reals
  Eigen::VectorXd m2_;
  std::vector<int> labels1_;
  std::vector<int> labels2_;
};

// Euclidean projection of each row onto the probability simplex.
void project_rows_simplex(Eigen::MatrixXd& x);
// Shift each row so it sums to one.
void project_rows_affine(Eigen::MatrixXd& x);

struct FractionalMatrix {
  Eigen::MatrixXd x;
  bool converged = false;
  std::size_t iterations = 0;
  double objective = 0.0;
  double residual = 0.0;
  std::vector<double> objective_trace;  // filled when keep_trace is set
};

FractionalMatrix solve_relaxed(const DeanonInstance& inst, Mode mode, const ConvexConfig& cfg);
FractionalMatrix solve_relaxed(const RelaxedProblem& problem, const ConvexConfig& cfg);

// Greedy rounding: rows in order, each takes its largest still-unmapped legal
// column (same label when both assignments are given), lowest index on ties.
Mapping project_to_mapping(const Eigen::MatrixXd& frac, const CommunityAssignment* c1 = nullptr,
                           const CommunityAssignment* c2 = nullptr);

struct Algorithm2Result {
  Mapping mapping;
  double delta = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  double relaxed_objective = 0.0;
};

Algorithm2Result algorithm2(const DeanonInstance& inst, Mode mode, const ConvexConfig& cfg);

struct SpectralReport {
  Eigen::VectorXd eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;
  double sigma = 0.0;  // max |lambda|
  double delta = 0.0;  // min gap between eigenvalues
  double eps1 = 0.0;   // max row 1-norm of U
  double eps2 = 0.0;   // min row 1-norm of U
  double xi = 0.0;     // ||U R U^T||_F
  double xi_direct = 0.0;  // ||R||_F
  double big_m = 0.0;  // ||m m^T||_F
  double lhs = 0.0;
  double rhs = 0.0;
  bool degenerate = false;  // delta == 0: the condition cannot hold
  bool satisfied = false;
  std::string note;
};

// Perturbation condition for exact recovery by the relaxation. B~' is the
// exact relabelling of A~ through pi_hat, R = B~ - B~' its perturbation.
SpectralReport thm51_quantities(const Eigen::MatrixXd& a_tilde, const Eigen::MatrixXd& b_tilde,
                                const Mapping& pi_hat, const Eigen::VectorXd& m, double mu);

}  // namespace deanon
