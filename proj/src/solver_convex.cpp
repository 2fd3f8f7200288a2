#include "deanon/solver_convex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Eigenvalues>

#include "deanon/error.hpp"

namespace deanon {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::MatrixXd adjacency(const Graph& g) {
  const std::size_t n = g.size();
  MatrixXd a = MatrixXd::Zero(n, n);
  for (const auto& [u, v] : g.edges()) a(u, v) = a(v, u) = 1.0;
  return a;
}

Eigen::MatrixXd sqrt_weights(const WeightMatrix& w) {
  const std::size_t n = w.size();
  MatrixXd out = MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) out(i, j) = std::sqrt(w.at(i, j));
  return out;
}

Eigen::MatrixXd weighted_adjacency(const Graph& g, const WeightMatrix& w) {
  require(g.size() == w.size(), "weighted_adjacency: size mismatch");
  const std::size_t n = g.size();
  MatrixXd out = MatrixXd::Zero(n, n);
  for (const auto& [u, v] : g.edges()) out(u, v) = out(v, u) = std::sqrt(w.at(u, v));
  return out;
}

Eigen::MatrixXd mapping_matrix(const Mapping& m) {
  const std::size_t n = m.size();
  MatrixXd x = MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) x(i, m[i]) = 1.0;
  return x;
}

NormPair lemma52_check(const Eigen::MatrixXd& a_tilde, const Eigen::MatrixXd& b_tilde,
                       const Eigen::MatrixXd& w, const Graph& a, const Graph& b,
                       const Mapping& pi, const CommunityAssignment& c1,
                       const CommunityAssignment& c2) {
  const std::size_t n = pi.size();
  require(a.size() == n && b.size() == n && static_cast<std::size_t>(a_tilde.rows()) == n &&
              static_cast<std::size_t>(b_tilde.rows()) == n &&
              static_cast<std::size_t>(w.rows()) == n,
          "lemma52_check: size mismatch");
  require(observes_communities(pi, c1, c2),
          "lemma52_check: the permutation does not observe the communities");
  const MatrixXd am = adjacency(a);
  const MatrixXd bm = adjacency(b);
  MatrixXd pulled(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pulled(i, j) = bm(pi[i], pi[j]);
  const MatrixXd x = mapping_matrix(pi);
  return {w.cwiseProduct(am - pulled).norm(), (a_tilde * x - x * b_tilde).norm()};
}

double floor_norm_squared(const Eigen::MatrixXd& m) { return m.cwiseMin(0.0).squaredNorm(); }

double floor_norm(const Eigen::MatrixXd& m) { return std::sqrt(floor_norm_squared(m)); }

RelaxedProblem::RelaxedProblem(const DeanonInstance& inst, Mode mode, std::optional<double> mu)
    : mode_(mode), labels1_(inst.c1.labels().begin(), inst.c1.labels().end()) {
  inst.validate();
  const std::size_t n = inst.size();
  m1_.resize(n);
  for (std::size_t i = 0; i < n; ++i) m1_(i) = labels1_[i];
  if (mode == Mode::bilateral) {
    const auto& c2 = inst.require_c2();
    labels2_.assign(c2.labels().begin(), c2.labels().end());
    m2_.resize(n);
    for (std::size_t k = 0; k < n; ++k) m2_(k) = labels2_[k];
    a_ = weighted_adjacency(inst.g1, inst.weights);
    b_ = weighted_adjacency(inst.g2, inst.weights.relabeled(labels2_));
    mu_ = mu.value_or(inst.weights.total_pair_weight());
    require(mu_ > 0.0, "relaxation: mu must be positive");
  } else {
    a_ = adjacency(inst.g1);
    b_ = adjacency(inst.g2);
    // Column k is a g2 node, so i == k is an ordinary pair here.
    w2_.resize(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        w2_(i, k) = inst.weights.community_weight(labels1_[i], labels1_[k]);
  }
  a_sparse_ = a_.sparseView();
  b_sparse_ = b_.sparseView();
}

double RelaxedProblem::objective(const Eigen::MatrixXd& x) const {
  double f;
  if (mode_ == Mode::bilateral) {
    f = commutator(x).squaredNorm() + mu_ * (x * m2_ - m1_).squaredNorm();
  } else {
    const MatrixXd r = commutator(x).cwiseMin(0.0);
    f = w2_.cwiseProduct(r.cwiseProduct(r)).sum();
  }
  require(std::isfinite(f), "relaxation: objective is not finite");
  return f;
}

Eigen::MatrixXd RelaxedProblem::gradient(const Eigen::MatrixXd& x) const {
  MatrixXd g;
  (void)value_and_gradient(x, g);
  return g;
}

double RelaxedProblem::value_and_gradient(const Eigen::MatrixXd& x, Eigen::MatrixXd& grad) const {
  double f;
  if (mode_ == Mode::bilateral) {
    const MatrixXd r = commutator(x);
    const VectorXd penalty = x * m2_ - m1_;
    f = r.squaredNorm() + mu_ * penalty.squaredNorm();
    grad = 2.0 * commutator(r);
    grad.noalias() += (2.0 * mu_) * penalty * m2_.transpose();
  } else {
    const MatrixXd r = commutator(x).cwiseMin(0.0);
    const MatrixXd wr = w2_.cwiseProduct(r);
    f = wr.cwiseProduct(r).sum();
    grad = commutator(2.0 * wr);
  }
  require(std::isfinite(f), "relaxation: objective is not finite");
  return f;
}

// A X - X B; both matrices are symmetric, and sparse for the sampled graphs.
Eigen::MatrixXd RelaxedProblem::commutator(const Eigen::MatrixXd& x) const {
  MatrixXd out = a_sparse_ * x;
  out.noalias() -= x * b_sparse_;
  return out;
}

namespace {
double spectral_norm(const MatrixXd& sym) {
  if (sym.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}
}  // namespace

double RelaxedProblem::lipschitz_bound() const {
  const double s = spectral_norm(a_) + spectral_norm(b_);
  if (mode_ == Mode::bilateral) return 2.0 * s * s + 2.0 * mu_ * m2_.squaredNorm();
  const double wmax = w2_.size() ? w2_.maxCoeff() : 0.0;
  return 2.0 * wmax * s * s;
}

Eigen::MatrixXd RelaxedProblem::start_point(ConvexStart start) const {
  const std::size_t n = size();
  if (start == ConvexStart::identity) return MatrixXd::Identity(n, n);
  if (mode_ == Mode::unilateral) return MatrixXd::Constant(n, n, n ? 1.0 / n : 0.0);
  std::vector<std::size_t> block(n + 1, 0);
  for (int l : labels2_) ++block[l];
  MatrixXd x = MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t size = block[labels1_[i]];
    require(size > 0, "relaxation: community absent from g2");
    for (std::size_t k = 0; k < n; ++k)
      if (labels2_[k] == labels1_[i]) x(i, k) = 1.0 / static_cast<double>(size);
  }
  return x;
}

void project_rows_simplex(Eigen::MatrixXd& x) {
  const Eigen::Index n = x.cols();
  std::vector<double> sorted(n);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < n; ++k) sorted[k] = x(i, k);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      cumsum += sorted[k];
      const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
      if (sorted[k] - t > 0.0) theta = t;
    }
    for (Eigen::Index k = 0; k < n; ++k) x(i, k) = std::max(x(i, k) - theta, 0.0);
  }
}

void project_rows_affine(Eigen::MatrixXd& x) {
  if (x.cols() == 0) return;
  const VectorXd shift = (x.rowwise().sum().array() - 1.0) / static_cast<double>(x.cols());
  x.colwise() -= shift;
}

FractionalMatrix solve_relaxed(const DeanonInstance& inst, Mode mode, const ConvexConfig& cfg) {
  return solve_relaxed(RelaxedProblem(inst, mode, cfg.mu), cfg);
}

FractionalMatrix solve_relaxed(const RelaxedProblem& problem, const ConvexConfig& cfg) {
  require(cfg.tolerance > 0.0, "relaxation: tolerance must be positive");
  auto project = [&](MatrixXd& m) {
    if (cfg.nonneg) {
      project_rows_simplex(m);
    } else {
      project_rows_affine(m);
    }
  };

  FractionalMatrix out;
  MatrixXd x = problem.start_point(cfg.start);
  project(x);
  double f = problem.objective(x);
  if (cfg.keep_trace) out.objective_trace.push_back(f);

  const double lipschitz = std::max(problem.lipschitz_bound(), 1e-12);
  // Residual: length of one projected-gradient step of size 1/l.
  auto residual_at = [&](const MatrixXd& at, const MatrixXd& grad, double l) {
    MatrixXd probe = at - grad / l;
    project(probe);
    return (probe - at).norm();
  };

  // The stopping test costs a gradient, so the accelerated loop runs it only
  // every few iterations.
  constexpr std::size_t kResidualEvery = 10;
  if (cfg.step_rule == StepRule::fixed) {
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
      const MatrixXd g = problem.gradient(x);
      out.residual = residual_at(x, g, lipschitz);
      if (out.residual <= cfg.tolerance) {
        out.converged = true;
        break;
      }
      MatrixXd next = x - g / lipschitz;
      project(next);
      const double f_next = problem.objective(next);
      ++out.iterations;
      if (!(f_next <= f)) break;  // only rounding can get here
      x = std::move(next);
      f = f_next;
      if (cfg.keep_trace) out.objective_trace.push_back(f);
    }
  } else {
    // Monotone FISTA: the extrapolated point y drives the steps, x keeps the
    // best objective so far. The local constant starts small and only grows
    // when the quadratic model fails, capped by the global bound.
    MatrixXd y = x;
    MatrixXd z;
    double t = 1.0;
    double local = lipschitz * 1e-4;
    MatrixXd gy;
    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
      if (it % kResidualEvery == 0) {
        out.residual = residual_at(x, problem.gradient(x), local);
        if (out.residual <= cfg.tolerance) {
          out.converged = true;
          break;
        }
      }
      const double fy = problem.value_and_gradient(y, gy);
      double fz;
      while (true) {
        z = y - gy / local;
        project(z);
        const MatrixXd d = z - y;
        fz = problem.objective(z);
        if (local >= lipschitz || fz <= fy + gy.cwiseProduct(d).sum() + 0.5 * local * d.squaredNorm())
          break;
        local = std::min(2.0 * local, lipschitz);
      }
      ++out.iterations;
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      MatrixXd x_next = fz <= f ? z : x;
      y = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x);
      if (fz <= f) f = fz;
      x = std::move(x_next);
      t = t_next;
      if (cfg.keep_trace) out.objective_trace.push_back(f);
    }
    if (!out.converged) {
      out.residual = residual_at(x, problem.gradient(x), local);
      out.converged = out.residual <= cfg.tolerance;
    }
  }
  out.x = std::move(x);
  out.objective = f;
  return out;
}

Mapping project_to_mapping(const Eigen::MatrixXd& frac, const CommunityAssignment* c1,
                           const CommunityAssignment* c2) {
  const std::size_t n = static_cast<std::size_t>(frac.rows());
  require(static_cast<std::size_t>(frac.cols()) == n, "project_to_mapping: matrix must be square");
  const bool labelled = c1 != nullptr && c2 != nullptr;
  if (labelled) require(c1->size() == n && c2->size() == n, "project_to_mapping: size mismatch");
  std::vector<NodeId> f(n);
  std::vector<bool> mapped(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = n;
    for (std::size_t k = 0; k < n; ++k) {
      if (mapped[k] || (labelled && c2->label(k) != c1->label(i))) continue;
      if (pick == n || frac(i, k) > frac(i, pick)) pick = k;
    }
    require(pick < n, "project_to_mapping: no legal column left for node " + std::to_string(i));
    mapped[pick] = true;
    f[i] = static_cast<NodeId>(pick);
  }
  return Mapping(std::move(f));
}

Algorithm2Result algorithm2(const DeanonInstance& inst, Mode mode, const ConvexConfig& cfg) {
  const FractionalMatrix frac = solve_relaxed(inst, mode, cfg);
  Algorithm2Result result;
  result.mapping = mode == Mode::bilateral
                       ? project_to_mapping(frac.x, &inst.c1, &inst.require_c2())
                       : project_to_mapping(frac.x);
  result.delta = inst.cost(mode, result.mapping);
  result.converged = frac.converged;
  result.iterations = frac.iterations;
  result.relaxed_objective = frac.objective;
  return result;
}

SpectralReport thm51_quantities(const Eigen::MatrixXd& a_tilde, const Eigen::MatrixXd& b_tilde,
                                const Mapping& pi_hat, const Eigen::VectorXd& m, double mu) {
  const std::size_t n = pi_hat.size();
  require(static_cast<std::size_t>(a_tilde.rows()) == n &&
              static_cast<std::size_t>(b_tilde.rows()) == n &&
              static_cast<std::size_t>(m.size()) == n,
          "thm51_quantities: size mismatch");
  require(n > 0, "thm51_quantities: empty instance");

  // B~'(pi(i), pi(j)) = A~(i, j)
  const MatrixXd x = mapping_matrix(pi_hat);
  const MatrixXd b_prime = x.transpose() * a_tilde * x;
  const MatrixXd r = b_tilde - b_prime;

  SpectralReport rep;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(b_prime);
  require(es.info() == Eigen::Success, "thm51_quantities: eigendecomposition failed");
  rep.eigenvalues = es.eigenvalues();
  rep.eigenvectors = es.eigenvectors();
  for (Eigen::Index c = 0; c < rep.eigenvectors.cols(); ++c) {
    for (Eigen::Index k = 0; k < rep.eigenvectors.rows(); ++k) {
      const double v = rep.eigenvectors(k, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) rep.eigenvectors.col(c) *= -1.0;
        break;
      }
    }
  }
  const MatrixXd& u = rep.eigenvectors;

  rep.sigma = rep.eigenvalues.cwiseAbs().maxCoeff();
  rep.delta = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 1; k < rep.eigenvalues.size(); ++k)
    rep.delta = std::min(rep.delta, rep.eigenvalues(k) - rep.eigenvalues(k - 1));
  if (n == 1) rep.delta = 0.0;
  const VectorXd row_l1 = u.cwiseAbs().rowwise().sum();
  rep.eps1 = row_l1.maxCoeff();
  rep.eps2 = row_l1.minCoeff();
  rep.xi = (u * r * u.transpose()).norm();
  rep.xi_direct = r.norm();
  rep.big_m = (m * m.transpose()).norm();
  rep.lhs = (rep.sigma * rep.sigma + 1.0) * rep.xi * rep.xi + mu * mu * rep.big_m * rep.big_m;

  // A gap below the eigensolver's resolution counts as a repeated eigenvalue.
  const double resolution = 1e-10 * std::max(1.0, rep.sigma);
  if (rep.delta <= resolution) {
    rep.degenerate = true;
    rep.rhs = 0.0;
    rep.satisfied = false;
    rep.note = "condition vacuously violated (delta=0)";
    return rep;
  }
  const double sn = std::sqrt(static_cast<double>(n));
  const double ratio = rep.eps1 / rep.eps2;
  const double bound =
      rep.delta * rep.delta / ((2.0 * sn + 1.0) * (1.0 + sn * ratio) * (1.0 + 2.0 * ratio));
  rep.rhs = bound * bound;
  rep.satisfied = rep.lhs <= rep.rhs;
  return rep;
}

}  // namespace deanon
