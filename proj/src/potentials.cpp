#include "langevin/potentials.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "langevin/rng.hpp"

namespace langevin {

double TargetPotential::eval(const Eigen::VectorXd& x) const {
  if (x.size() != d_) throw std::invalid_argument("eval: dimension mismatch");
  return do_eval(x);
}

double TargetPotential::partial_grad(int i, const Eigen::VectorXd& x,
                                     CostLedger& cost) const {
  if (i < 0 || i >= d_) throw std::invalid_argument("partial_grad: bad index");
  if (x.size() != d_) {
    throw std::invalid_argument("partial_grad: dimension mismatch");
  }
  cost += 1;
  return do_partial(i, x);
}

void TargetPotential::full_grad(const Eigen::VectorXd& x, Eigen::VectorXd& out,
                                CostLedger& cost) const {
  if (x.size() != d_) {
    throw std::invalid_argument("full_grad: dimension mismatch");
  }
  out.resize(d_);
  cost += static_cast<CostLedger>(d_);
  do_full_grad(x, out);
}

Eigen::VectorXd TargetPotential::full_grad(const Eigen::VectorXd& x,
                                           CostLedger& cost) const {
  Eigen::VectorXd out;
  full_grad(x, out, cost);
  return out;
}

void TargetPotential::set_constants(int d, double mu, double big_L,
                                    Eigen::VectorXd coord_L,
                                    std::optional<Eigen::VectorXd> x_star) {
  d_ = d;
  mu_ = mu;
  big_L_ = big_L;
  coord_L_ = std::move(coord_L);
  x_star_ = std::move(x_star);
}

void TargetPotential::do_full_grad(const Eigen::VectorXd& x,
                                   Eigen::VectorXd& out) const {
  for (int i = 0; i < d_; ++i) out[i] = do_partial(i, x);
}

ConditionNumbers condition_numbers(const TargetPotential& target) {
  if (!(target.mu() > 0.0)) {
    throw std::invalid_argument("condition_numbers: mu must be > 0");
  }
  ConditionNumbers c;
  c.kappa = target.big_L() / target.mu();
  c.kappa_vec = target.coord_L() / target.mu();
  c.kappa_max = c.kappa_vec.maxCoeff();
  assert(c.kappa_max <= c.kappa * (1.0 + 1e-12));
  assert(c.kappa <= target.dim() * c.kappa_max * (1.0 + 1e-12));
  return c;
}

QuadraticTarget::QuadraticTarget(Eigen::MatrixXd a) : a_(std::move(a)) {
  if (a_.rows() != a_.cols() || a_.rows() < 1) {
    throw std::invalid_argument("QuadraticTarget: matrix must be square");
  }
  if (!a_.isApprox(a_.transpose(), 1e-12)) {
    throw std::invalid_argument("QuadraticTarget: matrix must be symmetric");
  }
  a_ = 0.5 * (a_ + a_.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_,
                                                    Eigen::EigenvaluesOnly);
  const double mu = es.eigenvalues().minCoeff();
  const double big_L = es.eigenvalues().maxCoeff();
  if (!(mu > 0.0)) {
    throw std::invalid_argument("QuadraticTarget: matrix must be positive definite");
  }
  set_constants(static_cast<int>(a_.rows()), mu, big_L, a_.diagonal(),
                Eigen::VectorXd::Zero(a_.rows()));
}

double QuadraticTarget::do_eval(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(a_ * x);
}

double QuadraticTarget::do_partial(int i, const Eigen::VectorXd& x) const {
  return a_.row(i).dot(x);
}

void QuadraticTarget::do_full_grad(const Eigen::VectorXd& x,
                                   Eigen::VectorXd& out) const {
  out.noalias() = a_ * x;
}

QuadraticTarget standard_gaussian_target(int d) {
  return QuadraticTarget(Eigen::MatrixXd::Identity(d, d));
}

ProductExperimentTarget::ProductExperimentTarget(int d, std::uint64_t seed) {
  if (d < kHeadDim) {
    throw std::invalid_argument("ProductExperimentTarget: dim must be >= 10");
  }
  for (std::uint64_t s = seed;; ++s) {
    Xoshiro256pp rng(derive_seed(s, 0));
    Eigen::MatrixXd t(kHeadDim, kHeadDim);
    for (int i = 0; i < kHeadDim; ++i) {
      for (int j = 0; j < kHeadDim; j += 2) {
        auto [z1, z2] = rng.normal_pair();
        t(i, j) = z1;
        if (j + 1 < kHeadDim) t(i, j + 1) = z2;
      }
    }
    gamma_ = t + (d / 10.0) * Eigen::MatrixXd::Identity(kHeadDim, kHeadDim);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gamma_);
    const double smin = svd.singularValues().minCoeff();
    if (smin > 1e-8 * svd.singularValues().maxCoeff()) {
      seed_used_ = s;
      break;
    }
  }
  head_ = gamma_.transpose() * gamma_;
  head_ = 0.5 * (head_ + head_.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(head_,
                                                    Eigen::EigenvaluesOnly);
  const double head_min = es.eigenvalues().minCoeff();
  const double head_max = es.eigenvalues().maxCoeff();
  const double mu = std::min(head_min, 1.0);
  const double big_L = std::max(head_max, 1.0);
  Eigen::VectorXd coord_L = Eigen::VectorXd::Ones(d);
  coord_L.head(kHeadDim) = head_.diagonal();
  set_constants(d, mu, big_L, std::move(coord_L), Eigen::VectorXd::Zero(d));
}

Eigen::MatrixXd ProductExperimentTarget::hessian() const {
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(dim(), dim());
  h.topLeftCorner(kHeadDim, kHeadDim) = head_;
  return h;
}

double ProductExperimentTarget::do_eval(const Eigen::VectorXd& x) const {
  const auto head = x.head(kHeadDim);
  const auto tail = x.tail(dim() - kHeadDim);
  return 0.5 * head.dot(head_ * head) + 0.5 * tail.squaredNorm();
}

double ProductExperimentTarget::do_partial(int i,
                                           const Eigen::VectorXd& x) const {
  if (i < kHeadDim) return head_.row(i).dot(x.head(kHeadDim));
  return x[i];
}

void ProductExperimentTarget::do_full_grad(const Eigen::VectorXd& x,
                                           Eigen::VectorXd& out) const {
  out.head(kHeadDim).noalias() = head_ * x.head(kHeadDim);
  out.tail(dim() - kHeadDim) = x.tail(dim() - kHeadDim);
}

GraphTarget::GraphTarget(int n_nodes, std::vector<std::pair<int, int>> edges,
                         double alpha, double beta)
    : edges_(std::move(edges)), alpha_(alpha), beta_(beta) {
  if (n_nodes < 1) throw std::invalid_argument("GraphTarget: empty graph");
  if (!(alpha > 0.0) || beta < 0.0) {
    throw std::invalid_argument("GraphTarget: need alpha > 0, beta >= 0");
  }
  std::vector<int> deg(n_nodes, 0);
  for (const auto& [i, j] : edges_) {
    if (i < 0 || j < 0 || i >= n_nodes || j >= n_nodes) {
      throw std::invalid_argument("GraphTarget: edge endpoint out of range");
    }
    if (i == j) throw std::invalid_argument("GraphTarget: self-loop");
    ++deg[i];
    ++deg[j];
  }
  adj_offset_.assign(n_nodes + 1, 0);
  for (int i = 0; i < n_nodes; ++i) adj_offset_[i + 1] = adj_offset_[i] + deg[i];
  adj_.resize(adj_offset_.back());
  std::vector<int> fill(adj_offset_.begin(), adj_offset_.end() - 1);
  for (const auto& [i, j] : edges_) {
    adj_[fill[i]++] = j;
    adj_[fill[j]++] = i;
  }

  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
  for (const auto& [i, j] : edges_) {
    lap(i, i) += 1.0;
    lap(j, j) += 1.0;
    lap(i, j) -= 1.0;
    lap(j, i) -= 1.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap,
                                                    Eigen::EigenvaluesOnly);
  const double lap_max = es.eigenvalues().maxCoeff();
  Eigen::VectorXd coord_L(n_nodes);
  for (int i = 0; i < n_nodes; ++i) coord_L[i] = alpha + beta * deg[i];
  set_constants(n_nodes, alpha, alpha + beta * lap_max, std::move(coord_L),
                Eigen::VectorXd::Zero(n_nodes));
}

GraphTarget GraphTarget::from_edge_file(const std::string& path, int n_nodes,
                                        double alpha, double beta) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("GraphTarget: cannot open " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    int i, j;
    if (!(ls >> i)) continue;  // blank or comment-only line
    std::string trailing;
    if (!(ls >> j) || (ls >> trailing)) {
      throw std::invalid_argument("GraphTarget: bad edge line " +
                                  std::to_string(lineno) + " in " + path);
    }
    edges.emplace_back(i, j);
  }
  return GraphTarget(n_nodes, std::move(edges), alpha, beta);
}

int GraphTarget::degree(int i) const {
  return adj_offset_[i + 1] - adj_offset_[i];
}

Eigen::MatrixXd GraphTarget::hessian() const {
  Eigen::MatrixXd h =
      alpha_ * Eigen::MatrixXd::Identity(dim(), dim());
  for (const auto& [i, j] : edges_) {
    h(i, i) += beta_;
    h(j, j) += beta_;
    h(i, j) -= beta_;
    h(j, i) -= beta_;
  }
  return h;
}

double GraphTarget::do_eval(const Eigen::VectorXd& x) const {
  double acc = 0.5 * alpha_ * x.squaredNorm();
  for (const auto& [i, j] : edges_) {
    const double diff = x[i] - x[j];
    acc += 0.5 * beta_ * diff * diff;
  }
  return acc;
}

double GraphTarget::do_partial(int i, const Eigen::VectorXd& x) const {
  double acc = alpha_ * x[i];
  for (int k = adj_offset_[i]; k < adj_offset_[i + 1]; ++k) {
    acc += beta_ * (x[i] - x[adj_[k]]);
  }
  return acc;
}

}  // namespace langevin
