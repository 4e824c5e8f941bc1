#include "bhpp/oracle.hpp"

#include <cmath>
#include <ostream>

namespace bhpp::oracle {

namespace {

void check_cap(const BipartiteGraph& g, std::size_t cap) {
  if (g.u_count() > cap) {
    throw GraphError("oracle: |U| = " + std::to_string(g.u_count()) + " exceeds cap " + std::to_string(cap));
  }
}

}  // namespace

Eigen::MatrixXd dense_hidden_transition(const BipartiteGraph& g, std::size_t cap) {
  check_cap(g, cap);
  const auto nu = static_cast<Eigen::Index>(g.u_count());
  const auto nv = static_cast<Eigen::Index>(g.v_count());
  Eigen::MatrixXd U = Eigen::MatrixXd::Zero(nu, nv);
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(nv, nu);
  for (const auto& e : g.edges()) {
    U(e.u, e.v) = e.weight / g.u_weight_sum(e.u);
    V(e.v, e.u) = e.weight / g.v_weight_sum(e.v);
  }
  return U * V;
}

DenseHpp exact_hpp(const BipartiteGraph& g, double alpha, double tol, std::size_t cap) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw GraphError("oracle: alpha must lie in (0, 1)");
  if (!(tol > 0.0)) throw GraphError("oracle: tol must be positive");
  const Eigen::MatrixXd P = dense_hidden_transition(g, cap);
  const auto n = P.rows();

  // S_L = Σ_{ℓ<=L} ((1-α)P)^ℓ. Doubling: S_{2L+1} = S_L + A^{L+1} S_L.
  const Eigen::MatrixXd A = (1.0 - alpha) * P;
  Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = A;  // A^{L+1}
  double tail = 1.0 - alpha;  // (1-α)^{L+1}
  while (tail > tol) {
    S += power * S;
    power = power * power;
    tail *= tail;
  }
  return DenseHpp{alpha * S, alpha, tail};
}

Eigen::MatrixXd exact_hpp_solve(const BipartiteGraph& g, double alpha, std::size_t cap) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw GraphError("oracle: alpha must lie in (0, 1)");
  const Eigen::MatrixXd P = dense_hidden_transition(g, cap);
  const auto n = P.rows();
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n) - (1.0 - alpha) * P;
  return alpha * M.partialPivLu().inverse();
}

std::vector<double> exact_bhpp(const DenseHpp& d, NodeId u) {
  const auto n = d.pi.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[i] = d.pi(u, i) + d.pi(i, u);
  return out;
}

std::vector<double> row(const DenseHpp& d, NodeId u) {
  std::vector<double> out(static_cast<std::size_t>(d.pi.cols()));
  for (Eigen::Index i = 0; i < d.pi.cols(); ++i) out[i] = d.pi(u, i);
  return out;
}

std::vector<double> column(const DenseHpp& d, NodeId u) {
  std::vector<double> out(static_cast<std::size_t>(d.pi.rows()));
  for (Eigen::Index i = 0; i < d.pi.rows(); ++i) out[i] = d.pi(i, u);
  return out;
}

void dump(std::ostream& out, const DenseHpp& d) {
  const auto old = out.precision(17);
  for (Eigen::Index i = 0; i < d.pi.rows(); ++i) {
    for (Eigen::Index j = 0; j < d.pi.cols(); ++j) out << (j ? "\t" : "") << d.pi(i, j);
    out << '\n';
  }
  out.precision(old);
}

}  // namespace bhpp::oracle
