#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "bhpp/graph.hpp"

// Brute-force ground truth on small graphs. Materializes P, which the query
// code never does.
namespace bhpp::oracle {

inline constexpr std::size_t kDefaultCap = 2000;

struct DenseHpp {
  Eigen::MatrixXd pi;  // pi(i, j) = π(u_i, u_j)
  double alpha = 0.0;
  double truncation_bound = 0.0;  // every row sums to >= 1 - bound
};

/// P = U · V as a dense |U|×|U| matrix.
Eigen::MatrixXd dense_hidden_transition(const BipartiteGraph& g, std::size_t cap = kDefaultCap);

/// Σ_{ℓ=0..L} α(1-α)^ℓ P^ℓ with L = 2^k - 1 the first length where
/// (1-α)^(L+1) <= tol. Throws GraphError when |U| exceeds `cap`.
DenseHpp exact_hpp(const BipartiteGraph& g, double alpha, double tol, std::size_t cap = kDefaultCap);

/// α (I - (1-α)P)^{-1} by LU decomposition; independent of the series.
Eigen::MatrixXd exact_hpp_solve(const BipartiteGraph& g, double alpha, std::size_t cap = kDefaultCap);

/// β(u, u_i) = π(u, u_i) + π(u_i, u).
std::vector<double> exact_bhpp(const DenseHpp& d, NodeId u);

/// Row u and column u of the oracle matrix as vectors.
std::vector<double> row(const DenseHpp& d, NodeId u);
std::vector<double> column(const DenseHpp& d, NodeId u);

/// Tab-separated matrix dump for debugging.
void dump(std::ostream& out, const DenseHpp& d);

}  // namespace bhpp::oracle
