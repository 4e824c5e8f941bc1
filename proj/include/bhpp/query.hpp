#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bhpp/graph.hpp"
#include "bhpp/push.hpp"

namespace bhpp {

/// ε → ε_b = ε(1-μ)/(2-μ), clamped into [min_ratio·ε, max_ratio·ε].
struct EpsSplitPolicy {
  double mu = 0.5;
  double min_ratio = 0.1;
  double max_ratio = 0.5;

  double eps_b(double epsilon) const;
};

/// Preprocessed constants for SS-BI-PUSH queries on one graph.
struct IndexMeta {
  double alpha = 0.15;
  double lambda = 1.0;
  std::size_t tau = 0;
  double mu = 0.5;
  EpsSplitPolicy split;
  std::uint64_t graph_fingerprint = 0;
};

/// Smallest τ with |U|·(1-α)^(τ+1) <= slack.
std::size_t default_tau(double alpha, std::size_t u_count, double slack = 0.05);

/// min{ max_i ρ(u_i) + |U|(1-α)^(τ+1), max ws / min ws } where ρ is the
/// τ-step power iteration from the all-ones vector. Upper-bounds every column
/// sum Σ_j π(u_j, u_i).
double estimate_lambda(const BipartiteGraph& g, double alpha, std::size_t tau, Exec exec = Exec::serial);

/// clamp(√(|U||V|)/|E|, 1e-3, 1).
double estimate_mu(const BipartiteGraph& g);
double estimate_mu(std::size_t u_count, std::size_t v_count, std::size_t edge_count);

double choose_eps_b(double epsilon, double mu);
double choose_eps_b(double epsilon, const BipartiteGraph& g);

/// τ defaults to default_tau(alpha, |U|).
IndexMeta build_index_meta(const BipartiteGraph& g, double alpha, std::optional<std::size_t> tau = std::nullopt,
                           Exec exec = Exec::serial);

/// key=value lines; doubles at 17 significant digits so reloads are exact.
void write_index_meta(std::ostream& out, const IndexMeta& meta);
IndexMeta read_index_meta(std::istream& in);
void save_index_meta(const std::string& path, const IndexMeta& meta);
IndexMeta load_index_meta(const std::string& path);

struct QueryTiming {
  double backward_ms = 0.0;
  double forward_ms = 0.0;
  double total_ms = 0.0;
};

struct QueryResult {
  std::string method;
  NodeId query = 0;
  /// β'(query, ·) over U. The query's own score is included.
  std::vector<double> scores;
  double epsilon = 0.0;
  double epsilon_b = 0.0;
  double epsilon_f = 0.0;
  QueryTiming timing;
  PhaseTrace backward;
  PhaseTrace forward;
  /// Degree-weighted residue at forward-phase entry; 0 for the baselines.
  double gamma = 0.0;
};

/// β'(u, u_i) = →π(u, u_i) + ←π(u_i, u) with 0 <= β - β' <= ε for every u_i.
/// Throws GraphError on a fingerprint mismatch or a split leaving ε_f <= 0.
QueryResult bhpp_query(const BipartiteGraph& g, const IndexMeta& meta, NodeId query, double epsilon,
                       const PushOptions& options = {});

struct RankedNode {
  NodeId node;
  double score;
};

/// Top k by descending score, ties by ascending index.
std::vector<RankedNode> topk(const QueryResult& result, std::size_t k, bool exclude_query);
std::vector<RankedNode> topk(std::span<const double> scores, std::size_t k, std::optional<NodeId> exclude = std::nullopt);

}  // namespace bhpp
