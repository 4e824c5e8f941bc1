#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bhpp/graph.hpp"
#include "bhpp/query.hpp"

// Query-rewriting and item-recommendation evaluation. Queries and items live
// on U; ads and users on V.
namespace bhpp::eval {

/// des(q_i, q_j) = Σ_{k ∈ N(q_i) ∩ N(q_j)} w(q_j, k) / d(q_j). d is the
/// unweighted degree unless `weighted_degree` asks for ws(q_j).
double desirability(const BipartiteGraph& g, NodeId qi, NodeId qj, bool weighted_degree = false);

enum class Side { u, v };

struct EvalSplit {
  /// Same node indices and labels as the source graph.
  BipartiteGraph train;
  std::vector<WeightedEdge> test;
  Side stratified = Side::v;
  /// Candidate items per user (V node), filled by add_candidates. Empty for
  /// users that were not selected.
  std::vector<std::vector<NodeId>> candidates;
};

/// Per-node stratified holdout: every node on `side` loses ⌊ratio · d⌋ of its
/// edges, chosen at random, as long as no node on the other side would lose
/// its last edge. Requires degree >= 2 on `side` and 0 <= ratio < 1.
EvalSplit split_edges(const BipartiteGraph& g, double holdout_ratio, std::uint64_t seed, Side side = Side::v);

/// For every listed user: its test items plus up to `negatives` items drawn
/// without replacement from test-graph items the user never touched in `g`.
void add_candidates(EvalSplit& split, const BipartiteGraph& g, std::span<const NodeId> users, std::size_t negatives,
                    std::uint64_t seed);

struct RankedJudgment {
  std::vector<NodeId> ranking;
  /// Graded relevance; absent candidates have grade 0.
  std::unordered_map<NodeId, double> relevance;
};

/// Linear-gain DCG@k with log2(rank + 1) discount over the ideal DCG@k.
/// 0 when every grade is 0.
double ndcg_at_k(const RankedJudgment& judgment, std::size_t k);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  std::size_t hits = 0;
  bool empty_ground_truth = false;  // recall reported as 0
};

PrecisionRecall precision_recall_at_k(std::span<const NodeId> recommended, const std::vector<NodeId>& ground_truth,
                                      std::size_t k);

/// Top s_size items by sim(u_i, ·), excluding u_i itself.
std::vector<NodeId> most_similar(std::span<const double> sim_row, NodeId ui, std::size_t s_size);

/// p(v, u_i) = Σ_{u_j ∈ S ∪ N(v)} sim(u_i, u_j) w(v, u_j) / Σ_{u_j ∈ S ∪ N(v)} sim(u_i, u_j)
/// over the training graph, S = most_similar(sim_row, u_i, s_size). 0 when the
/// denominator is 0.
double predict_score(const BipartiteGraph& train, NodeId v, NodeId ui, std::span<const double> sim_row,
                     std::size_t s_size);

/// Similarity row sim(u, ·) over U on a fixed graph.
using Similarity = std::function<std::vector<double>(NodeId)>;

Similarity bhpp_similarity(const BipartiteGraph& g, const IndexMeta& meta, double epsilon);
Similarity jaccard_similarity(const BipartiteGraph& g);
/// Plain random walk with restart on the bipartite graph itself, read off U.
Similarity naive_ppr_similarity(const BipartiteGraph& g, double alpha, double tol = 1e-8);
/// Exact β from the dense oracle; small graphs only.
Similarity exact_bhpp_similarity(const BipartiteGraph& g, double alpha);

std::vector<double> jaccard_row(const BipartiteGraph& g, NodeId u);

struct MetricRow {
  std::string method;
  std::size_t k = 0;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

MetricRow summarize(std::string method, std::size_t k, std::string metric, std::span<const double> values);
void write_metric_report(std::ostream& out, std::span<const MetricRow> rows);

struct QrOptions {
  std::size_t queries = 100;
  std::vector<std::size_t> ks{5, 10};
  double holdout_ratio = 0.2;
  bool weighted_degree = false;
  std::uint64_t seed = 1;
};

struct QrSetup {
  EvalSplit split;
  std::vector<NodeId> queries;
};

/// Holds out edges stratified on U and samples queries among those with at
/// least one positive desirability towards another query.
QrSetup prepare_query_rewriting(const BipartiteGraph& g, const QrOptions& options);

/// NDCG@k per k: similarity on the training graph, desirability on `g`.
std::vector<MetricRow> evaluate_query_rewriting(const BipartiteGraph& g, const QrSetup& setup, const std::string& method,
                                                const Similarity& sim, const QrOptions& options);

struct RecOptions {
  std::size_t users = 100;
  std::vector<std::size_t> ks{5, 10};
  double holdout_ratio = 0.2;
  std::size_t negatives = 100;
  std::size_t s_size = 50;
  std::uint64_t seed = 1;
};

struct RecSetup {
  EvalSplit split;
  std::vector<NodeId> users;
};

/// Holds out edges stratified on V and builds candidate lists for a sample
/// of users that have test edges.
RecSetup prepare_recommendation(const BipartiteGraph& g, const RecOptions& options);

/// precision@k and recall@k per k.
std::vector<MetricRow> evaluate_recommendation(const RecSetup& setup, const std::string& method, const Similarity& sim,
                                               const RecOptions& options);

}  // namespace bhpp::eval
