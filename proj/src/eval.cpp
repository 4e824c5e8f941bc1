#include "bhpp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "bhpp/oracle.hpp"
#include "bhpp/rng.hpp"

namespace bhpp::eval {

namespace {

const AdjacencySide& side_of(const BipartiteGraph& g, Side s) { return s == Side::u ? g.u_side() : g.v_side(); }

template <typename T>
void shuffle_with(std::vector<T>& xs, Rng& rng) {
  // Fisher-Yates with our own index draw; std::shuffle's algorithm is
  // implementation-defined and would make splits differ across stdlibs.
  for (std::size_t i = xs.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(std::uniform_int_distribution<std::uint64_t>(0, i - 1)(rng));
    std::swap(xs[i - 1], xs[j]);
  }
}

std::vector<NodeId> rank_by(std::span<const double> scores, std::span<const NodeId> ids) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] != scores[b] ? scores[a] > scores[b] : ids[a] < ids[b];
  });
  std::vector<NodeId> out;
  out.reserve(ids.size());
  for (auto i : order) out.push_back(ids[i]);
  return out;
}

}  // namespace

double desirability(const BipartiteGraph& g, NodeId qi, NodeId qj, bool weighted_degree) {
  auto ni = g.u_neighbors(qi);
  auto nj = g.u_neighbors(qj);
  auto wj = g.u_weights(qj);
  double sum = 0.0;
  std::size_t a = 0, b = 0;
  while (a < ni.size() && b < nj.size()) {
    if (ni[a] < nj[b]) {
      ++a;
    } else if (nj[b] < ni[a]) {
      ++b;
    } else {
      sum += wj[b];
      ++a;
      ++b;
    }
  }
  const double d = weighted_degree ? g.u_weight_sum(qj) : static_cast<double>(g.u_degree(qj));
  return sum / d;
}

EvalSplit split_edges(const BipartiteGraph& g, double holdout_ratio, std::uint64_t seed, Side side) {
  if (!(holdout_ratio >= 0.0 && holdout_ratio < 1.0)) throw GraphError("holdout ratio must lie in [0, 1)");
  const auto& strat = side_of(g, side);
  const auto& other = side_of(g, side == Side::u ? Side::v : Side::u);
  for (NodeId x = 0; x < strat.size(); ++x) {
    if (strat.degree(x) < 2) {
      throw GraphError(std::string(side == Side::u ? "U" : "V") + " node '" + strat.labels[x] +
                       "' has degree 1; apply k_core_filter with k >= 2 first");
    }
  }

  std::vector<std::size_t> other_left(other.size());
  for (NodeId y = 0; y < other.size(); ++y) other_left[y] = other.degree(y);

  EvalSplit split;
  split.stratified = side;
  std::vector<WeightedEdge> train;
  train.reserve(g.edge_count());
  std::vector<std::uint64_t> cells;
  for (NodeId x = 0; x < strat.size(); ++x) {
    const auto begin = strat.offsets[x];
    const auto d = strat.degree(x);
    cells.resize(d);
    std::iota(cells.begin(), cells.end(), begin);
    Rng rng = make_rng(seed, "split", x);
    shuffle_with(cells, rng);
    std::size_t want = static_cast<std::size_t>(std::floor(holdout_ratio * static_cast<double>(d)));
    std::vector<char> held(d, 0);
    for (auto e : cells) {
      if (want == 0) break;
      const NodeId y = strat.neighbors[e];
      if (other_left[y] < 2) continue;
      --other_left[y];
      held[e - begin] = 1;
      --want;
    }
    for (std::size_t i = 0; i < d; ++i) {
      const NodeId y = strat.neighbors[begin + i];
      WeightedEdge edge = side == Side::u ? WeightedEdge{x, y, strat.weights[begin + i]}
                                          : WeightedEdge{y, x, strat.weights[begin + i]};
      (held[i] ? split.test : train).push_back(edge);
    }
  }
  split.train = BipartiteGraph::from_edges(g.u_side().labels, g.v_side().labels, train);
  split.candidates.assign(g.v_count(), {});
  return split;
}

void add_candidates(EvalSplit& split, const BipartiteGraph& g, std::span<const NodeId> users, std::size_t negatives,
                    std::uint64_t seed) {
  std::vector<std::vector<NodeId>> positives(g.v_count());
  std::vector<char> test_item(g.u_count(), 0);
  for (const auto& e : split.test) {
    positives[e.v].push_back(e.u);
    test_item[e.u] = 1;
  }
  std::vector<NodeId> pool;
  for (NodeId u = 0; u < g.u_count(); ++u) {
    if (test_item[u]) pool.push_back(u);
  }
  split.candidates.resize(g.v_count());
  for (NodeId v : users) {
    auto& c = split.candidates[v];
    c = positives[v];
    std::sort(c.begin(), c.end());
    std::vector<NodeId> neg;
    for (NodeId u : pool) {
      if (g.weight(u, v) == 0.0) neg.push_back(u);
    }
    Rng rng = make_rng(seed, "negatives", v);
    shuffle_with(neg, rng);
    if (neg.size() > negatives) neg.resize(negatives);
    std::sort(neg.begin(), neg.end());
    c.insert(c.end(), neg.begin(), neg.end());
  }
}

double ndcg_at_k(const RankedJudgment& judgment, std::size_t k) {
  if (k == 0) throw GraphError("k must be >= 1");
  auto grade = [&](NodeId c) {
    auto it = judgment.relevance.find(c);
    return it == judgment.relevance.end() ? 0.0 : it->second;
  };
  double dcg = 0.0;
  for (std::size_t i = 0; i < std::min(k, judgment.ranking.size()); ++i) {
    dcg += grade(judgment.ranking[i]) / std::log2(static_cast<double>(i) + 2.0);
  }
  std::vector<double> grades;
  grades.reserve(judgment.relevance.size());
  for (const auto& [c, r] : judgment.relevance) grades.push_back(r);
  std::sort(grades.begin(), grades.end(), std::greater<>());
  double ideal = 0.0;
  for (std::size_t i = 0; i < std::min(k, grades.size()); ++i) {
    ideal += grades[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  return ideal > 0.0 ? dcg / ideal : 0.0;
}

PrecisionRecall precision_recall_at_k(std::span<const NodeId> recommended, const std::vector<NodeId>& ground_truth,
                                      std::size_t k) {
  if (k == 0) throw GraphError("k must be >= 1");
  std::unordered_set<NodeId> truth(ground_truth.begin(), ground_truth.end());
  PrecisionRecall pr;
  for (std::size_t i = 0; i < std::min(k, recommended.size()); ++i) pr.hits += truth.count(recommended[i]);
  pr.precision = static_cast<double>(pr.hits) / static_cast<double>(k);
  if (truth.empty()) {
    pr.empty_ground_truth = true;
  } else {
    pr.recall = static_cast<double>(pr.hits) / static_cast<double>(truth.size());
  }
  return pr;
}

std::vector<NodeId> most_similar(std::span<const double> sim_row, NodeId ui, std::size_t s_size) {
  std::vector<NodeId> out;
  for (const auto& r : topk(sim_row, s_size, ui)) out.push_back(r.node);
  return out;
}

double predict_score(const BipartiteGraph& train, NodeId v, NodeId ui, std::span<const double> sim_row,
                     std::size_t s_size) {
  auto members = most_similar(sim_row, ui, s_size);
  auto nv = train.v_neighbors(v);
  members.insert(members.end(), nv.begin(), nv.end());
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
  double num = 0.0, den = 0.0;
  for (NodeId uj : members) {
    num += sim_row[uj] * train.weight(uj, v);
    den += sim_row[uj];
  }
  return den == 0.0 ? 0.0 : num / den;
}

std::vector<double> jaccard_row(const BipartiteGraph& g, NodeId u) {
  std::vector<double> common(g.u_count(), 0.0);
  for (NodeId v : g.u_neighbors(u)) {
    for (NodeId uj : g.v_neighbors(v)) common[uj] += 1.0;
  }
  const double du = static_cast<double>(g.u_degree(u));
  std::vector<double> out(g.u_count(), 0.0);
  for (NodeId uj = 0; uj < g.u_count(); ++uj) {
    if (common[uj] > 0.0) out[uj] = common[uj] / (du + static_cast<double>(g.u_degree(uj)) - common[uj]);
  }
  return out;
}

Similarity bhpp_similarity(const BipartiteGraph& g, const IndexMeta& meta, double epsilon) {
  return [&g, meta, epsilon](NodeId u) { return bhpp_query(g, meta, u, epsilon).scores; };
}

Similarity jaccard_similarity(const BipartiteGraph& g) {
  return [&g](NodeId u) { return jaccard_row(g, u); };
}

Similarity naive_ppr_similarity(const BipartiteGraph& g, double alpha, double tol) {
  return [&g, alpha, tol](NodeId u) {
    const auto& us = g.u_side();
    const auto& vs = g.v_side();
    std::vector<double> xu(g.u_count(), 0.0), xv(g.v_count(), 0.0), yu(g.u_count()), yv(g.v_count());
    std::vector<double> pu(g.u_count(), 0.0);
    xu[u] = 1.0;
    double scale = alpha;
    for (double tail = 1.0; tail > tol; tail *= 1.0 - alpha) {
      for (std::size_t i = 0; i < xu.size(); ++i) pu[i] += scale * xu[i];
      std::fill(yu.begin(), yu.end(), 0.0);
      std::fill(yv.begin(), yv.end(), 0.0);
      for (std::size_t i = 0; i < xu.size(); ++i) {
        if (xu[i] == 0.0) continue;
        for (auto e = us.offsets[i]; e < us.offsets[i + 1]; ++e) yv[us.neighbors[e]] += xu[i] * us.weights[e] / us.weight_sums[i];
      }
      for (std::size_t j = 0; j < xv.size(); ++j) {
        if (xv[j] == 0.0) continue;
        for (auto e = vs.offsets[j]; e < vs.offsets[j + 1]; ++e) yu[vs.neighbors[e]] += xv[j] * vs.weights[e] / vs.weight_sums[j];
      }
      xu.swap(yu);
      xv.swap(yv);
      scale *= 1.0 - alpha;
    }
    return pu;
  };
}

Similarity exact_bhpp_similarity(const BipartiteGraph& g, double alpha) {
  auto dense = std::make_shared<oracle::DenseHpp>(oracle::exact_hpp(g, alpha, 1e-13));
  return [dense](NodeId u) { return oracle::exact_bhpp(*dense, u); };
}

MetricRow summarize(std::string method, std::size_t k, std::string metric, std::span<const double> values) {
  MetricRow row{std::move(method), k, std::move(metric), 0.0, 0.0, values.size()};
  if (values.empty()) return row;
  row.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double x : values) ss += (x - row.mean) * (x - row.mean);
    row.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return row;
}

void write_metric_report(std::ostream& out, std::span<const MetricRow> rows) {
  out << "method\tk\tmetric\tmean\tstddev\tn\n";
  const auto old = out.precision(6);
  for (const auto& r : rows) {
    out << r.method << '\t' << r.k << '\t' << r.metric << '\t' << r.mean << '\t' << r.stddev << '\t' << r.n << '\n';
  }
  out.precision(old);
}

QrSetup prepare_query_rewriting(const BipartiteGraph& g, const QrOptions& options) {
  QrSetup setup{split_edges(g, options.holdout_ratio, stream_seed(options.seed, "qr-split"), Side::u), {}};
  std::vector<NodeId> eligible;
  for (NodeId q = 0; q < g.u_count(); ++q) {
    bool shared = false;
    for (NodeId v : g.u_neighbors(q)) shared = shared || g.v_degree(v) >= 2;
    if (shared) eligible.push_back(q);
  }
  Rng rng = make_rng(options.seed, "qr-queries");
  shuffle_with(eligible, rng);
  if (eligible.size() > options.queries) eligible.resize(options.queries);
  std::sort(eligible.begin(), eligible.end());
  setup.queries = std::move(eligible);
  return setup;
}

std::vector<MetricRow> evaluate_query_rewriting(const BipartiteGraph& g, const QrSetup& setup, const std::string& method,
                                                const Similarity& sim, const QrOptions& options) {
  std::vector<std::vector<double>> per_k(options.ks.size());
  for (NodeId q : setup.queries) {
    RankedJudgment j;
    for (NodeId v : g.u_neighbors(q)) {
      for (NodeId qj : g.v_neighbors(v)) {
        if (qj != q && !j.relevance.contains(qj)) j.relevance[qj] = desirability(g, q, qj, options.weighted_degree);
      }
    }
    auto row = sim(q);
    for (const auto& r : topk(row, g.u_count(), q)) j.ranking.push_back(r.node);
    for (std::size_t i = 0; i < options.ks.size(); ++i) per_k[i].push_back(ndcg_at_k(j, options.ks[i]));
  }
  std::vector<MetricRow> rows;
  for (std::size_t i = 0; i < options.ks.size(); ++i) rows.push_back(summarize(method, options.ks[i], "ndcg", per_k[i]));
  return rows;
}

RecSetup prepare_recommendation(const BipartiteGraph& g, const RecOptions& options) {
  RecSetup setup{split_edges(g, options.holdout_ratio, stream_seed(options.seed, "rec-split"), Side::v), {}};
  std::vector<char> has_test(g.v_count(), 0);
  for (const auto& e : setup.split.test) has_test[e.v] = 1;
  std::vector<NodeId> users;
  for (NodeId v = 0; v < g.v_count(); ++v) {
    if (has_test[v]) users.push_back(v);
  }
  Rng rng = make_rng(options.seed, "rec-users");
  shuffle_with(users, rng);
  if (users.size() > options.users) users.resize(options.users);
  std::sort(users.begin(), users.end());
  add_candidates(setup.split, g, users, options.negatives, stream_seed(options.seed, "rec-candidates"));
  setup.users = std::move(users);
  return setup;
}

std::vector<MetricRow> evaluate_recommendation(const RecSetup& setup, const std::string& method, const Similarity& sim,
                                               const RecOptions& options) {
  const auto& split = setup.split;
  const auto& train = split.train;
  // Score item-major so each similarity row is computed once and dropped.
  std::unordered_map<NodeId, std::vector<std::pair<std::size_t, std::size_t>>> uses;  // item -> (user slot, cand pos)
  std::vector<std::vector<double>> scores(setup.users.size());
  for (std::size_t s = 0; s < setup.users.size(); ++s) {
    const auto& cands = split.candidates[setup.users[s]];
    scores[s].assign(cands.size(), 0.0);
    for (std::size_t p = 0; p < cands.size(); ++p) uses[cands[p]].push_back({s, p});
  }
  std::vector<NodeId> items;
  for (const auto& [item, _] : uses) items.push_back(item);
  std::sort(items.begin(), items.end());
  for (NodeId item : items) {
    auto row = sim(item);
    for (auto [s, p] : uses[item]) scores[s][p] = predict_score(train, setup.users[s], item, row, options.s_size);
  }

  std::vector<std::vector<NodeId>> truth(train.v_count());
  for (const auto& e : split.test) truth[e.v].push_back(e.u);

  std::vector<std::vector<double>> prec(options.ks.size()), rec(options.ks.size());
  for (std::size_t s = 0; s < setup.users.size(); ++s) {
    const NodeId v = setup.users[s];
    auto ranking = rank_by(scores[s], split.candidates[v]);
    for (std::size_t i = 0; i < options.ks.size(); ++i) {
      auto pr = precision_recall_at_k(ranking, truth[v], options.ks[i]);
      prec[i].push_back(pr.precision);
      rec[i].push_back(pr.recall);
    }
  }
  std::vector<MetricRow> rows;
  for (std::size_t i = 0; i < options.ks.size(); ++i) {
    rows.push_back(summarize(method, options.ks[i], "precision", prec[i]));
    rows.push_back(summarize(method, options.ks[i], "recall", rec[i]));
  }
  return rows;
}

}  // namespace bhpp::eval
