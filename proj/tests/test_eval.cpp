#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "bhpp/eval.hpp"
#include "support/random_graphs.hpp"

using namespace bhpp;
using namespace bhpp::eval;

namespace {

// Brute-force desirability: double loop over every (V node, U node) pair.
double naive_desirability(const BipartiteGraph& g, NodeId qi, NodeId qj, bool weighted) {
  double sum = 0.0;
  for (NodeId k = 0; k < g.v_count(); ++k) {
    if (g.weight(qi, k) > 0.0 && g.weight(qj, k) > 0.0) sum += g.weight(qj, k);
  }
  double d = 0.0;
  for (NodeId k = 0; k < g.v_count(); ++k) {
    if (g.weight(qj, k) > 0.0) d += weighted ? g.weight(qj, k) : 1.0;
  }
  return sum / d;
}

double naive_predict(const BipartiteGraph& train, NodeId v, NodeId ui, const std::vector<double>& sim,
                     std::size_t s_size) {
  std::vector<NodeId> others;
  for (NodeId j = 0; j < train.u_count(); ++j) {
    if (j != ui) others.push_back(j);
  }
  std::stable_sort(others.begin(), others.end(), [&](NodeId a, NodeId b) { return sim[a] > sim[b]; });
  std::set<NodeId> members(others.begin(), others.begin() + std::min(s_size, others.size()));
  for (NodeId j = 0; j < train.u_count(); ++j) {
    if (train.weight(j, v) > 0.0) members.insert(j);
  }
  double num = 0.0, den = 0.0;
  for (NodeId j : members) {
    num += sim[j] * train.weight(j, v);
    den += sim[j];
  }
  return den == 0.0 ? 0.0 : num / den;
}

}  // namespace

TEST_CASE("desirability") {
  auto disjoint = testing::make_graph(2, 2, {{0, 0, 1}, {1, 1, 1}});
  CHECK(desirability(disjoint, 0, 1) == 0.0);
  auto same = testing::make_graph(2, 1, {{0, 0, 1}, {1, 0, 1}});
  CHECK(desirability(same, 0, 1) == 1.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto g = testing::random_graph(seed, {5, 25, 2, 8});
    for (NodeId i = 0; i < g.u_count(); ++i) {
      for (NodeId j = 0; j < g.u_count(); ++j) {
        for (bool w : {false, true}) CHECK(std::abs(desirability(g, i, j, w) - naive_desirability(g, i, j, w)) <= 1e-12);
      }
    }
  }
}

TEST_CASE("split_edges") {
  auto g = k_core_filter(testing::random_graph(5, {30, 80, 6, 12}), 2);
  SUBCASE("ratio 0 holds nothing out") {
    auto s = split_edges(g, 0.0, 1);
    CHECK(s.test.empty());
    CHECK(s.train == g);
  }
  SUBCASE("degree-10 node gives up exactly 2 at ratio 0.2") {
    std::vector<WeightedEdge> e;
    for (NodeId u = 0; u < 10; ++u) {
      e.push_back({u, 0, 1.0});
      e.push_back({u, 1, 1.0});
    }
    auto h = testing::make_graph(10, 2, e);
    auto s = split_edges(h, 0.2, 3, Side::u);
    CHECK(s.test.size() == 0);  // degree 2 nodes: ⌊0.4⌋ = 0
    auto s2 = split_edges(h, 0.2, 3, Side::v);
    CHECK(s2.test.size() == 4);  // two V nodes of degree 10
    for (NodeId v = 0; v < 2; ++v) CHECK(s2.train.v_degree(v) == 8);
  }
  SUBCASE("union and disjointness, per-node quota, fixed indices") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      for (Side side : {Side::u, Side::v}) {
        auto s = split_edges(g, 0.25, seed, side);
        std::map<std::pair<NodeId, NodeId>, double> all;
        for (const auto& e : s.train.edges()) all[{e.u, e.v}] += e.weight;
        for (const auto& e : s.test) {
          CHECK(all.count({e.u, e.v}) == 0);
          all[{e.u, e.v}] += e.weight;
        }
        CHECK(all.size() == g.edge_count());
        for (const auto& e : g.edges()) CHECK(all[{e.u, e.v}] == e.weight);
        CHECK(s.train.u_count() == g.u_count());
        CHECK(s.train.v_count() == g.v_count());
        CHECK(s.train.u_label(0) == g.u_label(0));
        std::vector<std::size_t> held(side == Side::u ? g.u_count() : g.v_count(), 0);
        for (const auto& e : s.test) ++held[side == Side::u ? e.u : e.v];
        for (NodeId x = 0; x < held.size(); ++x) {
          const auto d = side == Side::u ? g.u_degree(x) : g.v_degree(x);
          CHECK(held[x] <= static_cast<std::size_t>(0.25 * static_cast<double>(d)));
        }
      }
    }
  }
  SUBCASE("different seeds, same multiset") {
    auto a = split_edges(g, 0.3, 1), b = split_edges(g, 0.3, 2);
    CHECK(a.test.size() + a.train.edge_count() == b.test.size() + b.train.edge_count());
    CHECK_FALSE(a.train == b.train);
  }
  SUBCASE("degree-1 nodes are refused") {
    CHECK_THROWS_AS(split_edges(testing::star(4), 0.2, 1, Side::u), GraphError);
    CHECK_THROWS_AS(split_edges(g, 1.0, 1), GraphError);
  }
}

TEST_CASE("ndcg_at_k") {
  RankedJudgment perfect{{1, 2, 3}, {{1, 3.0}, {2, 2.0}, {3, 1.0}}};
  CHECK(ndcg_at_k(perfect, 3) == doctest::Approx(1.0));
  RankedJudgment last{{7, 8}, {{8, 1.0}}};
  CHECK(ndcg_at_k(last, 2) == doctest::Approx(0.6309297535714574).epsilon(1e-15));
  RankedJudgment none{{1, 2}, {}};
  CHECK(ndcg_at_k(none, 2) == 0.0);
  CHECK_THROWS_AS(ndcg_at_k(none, 0), GraphError);

  Rng rng = make_rng(5, "ndcg");
  for (int trial = 0; trial < 50; ++trial) {
    RankedJudgment j;
    for (NodeId c = 0; c < 20; ++c) {
      j.ranking.push_back(c);
      if (uniform01(rng) < 0.4) j.relevance[c] = uniform01(rng) * 3;
    }
    for (std::size_t i = j.ranking.size(); i > 1; --i) std::swap(j.ranking[i - 1], j.ranking[rng() % i]);
    const double v = ndcg_at_k(j, 10);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0 + 1e-12);
    // Relabel candidates: c -> c + 100.
    RankedJudgment r;
    for (NodeId c : j.ranking) r.ranking.push_back(c + 100);
    for (auto [c, g] : j.relevance) r.relevance[c + 100] = g;
    CHECK(ndcg_at_k(r, 10) == doctest::Approx(v).epsilon(1e-15));
    // The ideal ordering scores 1 whenever some grade is positive.
    RankedJudgment ideal = j;
    std::stable_sort(ideal.ranking.begin(), ideal.ranking.end(), [&](NodeId a, NodeId b) {
      auto ga = j.relevance.count(a) ? j.relevance.at(a) : 0.0;
      auto gb = j.relevance.count(b) ? j.relevance.at(b) : 0.0;
      return ga > gb;
    });
    if (!j.relevance.empty()) CHECK(ndcg_at_k(ideal, 10) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("precision_recall_at_k") {
  std::vector<NodeId> rec{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto all = precision_recall_at_k(rec, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, 10);
  CHECK(all.precision == 1.0);
  auto sub = precision_recall_at_k(rec, {2, 4}, 10);
  CHECK(sub.recall == 1.0);
  auto mixed = precision_recall_at_k(rec, {1, 5, 40, 41}, 10);
  CHECK(mixed.precision == doctest::Approx(0.2));
  CHECK(mixed.recall == doctest::Approx(0.5));
  auto empty = precision_recall_at_k(rec, {}, 5);
  CHECK(empty.recall == 0.0);
  CHECK(empty.empty_ground_truth);
}

TEST_CASE("predict_score") {
  // u1 is the target item; u2 overlaps with v's history.
  auto train = testing::make_graph(3, 2, {{0, 0, 1.0}, {1, 0, 1.0}, {1, 1, 4.0}, {2, 0, 1.0}});
  SUBCASE("zero denominator") {
    std::vector<double> sim{1.0, 0.0, 0.0};
    CHECK(predict_score(train, 1, 0, sim, 2) == 0.0);
  }
  SUBCASE("one overlapping item returns its weight") {
    std::vector<double> sim{1.0, 0.3, 0.0};
    CHECK(predict_score(train, 1, 0, sim, 2) == doctest::Approx(4.0));
  }
  SUBCASE("matches brute force on random instances") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto g = testing::random_graph(seed + 70, {5, 30, 2, 8});
      Rng rng = make_rng(seed, "sim");
      for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> sim(g.u_count());
        for (auto& s : sim) s = uniform01(rng) < 0.5 ? 0.0 : uniform01(rng);
        const NodeId ui = static_cast<NodeId>(rng() % g.u_count());
        const NodeId v = static_cast<NodeId>(rng() % g.v_count());
        for (std::size_t s_size : {1u, 3u, 50u}) {
          CHECK(std::abs(predict_score(g, v, ui, sim, s_size) - naive_predict(g, v, ui, sim, s_size)) <= 1e-12);
        }
      }
    }
  }
}

TEST_CASE("similarity plugs") {
  auto g = testing::random_graph(9, {10, 30, 3, 6});
  auto j = jaccard_row(g, 0);
  CHECK(j[0] == 1.0);
  for (double x : j) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
  auto ppr = naive_ppr_similarity(g, 0.15)(0);
  double s = 0.0;
  for (double x : ppr) s += x;
  CHECK(s > 0.0);
  CHECK(s < 1.0);
  auto exact = exact_bhpp_similarity(g, 0.15)(0);
  auto meta = build_index_meta(g, 0.15);
  auto approx = bhpp_similarity(g, meta, 1e-6)(0);
  for (std::size_t i = 0; i < exact.size(); ++i) CHECK(std::abs(exact[i] - approx[i]) <= 1e-6);
}

TEST_CASE("pipelines are deterministic and in range") {
  auto g = k_core_filter(synth_bipartite({120, 80, 900, 0.0, 5.0, 0.7}, 3), 2);
  QrOptions qo;
  qo.queries = 20;
  auto qs = prepare_query_rewriting(g, qo);
  CHECK(qs.queries.size() == 20);
  auto rows = evaluate_query_rewriting(g, qs, "exact", exact_bhpp_similarity(qs.split.train, 0.15), qo);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].k == 5);
  CHECK(rows[1].k == 10);
  for (const auto& r : rows) {
    CHECK(r.mean >= 0.0);
    CHECK(r.mean <= 1.0);
  }
  auto again = evaluate_query_rewriting(g, prepare_query_rewriting(g, qo), "exact",
                                        exact_bhpp_similarity(qs.split.train, 0.15), qo);
  CHECK(again[0].mean == rows[0].mean);

  RecOptions ro;
  ro.users = 15;
  ro.negatives = 20;
  auto rs = prepare_recommendation(g, ro);
  for (NodeId v : rs.users) CHECK(!rs.split.candidates[v].empty());
  auto rec = evaluate_recommendation(rs, "jaccard", jaccard_similarity(rs.split.train), ro);
  REQUIRE(rec.size() == 4);
  std::ostringstream out;
  write_metric_report(out, rec);
  CHECK(out.str().rfind("method\tk\tmetric\tmean\tstddev\tn\n", 0) == 0);
  auto rec2 = evaluate_recommendation(prepare_recommendation(g, ro), "jaccard", jaccard_similarity(rs.split.train), ro);
  CHECK(rec2[0].mean == rec[0].mean);
}
