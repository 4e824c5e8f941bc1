// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "bhpp/baselines.hpp"
#include "bhpp/eval.hpp"
#include "bhpp/oracle.hpp"
#include "bhpp/push.hpp"
#include "bhpp/query.hpp"
#include "support/random_graphs.hpp"

using namespace bhpp;

namespace {

constexpr double kAlpha = 0.15;
constexpr double kSlack = 1e-9;
constexpr std::size_t kCorpus = 200;
constexpr std::size_t kQueriesPerGraph = 3;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const Verdict& v) {
  std::printf("%s criterion %d: %s%s%s\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.empty() ? "" : " | ",
              v.detail.c_str());
  std::fflush(stdout);
  if (!v.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Counts excursions outside [lo, hi] and keeps the observed range of x.
struct Bound {
  double lo, hi;
  double min = INFINITY, max = -INFINITY;
  std::size_t checks = 0, violations = 0;

  void add(double x) {
    ++checks;
    if (x < lo || x > hi) ++violations;
    min = std::min(min, x);
    max = std::max(max, x);
  }
  std::string str() const {
    return fmt("%zu checks, %zu violations, error range [%.3g, %.3g]", checks, violations, min, max);
  }
};

struct Case {
  BipartiteGraph g;
  oracle::DenseHpp pi;
  IndexMeta meta;
  std::vector<NodeId> queries;
};

std::vector<Case> build_corpus() {
  std::vector<Case> corpus;
  corpus.reserve(kCorpus);
  for (std::uint64_t seed = 0; seed < kCorpus; ++seed) {
    auto g = testing::random_graph(10'000 + seed, {10, 200, 2, 20});
    auto pi = oracle::exact_hpp(g, kAlpha, 1e-13);
    auto meta = build_index_meta(g, kAlpha);
    Rng rng = make_rng(seed, "acceptance-queries");
    std::vector<NodeId> q;
    for (std::size_t i = 0; i < kQueriesPerGraph; ++i) q.push_back(static_cast<NodeId>(rng() % g.u_count()));
    corpus.push_back({std::move(g), std::move(pi), meta, std::move(q)});
  }
  return corpus;
}

Verdict c1(const std::vector<Case>& corpus) {
  Verdict v;
  std::string per_eps;
  for (double eps : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
    Bound b{-kSlack, eps};
    for (const auto& c : corpus) {
      for (NodeId q : c.queries) {
        auto r = bhpp_query(c.g, c.meta, q, eps);
        auto beta = oracle::exact_bhpp(c.pi, q);
        for (NodeId i = 0; i < c.g.u_count(); ++i) b.add(beta[i] - r.scores[i]);
      }
    }
    v.pass &= b.violations == 0;
    per_eps += fmt(" eps=%.0e: %s;", eps, b.str().c_str());
  }
  v.detail = fmt("%zu graphs x %zu queries;", corpus.size(), kQueriesPerGraph) + per_eps;
  return v;
}

Verdict c2(const std::vector<Case>& corpus) {
  Verdict v;
  for (double eps_b : {1e-3, 1e-5}) {
    Bound b{-kSlack, eps_b};
    for (const auto& c : corpus) {
      for (NodeId q : c.queries) {
        auto out = ss_push(c.g, q, kAlpha, eps_b);
        for (NodeId i = 0; i < c.g.u_count(); ++i) b.add(c.pi.pi(i, q) - out.ledger.estimate[i]);
      }
    }
    v.pass &= b.violations == 0;
    v.detail += fmt("eps_b=%.0e: %s; ", eps_b, b.str().c_str());
  }
  return v;
}

Verdict c3(const std::vector<Case>& corpus) {
  Verdict v;
  for (double eps_f : {1e-3, 1e-5}) {
    Bound b{-kSlack, eps_f};
    for (const auto& c : corpus) {
      for (NodeId q : c.queries) {
        // Seeded both from a bare unit residue and from a backward ledger.
        for (auto seed : {ResidueLedger::unit(c.g, q), ss_push(c.g, q, kAlpha, eps_f).ledger}) {
          auto fwd = pi_push(c.g, q, kAlpha, c.meta.lambda, eps_f, std::move(seed));
          for (NodeId i = 0; i < c.g.u_count(); ++i) b.add(c.pi.pi(q, i) - fwd.estimate[i]);
        }
      }
    }
    v.pass &= b.violations == 0;
    v.detail += fmt("eps_f=%.0e: %s; ", eps_f, b.str().c_str());
  }
  return v;
}

Verdict c4() {
  Verdict v;
  double worst = 0.0;
  std::size_t boundaries = 0, sequential = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // A quarter of the graphs are hubs so the sequential phase is exercised.
    auto g = seed % 4 == 3 ? testing::hub(20 + seed) : testing::random_graph(20'000 + seed, {10, 50, 2, 12});
    auto d = oracle::exact_hpp(g, kAlpha, 1e-14);
    const NodeId target = static_cast<NodeId>(seed % g.u_count());
    auto check = [&](const ResidueLedger& l) {
      ++boundaries;
      if (!l.v_flushed()) {
        v.pass = false;
        return;
      }
      for (NodeId i = 0; i < g.u_count(); ++i) {
        double rhs = l.estimate[i];
        for (NodeId j = 0; j < g.u_count(); ++j) rhs += d.pi(i, j) * l.residue_u[j];
        worst = std::max(worst, std::abs(d.pi(i, target) - rhs));
      }
    };
    check(ResidueLedger::unit(g, target));
    PushOptions opts;
    opts.on_round = [&](const RoundRecord& r, const ResidueLedger* l) {
      if (r.phase == Phase::sequential) ++sequential;
      if (l) check(*l);
    };
    ss_push(g, target, kAlpha, 1e-7, opts);
  }
  v.pass &= worst <= 1e-9 && sequential > 0;
  v.detail = fmt("%zu iteration boundaries (%zu sequential), max |residual| %.3g", boundaries, sequential, worst);
  return v;
}

Verdict c5() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto g = testing::random_graph(30'000 + seed, {10, 200, 2, 20});
    auto d = oracle::exact_hpp(g, kAlpha, 1e-13);
    for (NodeId u = 0; u < g.u_count(); ++u) {
      for (NodeId i = 0; i < g.u_count(); ++i) {
        worst = std::max(worst, std::abs(d.pi(u, i) / g.u_weight_sum(i) - d.pi(i, u) / g.u_weight_sum(u)));
      }
    }
  }
  return {worst <= 1e-9, fmt("100 graphs, max |pi(u,i)/ws(i) - pi(i,u)/ws(u)| %.3g", worst)};
}

Verdict c6() {
  Verdict v;
  double min_gap = INFINITY, worst_over = -INFINITY;
  std::size_t walk_wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto g = testing::random_graph(40'000 + seed, {10, 200, 2, 20});
    const std::size_t tau = default_tau(kAlpha, g.u_count());
    const double lambda = estimate_lambda(g, kAlpha, tau);
    auto d = oracle::exact_hpp(g, kAlpha, 1e-13);
    const double max_col = d.pi.colwise().sum().maxCoeff();

    // Both operands recomputed densely: ρ = α Σ_{ℓ=0..τ} (1-α)^ℓ 1ᵀ P^ℓ.
    Eigen::MatrixXd p = oracle::dense_hidden_transition(g);
    Eigen::RowVectorXd x = Eigen::RowVectorXd::Ones(p.rows()), rho = Eigen::RowVectorXd::Zero(p.rows());
    for (std::size_t l = 0; l <= tau; ++l) {
      rho += kAlpha * std::pow(1 - kAlpha, static_cast<double>(l)) * x;
      x = x * p;
    }
    const double walk = rho.maxCoeff() + static_cast<double>(g.u_count()) * std::pow(1 - kAlpha, tau + 1.0);
    const auto& ws = g.u_side().weight_sums;
    const double ratio = *std::max_element(ws.begin(), ws.end()) / *std::min_element(ws.begin(), ws.end());
    walk_wins += walk < ratio;

    min_gap = std::min(min_gap, lambda - max_col);
    worst_over = std::max(worst_over, lambda - std::min(walk, ratio));
    v.pass &= lambda >= max_col - kSlack && lambda <= walk + 1e-12 && lambda <= ratio + 1e-12;
  }
  v.detail = fmt("100 graphs, min(lambda - max column sum) %.3g, max(lambda - min operand) %.3g, walk bound tighter on %zu",
                 min_gap, worst_over, walk_wins);
  return v;
}

Verdict c7() {
  const auto t = required_iterations(0.15, 0.1, 1.0);
  return {t == 14, fmt("required_iterations(0.15, 0.1, 1) = %zu", t)};
}

Verdict c8() {
  auto g = testing::g2();
  auto alias = build_alias(g);
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto p = monte_carlo(g, alias, 0, kAlpha, 0.02, 1e-6, 1000 + seed);
    const double e = std::max(std::abs(p[0] - 0.575), std::abs(p[1] - 0.425));
    worst = std::max(worst, e);
    bad += e > 0.02;
  }
  return {bad <= 1, fmt("50 runs, %zu outside eps_f, max error %.4f, %llu walks each", bad, worst,
                        static_cast<unsigned long long>(mc_walk_count(0.02, 1e-6, 2)))};
}

double mean_ms(const std::function<void(NodeId)>& run, const std::vector<NodeId>& qs) {
  double total = 0.0;
  for (NodeId q : qs) {
    auto t0 = std::chrono::steady_clock::now();
    run(q);
    total += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return total / static_cast<double>(qs.size());
}

// Run on the generator's default uniform shape and on a skewed one. Skew
// drives λ up, which shrinks the forward thresholds.
Verdict c9() {
  Verdict v;
  const std::pair<const char*, SynthParams> shapes[] = {{"uniform", {5000, 5000, 100'000, 0.0, 5.0, 0.0}},
                                                        {"skew 0.6", {5000, 5000, 100'000, 0.0, 5.0, 0.6}}};
  for (const auto& [name, params] : shapes) {
    auto g = synth_bipartite(params, 2024);
    auto meta = build_index_meta(g, kAlpha);
    auto alias = build_alias(g);
    Rng rng = make_rng(9, "acceptance-c9");
    std::vector<NodeId> qs;
    for (int i = 0; i < 50; ++i) qs.push_back(static_cast<NodeId>(rng() % g.u_count()));

    // A comparison inverted by less than 10% is reported but does not fail.
    auto compare = [&](const char* what, double ours, double theirs) {
      const bool strict = ours <= theirs;
      const bool within = ours <= 1.10 * theirs;
      v.pass &= within;
      v.detail += fmt("%s %.3f ms vs %.3f ms%s; ", what, ours, theirs,
                      strict ? "" : within ? " (inverted by <10%, noise)" : " (INVERTED)");
    };
    v.detail += fmt("[%s |E|=%zu lambda=%.2f] ", name, g.edge_count(), meta.lambda);

    double eps = 1e-2;
    const double ss2 = mean_ms([&](NodeId q) { bhpp_query(g, meta, q, eps); }, qs);
    const double pi2 = mean_ms([&](NodeId q) { pisp_query(g, q, kAlpha, eps); }, qs);
    const double mc2 = mean_ms([&](NodeId q) { mcsp_query(g, alias, q, kAlpha, eps, 1e-6, q); }, qs);
    compare("eps=1e-2 ssbipush/pisp", ss2, pi2);
    compare("eps=1e-2 ssbipush/mcsp", ss2, mc2);

    eps = 1e-6;
    const double ss6 = mean_ms([&](NodeId q) { bhpp_query(g, meta, q, eps); }, qs);
    const double pi6 = mean_ms([&](NodeId q) { pisp_query(g, q, kAlpha, eps); }, qs);
    compare("eps=1e-6 ssbipush/pisp", ss6, pi6);
  }
  v.detail += fmt("eps=1e-6 mcsp excluded (%llu walks per query)",
                  static_cast<unsigned long long>(mc_walk_count(1e-6 / 2, 1e-6, 5000)));
  return v;
}

Verdict c10() {
  Verdict v;
  std::size_t sweeps = 0, breaks = 0;
  double worst_rise = 0.0;
  const SynthParams shapes[] = {{2000, 1500, 20'000, 0.0, 5.0, 0.0},
                                {3000, 1000, 30'000, 0.0, 10.0, 0.5},
                                {1500, 3000, 25'000, 0.0, 1.0, 0.9}};
  for (std::uint64_t k = 0; k < 3; ++k) {
    auto g = synth_bipartite(shapes[k], 50 + k);
    Rng rng = make_rng(k, "acceptance-c10");
    for (int qi = 0; qi < 10; ++qi) {
      const NodeId q = static_cast<NodeId>(rng() % g.u_count());
      double prev = INFINITY;
      ++sweeps;
      bool ok = true;
      for (double eps_b : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
        auto back = ss_push(g, q, kAlpha, eps_b);
        auto fwd = pi_push(g, q, kAlpha, 1.0, 0.5, std::move(back.ledger));
        if (fwd.gamma > prev) {
          ok = false;
          worst_rise = std::max(worst_rise, fwd.gamma - prev);
        }
        prev = fwd.gamma;
      }
      breaks += !ok;
    }
  }
  v.pass = breaks == 0;
  v.detail = fmt("%zu sweeps over eps_b 1e-1..1e-6 on 3 graphs, %zu non-monotone, largest rise %.3g", sweeps, breaks,
                 worst_rise);
  return v;
}

Verdict c11() {
  using namespace eval;
  Verdict v;
  std::size_t checks = 0;
  double worst = 0.0;
  Rng rng = make_rng(11, "acceptance-c11");

  for (int trial = 0; trial < 200; ++trial) {
    RankedJudgment j;
    const NodeId n = 5 + static_cast<NodeId>(rng() % 30);
    for (NodeId c = 0; c < n; ++c) {
      j.ranking.push_back(c);
      if (uniform01(rng) < 0.5) j.relevance[c] = 0.1 + uniform01(rng) * 4;
    }
    if (j.relevance.empty()) j.relevance[0] = 1.0;
    std::sort(j.ranking.begin(), j.ranking.end(), [&](NodeId a, NodeId b) {
      auto ga = j.relevance.count(a) ? j.relevance.at(a) : 0.0;
      auto gb = j.relevance.count(b) ? j.relevance.at(b) : 0.0;
      return ga != gb ? ga > gb : a < b;
    });
    for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{n}}) {
      worst = std::max(worst, std::abs(ndcg_at_k(j, k) - 1.0));
      ++checks;
    }

    std::vector<NodeId> rec(n), gt;
    for (NodeId c = 0; c < n; ++c) rec[c] = c;
    std::shuffle(rec.begin(), rec.end(), rng);
    for (NodeId c = 0; c < n + 10; ++c) {
      if (uniform01(rng) < 0.3) gt.push_back(c);
    }
    for (std::size_t k : {std::size_t{1}, std::size_t{5}, std::size_t{10}}) {
      auto pr = precision_recall_at_k(rec, gt, k);
      const std::set<NodeId> truth(gt.begin(), gt.end());
      std::size_t hits = 0;
      for (std::size_t r = 0; r < std::min<std::size_t>(k, rec.size()); ++r) hits += truth.count(rec[r]);
      v.pass &= pr.hits == hits;
      worst = std::max(worst, std::abs(pr.precision * static_cast<double>(k) - static_cast<double>(hits)));
      if (!gt.empty()) worst = std::max(worst, std::abs(pr.recall * static_cast<double>(gt.size()) - hits));
      v.pass &= gt.empty() == pr.empty_ground_truth;
      ++checks;
    }
  }

  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto g = testing::random_graph(60'000 + seed, {5, 30, 2, 8});
    for (NodeId i = 0; i < g.u_count(); ++i) {
      for (NodeId jj = 0; jj < g.u_count(); ++jj) {
        for (bool weighted : {false, true}) {
          double sum = 0.0, d = 0.0;
          for (NodeId k = 0; k < g.v_count(); ++k) {
            const double wj = g.weight(jj, k);
            if (wj > 0.0) d += weighted ? wj : 1.0;
            if (wj > 0.0 && g.weight(i, k) > 0.0) sum += wj;
          }
          worst = std::max(worst, std::abs(desirability(g, i, jj, weighted) - sum / d));
          ++checks;
        }
      }
    }
    Rng srng = make_rng(seed, "acceptance-sim");
    for (int t = 0; t < 10; ++t) {
      std::vector<double> sim(g.u_count());
      for (auto& s : sim) s = uniform01(srng) < 0.4 ? 0.0 : uniform01(srng);
      const NodeId ui = static_cast<NodeId>(srng() % g.u_count());
      const NodeId item_v = static_cast<NodeId>(srng() % g.v_count());
      for (std::size_t s_size : {std::size_t{1}, std::size_t{4}, std::size_t{100}}) {
        std::vector<NodeId> others;
        for (NodeId x = 0; x < g.u_count(); ++x) {
          if (x != ui) others.push_back(x);
        }
        std::stable_sort(others.begin(), others.end(), [&](NodeId a, NodeId b) { return sim[a] > sim[b]; });
        std::set<NodeId> members(others.begin(), others.begin() + std::min(s_size, others.size()));
        for (NodeId x = 0; x < g.u_count(); ++x) {
          if (g.weight(x, item_v) > 0.0) members.insert(x);
        }
        double num = 0.0, den = 0.0;
        for (NodeId x : members) {
          num += sim[x] * g.weight(x, item_v);
          den += sim[x];
        }
        const double naive = den == 0.0 ? 0.0 : num / den;
        worst = std::max(worst, std::abs(predict_score(g, item_v, ui, sim, s_size) - naive));
        ++checks;
      }
    }
  }
  v.pass &= worst <= 1e-12;
  v.detail = fmt("%zu checks, max deviation %.3g", checks, worst);
  return v;
}

}  // namespace

int main() {
  auto t0 = std::chrono::steady_clock::now();
  const auto corpus = build_corpus();
  report(1, "end-to-end BHPP error within [-1e-9, eps] against the dense oracle", c1(corpus));
  report(2, "SS-Push backward error within [-1e-9, eps_b]", c2(corpus));
  report(3, "PI-Push forward error within [-1e-9, eps_f]", c3(corpus));
  report(4, "residual identity at every iteration boundary", c4());
  report(5, "degree-scaled symmetry of the oracle matrix", c5());
  report(6, "lambda bounds the column sums and neither operand is exceeded", c6());
  report(7, "iteration-count pin", c7());
  report(8, "Monte Carlo concentration on G2", c8());
  report(9, "directional efficiency against PISP and MCSP", c9());
  report(10, "gamma non-increasing as eps_b shrinks", c10());
  report(11, "evalkit self-consistency and brute-force agreement", c11());
  std::printf("acceptance: %d failing criteria, %.1f s\n", failures,
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return failures == 0 ? 0 : 1;
}
