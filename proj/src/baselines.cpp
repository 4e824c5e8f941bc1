#include "bhpp/baselines.hpp"

#include <cmath>

namespace bhpp {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kWalksPerBatch = 4096;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void fill_side(const AdjacencySide& side, AliasTables::Side& out) {
  out.prob.assign(side.weights.size(), 1.0);
  out.alias.assign(side.weights.size(), 0);
  std::vector<double> scaled;
  std::vector<std::uint32_t> small, large;
  for (std::size_t x = 0; x < side.size(); ++x) {
    const auto begin = side.offsets[x];
    const auto n = static_cast<std::uint32_t>(side.offsets[x + 1] - begin);
    scaled.resize(n);
    small.clear();
    large.clear();
    for (std::uint32_t i = 0; i < n; ++i) {
      scaled[i] = side.weights[begin + i] * n / side.weight_sums[x];
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      auto s = small.back();
      small.pop_back();
      auto l = large.back();
      out.prob[begin + s] = scaled[s];
      out.alias[begin + s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    // Leftovers are 1 up to rounding.
    for (auto i : large) out.prob[begin + i] = 1.0, out.alias[begin + i] = i;
    for (auto i : small) out.prob[begin + i] = 1.0, out.alias[begin + i] = i;
  }
}

std::size_t sample(const AdjacencySide& side, const AliasTables::Side& t, NodeId x, Rng& rng) {
  const auto begin = side.offsets[x];
  const auto n = side.offsets[x + 1] - begin;
  if (n == 1) return 0;
  const auto cell = static_cast<std::size_t>(std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng));
  return uniform01(rng) < t.prob[begin + cell] ? cell : t.alias[begin + cell];
}

}  // namespace

AliasTables build_alias(const BipartiteGraph& g) {
  AliasTables t;
  fill_side(g.u_side(), t.u);
  fill_side(g.v_side(), t.v);
  return t;
}

std::size_t sample_u_neighbor(const BipartiteGraph& g, const AliasTables& t, NodeId u, Rng& rng) {
  return sample(g.u_side(), t.u, u, rng);
}

std::size_t sample_v_neighbor(const BipartiteGraph& g, const AliasTables& t, NodeId v, Rng& rng) {
  return sample(g.v_side(), t.v, v, rng);
}

std::uint64_t mc_walk_count(double eps_f, double p_f, std::size_t u_count) {
  if (!(eps_f > 0.0) || !(p_f > 0.0) || u_count == 0) throw GraphError("mc_walk_count: arguments must be positive");
  const double n = 2.0 * (1.0 + eps_f / 3.0) * std::log(static_cast<double>(u_count) / p_f) / (eps_f * eps_f);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n)));
}

std::vector<double> monte_carlo(const BipartiteGraph& g, const AliasTables& alias, NodeId source, double alpha,
                                double eps_f, double p_f, std::uint64_t seed, const McOptions& options) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw GraphError("alpha must lie in (0, 1]");
  if (source >= g.u_count()) throw GraphError("query node out of range");
  const std::uint64_t walks = mc_walk_count(eps_f, p_f, g.u_count());
  const std::uint64_t batches = (walks + kWalksPerBatch - 1) / kWalksPerBatch;
  const auto& us = g.u_side();
  const auto& vs = g.v_side();

  bool timed_out = false;

  auto run_batch = [&](std::uint64_t b, std::vector<std::uint64_t>& c) {
    Rng rng = make_rng(seed, "mc-walk", b);
    const std::uint64_t first = b * kWalksPerBatch;
    const std::uint64_t last = std::min(walks, first + kWalksPerBatch);
    for (std::uint64_t w = first; w < last; ++w) {
      NodeId at = source;
      while (uniform01(rng) >= alpha) {
        const NodeId v = us.neighbors[us.offsets[at] + sample(us, alias.u, at, rng)];
        at = vs.neighbors[vs.offsets[v] + sample(vs, alias.v, v, rng)];
      }
      ++c[at];
    }
  };

  // Integer counters: merging per-thread totals is exact in any order.
  std::vector<std::uint64_t> total(g.u_count(), 0);
  const auto nb = static_cast<std::int64_t>(batches);
  if (options.exec == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<std::uint64_t> local(g.u_count(), 0);
#pragma omp for schedule(dynamic, 1)
      for (std::int64_t b = 0; b < nb; ++b) {
        bool stop;
#pragma omp atomic read
        stop = timed_out;
        if (stop) continue;
        if (options.deadline && Clock::now() > *options.deadline) {
#pragma omp atomic write
          timed_out = true;
          continue;
        }
        run_batch(static_cast<std::uint64_t>(b), local);
      }
#pragma omp critical
      for (std::size_t u = 0; u < total.size(); ++u) total[u] += local[u];
    }
  } else {
    for (std::int64_t b = 0; b < nb; ++b) {
      if (options.deadline && Clock::now() > *options.deadline) {
        timed_out = true;
        break;
      }
      run_batch(static_cast<std::uint64_t>(b), total);
    }
  }
  if (timed_out) throw TimeoutError("monte carlo deadline exceeded");

  std::vector<double> out(g.u_count());
  for (std::size_t u = 0; u < out.size(); ++u) out[u] = static_cast<double>(total[u]) / static_cast<double>(walks);
  return out;
}

QueryResult mcsp_query(const BipartiteGraph& g, const AliasTables& alias, NodeId query, double alpha,
                       double epsilon, double p_f, std::uint64_t seed, const McOptions& options) {
  if (!(epsilon > 0.0)) throw GraphError("epsilon must be positive");
  QueryResult res;
  res.method = "mcsp";
  res.query = query;
  res.epsilon = epsilon;
  res.epsilon_b = res.epsilon_f = epsilon / 2.0;

  const auto t0 = Clock::now();
  auto back = selective_push(g, query, alpha, res.epsilon_b);
  res.timing.backward_ms = ms_since(t0);
  res.backward = back.trace;

  const auto t1 = Clock::now();
  res.scores = monte_carlo(g, alias, query, alpha, res.epsilon_f, p_f, seed, options);
  res.timing.forward_ms = ms_since(t1);

  for (std::size_t i = 0; i < res.scores.size(); ++i) res.scores[i] += back.ledger.estimate[i];
  res.timing.total_ms = ms_since(t0);
  return res;
}

QueryResult pisp_query(const BipartiteGraph& g, NodeId query, double alpha, double epsilon, Exec exec) {
  if (!(epsilon > 0.0)) throw GraphError("epsilon must be positive");
  QueryResult res;
  res.method = "pisp";
  res.query = query;
  res.epsilon = epsilon;
  res.epsilon_b = res.epsilon_f = epsilon / 2.0;

  const auto t0 = Clock::now();
  PushOptions opts;
  opts.exec = exec;
  auto back = selective_push(g, query, alpha, res.epsilon_b, opts);
  res.timing.backward_ms = ms_since(t0);
  res.backward = back.trace;

  const auto t1 = Clock::now();
  std::vector<double> e(g.u_count(), 0.0);
  e[query] = 1.0;
  const std::size_t t = required_iterations(alpha, res.epsilon_f, 1.0);
  res.scores = power_iteration(g, e, alpha, t, exec);
  res.forward.power_iterations = t;
  res.forward.terminated_by = Termination::budget_switch;
  res.timing.forward_ms = ms_since(t1);

  for (std::size_t i = 0; i < res.scores.size(); ++i) res.scores[i] += back.ledger.estimate[i];
  res.timing.total_ms = ms_since(t0);
  return res;
}

}  // namespace bhpp
