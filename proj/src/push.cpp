#include "bhpp/push.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace bhpp {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw GraphError("alpha must lie in (0, 1]");
}

void check_node(const BipartiteGraph& g, NodeId u) {
  if (u >= g.u_count()) throw GraphError("query node out of range");
}

// log_{1/(1-α)}(x). Infinite for α = 1, which turns every budget into "never".
double log_decay(double alpha, double x) {
  return std::log(x) / -std::log1p(-alpha);
}

// Push budget 2|E| · log_{1/(1-α)}(reference / current). A drained mass means
// no budget limit: the threshold exit will fire first.
double push_budget(const BipartiteGraph& g, double alpha, double reference, double current) {
  if (!(current > 0.0)) return std::numeric_limits<double>::infinity();
  return 2.0 * static_cast<double>(g.edge_count()) * log_decay(alpha, reference / current);
}

// Queue-driven selective rounds over a ledger. A U node is queued when its
// residue first exceeds its threshold; a V node when it first receives mass.
// Queues are FIFO with membership flags, so each node sits in a queue at most
// once and the push order is reproducible.
class SelectiveRounds {
 public:
  SelectiveRounds(const BipartiteGraph& g, double alpha, ResidueLedger& ledger)
      : g_(g), alpha_(alpha), ledger_(ledger), in_u_(g.u_count(), 0), in_v_(g.v_count(), 0) {
    const auto& ws = g.u_side().weight_sums;
    for (std::size_t u = 0; u < g.u_count(); ++u) {
      mass_ += ledger.residue_u[u];
      weighted_mass_ += ws[u] * ledger.residue_u[u];
    }
  }

  template <typename Threshold>
  void enqueue_above(Threshold thr) {
    for (NodeId u = 0; u < g_.u_count(); ++u) {
      if (ledger_.residue_u[u] > thr(u)) enqueue_u(u);
    }
  }

  bool done() const { return queue_u_.empty(); }

  /// Σ_U residue, maintained incrementally.
  double mass() const { return std::max(mass_, 0.0); }
  /// Σ_U ws(u_i) · residue(u_i), maintained incrementally.
  double weighted_mass() const { return std::max(weighted_mass_, 0.0); }

  template <typename Threshold>
  void round(Threshold thr) {
    const auto& us = g_.u_side();
    const auto& vs = g_.v_side();
    auto& ru = ledger_.residue_u;
    auto& rv = ledger_.residue_v;
    auto& est = ledger_.estimate;
    const double keep = 1.0 - alpha_;

    in_index_order(queue_u_, in_u_);
    for (NodeId u : queue_u_) {
      in_u_[u] = 0;
      const double r = ru[u];
      est[u] += alpha_ * r;
      mass_ -= r;
      weighted_mass_ -= us.weight_sums[u] * r;
      for (auto e = us.offsets[u]; e < us.offsets[u + 1]; ++e) {
        const NodeId v = us.neighbors[e];
        rv[v] += keep * us.coef[e] * r;
        if (!in_v_[v]) {
          in_v_[v] = 1;
          queue_v_.push_back(v);
        }
      }
      ru[u] = 0.0;
      ledger_.pushes += us.degree(u);
    }
    queue_u_.clear();

    in_index_order(queue_v_, in_v_);
    for (NodeId v : queue_v_) {
      in_v_[v] = 0;
      const double r = rv[v];
      double added = 0.0;
      for (auto e = vs.offsets[v]; e < vs.offsets[v + 1]; ++e) {
        const NodeId u = vs.neighbors[e];
        const double inc = vs.coef[e] * r;
        ru[u] += inc;
        added += inc;
        if (!in_u_[u] && ru[u] > thr(u)) enqueue_u(u);
      }
      // Σ_e ws(u) · w(v, u) / ws(u) · r = ws(v) · r
      mass_ += added;
      weighted_mass_ += vs.weight_sums[v] * r;
      rv[v] = 0.0;
      ledger_.pushes += vs.degree(v);
    }
    queue_v_.clear();
  }

 private:
  // A frontier covering a good share of its side is rebuilt from the flags so
  // the pass runs in index order.
  static void in_index_order(std::vector<NodeId>& queue, const std::vector<char>& flags) {
    if (queue.size() * 8 < flags.size()) return;
    queue.clear();
    for (NodeId x = 0; x < flags.size(); ++x) {
      if (flags[x]) queue.push_back(x);
    }
  }

  void enqueue_u(NodeId u) {
    in_u_[u] = 1;
    queue_u_.push_back(u);
  }

  const BipartiteGraph& g_;
  double alpha_;
  ResidueLedger& ledger_;
  std::vector<NodeId> queue_u_;
  std::vector<NodeId> queue_v_;
  std::vector<char> in_u_;
  std::vector<char> in_v_;
  double mass_ = 0.0;
  double weighted_mass_ = 0.0;
};

void report(const PushOptions& options, Phase phase, std::uint64_t round, const ResidueLedger& ledger) {
  if (options.on_round) {
    options.on_round(RoundRecord{phase, round, ledger.pushes, ledger.residue_mass()}, &ledger);
  }
}

Termination drained_or(const ResidueLedger& ledger, Termination otherwise) {
  bool any = std::any_of(ledger.residue_u.begin(), ledger.residue_u.end(), [](double r) { return r > 0.0; });
  return any ? otherwise : Termination::mass_drained;
}

}  // namespace

// ---------------------------------------------------------------------------

ResidueLedger ResidueLedger::unit(const BipartiteGraph& g, NodeId target) {
  check_node(g, target);
  ResidueLedger l;
  l.residue_u.assign(g.u_count(), 0.0);
  l.residue_v.assign(g.v_count(), 0.0);
  l.estimate.assign(g.u_count(), 0.0);
  l.residue_u[target] = 1.0;
  return l;
}

double ResidueLedger::residue_mass() const {
  return std::accumulate(residue_u.begin(), residue_u.end(), 0.0) +
         std::accumulate(residue_v.begin(), residue_v.end(), 0.0);
}

bool ResidueLedger::v_flushed() const {
  return std::all_of(residue_v.begin(), residue_v.end(), [](double r) { return r == 0.0; });
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::threshold_met: return "threshold-met";
    case Termination::budget_switch: return "budget-switch";
    case Termination::mass_drained: return "mass-drained";
  }
  return "?";
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::selective: return "selective";
    case Phase::sequential: return "sequential";
    case Phase::forward_selective: return "forward-selective";
    case Phase::power: return "power";
  }
  return "?";
}

std::vector<double> power_iteration(const BipartiteGraph& g, std::span<const double> e, double alpha,
                                    std::size_t t, Exec exec) {
  check_alpha(alpha);
  if (e.size() != g.u_count()) throw GraphError("power_iteration: vector size != |U|");
  std::vector<double> pi(e.begin(), e.end());
  std::vector<double> next(g.u_count()), xv(g.v_count());
  const double keep = 1.0 - alpha;
  for (std::size_t i = 0; i < t; ++i) {
    kernels::forward_step(g, pi, xv, next, exec);
    for (std::size_t u = 0; u < pi.size(); ++u) pi[u] = e[u] + keep * next[u];
  }
  for (double& x : pi) x *= alpha;
  return pi;
}

std::size_t required_iterations(double alpha, double eps_f, double mass) {
  check_alpha(alpha);
  if (!(eps_f > 0.0)) throw GraphError("required_iterations: eps_f must be positive");
  if (!(mass > 0.0)) return 0;
  const double x = log_decay(alpha, mass / eps_f) - 1.0;
  if (!(x > 0.0)) return 0;
  return static_cast<std::size_t>(std::ceil(x));
}

PushOutcome selective_push(const BipartiteGraph& g, NodeId target, double alpha, double eps_b,
                           const PushOptions& options) {
  check_alpha(alpha);
  if (!(eps_b > 0.0)) throw GraphError("eps_b must be positive");
  PushOutcome out{ResidueLedger::unit(g, target), {}};
  auto thr = [eps_b](NodeId) { return eps_b; };
  SelectiveRounds rounds(g, alpha, out.ledger);
  rounds.enqueue_above(thr);
  while (!rounds.done()) {
    rounds.round(thr);
    ++out.trace.selective_rounds;
    report(options, Phase::selective, out.trace.selective_rounds, out.ledger);
  }
  out.trace.pushes = out.ledger.pushes;
  out.trace.terminated_by = drained_or(out.ledger, Termination::threshold_met);
  return out;
}

PushOutcome ss_push(const BipartiteGraph& g, NodeId target, double alpha, double eps_b,
                    const PushOptions& options) {
  check_alpha(alpha);
  if (!(eps_b > 0.0)) throw GraphError("eps_b must be positive");
  PushOutcome out{ResidueLedger::unit(g, target), {}};
  auto& ledger = out.ledger;
  auto& trace = out.trace;
  auto thr = [eps_b](NodeId) { return eps_b; };

  {
    SelectiveRounds rounds(g, alpha, ledger);
    rounds.enqueue_above(thr);
    bool switched = false;
    while (!rounds.done()) {
      rounds.round(thr);
      ++trace.selective_rounds;
      report(options, Phase::selective, trace.selective_rounds, ledger);
      if (rounds.done()) break;
      if (static_cast<double>(ledger.pushes) >= push_budget(g, alpha, 1.0, rounds.mass())) {
        switched = true;
        break;
      }
    }
    trace.pushes = ledger.pushes;
    if (!switched) {
      trace.terminated_by = drained_or(ledger, Termination::threshold_met);
      return out;
    }
  }

  trace.terminated_by = Termination::budget_switch;
  std::vector<double> scratch(g.v_count(), 0.0);
  double sum = std::accumulate(ledger.residue_u.begin(), ledger.residue_u.end(), 0.0);
  double mx = *std::max_element(ledger.residue_u.begin(), ledger.residue_u.end());
  while (mx > eps_b && sum > eps_b) {
    auto s = kernels::backward_sweep(g, alpha, ledger.residue_u, ledger.estimate, scratch, options.exec);
    sum = s.residue_sum;
    mx = s.residue_max;
    ++trace.sequential_rounds;
    report(options, Phase::sequential, trace.sequential_rounds, ledger);
  }
  return out;
}

ForwardOutcome pi_push(const BipartiteGraph& g, NodeId source, double alpha, double lambda, double eps_f,
                       ResidueLedger seed, const PushOptions& options) {
  check_alpha(alpha);
  check_node(g, source);
  if (!(lambda > 0.0)) throw GraphError("lambda must be positive");
  if (!(eps_f > 0.0)) throw GraphError("eps_f must be positive");
  if (seed.residue_u.size() != g.u_count() || seed.residue_v.size() != g.v_count() ||
      seed.estimate.size() != g.u_count()) {
    throw GraphError("ledger does not match graph");
  }
  if (!seed.v_flushed()) throw GraphError("unflushed ledger");

  const auto& ws = g.u_side().weight_sums;
  const double ws_source = ws[source];
  const double scaled_eps = eps_f / lambda;
  std::vector<double> thresholds(g.u_count());
  for (std::size_t u = 0; u < thresholds.size(); ++u) thresholds[u] = ws_source / ws[u] * scaled_eps;
  auto thr = [&thresholds](NodeId u) { return thresholds[u]; };

  ForwardOutcome out;
  auto& trace = out.trace;
  ResidueLedger& ledger = seed;
  ledger.pushes = 0;

  SelectiveRounds rounds(g, alpha, ledger);
  out.gamma = rounds.weighted_mass() / ws_source;
  rounds.enqueue_above(thr);
  bool switched = false;
  while (!rounds.done()) {
    rounds.round(thr);
    ++trace.selective_rounds;
    report(options, Phase::forward_selective, trace.selective_rounds, ledger);
    if (rounds.done()) break;
    const double current = rounds.weighted_mass() / ws_source;
    if (static_cast<double>(ledger.pushes) >= push_budget(g, alpha, out.gamma, current)) {
      switched = true;
      break;
    }
  }
  trace.pushes = ledger.pushes;

  const std::size_t nu = g.u_count();
  out.transformed.resize(nu);
  out.forward_residue.resize(nu);
  for (std::size_t u = 0; u < nu; ++u) {
    const double ratio = ws[u] / ws_source;
    out.transformed[u] = ratio * ledger.estimate[u];
    out.forward_residue[u] = ratio * ledger.residue_u[u];
  }
  out.estimate = out.transformed;
  if (!switched) {
    trace.terminated_by = drained_or(ledger, Termination::threshold_met);
    return out;
  }

  trace.terminated_by = Termination::budget_switch;
  const double mass = std::accumulate(out.forward_residue.begin(), out.forward_residue.end(), 0.0);
  const std::size_t t = required_iterations(alpha, eps_f, mass);
  auto extra = power_iteration(g, out.forward_residue, alpha, t, options.exec);
  for (std::size_t u = 0; u < nu; ++u) out.estimate[u] += extra[u];
  trace.power_iterations = t;
  if (options.on_round) {
    for (std::size_t i = 1; i <= t; ++i) {
      const double left = mass * std::pow(1.0 - alpha, static_cast<double>(i + 1));
      options.on_round(RoundRecord{Phase::power, i, ledger.pushes, left}, nullptr);
    }
  }
  return out;
}

}  // namespace bhpp
