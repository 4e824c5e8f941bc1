#include "bhpp/query.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace bhpp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

double EpsSplitPolicy::eps_b(double epsilon) const {
  const double raw = epsilon * (1.0 - mu) / (2.0 - mu);
  return std::clamp(raw, min_ratio * epsilon, max_ratio * epsilon);
}

std::size_t default_tau(double alpha, std::size_t u_count, double slack) {
  return required_iterations(alpha, slack, static_cast<double>(u_count));
}

double estimate_lambda(const BipartiteGraph& g, double alpha, std::size_t tau, Exec exec) {
  std::vector<double> ones(g.u_count(), 1.0);
  auto rho = power_iteration(g, ones, alpha, tau, exec);
  const double tail =
      static_cast<double>(g.u_count()) * std::pow(1.0 - alpha, static_cast<double>(tau) + 1.0);
  const double walk_bound = *std::max_element(rho.begin(), rho.end()) + tail;
  const auto& ws = g.u_side().weight_sums;
  auto [lo, hi] = std::minmax_element(ws.begin(), ws.end());
  return std::min(walk_bound, *hi / *lo);
}

double estimate_mu(std::size_t u_count, std::size_t v_count, std::size_t edge_count) {
  const double raw = std::sqrt(static_cast<double>(u_count) * static_cast<double>(v_count)) /
                     static_cast<double>(edge_count);
  return std::clamp(raw, 1e-3, 1.0);
}

double estimate_mu(const BipartiteGraph& g) { return estimate_mu(g.u_count(), g.v_count(), g.edge_count()); }

double choose_eps_b(double epsilon, double mu) { return EpsSplitPolicy{mu}.eps_b(epsilon); }

double choose_eps_b(double epsilon, const BipartiteGraph& g) { return choose_eps_b(epsilon, estimate_mu(g)); }

IndexMeta build_index_meta(const BipartiteGraph& g, double alpha, std::optional<std::size_t> tau, Exec exec) {
  IndexMeta meta;
  meta.alpha = alpha;
  meta.tau = tau.value_or(default_tau(alpha, g.u_count()));
  meta.lambda = estimate_lambda(g, alpha, meta.tau, exec);
  meta.mu = estimate_mu(g);
  meta.split = EpsSplitPolicy{meta.mu};
  meta.graph_fingerprint = g.fingerprint();
  return meta;
}

void write_index_meta(std::ostream& out, const IndexMeta& meta) {
  out << "format=bhpp-meta-1\n"
      << "alpha=" << fmt17(meta.alpha) << '\n'
      << "lambda=" << fmt17(meta.lambda) << '\n'
      << "tau=" << meta.tau << '\n'
      << "mu=" << fmt17(meta.mu) << '\n'
      << "split_mu=" << fmt17(meta.split.mu) << '\n'
      << "split_min_ratio=" << fmt17(meta.split.min_ratio) << '\n'
      << "split_max_ratio=" << fmt17(meta.split.max_ratio) << '\n'
      << "graph_fingerprint=" << meta.graph_fingerprint << '\n';
}

IndexMeta read_index_meta(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw GraphError("meta: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw GraphError(std::string("meta: missing key ") + key);
    return it->second;
  };
  if (need("format") != "bhpp-meta-1") throw GraphError("meta: unsupported format");
  try {
    IndexMeta m;
    m.alpha = std::stod(need("alpha"));
    m.lambda = std::stod(need("lambda"));
    m.tau = std::stoull(need("tau"));
    m.mu = std::stod(need("mu"));
    m.split.mu = std::stod(need("split_mu"));
    m.split.min_ratio = std::stod(need("split_min_ratio"));
    m.split.max_ratio = std::stod(need("split_max_ratio"));
    m.graph_fingerprint = std::stoull(need("graph_fingerprint"));
    return m;
  } catch (const std::logic_error&) {
    throw GraphError("meta: malformed value");
  }
}

void save_index_meta(const std::string& path, const IndexMeta& meta) {
  std::ofstream out(path);
  if (!out) throw GraphError("cannot write '" + path + "'");
  write_index_meta(out, meta);
}

IndexMeta load_index_meta(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GraphError("cannot open '" + path + "'");
  return read_index_meta(in);
}

QueryResult bhpp_query(const BipartiteGraph& g, const IndexMeta& meta, NodeId query, double epsilon,
                       const PushOptions& options) {
  if (meta.graph_fingerprint != g.fingerprint()) throw GraphError("index metadata was built for another graph");
  if (!(epsilon > 0.0)) throw GraphError("epsilon must be positive");
  QueryResult res;
  res.method = "ssbipush";
  res.query = query;
  res.epsilon = epsilon;
  res.epsilon_b = meta.split.eps_b(epsilon);
  res.epsilon_f = epsilon - res.epsilon_b;
  if (!(res.epsilon_b > 0.0) || !(res.epsilon_f > 0.0)) throw GraphError("epsilon split leaves no forward budget");

  const auto t0 = Clock::now();
  auto back = ss_push(g, query, meta.alpha, res.epsilon_b, options);
  res.timing.backward_ms = ms_since(t0);
  res.backward = back.trace;

  const auto t1 = Clock::now();
  auto fwd = pi_push(g, query, meta.alpha, meta.lambda, res.epsilon_f, back.ledger, options);
  res.timing.forward_ms = ms_since(t1);
  res.forward = fwd.trace;
  res.gamma = fwd.gamma;

  res.scores = std::move(fwd.estimate);
  for (std::size_t i = 0; i < res.scores.size(); ++i) res.scores[i] += back.ledger.estimate[i];
  res.timing.total_ms = ms_since(t0);
  return res;
}

std::vector<RankedNode> topk(std::span<const double> scores, std::size_t k, std::optional<NodeId> exclude) {
  std::vector<RankedNode> all;
  all.reserve(scores.size());
  for (NodeId i = 0; i < scores.size(); ++i) {
    if (exclude && *exclude == i) continue;
    all.push_back({i, scores[i]});
  }
  auto before = [](const RankedNode& a, const RankedNode& b) {
    return a.score != b.score ? a.score > b.score : a.node < b.node;
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), before);
  all.resize(k);
  return all;
}

std::vector<RankedNode> topk(const QueryResult& result, std::size_t k, bool exclude_query) {
  return topk(result.scores, k, exclude_query ? std::optional<NodeId>(result.query) : std::nullopt);
}

}  // namespace bhpp
