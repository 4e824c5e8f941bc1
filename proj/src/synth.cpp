#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include "bhpp/graph.hpp"
#include "bhpp/rng.hpp"

namespace bhpp {

namespace {

// Node popularity sampler: weight (rank + 1)^-skew over a shuffled ranking.
class EndpointSampler {
 public:
  EndpointSampler(std::size_t n, double skew, Rng& rng) : n_(n) {
    if (skew <= 0.0) return;
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), 0);
    std::shuffle(rank.begin(), rank.end(), rng);
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::pow(static_cast<double>(rank[i] + 1), -skew);
    dist_ = std::discrete_distribution<std::size_t>(w.begin(), w.end());
    skewed_ = true;
  }

  NodeId operator()(Rng& rng) {
    if (skewed_) return static_cast<NodeId>(dist_(rng));
    return static_cast<NodeId>(rng() % n_);
  }

 private:
  std::size_t n_;
  bool skewed_ = false;
  std::discrete_distribution<std::size_t> dist_;
};

}  // namespace

BipartiteGraph synth_bipartite(const SynthParams& p, std::uint64_t seed) {
  const std::size_t nu = p.u_count, nv = p.v_count, ne = p.edge_count;
  if (nu == 0 || nv == 0) throw GraphError("synth: both sides need at least one node");
  if (ne < std::max(nu, nv)) throw GraphError("synth: edge_count < max(u_count, v_count)");
  if (ne > nu * nv) throw GraphError("synth: edge_count exceeds u_count * v_count");
  if (!(p.weight_max > 0.0) || p.weight_min < 0.0 || p.weight_min > p.weight_max) {
    throw GraphError("synth: weight range must satisfy 0 <= min <= max, max > 0");
  }
  if (p.degree_skew < 0.0) throw GraphError("synth: degree_skew must be >= 0");

  Rng rng = make_rng(seed, "synth");
  auto draw_weight = [&] {
    if (p.weight_min == p.weight_max) return p.weight_max;
    // (min, max]: the draw u in [0, 1) maps max - u * (max - min).
    return p.weight_max - uniform01(rng) * (p.weight_max - p.weight_min);
  };

  std::vector<NodeId> perm_u(nu), perm_v(nv);
  std::iota(perm_u.begin(), perm_u.end(), 0);
  std::iota(perm_v.begin(), perm_v.end(), 0);
  std::shuffle(perm_u.begin(), perm_u.end(), rng);
  std::shuffle(perm_v.begin(), perm_v.end(), rng);

  std::unordered_set<std::uint64_t> present;
  present.reserve(ne * 2);
  std::vector<WeightedEdge> edges;
  edges.reserve(ne);
  auto key = [nv](NodeId u, NodeId v) { return static_cast<std::uint64_t>(u) * nv + v; };

  // Covering pass: i -> (i mod |U|, i mod |V|) over i < max(|U|, |V|) touches
  // every node, and the pairs are distinct because one coordinate is i itself.
  const std::size_t m = std::max(nu, nv);
  for (std::size_t i = 0; i < m; ++i) {
    NodeId u = perm_u[i % nu], v = perm_v[i % nv];
    present.insert(key(u, v));
    edges.push_back({u, v, draw_weight()});
  }

  if (ne - edges.size() > (nu * nv - edges.size()) / 2) {
    // Dense request: pick from the explicit complement.
    std::vector<std::uint64_t> missing;
    for (NodeId u = 0; u < nu; ++u) {
      for (NodeId v = 0; v < nv; ++v) {
        if (!present.contains(key(u, v))) missing.push_back(key(u, v));
      }
    }
    std::shuffle(missing.begin(), missing.end(), rng);
    missing.resize(ne - edges.size());
    std::sort(missing.begin(), missing.end());
    for (auto k : missing) {
      edges.push_back({static_cast<NodeId>(k / nv), static_cast<NodeId>(k % nv), draw_weight()});
    }
  } else {
    EndpointSampler pick_u(nu, p.degree_skew, rng), pick_v(nv, p.degree_skew, rng);
    // Heavy skew saturates the popular pairs; past this many draws the
    // remainder is filled uniformly.
    std::size_t attempts = 0;
    const std::size_t skewed_attempts = 64 * ne;
    while (edges.size() < ne) {
      NodeId u, v;
      if (++attempts <= skewed_attempts) {
        u = pick_u(rng);
        v = pick_v(rng);
      } else {
        u = static_cast<NodeId>(rng() % nu);
        v = static_cast<NodeId>(rng() % nv);
      }
      if (present.insert(key(u, v)).second) edges.push_back({u, v, draw_weight()});
    }
  }

  std::vector<std::string> lu(nu), lv(nv);
  for (std::size_t i = 0; i < nu; ++i) lu[i] = "u" + std::to_string(i);
  for (std::size_t j = 0; j < nv; ++j) lv[j] = "v" + std::to_string(j);
  return BipartiteGraph::from_edges(std::move(lu), std::move(lv), edges);
}

}  // namespace bhpp
