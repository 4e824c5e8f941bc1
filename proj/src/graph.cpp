#include "bhpp/graph.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace bhpp {

namespace {

// Fills one adjacency side from (u, v)-sorted, duplicate-free edges. `key`
// selects the owning endpoint of each edge.
template <typename KeyFn, typename OtherFn>
void fill_side(AdjacencySide& side, std::size_t n, std::span<const WeightedEdge> merged, KeyFn key,
               OtherFn other) {
  side.offsets.assign(n + 1, 0);
  for (const auto& e : merged) ++side.offsets[key(e) + 1];
  std::partial_sum(side.offsets.begin(), side.offsets.end(), side.offsets.begin());

  side.neighbors.resize(merged.size());
  side.weights.resize(merged.size());
  std::vector<std::uint64_t> cursor(side.offsets.begin(), side.offsets.end() - 1);
  for (const auto& e : merged) {
    auto slot = cursor[key(e)]++;
    side.neighbors[slot] = other(e);
    side.weights[slot] = e.weight;
  }
  // `merged` is sorted by (u, v), so both sides come out neighbor-sorted.
  side.weight_sums.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double s = 0.0;
    for (auto i = side.offsets[x]; i < side.offsets[x + 1]; ++i) s += side.weights[i];
    side.weight_sums[x] = s;
  }
}

void fill_coef(AdjacencySide& side, const AdjacencySide& other) {
  side.coef.resize(side.neighbors.size());
  for (std::size_t i = 0; i < side.neighbors.size(); ++i) {
    side.coef[i] = side.weights[i] / other.weight_sums[side.neighbors[i]];
  }
}

template <typename T>
void fnv_bytes(std::uint64_t& h, const T* data, std::size_t count) {
  const auto* p = reinterpret_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < count * sizeof(T); ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

BipartiteGraph BipartiteGraph::from_edges(std::vector<std::string> u_labels,
                                          std::vector<std::string> v_labels,
                                          std::span<const WeightedEdge> edges) {
  const std::size_t nu = u_labels.size(), nv = v_labels.size();
  if (edges.empty()) throw GraphError("empty graph");

  std::vector<WeightedEdge> sorted(edges.begin(), edges.end());
  for (const auto& e : sorted) {
    if (e.u >= nu || e.v >= nv) throw GraphError("edge endpoint out of range");
    if (!(e.weight > 0.0)) throw GraphError("non-positive weight");
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const WeightedEdge& a, const WeightedEdge& b) {
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });
  std::vector<WeightedEdge> merged;
  merged.reserve(sorted.size());
  for (const auto& e : sorted) {
    if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
      merged.back().weight += e.weight;
    } else {
      merged.push_back(e);
    }
  }

  BipartiteGraph g;
  fill_side(g.u_, nu, merged, [](const WeightedEdge& e) { return e.u; },
            [](const WeightedEdge& e) { return e.v; });
  fill_side(g.v_, nv, merged, [](const WeightedEdge& e) { return e.v; },
            [](const WeightedEdge& e) { return e.u; });
  for (std::size_t u = 0; u < nu; ++u) {
    if (g.u_.degree(static_cast<NodeId>(u)) == 0) {
      throw GraphError("isolated node '" + u_labels[u] + "' in U");
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (g.v_.degree(static_cast<NodeId>(v)) == 0) {
      throw GraphError("isolated node '" + v_labels[v] + "' in V");
    }
  }
  fill_coef(g.u_, g.v_);
  fill_coef(g.v_, g.u_);
  g.u_.labels = std::move(u_labels);
  g.v_.labels = std::move(v_labels);
  g.build_label_index();
  return g;
}

void BipartiteGraph::build_label_index() {
  u_index_.clear();
  v_index_.clear();
  u_index_.reserve(u_.labels.size());
  v_index_.reserve(v_.labels.size());
  for (std::size_t i = 0; i < u_.labels.size(); ++i) {
    if (!u_index_.emplace(u_.labels[i], static_cast<NodeId>(i)).second) {
      throw GraphError("duplicate U label '" + u_.labels[i] + "'");
    }
  }
  for (std::size_t j = 0; j < v_.labels.size(); ++j) {
    if (u_index_.contains(v_.labels[j])) {
      throw GraphError("label '" + v_.labels[j] + "' appears on both sides");
    }
    if (!v_index_.emplace(v_.labels[j], static_cast<NodeId>(j)).second) {
      throw GraphError("duplicate V label '" + v_.labels[j] + "'");
    }
  }
}

std::optional<NodeId> BipartiteGraph::find_u(std::string_view label) const {
  auto it = u_index_.find(std::string(label));
  if (it == u_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<NodeId> BipartiteGraph::find_v(std::string_view label) const {
  auto it = v_index_.find(std::string(label));
  if (it == v_index_.end()) return std::nullopt;
  return it->second;
}

double BipartiteGraph::weight(NodeId u, NodeId v) const {
  auto nbrs = u_neighbors(u);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v);
  if (it == nbrs.end() || *it != v) return 0.0;
  return u_weights(u)[static_cast<std::size_t>(it - nbrs.begin())];
}

std::vector<WeightedEdge> BipartiteGraph::edges() const {
  std::vector<WeightedEdge> out;
  out.reserve(edge_count());
  for (NodeId u = 0; u < u_count(); ++u) {
    auto nbrs = u_neighbors(u);
    auto ws = u_weights(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i) out.push_back({u, nbrs[i], ws[i]});
  }
  return out;
}

std::uint64_t BipartiteGraph::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const std::uint64_t counts[3] = {u_count(), v_count(), edge_count()};
  fnv_bytes(h, counts, 3);
  fnv_bytes(h, u_.offsets.data(), u_.offsets.size());
  fnv_bytes(h, u_.neighbors.data(), u_.neighbors.size());
  fnv_bytes(h, u_.weights.data(), u_.weights.size());
  return h;
}

bool operator==(const BipartiteGraph& a, const BipartiteGraph& b) {
  auto same = [](const AdjacencySide& x, const AdjacencySide& y) {
    return x.offsets == y.offsets && x.neighbors == y.neighbors && x.weights == y.weights &&
           x.labels == y.labels;
  };
  return same(a.u_, b.u_) && same(a.v_, b.v_);
}

BipartiteGraph k_core_filter(const BipartiteGraph& g, std::size_t k) {
  if (k == 0) throw GraphError("k must be >= 1");
  const std::size_t nu = g.u_count(), nv = g.v_count();
  std::vector<std::size_t> deg_u(nu), deg_v(nv);
  std::vector<char> dead_u(nu, 0), dead_v(nv, 0);
  // Side-tagged peel queue: ids >= nu refer to V nodes.
  std::deque<std::size_t> queue;
  for (NodeId u = 0; u < nu; ++u) {
    deg_u[u] = g.u_degree(u);
    if (deg_u[u] < k) {
      dead_u[u] = 1;
      queue.push_back(u);
    }
  }
  for (NodeId v = 0; v < nv; ++v) {
    deg_v[v] = g.v_degree(v);
    if (deg_v[v] < k) {
      dead_v[v] = 1;
      queue.push_back(nu + v);
    }
  }
  while (!queue.empty()) {
    auto x = queue.front();
    queue.pop_front();
    if (x < nu) {
      for (NodeId v : g.u_neighbors(static_cast<NodeId>(x))) {
        if (!dead_v[v] && --deg_v[v] < k) {
          dead_v[v] = 1;
          queue.push_back(nu + v);
        }
      }
    } else {
      for (NodeId u : g.v_neighbors(static_cast<NodeId>(x - nu))) {
        if (!dead_u[u] && --deg_u[u] < k) {
          dead_u[u] = 1;
          queue.push_back(u);
        }
      }
    }
  }

  std::vector<NodeId> remap_u(nu, 0), remap_v(nv, 0);
  std::vector<std::string> lu, lv;
  for (NodeId u = 0; u < nu; ++u) {
    if (!dead_u[u]) {
      remap_u[u] = static_cast<NodeId>(lu.size());
      lu.push_back(g.u_label(u));
    }
  }
  for (NodeId v = 0; v < nv; ++v) {
    if (!dead_v[v]) {
      remap_v[v] = static_cast<NodeId>(lv.size());
      lv.push_back(g.v_label(v));
    }
  }
  std::vector<WeightedEdge> kept;
  for (const auto& e : g.edges()) {
    if (!dead_u[e.u] && !dead_v[e.v]) kept.push_back({remap_u[e.u], remap_v[e.v], e.weight});
  }
  if (kept.empty()) throw GraphError("k-core empty");
  return BipartiteGraph::from_edges(std::move(lu), std::move(lv), kept);
}

double hidden_transition_entry(const BipartiteGraph& g, NodeId ui, NodeId uj) {
  if (ui >= g.u_count() || uj >= g.u_count()) throw GraphError("node index out of range");
  auto a = g.u_neighbors(ui), b = g.u_neighbors(uj);
  auto wa = g.u_weights(ui), wb = g.u_weights(uj);
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      sum += (wa[i] / g.u_weight_sum(ui)) * (wb[j] / g.v_weight_sum(a[i]));
      ++i;
      ++j;
    }
  }
  return sum;
}

}  // namespace bhpp
