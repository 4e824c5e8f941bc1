#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace bhpp {

using NodeId = std::uint32_t;

/// Raised for malformed input, invariant violations and infeasible requests.
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WeightedEdge {
  NodeId u;
  NodeId v;
  double weight;
};

/// One side of the bipartite adjacency in offset-array form. Neighbor lists
/// are sorted by neighbor index.
///
/// `coef[e]` caches the transition probability used when mass crosses edge
/// `e` towards the neighbor: w / ws(neighbor). The same value is both the
/// backward-push factor out of this side and the forward-gather factor into
/// this side, so every kernel reads it instead of dividing.
struct AdjacencySide {
  std::vector<std::uint64_t> offsets;  // size n + 1
  std::vector<NodeId> neighbors;
  std::vector<double> weights;
  std::vector<double> coef;
  std::vector<double> weight_sums;
  std::vector<std::string> labels;

  std::size_t size() const { return weight_sums.size(); }
  std::size_t degree(NodeId x) const { return offsets[x + 1] - offsets[x]; }
};

/// Immutable weighted bipartite graph G = (U ∪ V, E).
///
/// Every edge is stored on both sides with identical weight, every node has
/// degree >= 1 and ws(x) is the exact sum of incident weights. Labels map to
/// dense indices; U and V label sets are disjoint.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;

  /// Builds from dense-indexed edges. Duplicate (u, v) pairs are merged by
  /// summing weights. Throws GraphError on a non-positive weight, an
  /// out-of-range index, an isolated node, or an empty edge set.
  static BipartiteGraph from_edges(std::vector<std::string> u_labels,
                                   std::vector<std::string> v_labels,
                                   std::span<const WeightedEdge> edges);

  std::size_t u_count() const { return u_.size(); }
  std::size_t v_count() const { return v_.size(); }
  std::size_t edge_count() const { return u_.neighbors.size(); }

  const AdjacencySide& u_side() const { return u_; }
  const AdjacencySide& v_side() const { return v_; }

  std::span<const NodeId> u_neighbors(NodeId u) const { return slice(u_.neighbors, u_, u); }
  std::span<const double> u_weights(NodeId u) const { return slice(u_.weights, u_, u); }
  std::span<const NodeId> v_neighbors(NodeId v) const { return slice(v_.neighbors, v_, v); }
  std::span<const double> v_weights(NodeId v) const { return slice(v_.weights, v_, v); }

  std::size_t u_degree(NodeId u) const { return u_.degree(u); }
  std::size_t v_degree(NodeId v) const { return v_.degree(v); }
  double u_weight_sum(NodeId u) const { return u_.weight_sums[u]; }
  double v_weight_sum(NodeId v) const { return v_.weight_sums[v]; }

  const std::string& u_label(NodeId u) const { return u_.labels[u]; }
  const std::string& v_label(NodeId v) const { return v_.labels[v]; }
  std::optional<NodeId> find_u(std::string_view label) const;
  std::optional<NodeId> find_v(std::string_view label) const;

  /// w(u, v), or 0 when (u, v) is not an edge.
  double weight(NodeId u, NodeId v) const;

  /// All edges in U-major order.
  std::vector<WeightedEdge> edges() const;

  /// FNV-1a over counts, offsets, neighbors and weights. Labels are excluded.
  std::uint64_t fingerprint() const;

  friend bool operator==(const BipartiteGraph& a, const BipartiteGraph& b);

 private:
  template <typename T>
  static std::span<const T> slice(const std::vector<T>& data, const AdjacencySide& side, NodeId x) {
    return {data.data() + side.offsets[x], data.data() + side.offsets[x + 1]};
  }

  void build_label_index();

  AdjacencySide u_;
  AdjacencySide v_;
  std::unordered_map<std::string, NodeId> u_index_;
  std::unordered_map<std::string, NodeId> v_index_;
};

// ---------------------------------------------------------------------------
// Ingestion

struct EdgeListOptions {
  /// Field separator. std::nullopt splits on runs of spaces and tabs.
  std::optional<char> delimiter;
  /// Weight used when a line has only two fields. Without it the weight
  /// column is mandatory.
  std::optional<double> default_weight;
};

/// Parses "u_label <delim> v_label [<delim> weight]" lines. Blank lines and
/// lines starting with '#' are skipped. Labels get dense indices in
/// first-seen order per side. Errors carry the 1-based line number.
BipartiteGraph load_edge_list(std::istream& in, const EdgeListOptions& options = {});
BipartiteGraph load_edge_list_file(const std::string& path, const EdgeListOptions& options = {});

/// Writes one "u<TAB>v<TAB>weight" line per edge with round-trip precision.
void write_edge_list(std::ostream& out, const BipartiteGraph& g);

/// Binary cache; layout documented in docs/binary_format.md.
void write_binary(std::ostream& out, const BipartiteGraph& g);
BipartiteGraph read_binary(std::istream& in);
void save_binary_file(const std::string& path, const BipartiteGraph& g);
BipartiteGraph load_binary_file(const std::string& path);

/// Loads a binary cache when the file starts with the cache magic, otherwise
/// parses it as an edge list.
BipartiteGraph load_graph_file(const std::string& path, const EdgeListOptions& options = {});

// ---------------------------------------------------------------------------
// Transformations and accessors

/// Iteratively removes nodes of degree < k (on either side) until fixpoint,
/// then re-indexes the survivors preserving relative order and labels.
BipartiteGraph k_core_filter(const BipartiteGraph& g, std::size_t k);

/// P(ui, uj) = Σ_{v ∈ N(ui) ∩ N(uj)} U(ui, v) · V(v, uj).
double hidden_transition_entry(const BipartiteGraph& g, NodeId ui, NodeId uj);

struct SynthParams {
  std::size_t u_count = 0;
  std::size_t v_count = 0;
  std::size_t edge_count = 0;
  double weight_min = 1.0;  // weights drawn from (weight_min, weight_max],
  double weight_max = 1.0;  // or exactly weight_max when the two are equal
  /// Power-law exponent for endpoint popularity of the non-covering edges.
  /// 0 means uniform.
  double degree_skew = 0.0;
};

/// Deterministic random bipartite graph with exactly `edge_count` distinct
/// edges and degree >= 1 everywhere. Labels are "u<i>" and "v<j>".
BipartiteGraph synth_bipartite(const SynthParams& params, std::uint64_t seed);

}  // namespace bhpp
