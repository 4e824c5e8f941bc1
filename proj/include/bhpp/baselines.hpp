#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "bhpp/graph.hpp"
#include "bhpp/push.hpp"
#include "bhpp/query.hpp"
#include "bhpp/rng.hpp"

namespace bhpp {

/// Vose alias tables for weighted neighbor sampling, laid out parallel to the
/// graph's adjacency arrays: entry e of a side holds the keep-probability and
/// the alias slot of cell e.
struct AliasTables {
  struct Side {
    std::vector<double> prob;
    std::vector<std::uint32_t> alias;  // offset within the node's neighbor list
  };
  Side u;
  Side v;
};

AliasTables build_alias(const BipartiteGraph& g);

/// Index (within the neighbor list) of a weighted random neighbor.
std::size_t sample_u_neighbor(const BipartiteGraph& g, const AliasTables& t, NodeId u, Rng& rng);
std::size_t sample_v_neighbor(const BipartiteGraph& g, const AliasTables& t, NodeId v, Rng& rng);

/// ⌈2(1 + ε_f/3) · ln(|U| / p_f) / ε_f²⌉, at least 1.
std::uint64_t mc_walk_count(double eps_f, double p_f, std::size_t u_count);

/// Thrown when a deadline passes mid-computation.
class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct McOptions {
  Exec exec = Exec::serial;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// End-node frequencies of mc_walk_count random walks with restart from
/// `source`. Each step first stops with probability α, otherwise hops u → v
/// by U and v → u by V. Walks are split into fixed batches with one RNG
/// stream each, so the result does not depend on the thread count.
std::vector<double> monte_carlo(const BipartiteGraph& g, const AliasTables& alias, NodeId source, double alpha,
                                double eps_f, double p_f, std::uint64_t seed, const McOptions& options = {});

/// MonteCarlo at ε/2 for the forward side plus SelectivePush at ε/2.
QueryResult mcsp_query(const BipartiteGraph& g, const AliasTables& alias, NodeId query, double alpha,
                       double epsilon, double p_f, std::uint64_t seed, const McOptions& options = {});

/// PowerIteration with required_iterations(α, ε/2, 1) steps plus
/// SelectivePush at ε/2.
QueryResult pisp_query(const BipartiteGraph& g, NodeId query, double alpha, double epsilon,
                       Exec exec = Exec::serial);

}  // namespace bhpp
