#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bhpp/graph.hpp"
#include "bhpp/kernels.hpp"

namespace bhpp {

using kernels::Exec;

/// Live state of a backward push towards one target node u.
///
/// At every round boundary (V residues flushed) the estimates and residues
/// satisfy, for every u_i:
///   π(u_i, u) = estimate[u_i] + Σ_j π(u_i, u_j) · residue_u[u_j].
struct ResidueLedger {
  std::vector<double> residue_u;
  std::vector<double> residue_v;
  std::vector<double> estimate;
  /// Neighbor touches performed by selective pushes (n_p). Never decreases.
  std::uint64_t pushes = 0;

  /// Unit residue at `target`, everything else zero.
  static ResidueLedger unit(const BipartiteGraph& g, NodeId target);

  double residue_mass() const;  // Σ_U + Σ_V
  bool v_flushed() const;
};

enum class Termination {
  threshold_met,  // every residue at or below its threshold
  budget_switch,  // push budget tripped; finished by sweeps or power iterations
  mass_drained,   // no residue left at all
};

const char* to_string(Termination t);

enum class Phase { selective, sequential, forward_selective, power };

const char* to_string(Phase p);

struct PhaseTrace {
  std::uint64_t selective_rounds = 0;
  std::uint64_t sequential_rounds = 0;
  std::uint64_t power_iterations = 0;
  std::uint64_t pushes = 0;  // n_p at exit
  Termination terminated_by = Termination::threshold_met;

  /// Edge touches: selective pushes plus two passes over E per whole-graph
  /// round or power iteration.
  std::uint64_t edge_work(std::size_t edge_count) const {
    return pushes + 2 * edge_count * (sequential_rounds + power_iterations);
  }
};

/// One record per completed round, emitted after the V side is flushed.
struct RoundRecord {
  Phase phase;
  std::uint64_t round;  // 1-based within the phase
  std::uint64_t pushes;
  double residue_mass;
};

struct PushOptions {
  /// Execution mode of whole-graph sweeps and power iterations.
  Exec exec = Exec::serial;
  /// Called at every round boundary with the current ledger. Power
  /// iterations report the forward mass not yet converted and no ledger.
  std::function<void(const RoundRecord&, const ResidueLedger*)> on_round;
};

struct PushOutcome {
  ResidueLedger ledger;
  PhaseTrace trace;
};

// ---------------------------------------------------------------------------

/// α · Σ_{ℓ=0..t} (1-α)^ℓ · e · P^ℓ, evaluated as t alternating sparse passes
/// over U and V.
std::vector<double> power_iteration(const BipartiteGraph& g, std::span<const double> e, double alpha,
                                    std::size_t t, Exec exec = Exec::serial);

/// Smallest t >= 0 with mass · (1-α)^(t+1) <= eps_f, i.e.
/// max(0, ceil(log_{1/(1-α)}(mass / eps_f) - 1)).
std::size_t required_iterations(double alpha, double eps_f, double mass);

/// Backward selective push towards `target`: every round pushes the U nodes
/// whose residue exceeds eps_b, then flushes every V residue back to U.
/// Stops once all U residues are <= eps_b. estimate[u_i] underestimates
/// π(u_i, target) by at most eps_b.
PushOutcome selective_push(const BipartiteGraph& g, NodeId target, double alpha, double eps_b,
                           const PushOptions& options = {});

/// Selective pushes while they stay cheaper than full sweeps, then whole-graph
/// sweeps. Switches when n_p >= 2|E| · log_{1/(1-α)}(1 / Σ_U residue); the
/// sweeps run until every residue is <= eps_b or their sum is.
PushOutcome ss_push(const BipartiteGraph& g, NodeId target, double alpha, double eps_b,
                    const PushOptions& options = {});

struct ForwardOutcome {
  /// Final →π(source, ·).
  std::vector<double> estimate;
  /// →π before the power phase and the forward residues it left. Together
  /// they satisfy π(source, u_i) = transformed[u_i] + Σ_j forward_residue[u_j] · π(u_j, u_i).
  std::vector<double> transformed;
  std::vector<double> forward_residue;
  /// Degree-weighted residue mass of the seed ledger.
  double gamma = 0.0;
  PhaseTrace trace;
};

/// Turns a backward ledger for `source` into forward estimates →π(source, ·)
/// with one-sided error <= eps_f, provided lambda bounds every column sum of
/// the HPP matrix. Continues backward pushes under per-node thresholds
/// ws(source)/ws(u_i) · eps_f/lambda, and hands what is left to power
/// iterations once the push budget runs out. The seed is taken by value.
/// Throws GraphError("unflushed ledger") when the seed has V residue.
ForwardOutcome pi_push(const BipartiteGraph& g, NodeId source, double alpha, double lambda, double eps_f,
                       ResidueLedger seed, const PushOptions& options = {});

}  // namespace bhpp
