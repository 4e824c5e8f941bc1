#pragma once

#include <cstdint>
#include <span>

#include "bhpp/graph.hpp"

// Whole-graph sweeps shared by the push engine and the power iteration.
//
// Each kernel has two implementations with identical semantics:
//   serial   - scatter form, a literal transcription of the push rules. Kept
//              as the reference the parallel form is tested against.
//   parallel - gather form, one writer per output entry, OpenMP over nodes.
//              Output vectors do not depend on the thread count since each
//              entry is summed in adjacency order by a single thread; only
//              the reduced SweepStats::residue_sum may differ in the last bits.
// The two agree to rounding (the summation order differs).
namespace bhpp::kernels {

enum class Exec { serial, parallel };

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();
/// Sets the OpenMP thread count; no-op without OpenMP.
void set_threads(int n);

/// y = x · P for a row vector x over U, computed as (x · U) · V without
/// materializing P. `v_scratch` must have |V| entries.
void forward_step(const BipartiteGraph& g, std::span<const double> x, std::span<double> v_scratch,
                  std::span<double> y, Exec exec = Exec::serial);

struct SweepStats {
  double residue_sum = 0.0;  // Σ_U residue after the sweep
  double residue_max = 0.0;  // max_U residue after the sweep
};

/// One sequential backward round with threshold 0: every U node with positive
/// residue converts alpha of it into its estimate and pushes the rest through
/// V and back to U. Equivalent to estimate += alpha * r; r <- (1-alpha) P r.
/// V residues are zero on entry and on exit; `v_scratch` must have |V| entries.
SweepStats backward_sweep(const BipartiteGraph& g, double alpha, std::span<double> residue_u,
                          std::span<double> estimate, std::span<double> v_scratch,
                          Exec exec = Exec::serial);

}  // namespace bhpp::kernels
