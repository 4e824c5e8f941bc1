#include "bhpp/kernels.hpp"

#include <algorithm>

#ifdef BHPP_HAVE_OPENMP
#include <omp.h>
#endif

namespace bhpp::kernels {

int max_threads() {
#ifdef BHPP_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef BHPP_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

namespace {

void forward_step_serial(const BipartiteGraph& g, std::span<const double> x, std::span<double> xv,
                         std::span<double> y) {
  const auto& us = g.u_side();
  const auto& vs = g.v_side();
  std::fill(xv.begin(), xv.end(), 0.0);
  for (std::size_t u = 0; u < us.size(); ++u) {
    if (x[u] == 0.0) continue;
    const double share = x[u] / us.weight_sums[u];
    for (auto e = us.offsets[u]; e < us.offsets[u + 1]; ++e) xv[us.neighbors[e]] += share * us.weights[e];
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t v = 0; v < vs.size(); ++v) {
    if (xv[v] == 0.0) continue;
    const double share = xv[v] / vs.weight_sums[v];
    for (auto e = vs.offsets[v]; e < vs.offsets[v + 1]; ++e) y[vs.neighbors[e]] += share * vs.weights[e];
  }
}

void forward_step_parallel(const BipartiteGraph& g, std::span<const double> x, std::span<double> xv,
                           std::span<double> y) {
  const auto& us = g.u_side();
  const auto& vs = g.v_side();
  const auto nv = static_cast<std::int64_t>(vs.size());
  const auto nu = static_cast<std::int64_t>(us.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t v = 0; v < nv; ++v) {
    double acc = 0.0;
    for (auto e = vs.offsets[v]; e < vs.offsets[v + 1]; ++e) acc += vs.coef[e] * x[vs.neighbors[e]];
    xv[v] = acc;
  }
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t u = 0; u < nu; ++u) {
    double acc = 0.0;
    for (auto e = us.offsets[u]; e < us.offsets[u + 1]; ++e) acc += us.coef[e] * xv[us.neighbors[e]];
    y[u] = acc;
  }
}

SweepStats backward_sweep_serial(const BipartiteGraph& g, double alpha, std::span<double> ru,
                                 std::span<double> est, std::span<double> rv) {
  const auto& us = g.u_side();
  const auto& vs = g.v_side();
  for (std::size_t u = 0; u < us.size(); ++u) {
    const double r = ru[u];
    if (r <= 0.0) continue;
    est[u] += alpha * r;
    for (auto e = us.offsets[u]; e < us.offsets[u + 1]; ++e) {
      rv[us.neighbors[e]] += (1.0 - alpha) * us.coef[e] * r;
    }
    ru[u] = 0.0;
  }
  for (std::size_t v = 0; v < vs.size(); ++v) {
    const double r = rv[v];
    if (r <= 0.0) continue;
    for (auto e = vs.offsets[v]; e < vs.offsets[v + 1]; ++e) ru[vs.neighbors[e]] += vs.coef[e] * r;
    rv[v] = 0.0;
  }
  SweepStats s;
  for (double r : ru) {
    s.residue_sum += r;
    s.residue_max = std::max(s.residue_max, r);
  }
  return s;
}

SweepStats backward_sweep_parallel(const BipartiteGraph& g, double alpha, std::span<double> ru,
                                   std::span<double> est, std::span<double> rv) {
  const auto& us = g.u_side();
  const auto& vs = g.v_side();
  const auto nv = static_cast<std::int64_t>(vs.size());
  const auto nu = static_cast<std::int64_t>(us.size());
  const double keep = 1.0 - alpha;
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t v = 0; v < nv; ++v) {
    double acc = 0.0;
    for (auto e = vs.offsets[v]; e < vs.offsets[v + 1]; ++e) acc += vs.weights[e] * ru[vs.neighbors[e]];
    rv[v] = keep * acc / vs.weight_sums[v];
  }
  double sum = 0.0, mx = 0.0;
#pragma omp parallel for schedule(dynamic, 256) reduction(+ : sum) reduction(max : mx)
  for (std::int64_t u = 0; u < nu; ++u) {
    est[u] += alpha * ru[u];
    double acc = 0.0;
    for (auto e = us.offsets[u]; e < us.offsets[u + 1]; ++e) acc += us.weights[e] * rv[us.neighbors[e]];
    const double r = acc / us.weight_sums[u];
    ru[u] = r;
    sum += r;
    mx = std::max(mx, r);
  }
#pragma omp parallel for schedule(static)
  for (std::int64_t v = 0; v < nv; ++v) rv[v] = 0.0;
  return {sum, mx};
}

}  // namespace

void forward_step(const BipartiteGraph& g, std::span<const double> x, std::span<double> v_scratch,
                  std::span<double> y, Exec exec) {
  if (exec == Exec::parallel) {
    forward_step_parallel(g, x, v_scratch, y);
  } else {
    forward_step_serial(g, x, v_scratch, y);
  }
}

SweepStats backward_sweep(const BipartiteGraph& g, double alpha, std::span<double> residue_u,
                          std::span<double> estimate, std::span<double> v_scratch, Exec exec) {
  if (exec == Exec::parallel) return backward_sweep_parallel(g, alpha, residue_u, estimate, v_scratch);
  return backward_sweep_serial(g, alpha, residue_u, estimate, v_scratch);
}

}  // namespace bhpp::kernels
