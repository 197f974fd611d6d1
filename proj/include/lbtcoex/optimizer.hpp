#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lbtcoex/airtime.hpp"
#include "lbtcoex/config.hpp"
#include "lbtcoex/coupled_solver.hpp"
#include "lbtcoex/parallel.hpp"

namespace lbtcoex {

struct ZTraceEntry {
  int Z;
  double S_co_W, S_co_C;  // per-node throughputs in the mixed system
  double S_only_W;        // per-AP Wi-Fi-only baseline
  bool constraint_met;
  double S_total;
};

struct OptimalCwResult {
  std::optional<int> z_star;
  bool feasible = false;
  std::vector<ZTraceEntry> per_z_trace;
  double baseline = 0.0;        // per-AP S_only_W
  double s_total_at_star = 0.0;
  // S_total(Z*) relative to the Wi-Fi-only network total (n_W+n_C)*S_only_W;
  // NaN when infeasible.
  double improvement = std::numeric_limits<double>::quiet_NaN();
};

struct SweepCell {
  double q_W, q_C;
  OptimalCwResult result;
};

struct SweepGrid {
  std::vector<double> q_W_values, q_C_values;
  std::vector<SweepCell> cells;  // row-major over (q_W, q_C)
};

// Per-AP throughput of a homogeneous n-AP Wi-Fi deployment at traffic q_W.
inline double wifi_only_baseline(double q_W, int n, const CoexConfig& base) {
  if (n < 1) throw std::invalid_argument("wifi_only_baseline: n must be >= 1");
  CoexConfig c = base;
  c.n_W = n;
  c.n_C = 0;
  c.q_W = q_W;
  c.q_C = 0.0;
  FixedPoint fp = solve_fixed_point(c, /*check_multi_root=*/false);
  return throughputs(fp, frame_durations(c), c).S_W;
}

// Linear search over Z: graceful coexistence requires every node to beat the
// per-AP Wi-Fi-only baseline strictly; among feasible Z the S_total maximizer
// wins, ties toward smaller Z.
inline OptimalCwResult optimal_cw(const CoexConfig& base, int z_min = 2, int z_max = 64) {
  if (z_min < 2 || z_min > z_max) throw std::invalid_argument("optimal_cw: need 2 <= z_min <= z_max");
  validate(base);
  OptimalCwResult res;
  res.baseline = wifi_only_baseline(base.q_W, base.n_W + base.n_C, base);
  double best = -1.0;
  for (int Z = z_min; Z <= z_max; ++Z) {
    CoexConfig c = base;
    c.Z = Z;
    FixedPoint fp = solve_fixed_point(c, /*check_multi_root=*/false);
    ZTraceEntry e{Z, 0, 0, res.baseline, false, 0};
    if (fp.converged) {
      ThroughputReport tr = throughputs(fp, frame_durations(c), c);
      e.S_co_W = tr.S_W;
      e.S_co_C = tr.S_C;
      e.S_total = tr.S_total;
      e.constraint_met = std::min(tr.S_W, tr.S_C) > res.baseline;
    }
    res.per_z_trace.push_back(e);
    if (e.constraint_met && e.S_total > best) {
      best = e.S_total;
      res.z_star = Z;
    }
  }
  if (res.z_star) {
    res.feasible = true;
    res.s_total_at_star = best;
    double ref = (base.n_W + base.n_C) * res.baseline;
    res.improvement = best / ref - 1.0;
  }
  return res;
}

inline SweepGrid sweep(const std::vector<double>& q_W_values, const std::vector<double>& q_C_values,
                       const CoexConfig& base, int z_min = 2, int z_max = 64) {
  if (q_W_values.empty() || q_C_values.empty()) throw std::invalid_argument("sweep: empty grid");
  SweepGrid g;
  g.q_W_values = q_W_values;
  g.q_C_values = q_C_values;
  g.cells.resize(q_W_values.size() * q_C_values.size());
  parallel_for((long long)g.cells.size(), [&](long long i) {
    double qw = q_W_values[i / q_C_values.size()];
    double qc = q_C_values[i % q_C_values.size()];
    CoexConfig c = base;
    c.q_W = qw;
    c.q_C = qc;
    g.cells[i] = {qw, qc, optimal_cw(c, z_min, z_max)};
  });
  return g;
}

}  // namespace lbtcoex
