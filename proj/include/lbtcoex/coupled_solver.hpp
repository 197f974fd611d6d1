#pragma once

#include <array>
#include <cmath>

#include "lbtcoex/cellular_chain.hpp"
#include "lbtcoex/config.hpp"
#include "lbtcoex/wifi_chain.hpp"

namespace lbtcoex {

struct FixedPoint {
  Probability tau_W, tau_C, p_W, p_C;
  double residual_inf_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  bool multi_root_suspected = false;
};

namespace detail {

// Collision probabilities seen by one node of each technology (all other
// nodes' attempts are independent).
inline std::array<double, 2> collision_probs(double tw, double tc, int nW, int nC) {
  double pW = 0.0, pC = 0.0;
  if (nW > 0) pW = 1.0 - std::pow(1.0 - tw, nW - 1) * std::pow(1.0 - tc, nC);
  if (nC > 0) pC = 1.0 - std::pow(1.0 - tw, nW) * std::pow(1.0 - tc, std::max(nC - 1, 0));
  return {pW, pC};
}

// One application of the fixed-point map F(tau) = (wifi_tau, cell_tau).
inline std::array<double, 2> coex_map(double tw, double tc, const CoexConfig& c) {
  auto [pW, pC] = collision_probs(tw, tc, c.n_W, c.n_C);
  double fw = (c.n_W > 0) ? wifi_tau({c.q_W, pW, 1.0 - pW, c.W0, c.m}) : 0.0;
  double fc = (c.n_C > 0) ? cell_tau({c.q_C, pC, 1.0 - pC, c.Z}) : 0.0;
  return {fw, fc};
}

}  // namespace detail

inline std::array<double, 2> residual(double tau_W, double tau_C, const CoexConfig& c) {
  auto f = detail::coex_map(tau_W, tau_C, c);
  return {tau_W - f[0], tau_C - f[1]};
}

namespace detail {

struct RawSolve {
  double tw, tc, resid;
  int iters;
  bool converged;
};

inline RawSolve solve_from(double tw, double tc, const CoexConfig& c, int budget) {
  // Step tolerance tighter than the 1e-10 residual contract: with damping
  // omega the true residual is about step/omega.
  const double step_tol = 1e-12;
  double omega = 0.5;
  int it = 0;
  for (int phase = 0; phase < 2; ++phase) {
    int phase_budget = (phase == 0) ? budget / 2 : budget - budget / 2;
    for (int i = 0; i < phase_budget; ++i, ++it) {
      auto f = coex_map(tw, tc, c);
      double nw = (1.0 - omega) * tw + omega * f[0];
      double nc = (1.0 - omega) * tc + omega * f[1];
      double step = std::max(std::abs(nw - tw), std::abs(nc - tc));
      tw = nw;
      tc = nc;
      if (step < step_tol) {
        auto r = residual(tw, tc, c);
        double rn = std::max(std::abs(r[0]), std::abs(r[1]));
        return {tw, tc, rn, it + 1, rn < 1e-10};
      }
    }
    // stagnation: restart with heavier damping
    omega = 0.1;
    tw = 0.01;
    tc = 0.01;
  }
  auto r = residual(tw, tc, c);
  double rn = std::max(std::abs(r[0]), std::abs(r[1]));
  return {tw, tc, rn, it, false};
}

}  // namespace detail

// Damped fixed-point iteration for (tau_W, tau_C). check_multi_root reruns
// from scattered starts and flags disagreement > 1e-6 among converged runs.
inline FixedPoint solve_fixed_point(const CoexConfig& c, bool check_multi_root = true,
                                    int budget = 100000) {
  validate(c);
  // degenerate components stay exactly at 0 if started there (F maps 0 -> 0)
  const bool wifi_live = c.n_W > 0 && c.q_W > 0;
  const bool cell_live = c.n_C > 0 && c.q_C > 0;
  auto main = detail::solve_from(wifi_live ? 0.01 : 0.0, cell_live ? 0.01 : 0.0, c, budget);
  if (!wifi_live) main.tw = 0.0;
  if (!cell_live) main.tc = 0.0;
  FixedPoint fp;
  fp.tau_W = Probability(std::clamp(main.tw, 0.0, 1.0));
  fp.tau_C = Probability(std::clamp(main.tc, 0.0, 1.0));
  auto [pW, pC] = detail::collision_probs(fp.tau_W, fp.tau_C, c.n_W, c.n_C);
  fp.p_W = Probability(pW);
  fp.p_C = Probability(pC);
  fp.residual_inf_norm = main.resid;
  fp.iterations = main.iters;
  fp.converged = main.converged;
  if (check_multi_root && main.converged) {
    const double starts[4][2] = {{0.3, 0.3}, {0.7, 0.1}, {0.1, 0.7}, {0.9, 0.9}};
    for (const auto& s : starts) {
      auto alt = detail::solve_from(s[0], s[1], c, budget);
      if (alt.converged && (std::abs(alt.tw - main.tw) > 1e-6 || std::abs(alt.tc - main.tc) > 1e-6)) {
        fp.multi_root_suspected = true;
        break;
      }
    }
  }
  return fp;
}

}  // namespace lbtcoex
