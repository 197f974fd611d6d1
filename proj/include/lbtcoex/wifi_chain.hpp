#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lbtcoex/config.hpp"

namespace lbtcoex {

struct WifiChainInput {
  double q_W;       // buffer-nonempty probability per transition
  double p_W;       // conditional collision probability
  double P_idle_W;  // channel-idle probability seen while silent
  int W0;
  int m;
};

struct WifiChainSolution {
  Probability b00e;   // stationary mass of post-backoff head state (0,0)_e
  Probability tau_W;  // attempt probability per transition
};

namespace detail {

inline void check_wifi_input(const WifiChainInput& in) {
  if (!(in.q_W >= 0 && in.q_W <= 1)) throw std::domain_error("wifi_chain: q_W out of [0,1]");
  if (!(in.p_W >= 0 && in.p_W <= 1)) throw std::domain_error("wifi_chain: p_W out of [0,1]");
  if (!(in.P_idle_W >= 0 && in.P_idle_W <= 1)) throw std::domain_error("wifi_chain: P_idle_W out of [0,1]");
  if (in.W0 < 2) throw std::domain_error("wifi_chain: W0 < 2");
  if (in.m < 0) throw std::domain_error("wifi_chain: m < 0");
  if (in.p_W >= 1.0) throw std::domain_error("wifi_chain: p_W = 1 divides by (1-p_W)");
}

// Geometric-sum factor of the normalization bracket. The literal printed form
// (1-p-p(2p)^{m-1})/(1-2p) has a removable singularity at p=1/2; the partial
// sum below is its exact value for every p when m>=1, and the m=0 case
// collapses to 1/2.
inline double wifi_f_factor(double p, int m) {
  if (m == 0) return 0.5;
  double f = 1.0, t = 1.0;
  for (int i = 1; i < m; ++i) {
    t *= 2.0 * p;
    f += 0.5 * t;
  }
  return f;
}

}  // namespace detail

// Saturated (q=1) attempt probability: the classic two-variable closed form,
// with the removable p=1/2 limit handled explicitly.
inline double wifi_saturated_tau(double p, int W0, int m) {
  if (std::abs(1.0 - 2.0 * p) < 1e-12)
    return 2.0 / (W0 + 1 + p * W0 * m);
  double pm = std::pow(2.0 * p, m);
  return 2.0 * (1.0 - 2.0 * p) / ((1.0 - 2.0 * p) * (W0 + 1) + p * W0 * (1.0 - pm));
}

// Inverse of the normalization bracket: stationary mass of (0,0)_e.
// Caller handles q_W = 0 (limit: b00e -> 1) and q_W = 1 (limit: b00e -> 0,
// post-backoff unreachable) via wifi_solve.
inline double wifi_b00e(const WifiChainInput& in) {
  detail::check_wifi_input(in);
  if (!(in.q_W > 0)) throw std::domain_error("wifi_b00e: q_W = 0 must be handled by the caller's limit branch");
  double q = std::clamp(in.q_W, 1e-9, 1.0 - 1e-9);
  double p = in.p_W, Pi = in.P_idle_W;
  double W0 = in.W0;
  double A = -std::expm1(W0 * std::log1p(-q));  // 1-(1-q)^W0, stable for small q
  double f = detail::wifi_f_factor(p, in.m);
  double qq = q * q;
  double inv = (1.0 - q) + qq * W0 * (W0 + 1) / (2.0 * A) +
               (q * (W0 + 1) / (2.0 * (1.0 - q))) *
                   (qq * W0 / A + (1.0 - Pi) * (1.0 - q) - q * Pi * (1.0 - p)) +
               (p * qq / (2.0 * (1.0 - q) * (1.0 - p))) * (W0 / A - (1.0 - p) * Pi) *
                   (2.0 * W0 * f + 1.0);
  double b = 1.0 / inv;
  if (!std::isfinite(b)) throw std::domain_error("wifi_b00e: non-finite intermediate");
  return b;
}

inline WifiChainSolution wifi_solve(const WifiChainInput& in) {
  detail::check_wifi_input(in);
  if (in.q_W <= 0.0) return {Probability(1.0), Probability(0.0)};
  if (in.q_W >= 1.0) return {Probability(0.0), Probability(wifi_saturated_tau(in.p_W, in.W0, in.m))};
  double q = std::clamp(in.q_W, 1e-9, 1.0 - 1e-9);
  double p = in.p_W, Pi = in.P_idle_W;
  double W0 = in.W0;
  double b = wifi_b00e(in);
  double A = -std::expm1(W0 * std::log1p(-q));
  double qq = q * q;
  double tau = b * (qq * W0 / ((1.0 - p) * (1.0 - q) * A) - qq * Pi / (1.0 - q));
  tau = std::clamp(tau, 0.0, 1.0);
  return {Probability(b), Probability(tau)};
}

inline double wifi_tau(const WifiChainInput& in) { return wifi_solve(in).tau_W; }

}  // namespace lbtcoex
