#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lbtcoex/config.hpp"

namespace lbtcoex {

struct CellChainInput {
  double q_C;       // buffer-nonempty probability per transition
  double p_C;       // conditional collision / busy-sensing probability
  double P_idle_C;  // channel-idle probability seen while silent
  int Z;            // fixed contention-window size
};

// Closed-form building blocks: eta, lambda, mu scale the backoff-state mass,
// gamma = b_(0) / b_(0)e. alpha_of / beta_of are the two geometric tails.
struct CellClosedFormTerms {
  double q_C, p_C, P_idle_C;
  int Z;
  double eta, lambda, mu, gamma;

  double alpha_of(double x) const {
    if (p_C <= 0) return 0.0;
    return -std::expm1(x * std::log1p(-p_C));  // 1-(1-p)^x
  }
  double beta_of(double x) const {
    double r = (1.0 - q_C) * P_idle_C;
    if (r <= 0) return x > 0 ? 1.0 : 0.0;
    return -std::expm1(x * std::log(r));  // 1-((1-q)Pidle)^x
  }
};

struct CellChainSolution {
  Probability b0e;    // stationary mass of (0)_e
  Probability b0;     // stationary mass of (0)
  Probability tau_C;  // attempt probability per transition
};

namespace detail {

inline void check_cell_input(const CellChainInput& in) {
  if (!(in.q_C >= 0 && in.q_C <= 1)) throw std::domain_error("cellular_chain: q_C out of [0,1]");
  if (!(in.p_C >= 0 && in.p_C <= 1)) throw std::domain_error("cellular_chain: p_C out of [0,1]");
  if (!(in.P_idle_C >= 0 && in.P_idle_C <= 1)) throw std::domain_error("cellular_chain: P_idle_C out of [0,1]");
  if (in.Z < 2) throw std::domain_error("cellular_chain: Z < 2");
  if (in.p_C >= 1.0) throw std::domain_error("cellular_chain: p_C = 1 zeroes the backoff normalization");
}

// Relative state masses (units of b0e) for a given gamma = b0/b0e:
// Se = total post-backoff mass, Sb = total backoff mass. Sb is affine in
// gamma, which is how lambda and mu are extracted.
struct CellMassTotals {
  double Se, Sb;
};

inline CellMassTotals cell_mass_totals(double q, double p, double Pi, int Z, double gamma) {
  double r = (1.0 - q) * Pi;
  auto beta = [&](double x) {
    if (r <= 0) return x > 0 ? 1.0 : 0.0;
    return -std::expm1(x * std::log(r));
  };
  double b1 = beta(1.0);
  double E = Pi * (1.0 - p);
  double F = (1.0 - q) * (1.0 - p) / q;
  double Se = E + F * gamma;
  // post-backoff masses be[l] (be[0] = 1 by normalization choice)
  double d = (1.0 - q) * (1.0 - Pi) / Z * (Se - 1.0) + q * Pi * (1.0 - p) / Z +
             (1.0 - q) * (1.0 - p) / Z * gamma;
  std::vector<double> be(Z);
  be[0] = 1.0;
  for (int l = 1; l < Z; ++l) be[l] = d * beta(Z - l) / b1;
  // backoff masses b[l] via backward recursion b(l) = (1-p) b(l+1)
  // + q Pi be(l+1) + cfull, with cfull depending linearly on Sb itself.
  double c = q * (1.0 - Pi) / Z * Se + p * q * Pi / Z;
  std::vector<double> u(Z, 0.0), v(Z, 0.0);
  v[Z - 1] = 1.0;
  for (int l = Z - 2; l >= 0; --l) {
    u[l] = (1.0 - p) * u[l + 1] + q * Pi * be[l + 1];
    v[l] = (1.0 - p) * v[l + 1] + 1.0;
  }
  double su = 0, sv = 0;
  for (int l = 0; l < Z; ++l) {
    su += u[l];
    sv += v[l];
  }
  double c0 = c + q * (1.0 - p) / Z * gamma;
  double Sb = (su + c0 * sv) / (1.0 - p * sv / Z);
  return {Se, Sb};
}

}  // namespace detail

// Transition matrix over 2Z states ordered [(0)_e..(Z-1)_e, (0)..(Z-1)];
// rows are source states.
inline Eigen::MatrixXd cell_transition_matrix(const CellChainInput& in) {
  if (!(in.q_C >= 0 && in.q_C <= 1) || !(in.p_C >= 0 && in.p_C <= 1) ||
      !(in.P_idle_C >= 0 && in.P_idle_C <= 1) || in.Z < 2)
    throw std::domain_error("cell_transition_matrix: invalid input");
  double q = in.q_C, p = in.p_C, Pi = in.P_idle_C;
  int Z = in.Z;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2 * Z, 2 * Z);
  auto e = [](int k) { return k; };
  auto b = [Z](int k) { return Z + k; };
  // (k)_e, k>=1: idle -> decrement (arrival routes to backoff); busy -> full
  // uniform re-choice (arrival routes to backoff).
  for (int k = 1; k < Z; ++k) {
    for (int l = 0; l < Z; ++l) {
      M(e(k), e(l)) += (1 - q) * (1 - Pi) / Z;
      M(e(k), b(l)) += q * (1 - Pi) / Z;
    }
    M(e(k), e(k - 1)) += (1 - q) * Pi;
    M(e(k), b(k - 1)) += q * Pi;
  }
  // (0)_e: no arrival -> stay; arrival+idle -> immediate transmission
  // (success -> post uniform, collision -> backoff uniform); arrival+busy ->
  // backoff uniform.
  for (int l = 0; l < Z; ++l) {
    M(e(0), e(l)) += q * Pi * (1 - p) / Z;
    M(e(0), b(l)) += p * q * Pi / Z + q * (1 - Pi) / Z;
  }
  M(e(0), e(0)) += 1 - q;
  // (k), k>=1: idle -> decrement; busy -> uniform re-choice.
  for (int k = 1; k < Z; ++k) {
    for (int l = 0; l < Z; ++l) M(b(k), b(l)) += p / Z;
    M(b(k), b(k - 1)) += 1 - p;
  }
  // (0): transmit without sensing; collision or next arrival -> backoff
  // uniform, success without arrival -> post uniform.
  for (int l = 0; l < Z; ++l) {
    M(b(0), b(l)) += p / Z + q * (1 - p) / Z;
    M(b(0), e(l)) += (1 - q) * (1 - p) / Z;
  }
  return M;
}

// Saturated (q=1) attempt probability of the Z-state backoff-only chain.
inline double cell_saturated_tau(double p, int Z) {
  if (p < 1e-12) return 2.0 / (Z + 1);
  double al = -std::expm1(Z * std::log1p(-p));  // alpha(Z)
  return p * al / (p * Z - (1.0 - p) * al);
}

// eta, lambda, mu, gamma of the stationary solution. Requires q_C in (0,1);
// endpoints are routed to limit branches by cell_solve.
inline CellClosedFormTerms cell_closed_form(const CellChainInput& in) {
  detail::check_cell_input(in);
  if (!(in.q_C > 0.0) || !(in.q_C < 1.0))
    throw std::domain_error("cell_closed_form: q_C endpoint must use the caller's limit branch");
  double q = std::clamp(in.q_C, 1e-9, 1.0 - 1e-9);
  double p = in.p_C, Pi = in.P_idle_C;
  int Z = in.Z;
  CellClosedFormTerms t{q, p, Pi, Z, 0, 0, 0, 0};
  double r = (1.0 - q) * Pi;
  double b1 = t.beta_of(1.0);
  // gamma from the boundary balance of the post-backoff column sums.
  double E = Pi * (1.0 - p);
  double F = (1.0 - q) * (1.0 - p) / q;
  double A = (q * (Pi * (1.0 - p) + 1.0) - b1) / Z;
  double B = (1.0 - q) * (1.0 - p) / Z;
  double C = (b1 - q) / Z;
  double T = (Z - r * t.beta_of(Z) / b1) / b1;
  t.gamma = (E - (1.0 - q) - T * (A + C * E)) / (T * (B + C * F) - F);
  // eta = p / (Pidle * alpha(Z)); limit 1/(Pidle*Z) as p -> 0.
  if (Pi <= 0) throw std::domain_error("cell_closed_form: P_idle_C = 0 has no finite eta");
  t.eta = (p > 0) ? p / (Pi * t.alpha_of(Z)) : 1.0 / (Pi * Z);
  // Sb is affine in gamma: Sb = eta*lambda + eta*mu*gamma.
  double Sb0 = detail::cell_mass_totals(q, p, Pi, Z, 0.0).Sb;
  double Sb1 = detail::cell_mass_totals(q, p, Pi, Z, 1.0).Sb - Sb0;
  t.lambda = Sb0 / t.eta;
  t.mu = Sb1 / t.eta;
  return t;
}

inline CellChainSolution cell_solve(const CellChainInput& in) {
  detail::check_cell_input(in);
  if (in.q_C <= 0.0) return {Probability(1.0), Probability(0.0), Probability(0.0)};
  if (in.q_C >= 1.0) {
    double tau = cell_saturated_tau(in.p_C, in.Z);
    return {Probability(0.0), Probability(tau), Probability(tau)};
  }
  CellClosedFormTerms t = cell_closed_form(in);
  double q = t.q_C, p = t.p_C, Pi = t.P_idle_C;
  double denom = t.eta * t.lambda + Pi * (1.0 - p) +
                 (t.eta * t.mu + (1.0 - q) * (1.0 - p) / q) * t.gamma;
  double b0e = 1.0 / denom;
  double b0 = t.gamma * b0e;
  double tau = b0 + q * Pi * b0e;
  return {Probability(std::clamp(b0e, 0.0, 1.0)), Probability(std::clamp(b0, 0.0, 1.0)),
          Probability(std::clamp(tau, 0.0, 1.0))};
}

inline double cell_b0e(const CellChainInput& in) { return cell_solve(in).b0e; }
inline double cell_tau(const CellChainInput& in) { return cell_solve(in).tau_C; }

}  // namespace lbtcoex
