#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "lbtcoex/config.hpp"
#include "lbtcoex/coupled_solver.hpp"

namespace lbtcoex {

struct FrameDurations {
  double sigma;              // empty-slot duration, us
  double T_s_W, T_s_C;       // successful transmission, us
  double T_c_W, T_c_C;       // intra-technology collision, us
  double T_c_M;              // inter-technology collision, us
};

// Outcome classes of one channel-state epoch, in fixed order.
enum class AirtimeClass { Idle = 0, WifiSuccess, CellSuccess, WifiCollision, CellCollision, MixedCollision };
inline constexpr int kNumAirtimeClasses = 6;

struct ThroughputReport {
  double S_W = 0;        // bits/s per Wi-Fi AP
  double S_C = 0;        // bits/s per SCBS
  double S_total = 0;    // network bits/s
  double T_state_us = 0; // expected epoch duration
  std::array<double, kNumAirtimeClasses> shares{};  // epoch-class probabilities
};

// P_tr: at least one of n nodes transmits; P_s: exactly one, given at least one.
inline std::array<double, 2> ptr_ps(double tau, int n) {
  if (n <= 0 || tau <= 0.0) return {0.0, 0.0};
  double ptr = -std::expm1(n * std::log1p(-tau));
  double ps = n * tau * std::pow(1.0 - tau, n - 1) / ptr;
  return {ptr, ps};
}

// Basic-access DCF accounting; overhead bits serialize at the node's own
// rate; the cellular frame uses the same template. Rates in bit/s, output us.
inline FrameDurations frame_durations(const CoexConfig& c) {
  auto tx_us = [](double bits, double rate) { return bits / rate * 1e6; };
  double d = c.prop_delay_us;
  FrameDurations fd;
  fd.sigma = c.sigma_us;
  double data_W = tx_us(c.phy_header_bits + c.mac_header_bits + c.D_W, c.R_W);
  double data_C = tx_us(c.phy_header_bits + c.mac_header_bits + c.D_C, c.R_C);
  fd.T_s_W = data_W + c.sifs_us + d + tx_us(c.ack_bits + c.phy_header_bits, c.R_W) + c.difs_us + d;
  fd.T_s_C = data_C + c.sifs_us + d + tx_us(c.ack_bits + c.phy_header_bits, c.R_C) + c.difs_us + d;
  fd.T_c_W = data_W + c.difs_us + d;
  fd.T_c_C = data_C + c.difs_us + d;
  fd.T_c_M = std::max(fd.T_c_W, fd.T_c_C);  // longest colliding frame governs
  return fd;
}

// Six-class epoch probabilities; they sum to 1 identically.
inline std::array<double, kNumAirtimeClasses> airtime_shares(const FixedPoint& fp, const CoexConfig& c) {
  auto [PtrW, PsW] = ptr_ps(fp.tau_W, c.n_W);
  auto [PtrC, PsC] = ptr_ps(fp.tau_C, c.n_C);
  std::array<double, kNumAirtimeClasses> w{};
  w[int(AirtimeClass::Idle)] = (1 - PtrW) * (1 - PtrC);
  w[int(AirtimeClass::WifiSuccess)] = PtrW * PsW * (1 - PtrC);
  w[int(AirtimeClass::CellSuccess)] = (1 - PtrW) * PtrC * PsC;
  w[int(AirtimeClass::WifiCollision)] = PtrW * (1 - PsW) * (1 - PtrC);
  w[int(AirtimeClass::CellCollision)] = (1 - PtrW) * PtrC * (1 - PsC);
  w[int(AirtimeClass::MixedCollision)] = PtrW * PtrC;
  return w;
}

inline std::pair<double, std::array<double, kNumAirtimeClasses>> expected_slot_time(
    const FixedPoint& fp, const FrameDurations& fd, const CoexConfig& c) {
  auto w = airtime_shares(fp, c);
  double T = w[0] * fd.sigma + w[1] * fd.T_s_W + w[2] * fd.T_s_C + w[3] * fd.T_c_W +
             w[4] * fd.T_c_C + w[5] * fd.T_c_M;
  return {T, w};
}

inline ThroughputReport throughputs(const FixedPoint& fp, const FrameDurations& fd,
                                    const CoexConfig& c) {
  ThroughputReport r;
  auto [T, w] = expected_slot_time(fp, fd, c);
  r.T_state_us = T;
  r.shares = w;
  double net_W = w[int(AirtimeClass::WifiSuccess)] * c.D_W / T * 1e6;  // bits/s, network
  double net_C = w[int(AirtimeClass::CellSuccess)] * c.D_C / T * 1e6;
  r.S_W = c.n_W > 0 ? net_W / c.n_W : 0.0;
  r.S_C = c.n_C > 0 ? net_C / c.n_C : 0.0;
  r.S_total = c.n_W * r.S_W + c.n_C * r.S_C;
  return r;
}

}  // namespace lbtcoex
