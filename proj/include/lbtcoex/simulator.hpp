#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbtcoex/airtime.hpp"
#include "lbtcoex/config.hpp"
#include "lbtcoex/coupled_solver.hpp"
#include "lbtcoex/parallel.hpp"

namespace lbtcoex {

inline constexpr const char* kPrngName = "splitmix64";

// splitmix64: tiny, splittable, platform-identical. One stream per
// (seed, replication, node).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : s_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }
  // uniform integer in [0, n)
  int below(int n) { return int(next() % std::uint64_t(n)); }

 private:
  std::uint64_t s_;
};

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t rep, std::uint64_t node) {
  SplitMix64 mix(seed ^ (rep * 0x9e3779b97f4a7c15ULL) ^ (node * 0xd1b54a32d192ed03ULL));
  mix.next();
  return mix.next();
}

struct SimConfig {
  CoexConfig base;
  long long slots = 1'000'000;   // channel-state epochs per replication
  long long warmup_slots = 10'000;
  int replications = 20;
  std::uint64_t seed = 1;
};

struct Estimate {
  double mean = 0.0;
  double ci_half = 0.0;  // 95% normal CI half-width across replications
};

struct SimEstimates {
  Estimate tau_W, tau_C, p_W, p_C;
  Estimate S_W, S_C;  // bits/s per node
  Estimate T_state_us;
  std::array<double, kNumAirtimeClasses> airtime_freq{};  // epoch-class frequencies
  long long epochs_per_replication = 0;
  int replications = 0;
};

namespace detail {

struct RepStats {
  double tau_W = 0, tau_C = 0, p_W = 0, p_C = 0, S_W = 0, S_C = 0, T_state = 0;
  std::array<double, kNumAirtimeClasses> freq{};
};

// One Wi-Fi node. post=true means post-backoff states (0,k)_e.
struct WifiNode {
  bool post;
  int stage;
  int counter;
};

struct CellNode {
  bool post;
  int counter;
};

inline int wifi_cw(int W0, int stage) { return W0 << stage; }

// One replication of the joint n_W + n_C system. Counters decrement once per
// epoch (state-duration convention of the analytic chains); busy time shows
// up as the epoch's wall-clock duration, not as frozen states.
inline RepStats run_replication(const SimConfig& sc, const FrameDurations& fd, int rep,
                                std::ostream* trace, long long trace_cap) {
  const CoexConfig& c = sc.base;
  const int nW = c.n_W, nC = c.n_C;
  std::vector<SplitMix64> rng;
  rng.reserve(nW + nC);
  for (int i = 0; i < nW + nC; ++i) rng.emplace_back(stream_seed(sc.seed, rep, i));

  std::vector<WifiNode> wifi(nW);
  std::vector<CellNode> cell(nC);
  for (int i = 0; i < nW; ++i) wifi[i] = {true, 0, rng[i].below(c.W0)};
  for (int i = 0; i < nC; ++i) cell[i] = {true, rng[nW + i].below(c.Z)};

  long long w_attempts = 0, c_attempts = 0, w_coll = 0, c_coll = 0;
  double w_bits = 0, c_bits = 0, total_us = 0;
  std::array<long long, kNumAirtimeClasses> counts{};
  long long measured = 0;

  std::vector<char> w_tx(nW), w_imm(nW), w_arr(nW);
  std::vector<char> c_tx(nC), c_imm(nC), c_arr(nC);

  for (long long ep = 0; ep < sc.slots; ++ep) {
    // 1. committed transmitters (backoff counter 0) and immediate-access
    //    candidates (post-backoff head with a fresh arrival).
    int committed = 0;
    for (int i = 0; i < nW; ++i) {
      w_tx[i] = (!wifi[i].post && wifi[i].counter == 0);
      committed += w_tx[i];
      w_imm[i] = 0;
      w_arr[i] = 0;
      if (wifi[i].post && wifi[i].counter == 0) w_arr[i] = rng[i].bernoulli(c.q_W);
    }
    for (int i = 0; i < nC; ++i) {
      c_tx[i] = (!cell[i].post && cell[i].counter == 0);
      committed += c_tx[i];
      c_imm[i] = 0;
      c_arr[i] = 0;
      if (cell[i].post && cell[i].counter == 0) c_arr[i] = rng[nW + i].bernoulli(c.q_C);
    }
    // immediate access goes through only if the channel is idle, i.e. no
    // committed transmitter; simultaneous immediates cannot sense each other.
    if (committed == 0) {
      for (int i = 0; i < nW; ++i)
        if (wifi[i].post && wifi[i].counter == 0 && w_arr[i]) w_imm[i] = w_tx[i] = 1;
      for (int i = 0; i < nC; ++i)
        if (cell[i].post && cell[i].counter == 0 && c_arr[i]) c_imm[i] = c_tx[i] = 1;
    }
    int nw_tx = 0, nc_tx = 0;
    for (int i = 0; i < nW; ++i) nw_tx += w_tx[i];
    for (int i = 0; i < nC; ++i) nc_tx += c_tx[i];
    int ntx = nw_tx + nc_tx;
    bool busy = ntx > 0;
    bool success = ntx == 1;

    // 2. classify the epoch and account time/bits.
    AirtimeClass cls;
    double dur;
    if (ntx == 0) {
      cls = AirtimeClass::Idle;
      dur = fd.sigma;
    } else if (ntx == 1) {
      cls = nw_tx ? AirtimeClass::WifiSuccess : AirtimeClass::CellSuccess;
      dur = nw_tx ? fd.T_s_W : fd.T_s_C;
    } else if (nc_tx == 0) {
      cls = AirtimeClass::WifiCollision;
      dur = fd.T_c_W;
    } else if (nw_tx == 0) {
      cls = AirtimeClass::CellCollision;
      dur = fd.T_c_C;
    } else {
      cls = AirtimeClass::MixedCollision;
      dur = fd.T_c_M;
    }
    if (ep >= sc.warmup_slots) {
      ++measured;
      ++counts[int(cls)];
      total_us += dur;
      w_attempts += nw_tx;
      c_attempts += nc_tx;
      if (ntx >= 2) {
        w_coll += nw_tx;
        c_coll += nc_tx;
      }
      if (success && nw_tx) w_bits += c.D_W;
      if (success && nc_tx) c_bits += c.D_C;
    }
    if (trace && ep < trace_cap) {
      static const char* names[] = {"idle", "wifi_success", "cell_success",
                                    "wifi_collision", "cell_collision", "mixed_collision"};
      *trace << ep << ',' << names[int(cls)] << ',' << dur;
      for (int i = 0; i < nW; ++i)
        *trace << ',' << (wifi[i].post ? "W:e" : "W:" + std::to_string(wifi[i].stage)) << ':'
               << wifi[i].counter;
      for (int i = 0; i < nC; ++i)
        *trace << ',' << (cell[i].post ? "C:e:" : "C:b:") << cell[i].counter;
      *trace << '\n';
    }

    // 3. state updates.
    for (int i = 0; i < nW; ++i) {
      auto& n = wifi[i];
      auto& g = rng[i];
      if (w_tx[i]) {
        if (w_imm[i]) {
          // immediate access from (0,0)_e: success re-enters post-backoff
          // without an arrival redraw; collision jumps to stage min(1,m).
          if (success) {
            n = {true, 0, g.below(c.W0)};
          } else {
            int st = std::min(1, c.m);
            n = {false, st, g.below(wifi_cw(c.W0, st))};
          }
        } else if (success) {
          bool arr = g.bernoulli(c.q_W);
          n = arr ? WifiNode{false, 0, g.below(c.W0)} : WifiNode{true, 0, g.below(c.W0)};
        } else {
          int st = std::min(n.stage + 1, c.m);
          n = {false, st, g.below(wifi_cw(c.W0, st))};
        }
      } else if (n.post && n.counter == 0) {
        // arrival while the channel is busy drops into stage-0 backoff;
        // otherwise the head state self-loops.
        if (w_arr[i]) n = {false, 0, g.below(c.W0)};
      } else if (n.post) {
        bool arr = g.bernoulli(c.q_W);
        int k = n.counter - 1;  // unconditional decrement
        n = arr ? WifiNode{false, 0, k} : WifiNode{true, 0, k};
      } else {
        --n.counter;  // unconditional decrement
      }
    }
    for (int i = 0; i < nC; ++i) {
      auto& n = cell[i];
      auto& g = rng[nW + i];
      if (c_tx[i]) {
        if (c_imm[i]) {
          n = success ? CellNode{true, g.below(c.Z)} : CellNode{false, g.below(c.Z)};
        } else if (success) {
          bool arr = g.bernoulli(c.q_C);
          n = {!arr, g.below(c.Z)};
        } else {
          n = {false, g.below(c.Z)};
        }
      } else if (n.post && n.counter == 0) {
        if (c_arr[i]) n = {false, g.below(c.Z)};  // arrival + busy channel
      } else if (n.post) {
        bool arr = g.bernoulli(c.q_C);
        if (busy) {
          n = {!arr, g.below(c.Z)};  // full re-choice on busy sensing
        } else {
          n = {!arr, n.counter - 1};
        }
      } else {
        if (busy)
          n.counter = g.below(c.Z);  // LBT re-choice, CW stays Z
        else
          --n.counter;
      }
    }
  }

  RepStats r;
  r.tau_W = nW ? double(w_attempts) / (double(measured) * nW) : 0.0;
  r.tau_C = nC ? double(c_attempts) / (double(measured) * nC) : 0.0;
  r.p_W = w_attempts ? double(w_coll) / double(w_attempts) : 0.0;
  r.p_C = c_attempts ? double(c_coll) / double(c_attempts) : 0.0;
  r.S_W = (nW && total_us > 0) ? w_bits / total_us * 1e6 / nW : 0.0;
  r.S_C = (nC && total_us > 0) ? c_bits / total_us * 1e6 / nC : 0.0;
  r.T_state = total_us / double(measured);
  for (int k = 0; k < kNumAirtimeClasses; ++k) r.freq[k] = double(counts[k]) / double(measured);
  return r;
}

inline Estimate across_reps(const std::vector<RepStats>& reps, double RepStats::*field) {
  int R = int(reps.size());
  double mean = 0;
  for (const auto& r : reps) mean += r.*field;
  mean /= R;
  if (R < 2) return {mean, 0.0};
  double var = 0;
  for (const auto& r : reps) var += (r.*field - mean) * (r.*field - mean);
  var /= (R - 1);
  return {mean, 1.96 * std::sqrt(var / R)};
}

}  // namespace detail

// Slot-level Monte Carlo of the joint system. Optional trace: per-epoch CSV
// rows (replication 0 only), capped at trace_cap epochs.
inline SimEstimates simulate(const SimConfig& sc, std::ostream* trace = nullptr,
                             long long trace_cap = 100000) {
  validate(sc.base);
  if (sc.replications < 1) throw std::invalid_argument("simulate: replications must be >= 1");
  if (sc.warmup_slots < 0 || sc.slots <= sc.warmup_slots)
    throw std::invalid_argument("simulate: need slots > warmup_slots >= 0");
  if (sc.slots - sc.warmup_slots < 10000)
    throw std::invalid_argument("simulate: budget too small, need >= 10^4 post-warmup epochs");
  FrameDurations fd = frame_durations(sc.base);
  std::vector<detail::RepStats> reps(sc.replications);
  if (trace) {
    *trace << "# schema: lbtcoex-v1 trace\nepoch,class,duration_us,node_states...\n";
    reps[0] = detail::run_replication(sc, fd, 0, trace, trace_cap);
    parallel_for(sc.replications - 1, [&](long long i) {
      reps[i + 1] = detail::run_replication(sc, fd, int(i + 1), nullptr, 0);
    });
  } else {
    parallel_for(sc.replications, [&](long long i) {
      reps[i] = detail::run_replication(sc, fd, int(i), nullptr, 0);
    });
  }
  SimEstimates est;
  est.tau_W = detail::across_reps(reps, &detail::RepStats::tau_W);
  est.tau_C = detail::across_reps(reps, &detail::RepStats::tau_C);
  est.p_W = detail::across_reps(reps, &detail::RepStats::p_W);
  est.p_C = detail::across_reps(reps, &detail::RepStats::p_C);
  est.S_W = detail::across_reps(reps, &detail::RepStats::S_W);
  est.S_C = detail::across_reps(reps, &detail::RepStats::S_C);
  est.T_state_us = detail::across_reps(reps, &detail::RepStats::T_state);
  for (int k = 0; k < kNumAirtimeClasses; ++k) {
    double s = 0;
    for (const auto& r : reps) s += r.freq[k];
    est.airtime_freq[k] = s / sc.replications;
  }
  est.epochs_per_replication = sc.slots - sc.warmup_slots;
  est.replications = sc.replications;
  return est;
}

struct DivergenceRow {
  std::string quantity;
  double analytic, sim_mean, ci_half, z_score, rel_err;
  bool outside_ci;
};

// Per-quantity comparison of the analytic pipeline against the simulation.
inline std::vector<DivergenceRow> compare(const SimEstimates& sim, const FixedPoint& fp,
                                          const ThroughputReport& tr) {
  auto row = [](const std::string& name, double analytic, const Estimate& e) {
    DivergenceRow r;
    r.quantity = name;
    r.analytic = analytic;
    r.sim_mean = e.mean;
    r.ci_half = e.ci_half;
    double se = e.ci_half / 1.96;
    r.z_score = se > 0 ? (analytic - e.mean) / se : 0.0;
    double scale = std::max(std::abs(analytic), std::abs(e.mean));
    r.rel_err = scale > 0 ? std::abs(analytic - e.mean) / scale : 0.0;
    r.outside_ci = std::abs(analytic - e.mean) > e.ci_half;
    return r;
  };
  return {row("tau_W", fp.tau_W, sim.tau_W),     row("tau_C", fp.tau_C, sim.tau_C),
          row("p_W", fp.p_W, sim.p_W),           row("p_C", fp.p_C, sim.p_C),
          row("S_W", tr.S_W, sim.S_W),           row("S_C", tr.S_C, sim.S_C),
          row("T_state_us", tr.T_state_us, sim.T_state_us)};
}

}  // namespace lbtcoex
