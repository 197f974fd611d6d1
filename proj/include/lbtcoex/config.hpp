#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace lbtcoex {

inline constexpr const char* kVersion = "1.0.0";

// A probability in [0,1]. Construction enforces the invariant; converts
// implicitly to double so it composes with ordinary arithmetic.
class Probability {
 public:
  Probability() = default;
  Probability(double v) : v_(v) {
    if (!(v >= 0.0 && v <= 1.0))
      throw std::domain_error("Probability out of [0,1]: " + std::to_string(v));
  }
  constexpr operator double() const noexcept { return v_; }
  constexpr double value() const noexcept { return v_; }

 private:
  double v_ = 0.0;
};

struct CoexConfig {
  int n_W = 2;      // Wi-Fi APs
  int n_C = 1;      // cellular SCBSs
  double q_W = 0.5; // per-transition buffer-nonempty probability, Wi-Fi
  double q_C = 0.5; // same, cellular
  int W0 = 16;      // minimum Wi-Fi CW
  int m = 3;        // maximum Wi-Fi backoff stage
  int Z = 16;       // cellular CW size
  double R_W = 1e8; // bit/s
  double R_C = 1e8; // bit/s
  double D_W = 12000; // payload bits
  double D_C = 12000;
  double phy_header_bits = 128;
  double mac_header_bits = 272;
  double ack_bits = 112;
  double sigma_us = 9;
  double sifs_us = 16;
  double difs_us = 34;
  double prop_delay_us = 0.1;
};

inline const CoexConfig& validate(const CoexConfig& c) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (c.n_W < 0) fail("n_W must be >= 0 (got " + std::to_string(c.n_W) + ")");
  if (c.n_C < 0) fail("n_C must be >= 0 (got " + std::to_string(c.n_C) + ")");
  if (c.n_W + c.n_C < 1) fail("n_W + n_C must be >= 1");
  if (!(c.q_W >= 0 && c.q_W <= 1)) fail("q_W must lie in [0,1] (got " + std::to_string(c.q_W) + ")");
  if (!(c.q_C >= 0 && c.q_C <= 1)) fail("q_C must lie in [0,1] (got " + std::to_string(c.q_C) + ")");
  if (c.W0 < 2) fail("W0 must be >= 2 (got " + std::to_string(c.W0) + ")");
  if (c.m < 0) fail("m must be >= 0 (got " + std::to_string(c.m) + ")");
  // Z=1 would make the beta(Z-1)=beta(0)=0 factor of the closed forms divide by zero.
  if (c.Z < 2) fail("Z must be >= 2 (got " + std::to_string(c.Z) + "); Z=1 zeroes a closed-form denominator");
  if (!(c.R_W > 0)) fail("R_W must be > 0");
  if (!(c.R_C > 0)) fail("R_C must be > 0");
  if (!(c.D_W > 0)) fail("D_W must be > 0");
  if (!(c.D_C > 0)) fail("D_C must be > 0");
  if (!(c.phy_header_bits > 0)) fail("phy_header_bits must be > 0");
  if (!(c.mac_header_bits > 0)) fail("mac_header_bits must be > 0");
  if (!(c.ack_bits > 0)) fail("ack_bits must be > 0");
  if (!(c.sigma_us > 0)) fail("sigma_us must be > 0");
  if (!(c.sifs_us > 0)) fail("sifs_us must be > 0");
  if (!(c.difs_us > 0)) fail("difs_us must be > 0");
  if (!(c.prop_delay_us >= 0)) fail("prop_delay_us must be >= 0");
  for (double v : {c.q_W, c.q_C, c.R_W, c.R_C, c.D_W, c.D_C, c.sigma_us, c.sifs_us,
                   c.difs_us, c.prop_delay_us})
    if (!std::isfinite(v)) fail("non-finite numeric field");
  return c;
}

namespace detail {

struct FieldRef {
  const char* name;
  bool is_int;
  int CoexConfig::*ip;
  double CoexConfig::*dp;
};

inline const std::vector<FieldRef>& config_fields() {
  static const std::vector<FieldRef> f = {
      {"n_W", true, &CoexConfig::n_W, nullptr},
      {"n_C", true, &CoexConfig::n_C, nullptr},
      {"q_W", false, nullptr, &CoexConfig::q_W},
      {"q_C", false, nullptr, &CoexConfig::q_C},
      {"W0", true, &CoexConfig::W0, nullptr},
      {"m", true, &CoexConfig::m, nullptr},
      {"Z", true, &CoexConfig::Z, nullptr},
      {"R_W", false, nullptr, &CoexConfig::R_W},
      {"R_C", false, nullptr, &CoexConfig::R_C},
      {"D_W", false, nullptr, &CoexConfig::D_W},
      {"D_C", false, nullptr, &CoexConfig::D_C},
      {"phy_header_bits", false, nullptr, &CoexConfig::phy_header_bits},
      {"mac_header_bits", false, nullptr, &CoexConfig::mac_header_bits},
      {"ack_bits", false, nullptr, &CoexConfig::ack_bits},
      {"sigma_us", false, nullptr, &CoexConfig::sigma_us},
      {"sifs_us", false, nullptr, &CoexConfig::sifs_us},
      {"difs_us", false, nullptr, &CoexConfig::difs_us},
      {"prop_delay_us", false, nullptr, &CoexConfig::prop_delay_us},
  };
  return f;
}

inline std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// %.17g round-trips IEEE doubles exactly.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// Assigns `key = value` into c. Throws std::invalid_argument on unknown key
// or malformed value.
inline void set_config_field(CoexConfig& c, const std::string& key, const std::string& value) {
  for (const auto& f : detail::config_fields()) {
    if (key != f.name) continue;
    try {
      std::size_t pos = 0;
      if (f.is_int) {
        int v = std::stoi(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        c.*(f.ip) = v;
      } else {
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("trailing junk");
        c.*(f.dp) = v;
      }
    } catch (const std::exception&) {
      throw std::invalid_argument("bad value for " + key + ": '" + value + "'");
    }
    return;
  }
  throw std::invalid_argument("unknown config key: " + key);
}

// Flat `key = value` format, '#' comments. `source` names the stream in errors.
inline CoexConfig parse_config(std::istream& in, const std::string& source = "<stream>") {
  CoexConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    try {
      set_config_field(c, key, val);
    } catch (const std::exception& e) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return c;
}

inline CoexConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in, path);
}

inline void write_config(std::ostream& out, const CoexConfig& c) {
  for (const auto& f : detail::config_fields()) {
    if (f.is_int)
      out << f.name << " = " << c.*(f.ip) << "\n";
    else
      out << f.name << " = " << detail::fmt_double(c.*(f.dp)) << "\n";
  }
}

inline std::string config_to_string(const CoexConfig& c) {
  std::ostringstream os;
  write_config(os, c);
  return os.str();
}

}  // namespace lbtcoex
