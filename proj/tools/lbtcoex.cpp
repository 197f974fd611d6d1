// lbtcoex: non-saturated Wi-Fi / cellular-LBT coexistence analyzer.
//
// Subcommands: analyze, optimize, sweep, validate, dump-chain.
// Exit codes: 0 success, 1 usage, 2 numerical failure, 3 IO.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lbtcoex/airtime.hpp"
#include "lbtcoex/cellular_chain.hpp"
#include "lbtcoex/config.hpp"
#include "lbtcoex/coupled_solver.hpp"
#include "lbtcoex/markov.hpp"
#include "lbtcoex/optimizer.hpp"
#include "lbtcoex/simulator.hpp"
#include "lbtcoex/wifi_chain.hpp"

namespace {

constexpr int kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitIo = 3;

struct CommonOpts {
  std::string config_path;
  std::string out_prefix = "out";
  std::vector<std::pair<std::string, std::string>> overrides;
};

// Registers --<field> and --<field-with-hyphens> overrides for every config key.
void add_override_options(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_path, "config file (key = value lines)");
  cmd->add_option("-o,--output", opts.out_prefix, "output file prefix")->capture_default_str();
  for (const auto& f : lbtcoex::detail::config_fields()) {
    std::string name = f.name;
    std::string lower;
    for (char ch : name) lower += char(std::tolower(ch));
    std::string hyphen = lower;
    for (auto& ch : hyphen)
      if (ch == '_') ch = '-';
    std::string flags = "--" + name;
    if (lower != name) flags += ",--" + lower;
    if (hyphen != lower && hyphen != name) flags += ",--" + hyphen;
    cmd->add_option_function<std::string>(
           flags,
           [&opts, name](const std::string& v) { opts.overrides.emplace_back(name, v); },
           std::string("override config field ") + name)
        ->expected(1);
  }
}

lbtcoex::CoexConfig resolve_config(const CommonOpts& opts) {
  lbtcoex::CoexConfig c;
  if (!opts.config_path.empty()) c = lbtcoex::load_config(opts.config_path);
  for (const auto& [k, v] : opts.overrides) lbtcoex::set_config_field(c, k, v);
  return lbtcoex::validate(c);
}

std::string fmt(double v) { return lbtcoex::detail::fmt_double(v); }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

void write_manifest(const std::string& command, const CommonOpts& opts,
                    const lbtcoex::CoexConfig& c, const std::vector<std::string>& outputs,
                    const nlohmann::json& extra = {}) {
  nlohmann::json m;
  m["command"] = command;
  m["tool_version"] = lbtcoex::kVersion;
  nlohmann::json cfg;
  for (const auto& f : lbtcoex::detail::config_fields())
    if (f.is_int)
      cfg[f.name] = c.*(f.ip);
    else
      cfg[f.name] = c.*(f.dp);
  m["config"] = cfg;
  auto now = std::chrono::system_clock::now().time_since_epoch();
  m["timestamp_unix_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
  m["outputs"] = outputs;
  if (!extra.empty()) m.update(extra);
  write_file(opts.out_prefix + "_manifest.json", m.dump(2) + "\n");
}

void print_fixed_point(const lbtcoex::FixedPoint& fp) {
  std::cout << "tau_W=" << fmt(fp.tau_W) << " tau_C=" << fmt(fp.tau_C) << " p_W=" << fmt(fp.p_W)
            << " p_C=" << fmt(fp.p_C) << "\nresidual=" << fmt(fp.residual_inf_norm)
            << " iterations=" << fp.iterations << " converged=" << (fp.converged ? 1 : 0) << "\n";
  if (fp.multi_root_suspected)
    std::cout << "warning: multiple fixed points suspected (scattered starts disagree)\n";
}

int cmd_analyze(const CommonOpts& opts) {
  lbtcoex::CoexConfig c = resolve_config(opts);
  lbtcoex::FixedPoint fp = lbtcoex::solve_fixed_point(c);
  print_fixed_point(fp);
  lbtcoex::ThroughputReport tr = lbtcoex::throughputs(fp, lbtcoex::frame_durations(c), c);
  std::cout << "S_W=" << fmt(tr.S_W) << " bps/node  S_C=" << fmt(tr.S_C)
            << " bps/node  S_total=" << fmt(tr.S_total) << " bps  T_state=" << fmt(tr.T_state_us)
            << " us\n";
  std::ostringstream csv;
  csv << "# schema: lbtcoex-v1 analyze\n"
      << "tau_w,tau_c,p_w,p_c,residual,iterations,converged,s_w_bps,s_c_bps,s_total_bps,"
         "t_state_us,share_idle,share_w_succ,share_c_succ,share_w_coll,share_c_coll,share_mixed\n"
      << fmt(fp.tau_W) << ',' << fmt(fp.tau_C) << ',' << fmt(fp.p_W) << ',' << fmt(fp.p_C) << ','
      << fmt(fp.residual_inf_norm) << ',' << fp.iterations << ',' << (fp.converged ? 1 : 0) << ','
      << fmt(tr.S_W) << ',' << fmt(tr.S_C) << ',' << fmt(tr.S_total) << ',' << fmt(tr.T_state_us);
  for (double s : tr.shares) csv << ',' << fmt(s);
  csv << '\n';
  std::string out = opts.out_prefix + "_analyze.csv";
  write_file(out, csv.str());
  write_manifest("analyze", opts, c, {out});
  return fp.converged ? kExitOk : kExitNumerical;
}

std::string trace_csv(double q_W, double q_C, const lbtcoex::OptimalCwResult& r) {
  std::ostringstream csv;
  for (const auto& e : r.per_z_trace)
    csv << fmt(q_W) << ',' << fmt(q_C) << ',' << e.Z << ',' << fmt(e.S_co_W) << ','
        << fmt(e.S_co_C) << ',' << fmt(e.S_only_W) << ',' << (e.constraint_met ? 1 : 0) << ','
        << fmt(e.S_total) << '\n';
  return csv.str();
}

constexpr const char* kTraceHeader =
    "# schema: lbtcoex-v1 ztrace\n"
    "q_w,q_c,z,s_co_w_bps,s_co_c_bps,s_only_w_bps,constraint_met,s_total_bps\n";
constexpr const char* kGridHeader =
    "# schema: lbtcoex-v1 grid\n"
    "q_w,q_c,z_star,feasible,s_total_bps,improvement\n";

int cmd_optimize(const CommonOpts& opts, int z_min, int z_max) {
  lbtcoex::CoexConfig c = resolve_config(opts);
  lbtcoex::OptimalCwResult r = lbtcoex::optimal_cw(c, z_min, z_max);
  if (r.feasible)
    std::cout << "z_star=" << *r.z_star << " s_total=" << fmt(r.s_total_at_star)
              << " bps improvement=" << fmt(100.0 * r.improvement) << "%\n";
  else
    std::cout << "INFEASIBLE\n";
  std::cout << "baseline S_only_W=" << fmt(r.baseline) << " bps/node\n";
  std::string out = opts.out_prefix + "_ztrace.csv";
  write_file(out, kTraceHeader + trace_csv(c.q_W, c.q_C, r));
  write_manifest("optimize", opts, c, {out});
  return kExitOk;
}

std::vector<double> parse_axis(const std::string& spec) {
  // "0.1:0.9:0.1" or a single value
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(std::stod(tok));
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw CLI::ValidationError("grid", "axis must be lo:hi:step or a value");
  auto [lo, hi, step] = std::tuple{parts[0], parts[1], parts[2]};
  if (step <= 0 || hi < lo) throw CLI::ValidationError("grid", "need step > 0 and hi >= lo");
  std::vector<double> v;
  for (int i = 0;; ++i) {
    double x = lo + i * step;
    if (x > hi + 1e-9) break;
    v.push_back(x);
  }
  return v;
}

std::pair<std::vector<double>, std::vector<double>> parse_grid(const std::string& spec) {
  // "q_w=0.1:0.9:0.1,q_c=0.1:0.9:0.1"
  std::vector<double> qw, qc;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("grid", "expected q_w=...,q_c=...");
    std::string key = tok.substr(0, eq);
    auto axis = parse_axis(tok.substr(eq + 1));
    if (key == "q_w")
      qw = axis;
    else if (key == "q_c")
      qc = axis;
    else
      throw CLI::ValidationError("grid", "unknown axis " + key);
  }
  if (qw.empty() || qc.empty()) throw CLI::ValidationError("grid", "both q_w and q_c required");
  return {qw, qc};
}

std::string heatmap_script(const std::string& csv, const std::string& png, int col,
                           const std::string& title) {
  std::ostringstream gp;
  gp << "set terminal pngcairo size 800,600\nset output '" << png << "'\n"
     << "set datafile separator ','\nset title '" << title << "'\n"
     << "set xlabel 'q_C'\nset ylabel 'q_W'\nset view map\n"
     << "splot '" << csv << "' skip 2 using 2:1:" << col << " with points pt 5 ps 4 palette notitle\n";
  return gp.str();
}

int cmd_sweep(const CommonOpts& opts, const std::string& grid_spec, int z_min, int z_max,
              std::vector<double> rc_list) {
  lbtcoex::CoexConfig base = resolve_config(opts);
  auto [qw, qc] = parse_grid(grid_spec);
  if (rc_list.empty()) rc_list.push_back(base.R_C);
  std::vector<std::string> outputs;
  for (double rc : rc_list) {
    lbtcoex::CoexConfig c = base;
    c.R_C = rc;
    lbtcoex::SweepGrid g = lbtcoex::sweep(qw, qc, c, z_min, z_max);
    std::ostringstream grid_csv, tr_csv;
    grid_csv << kGridHeader;
    tr_csv << kTraceHeader;
    double sum_impr = 0;
    int feasible = 0;
    for (const auto& cell : g.cells) {
      const auto& r = cell.result;
      grid_csv << fmt(cell.q_W) << ',' << fmt(cell.q_C) << ','
               << (r.z_star ? std::to_string(*r.z_star) : "") << ',' << (r.feasible ? 1 : 0) << ','
               << fmt(r.s_total_at_star) << ',' << (r.feasible ? fmt(r.improvement) : "") << '\n';
      tr_csv << trace_csv(cell.q_W, cell.q_C, r);
      if (r.feasible) {
        sum_impr += r.improvement;
        ++feasible;
      }
    }
    std::string tag = "_rc" + std::to_string(llround(rc / 1e6));
    std::string grid_path = opts.out_prefix + tag + "_grid.csv";
    std::string tr_path = opts.out_prefix + tag + "_ztrace.csv";
    std::string gp_path = opts.out_prefix + tag + "_heatmap.gp";
    write_file(grid_path, grid_csv.str());
    write_file(tr_path, tr_csv.str());
    write_file(gp_path, heatmap_script(grid_path, opts.out_prefix + tag + "_heatmap.png", 3,
                                       "optimal Z, R_C=" + std::to_string(llround(rc / 1e6)) + " Mbps"));
    outputs.insert(outputs.end(), {grid_path, tr_path, gp_path});
    std::cout << "R_C=" << fmt(rc) << ": feasible cells " << feasible << "/" << g.cells.size();
    if (feasible)
      std::cout << ", mean improvement " << fmt(100.0 * sum_impr / feasible) << "%";
    std::cout << "\n";
  }
  write_manifest("sweep", opts, base, outputs);
  return kExitOk;
}

int cmd_validate(const CommonOpts& opts, long long slots, long long warmup, int reps,
                 std::uint64_t seed, bool dump_trace) {
  lbtcoex::CoexConfig c = resolve_config(opts);
  lbtcoex::SimConfig sc{c, slots, warmup, reps, seed};
  lbtcoex::FixedPoint fp = lbtcoex::solve_fixed_point(c);
  if (!fp.converged) {
    std::cerr << "solver did not converge\n";
    return kExitNumerical;
  }
  lbtcoex::ThroughputReport tr = lbtcoex::throughputs(fp, lbtcoex::frame_durations(c), c);
  std::vector<std::string> outputs;
  lbtcoex::SimEstimates est;
  if (dump_trace) {
    std::string tr_path = opts.out_prefix + "_trace.csv";
    std::ofstream tf(tr_path);
    if (!tf) throw std::runtime_error("cannot write " + tr_path);
    est = lbtcoex::simulate(sc, &tf);
    outputs.push_back(tr_path);
  } else {
    est = lbtcoex::simulate(sc);
  }
  auto rows = lbtcoex::compare(est, fp, tr);
  std::ostringstream csv;
  csv << "# schema: lbtcoex-v1 validate\n"
      << "quantity,analytic,sim_mean,ci_half,z_score,rel_err,outside_ci\n";
  bool all_in = true;
  for (const auto& r : rows) {
    csv << r.quantity << ',' << fmt(r.analytic) << ',' << fmt(r.sim_mean) << ',' << fmt(r.ci_half)
        << ',' << fmt(r.z_score) << ',' << fmt(r.rel_err) << ',' << (r.outside_ci ? 1 : 0) << '\n';
    std::cout << r.quantity << ": analytic=" << fmt(r.analytic) << " sim=" << fmt(r.sim_mean)
              << " +/- " << fmt(r.ci_half) << (r.outside_ci ? "  [outside CI]" : "") << "\n";
    all_in = all_in && !r.outside_ci;
  }
  std::cout << (all_in ? "all quantities within 95% CI\n" : "some quantities outside 95% CI\n");
  std::string out = opts.out_prefix + "_validate.csv";
  write_file(out, csv.str());
  outputs.push_back(out);
  nlohmann::json extra;
  extra["prng"] = {{"algorithm", lbtcoex::kPrngName}, {"seed", seed}};
  extra["simulation"] = {{"slots", slots}, {"warmup_slots", warmup}, {"replications", reps}};
  write_manifest("validate", opts, c, outputs, extra);
  return kExitOk;
}

int cmd_dump_chain(const CommonOpts& opts, double p_c_override) {
  lbtcoex::CoexConfig c = resolve_config(opts);
  double p_C, P_idle;
  if (p_c_override >= 0) {
    p_C = p_c_override;
    P_idle = 1.0 - p_C;
  } else {
    lbtcoex::FixedPoint fp = lbtcoex::solve_fixed_point(c);
    if (!fp.converged) {
      std::cerr << "solver did not converge\n";
      return kExitNumerical;
    }
    p_C = fp.p_C;
    P_idle = 1.0 - p_C;
  }
  lbtcoex::CellChainInput in{c.q_C, p_C, P_idle, c.Z};
  Eigen::MatrixXd M = lbtcoex::cell_transition_matrix(in);
  std::ostringstream csv;
  csv << "# schema: lbtcoex-v1 chain (states (0)_e..(" << c.Z - 1 << ")_e,(0)..(" << c.Z - 1
      << "); q_C=" << fmt(c.q_C) << " p_C=" << fmt(p_C) << " P_idle_C=" << fmt(P_idle) << ")\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) csv << (j ? "," : "") << fmt(M(i, j));
    csv << '\n';
  }
  Eigen::VectorXd pi = lbtcoex::stationary_distribution(M);
  std::ostringstream pcsv;
  pcsv << "# schema: lbtcoex-v1 stationary\n";
  for (Eigen::Index i = 0; i < pi.size(); ++i) pcsv << (i ? "," : "") << fmt(pi(i));
  pcsv << '\n';
  std::string mp = opts.out_prefix + "_chain.csv", sp = opts.out_prefix + "_stationary.csv";
  write_file(mp, csv.str());
  write_file(sp, pcsv.str());
  std::cout << "wrote " << mp << " and " << sp << "\n";
  write_manifest("dump-chain", opts, c, {mp, sp});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"non-saturated Wi-Fi / cellular-LBT coexistence analyzer"};
  app.require_subcommand(1);

  CommonOpts a_opts, o_opts, s_opts, v_opts, d_opts;
  int o_zmin = 2, o_zmax = 64, s_zmin = 2, s_zmax = 64;
  std::string grid_spec = "q_w=0.1:0.9:0.1,q_c=0.1:0.9:0.1";
  std::vector<double> rc_list;
  long long v_slots = 1'000'000, v_warmup = 10'000;
  int v_reps = 20;
  std::uint64_t v_seed = 1;
  bool v_trace = false;
  double d_pc = -1.0;

  auto* analyze = app.add_subcommand("analyze", "solve one scenario and report throughputs");
  add_override_options(analyze, a_opts);

  auto* optimize = app.add_subcommand("optimize", "linear search for the optimal cellular CW");
  add_override_options(optimize, o_opts);
  optimize->add_option("--z-min", o_zmin, "search lower bound")->capture_default_str();
  optimize->add_option("--z-max", o_zmax, "search upper bound")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "optimal-CW search over a (q_W, q_C) grid");
  add_override_options(sweep, s_opts);
  sweep->add_option("--grid", grid_spec, "grid spec q_w=lo:hi:step,q_c=lo:hi:step")
      ->capture_default_str();
  sweep->add_option("--z-min", s_zmin)->capture_default_str();
  sweep->add_option("--z-max", s_zmax)->capture_default_str();
  sweep->add_option("--rc", rc_list, "R_C variants in bit/s (default: config R_C)");

  auto* validate = app.add_subcommand("validate", "Monte Carlo cross-validation of the analytics");
  add_override_options(validate, v_opts);
  validate->add_option("--slots", v_slots, "epochs per replication")->capture_default_str();
  validate->add_option("--warmup", v_warmup, "warmup epochs")->capture_default_str();
  validate->add_option("--replications", v_reps)->capture_default_str();
  validate->add_option("--seed", v_seed)->capture_default_str();
  validate->add_flag("--trace", v_trace, "dump per-epoch trace CSV (capped at 1e5 epochs)");

  auto* dump = app.add_subcommand("dump-chain", "dump the cellular transition matrix and stationary vector");
  add_override_options(dump, d_opts);
  dump->add_option("--p-c", d_pc, "use this p_C instead of the solved fixed point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(a_opts);
    if (optimize->parsed()) {
      if (o_zmin < 2 || o_zmin > o_zmax) {
        std::cerr << "usage: need 2 <= z-min <= z-max\n";
        return kExitUsage;
      }
      return cmd_optimize(o_opts, o_zmin, o_zmax);
    }
    if (sweep->parsed()) {
      if (s_zmin < 2 || s_zmin > s_zmax) {
        std::cerr << "usage: need 2 <= z-min <= z-max\n";
        return kExitUsage;
      }
      return cmd_sweep(s_opts, grid_spec, s_zmin, s_zmax, rc_list);
    }
    if (validate->parsed()) return cmd_validate(v_opts, v_slots, v_warmup, v_reps, v_seed, v_trace);
    if (dump->parsed()) return cmd_dump_chain(d_opts, d_pc);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    // config parse/validation problems carry file:line context
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::runtime_error& e) {
    std::cerr << "IO error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
