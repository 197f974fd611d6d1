#include <catch2/catch_amalgamated.hpp>

#include "lbtcoex/optimizer.hpp"

using namespace lbtcoex;

TEST_CASE("wifi_only_baseline basics") {
  CoexConfig c;
  CHECK(wifi_only_baseline(0.0, 3, c) == 0.0);
  double b3 = wifi_only_baseline(1.0, 3, c);
  double b1 = wifi_only_baseline(1.0, 1, c);
  CHECK(b3 > 0.0);
  CHECK(b3 < b1);  // contention can only hurt the per-node share
  // frozen value for the default q_W = 0.5, n = 3 baseline
  CHECK_THAT(wifi_only_baseline(0.5, 3, c), Catch::Matchers::WithinRel(17.9697e6, 1e-3));
}

TEST_CASE("optimal_cw trace invariants") {
  CoexConfig c;  // n_W=2, n_C=1, q=0.5, R_C=R_W=100 Mbps
  OptimalCwResult r = optimal_cw(c, 2, 32);
  REQUIRE(r.per_z_trace.size() == 31);
  for (std::size_t i = 0; i < r.per_z_trace.size(); ++i) {
    const auto& e = r.per_z_trace[i];
    CHECK(e.Z == int(i) + 2);
    CHECK(e.S_only_W == r.baseline);
    CHECK(e.constraint_met == (std::min(e.S_co_W, e.S_co_C) > e.S_only_W));
  }
  if (r.feasible) {
    REQUIRE(r.z_star.has_value());
    const auto& star = r.per_z_trace[*r.z_star - 2];
    CHECK(star.constraint_met);
    for (const auto& e : r.per_z_trace)
      if (e.constraint_met) {
        CHECK(e.S_total <= star.S_total);
        if (e.S_total == star.S_total) CHECK(e.Z >= star.Z);  // ties break small
      }
  } else {
    CHECK_FALSE(r.z_star.has_value());
    CHECK(std::isnan(r.improvement));
  }
}

TEST_CASE("q_C = 0 can never be feasible") {
  CoexConfig c;
  c.q_C = 0.0;
  OptimalCwResult r = optimal_cw(c, 2, 16);
  CHECK_FALSE(r.feasible);
  for (const auto& e : r.per_z_trace) CHECK(e.S_co_C == 0.0);
}

TEST_CASE("optimal_cw is deterministic") {
  CoexConfig c;
  c.R_C = 2e8;
  OptimalCwResult a = optimal_cw(c, 2, 40);
  OptimalCwResult b = optimal_cw(c, 2, 40);
  CHECK(a.z_star == b.z_star);
  REQUIRE(a.per_z_trace.size() == b.per_z_trace.size());
  for (std::size_t i = 0; i < a.per_z_trace.size(); ++i) {
    CHECK(a.per_z_trace[i].S_co_W == b.per_z_trace[i].S_co_W);
    CHECK(a.per_z_trace[i].S_total == b.per_z_trace[i].S_total);
  }
}

TEST_CASE("R_C = 200 Mbps opens a feasible region at the default cell") {
  CoexConfig c;
  c.R_C = 2e8;
  OptimalCwResult r = optimal_cw(c, 2, 64);
  CHECK(r.feasible);
  CHECK(r.improvement > 0.0);
  CHECK(r.s_total_at_star > 3 * r.baseline);
}

TEST_CASE("sweep returns a rectangular deterministic grid") {
  CoexConfig c;
  c.R_C = 2e8;
  std::vector<double> qs{0.3, 0.6};
  SweepGrid g = sweep(qs, qs, c, 2, 24);
  REQUIRE(g.cells.size() == 4);
  CHECK(g.cells[1].q_W == 0.3);
  CHECK(g.cells[1].q_C == 0.6);
  // single-cell sweep agrees with optimal_cw
  SweepGrid one = sweep({0.5}, {0.5}, c, 2, 24);
  CoexConfig c55 = c;
  OptimalCwResult direct = optimal_cw(c55, 2, 24);
  CHECK(one.cells[0].result.z_star == direct.z_star);
  CHECK(one.cells[0].result.s_total_at_star == direct.s_total_at_star);
}

TEST_CASE("bad ranges rejected") {
  CoexConfig c;
  CHECK_THROWS_AS(optimal_cw(c, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(optimal_cw(c, 8, 4), std::invalid_argument);
  CHECK_THROWS_AS(sweep({}, {0.5}, c, 2, 8), std::invalid_argument);
}
