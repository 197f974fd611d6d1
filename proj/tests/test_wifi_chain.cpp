#include <catch2/catch_amalgamated.hpp>

#include "lbtcoex/wifi_chain.hpp"
#include "wifi_oracle.hpp"

using namespace lbtcoex;
using lbtcoex_test::wifi_oracle;

TEST_CASE("closed form matches the transition-matrix oracle") {
  // frozen spot check first (values from an independent stationary solve)
  WifiChainSolution s = wifi_solve({0.5, 0.2, 0.8, 16, 3});
  CHECK_THAT(s.b00e, Catch::Matchers::WithinAbs(0.00935337518228759, 1e-10));
  CHECK_THAT(s.tau_W, Catch::Matchers::WithinAbs(0.0897938289835732, 1e-10));

  for (double q : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double p : {0.05, 0.2, 0.4, 0.6, 0.8})
      for (int W0 : {4, 16, 32})
        for (int m : {0, 1, 3}) {
          auto o = wifi_oracle(q, p, 1 - p, W0, m);
          WifiChainSolution c = wifi_solve({q, p, 1 - p, W0, m});
          INFO("q=" << q << " p=" << p << " W0=" << W0 << " m=" << m);
          CHECK_THAT(c.b00e, Catch::Matchers::WithinAbs(o.b00e, 1e-10));
          CHECK_THAT(c.tau_W, Catch::Matchers::WithinAbs(o.tau_W, 1e-10));
        }
}

TEST_CASE("limit branches") {
  SECTION("q_W = 0: never transmits, mass absorbs into the post-backoff head") {
    WifiChainSolution s = wifi_solve({0.0, 0.3, 0.7, 16, 3});
    CHECK(s.tau_W == 0.0);
    CHECK(s.b00e == 1.0);
  }
  SECTION("q_W -> 0+ approaches the limit") {
    WifiChainSolution s = wifi_solve({1e-7, 0.3, 0.7, 16, 3});
    CHECK(s.b00e > 0.999);
    CHECK(s.tau_W < 1e-5);
  }
  SECTION("q_W = 1, p = 0: saturated 2/(W0+1)") {
    WifiChainSolution s = wifi_solve({1.0, 0.0, 1.0, 16, 3});
    CHECK_THAT(s.tau_W, Catch::Matchers::WithinAbs(2.0 / 17.0, 1e-12));
    CHECK(s.b00e == 0.0);
  }
  SECTION("saturated closed form matches a saturated oracle across p, incl. the p=1/2 limit") {
    for (double p : {0.0, 0.2, 0.5, 0.7})
      for (int W0 : {4, 16})
        for (int m : {0, 1, 3}) {
          auto o = wifi_oracle(1.0 - 1e-12, p, 1 - p, W0, m);
          INFO("p=" << p << " W0=" << W0 << " m=" << m);
          CHECK_THAT(wifi_saturated_tau(p, W0, m), Catch::Matchers::WithinAbs(o.tau_W, 1e-7));
        }
  }
}

TEST_CASE("p_W = 1/2 is removable") {
  // the partial-sum form must be continuous through p = 1/2
  double lo = wifi_tau({0.5, 0.5 - 1e-9, 0.5, 16, 3});
  double at = wifi_tau({0.5, 0.5, 0.5, 16, 3});
  double hi = wifi_tau({0.5, 0.5 + 1e-9, 0.5, 16, 3});
  CHECK_THAT(at, Catch::Matchers::WithinAbs(lo, 1e-7));
  CHECK_THAT(at, Catch::Matchers::WithinAbs(hi, 1e-7));
  CHECK(std::isfinite(at));
  // and match the oracle exactly at the singular point
  auto o = wifi_oracle(0.5, 0.5, 0.5, 16, 3);
  CHECK_THAT(at, Catch::Matchers::WithinAbs(o.tau_W, 1e-10));
}

TEST_CASE("tau_W is nondecreasing in q_W and stays in [0,1]") {
  for (double p : {0.05, 0.3, 0.6}) {
    double prev = 0.0;
    for (double q : {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
      double t = wifi_tau({q, p, 1 - p, 16, 3});
      CHECK(t >= 0.0);
      CHECK(t <= 1.0);
      CHECK(t >= prev - 1e-12);
      prev = t;
    }
  }
}

TEST_CASE("invalid inputs are rejected") {
  CHECK_THROWS_AS(wifi_solve({0.5, 1.0, 0.0, 16, 3}), std::domain_error);  // p_W = 1
  CHECK_THROWS_AS(wifi_solve({-0.1, 0.2, 0.8, 16, 3}), std::domain_error);
  CHECK_THROWS_AS(wifi_solve({0.5, 0.2, 0.8, 1, 3}), std::domain_error);   // W0 < 2
  CHECK_THROWS_AS(wifi_b00e({0.0, 0.2, 0.8, 16, 3}), std::domain_error);   // q=0 needs caller branch
}
