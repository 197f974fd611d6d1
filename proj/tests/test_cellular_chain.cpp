#include <catch2/catch_amalgamated.hpp>

#include "lbtcoex/cellular_chain.hpp"
#include "lbtcoex/markov.hpp"

using namespace lbtcoex;

TEST_CASE("transition matrix rows transcribe the chain") {
  SECTION("all row sums are 1") {
    for (double q : {0.0, 0.3, 1.0})
      for (double p : {0.0, 0.4, 0.9})
        for (int Z : {2, 5, 16}) {
          Eigen::MatrixXd M = cell_transition_matrix({q, p, 1 - p, Z});
          for (Eigen::Index i = 0; i < M.rows(); ++i)
            CHECK_THAT(M.row(i).sum(), Catch::Matchers::WithinAbs(1.0, 1e-12));
        }
  }
  SECTION("Z=2 saturated endpoint") {
    Eigen::MatrixXd M = cell_transition_matrix({1.0, 0.0, 1.0, 2});
    // backoff (0): uniform re-choice over {(0),(1)} after a guaranteed success+arrival
    CHECK(M(2, 2) == 0.5);
    CHECK(M(2, 3) == 0.5);
    // backoff (1): decrement to (0)
    CHECK(M(3, 2) == 1.0);
    // post-backoff rows receive no mass from backoff rows
    CHECK(M(2, 0) == 0.0);
    CHECK(M(2, 1) == 0.0);
    CHECK(M(3, 0) == 0.0);
  }
  SECTION("Z=3 backoff row with busy re-choice") {
    double q = 0.5, p = 0.3;
    Eigen::MatrixXd M = cell_transition_matrix({q, p, 0.7, 3});
    int b0 = 3, b1 = 4, b2 = 5;  // backoff block offset Z=3
    CHECK_THAT(M(5, b0), Catch::Matchers::WithinAbs(p / 3, 1e-15));
    CHECK_THAT(M(5, b2), Catch::Matchers::WithinAbs(p / 3, 1e-15));
    CHECK_THAT(M(5, b1), Catch::Matchers::WithinAbs(p / 3 + (1 - p), 1e-15));
  }
}

TEST_CASE("closed form matches the stationary oracle on the grid") {
  // frozen spot values from an independent linear solve
  {
    CellChainSolution s = cell_solve({0.5, 0.3, 0.7, 8});
    CHECK_THAT(s.b0e, Catch::Matchers::WithinAbs(0.0274095098322757, 1e-9));
    CHECK_THAT(s.b0, Catch::Matchers::WithinAbs(0.146510493846061, 1e-9));
    CHECK_THAT(s.tau_C, Catch::Matchers::WithinAbs(0.156103822287357, 1e-9));
    CHECK_THAT(cell_closed_form({0.5, 0.3, 0.7, 8}).gamma,
               Catch::Matchers::WithinAbs(5.34524311972697, 1e-8));
  }
  {
    CellChainSolution s = cell_solve({0.2, 0.05, 0.95, 4});
    CHECK_THAT(s.b0e, Catch::Matchers::WithinAbs(0.614868882218456, 1e-9));
    CHECK_THAT(s.tau_C, Catch::Matchers::WithinAbs(0.192014823913998, 1e-9));
  }
  for (double q : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (double p : {0.05, 0.2, 0.4, 0.6, 0.8})
      for (int Z : {2, 4, 8, 16, 32}) {
        CellChainInput in{q, p, 1 - p, Z};
        Eigen::VectorXd pi = stationary_distribution(cell_transition_matrix(in));
        CellChainSolution s = cell_solve(in);
        INFO("q=" << q << " p=" << p << " Z=" << Z);
        CHECK_THAT(s.b0e, Catch::Matchers::WithinAbs(pi(0), 1e-9));
        CHECK_THAT(s.b0, Catch::Matchers::WithinAbs(pi(Z), 1e-9));
        CHECK_THAT(s.tau_C, Catch::Matchers::WithinAbs(pi(Z) + q * (1 - p) * pi(0), 1e-9));
      }
}

TEST_CASE("closed-form terms reconstruct the backoff mass (eta, lambda, mu)") {
  // eta*lambda*b0e + eta*mu*b0 must equal the oracle's total backoff mass
  CellChainInput in{0.9, 0.1, 0.9, 16};
  CellClosedFormTerms t = cell_closed_form(in);
  CellChainSolution s = cell_solve(in);
  Eigen::VectorXd pi = stationary_distribution(cell_transition_matrix(in));
  double sum_bk = pi.segment(16, 16).sum();
  CHECK_THAT(t.eta * t.lambda * s.b0e + t.eta * t.mu * s.b0,
             Catch::Matchers::WithinAbs(sum_bk, 1e-9));
  CHECK_THAT(sum_bk, Catch::Matchers::WithinAbs(0.990107159457411, 1e-9));
  // alpha/beta boundary identities
  CHECK(t.alpha_of(0.0) == 0.0);
  CHECK(t.beta_of(0.0) == 0.0);
  CHECK_THAT(t.alpha_of(1.0), Catch::Matchers::WithinAbs(in.p_C, 1e-15));
}

TEST_CASE("normalization: reconstructed total mass is 1") {
  for (double q : {0.2, 0.6, 0.9})
    for (double p : {0.1, 0.5})
      for (int Z : {2, 8, 32}) {
        CellChainInput in{q, p, 1 - p, Z};
        CellClosedFormTerms t = cell_closed_form(in);
        double b0e = cell_b0e(in);
        // post mass Se + backoff mass Sb, both in units of b0e:
        double Se = in.P_idle_C * (1 - p) + (1 - q) * (1 - p) / q * t.gamma;
        double Sb = t.eta * t.lambda + t.eta * t.mu * t.gamma;
        double total = (Se + Sb) * b0e;
        CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-9));
      }
}

TEST_CASE("limit branches and saturated reduction") {
  SECTION("q_C = 0") {
    CellChainSolution s = cell_solve({0.0, 0.3, 0.7, 8});
    CHECK(s.tau_C == 0.0);
    CHECK(s.b0e == 1.0);
  }
  SECTION("q_C = 1: b0e = 0, tau from the saturated backoff-only chain") {
    CellChainSolution s = cell_solve({1.0, 0.0, 1.0, 2});
    CHECK(s.b0e == 0.0);
    CHECK_THAT(s.tau_C, Catch::Matchers::WithinAbs(2.0 / 3.0, 1e-12));
    for (double p : {0.0, 0.2, 0.5})
      for (int Z : {2, 8, 16}) {
        Eigen::VectorXd pi = stationary_distribution(cell_transition_matrix({1.0, p, 1 - p, Z}));
        INFO("p=" << p << " Z=" << Z);
        CHECK_THAT(cell_saturated_tau(p, Z), Catch::Matchers::WithinAbs(pi(Z), 1e-10));
      }
  }
  SECTION("p_C = 0 is regular (eta limit 1/(Pidle*Z))") {
    CellChainInput in{0.4, 0.0, 1.0, 8};
    CellClosedFormTerms t = cell_closed_form(in);
    CHECK_THAT(t.eta, Catch::Matchers::WithinAbs(1.0 / 8.0, 1e-12));
    Eigen::VectorXd pi = stationary_distribution(cell_transition_matrix(in));
    CHECK_THAT(cell_tau(in), Catch::Matchers::WithinAbs(pi(8) + 0.4 * pi(0), 1e-9));
  }
  SECTION("off-coupling P_idle != 1-p still matches the oracle") {
    for (double Pi : {0.3, 0.9}) {
      CellChainInput in{0.6, 0.5, Pi, 5};
      Eigen::VectorXd pi = stationary_distribution(cell_transition_matrix(in));
      CHECK_THAT(cell_b0e(in), Catch::Matchers::WithinAbs(pi(0), 1e-9));
    }
  }
}

TEST_CASE("tau_C monotonicity: nondecreasing in q_C, nonincreasing in Z") {
  for (double p : {0.05, 0.3, 0.6}) {
    double prev = 0.0;
    for (double q : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
      double t = cell_tau({q, p, 1 - p, 16});
      CHECK(t >= prev - 1e-12);
      CHECK((t >= 0.0 && t <= 1.0));
      prev = t;
    }
    double prevz = 1.0;
    for (int Z : {2, 4, 8, 16, 32, 64}) {
      double t = cell_tau({0.5, p, 1 - p, Z});
      CHECK(t <= prevz + 1e-12);
      prevz = t;
    }
  }
}

TEST_CASE("invalid inputs rejected") {
  CHECK_THROWS_AS(cell_solve({0.5, 0.3, 0.7, 1}), std::domain_error);
  CHECK_THROWS_AS(cell_solve({1.2, 0.3, 0.7, 8}), std::domain_error);
  CHECK_THROWS_AS(cell_closed_form({0.0, 0.3, 0.7, 8}), std::domain_error);
  CHECK_THROWS_AS(cell_closed_form({1.0, 0.3, 0.7, 8}), std::domain_error);
}
