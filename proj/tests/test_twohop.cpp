#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dofnet/twohop.hpp"

using namespace dofnet;

TEST_CASE("phase-1 slot counts and symbol counts") {
  auto r = run_twohop_phase1(36, 5);
  CHECK(r.hop_slots[0] == 14);      // 7 N1 / 18
  CHECK(r.hop_slots[1] == 9);       // N1 / 4
  CHECK(r.order2_count == 18);      // N1 / 2
  CHECK(r.useful_equations == 36);  // two per order-2 symbol
  CHECK(r.eta2_measured == Rational(1));
  CHECK(r.causality_violations == 0);
  CHECK(r.residual_given_delivery < 1e-8);
}

TEST_CASE("scaling the round scales the counts") {
  auto r = run_twohop_phase1(72, 9);
  CHECK(r.hop_slots[0] == 28);
  CHECK(r.hop_slots[1] == 18);
  CHECK(r.order2_count == 36);
  CHECK(r.eta2_measured == Rational(1));
  CHECK(r.residual_given_delivery < 1e-8);
}

TEST_CASE("several seeds decode under tolerance") {
  for (uint64_t seed = 1; seed <= 10; ++seed) {
    auto r = run_twohop_phase1(36, seed);
    CHECK(r.residual_given_delivery < 1e-8);
    CHECK(r.causality_violations == 0);
  }
}

TEST_CASE("granularity is enforced") {
  CHECK_THROWS_AS(run_twohop_phase1(18, 1), GranularityError);
  CHECK_THROWS_AS(run_twohop_phase1(0, 1), GranularityError);
}

TEST_CASE("phase-1 measurements feed the end-to-end accounting") {
  auto r = run_twohop_phase1(36, 5);
  // hop totals of the full beta = 0 scheme: phase 1 measured + costed delivery
  Rational n1(r.n1);
  Rational hop1 = Rational(r.hop_slots[0]) + n1 * Rational(1, 4);
  Rational hop2 = Rational(r.hop_slots[1]) + n1 * Rational(4, 9);
  auto e = two_hop_3user(Rational(0), n1);
  CHECK(hop1 == e.hop1);
  CHECK(hop2 == e.hop2);
  CHECK(n1 / (hop1 > hop2 ? hop1 : hop2) == Rational(36, 25));
}
