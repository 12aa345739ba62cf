#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dofnet/ledger.hpp"
#include "dofnet/network.hpp"

using namespace dofnet;

TEST_CASE("channel draws are deterministic per seed and all nonzero") {
  NetworkShape shape{3, 3};
  auto a = draw_channels(shape, 200, RandomStream(7));
  auto b = draw_channels(shape, 200, RandomStream(7));
  auto c = draw_channels(shape, 200, RandomStream(8));
  long count = 0;
  bool equal = true, differs = false;
  for (int n = 1; n <= 3; ++n)
    for (int i = 1; i <= 3; ++i)
      for (int j = 1; j <= 3; ++j)
        for (int t = 1; t <= 200; ++t) {
          ++count;
          CHECK(a.coeff(n, i, j, t) != cd(0.0));
          equal = equal && a.coeff(n, i, j, t) == b.coeff(n, i, j, t);
          differs = differs || a.coeff(n, i, j, t) != c.coeff(n, i, j, t);
        }
  CHECK(count == 5400);
  CHECK(equal);
  CHECK(differs);
}

TEST_CASE("empirical |h|^2 mean is 2 under the unit-variance convention") {
  auto ch = draw_channels(NetworkShape{1, 1}, 100000, RandomStream(123));
  double acc = 0.0;
  for (int t = 1; t <= 100000; ++t) acc += std::norm(ch.coeff(1, 1, 1, t));
  CHECK(acc / 100000.0 == doctest::Approx(2.0).epsilon(0.025));
}

TEST_CASE("propagation is the per-slot linear map") {
  auto ch = draw_channels(NetworkShape{3, 2}, 5, RandomStream(3));

  auto zero = propagate(ch, 1, 1, {cd(0), cd(0), cd(0)});
  for (auto& v : zero) CHECK(v == cd(0.0));

  for (int j = 1; j <= 3; ++j) {
    std::vector<cd> e(3, cd(0));
    e[j - 1] = 1.0;
    auto y = propagate(ch, 2, 4, e);
    for (int i = 1; i <= 3; ++i) CHECK(y[i - 1] == ch.coeff(2, i, j, 4));
  }

  RandomStream rs(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<cd> x1(3), x2(3), sum(3);
    for (int i = 0; i < 3; ++i) {
      x1[i] = rs.complex_normal();
      x2[i] = rs.complex_normal();
      sum[i] = x1[i] + x2[i];
    }
    auto y1 = propagate(ch, 1, 2, x1);
    auto y2 = propagate(ch, 1, 2, x2);
    auto ys = propagate(ch, 1, 2, sum);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(ys[i] - y1[i] - y2[i]) < 1e-12);
  }

  CHECK_THROWS_AS(propagate(ch, 3, 1, {cd(0), cd(0), cd(0)}), IndexError);
  CHECK_THROWS_AS(propagate(ch, 1, 6, {cd(0), cd(0), cd(0)}), IndexError);
}

TEST_CASE("ledger enforces one-slot CSI delay") {
  KnowledgeLedger ledger(NetworkShape{3, 3});
  NodeId relay{2, 1};
  CHECK_NOTHROW(ledger.assert_knowledge(relay, {KnowledgeAtom::global_csi(5)}, 6));
  CHECK_THROWS_AS(ledger.assert_knowledge(relay, {KnowledgeAtom::global_csi(5)}, 5),
                  CausalityViolation);
  CHECK(ledger.violations() == 1);
}

TEST_CASE("ledger denies other nodes' signals and unowned messages") {
  KnowledgeLedger ledger(NetworkShape{3, 3});
  NodeId relay{2, 1}, dest{4, 2}, src{1, 1};
  ledger.grant_message(src);
  // a relay asking for a destination's reception is always illegal
  CHECK_THROWS_AS(ledger.assert_knowledge(relay, {KnowledgeAtom::own_rx(dest, 3)}, 10),
                  CausalityViolation);
  CHECK_NOTHROW(ledger.assert_knowledge(relay, {KnowledgeAtom::own_rx(relay, 3)}, 10));
  CHECK_THROWS_AS(ledger.assert_knowledge(relay, {KnowledgeAtom::own_rx(relay, 10)}, 10),
                  CausalityViolation);
  CHECK_NOTHROW(ledger.assert_knowledge(src, {KnowledgeAtom::own_message(src)}, 1));
  CHECK_THROWS_AS(ledger.assert_knowledge(relay, {KnowledgeAtom::own_message(relay)}, 1),
                  CausalityViolation);
  CHECK(ledger.audit().size() == 5);
}
