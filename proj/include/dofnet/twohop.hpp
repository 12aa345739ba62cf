// Phase 1 of the 3-user 2-hop interference-network scheme. Hop 1 is the
// same six-fresh-plus-sum transmission as the X-network run, but with all
// three destinations scheduled at once (source j's six symbols are for
// destination j). Hop 2 schedules a relay pair and a destination pair per
// slot and turns every reception into one order-2 symbol per destination,
// which is what lifts the order-2 efficiency to 1. Delivery of the order-2
// symbols is the job of a separate single-hop scheme and is costed, not
// simulated, so the check here is that the order-2 values plus each
// destination's own receptions pin its symbols exactly.
#pragma once

#include <array>
#include <vector>

#include "dofnet/accounting.hpp"
#include "dofnet/complex_matrix.hpp"
#include "dofnet/ledger.hpp"
#include "dofnet/network.hpp"

namespace dofnet {

struct TwoHopPhase1 {
  uint64_t seed = 0;
  long long n1 = 0;
  std::array<long long, 2> hop_slots{};
  long long order2_count = 0;       // measured N_2
  long long useful_equations = 0;   // measured N_I
  Rational eta2_measured;
  double residual_given_delivery = 0.0;
  double max_cond = 0.0;
  long long causality_violations = 0;
};

inline constexpr long long kTwoHopGranularity = 36;

inline TwoHopPhase1 run_twohop_phase1(long long n1, uint64_t seed, double tol = 1e-8) {
  if (n1 <= 0 || n1 % kTwoHopGranularity != 0)
    throw GranularityError("run_twohop_phase1: N1 must be a positive multiple of 36");
  const long long blocks = n1 / 18;
  NetworkShape shape{3, 2};
  const long long hop1_slots = 7 * blocks;
  const long long hop2_slots = (3 * blocks / 2) * 3;
  auto ch = draw_channels(shape, static_cast<int>(hop1_slots + hop2_slots),
                          RandomStream(seed, 1));
  KnowledgeLedger ledger(shape);
  for (int j = 1; j <= 3; ++j) ledger.grant_message(NodeId{1, j});

  std::vector<std::array<std::array<cd, 6>, 3>> msg(blocks);
  RandomStream rs(seed, 0x5EEDu);
  for (auto& blk : msg)
    for (auto& src : blk)
      for (auto& v : src) v = rs.complex_normal();

  TwoHopPhase1 out;
  out.seed = seed;
  out.n1 = n1;

  int cursor = 1;
  std::vector<std::array<int, 7>> slots(blocks);
  std::vector<std::array<std::array<cd, 7>, 3>> rx1(blocks);
  for (long long b = 0; b < blocks; ++b)
    for (int t = 0; t < 7; ++t) {
      std::vector<cd> x(3);
      for (int j = 1; j <= 3; ++j) {
        ledger.assert_knowledge(NodeId{1, j}, {KnowledgeAtom::own_message(NodeId{1, j})}, cursor);
        if (t < 6) x[j - 1] = msg[b][j - 1][t];
        else
          x[j - 1] = msg[b][j - 1][0] + msg[b][j - 1][1] + msg[b][j - 1][2] + msg[b][j - 1][3] +
                     msg[b][j - 1][4] + msg[b][j - 1][5];
      }
      slots[b][t] = cursor;
      auto y = propagate(ch, 1, cursor, x);
      for (int i = 0; i < 3; ++i) rx1[b][i][t] = y[i];
      ++cursor;
      ++out.hop_slots[0];
    }

  auto row = [&](long long b, int i, int l, int k, int t) {
    cd h7 = ch.coeff(1, i, k, slots[b][6]), g7 = ch.coeff(1, i, l, slots[b][6]);
    cd ht = ch.coeff(1, i, k, slots[b][t]), gt = ch.coeff(1, i, l, slots[b][t]);
    return h7 / g7 - ht / gt;
  };

  // relay combinations and their per-source parts
  std::vector<std::array<std::array<cd, 3>, 3>> combo(blocks);  // [relay][null]
  std::vector<std::array<std::array<std::array<cd, 3>, 3>, 3>> part(blocks);
  for (long long b = 0; b < blocks; ++b) {
    for (int i = 1; i <= 3; ++i) {
      std::vector<KnowledgeAtom> needs{KnowledgeAtom::global_csi(slots[b][6])};
      for (int t = 0; t < 7; ++t)
        needs.push_back(KnowledgeAtom::own_rx(NodeId{2, i}, slots[b][t]));
      ledger.assert_knowledge(NodeId{2, i}, needs, slots[b][6] + 1);
      for (int l = 1; l <= 3; ++l) {
        cd formed = rx1[b][i - 1][6] / ch.coeff(1, i, l, slots[b][6]);
        for (int t = 0; t < 6; ++t) formed -= rx1[b][i - 1][t] / ch.coeff(1, i, l, slots[b][t]);
        combo[b][i - 1][l - 1] = formed;
        for (int k = 1; k <= 3; ++k) {
          cd acc = 0.0;
          if (k != l)
            for (int t = 0; t < 6; ++t) acc += row(b, i, l, k, t) * msg[b][k - 1][t];
          part[b][i - 1][l - 1][k - 1] = acc;
        }
      }
    }
    for (int k = 1; k <= 3; ++k) {
      ComplexMatrix c(6, 6);
      int r = 0;
      for (int l = 1; l <= 3; ++l) {
        if (l == k) continue;
        for (int i = 1; i <= 3; ++i, ++r)
          for (int t = 0; t < 6; ++t) c(r, t) = row(b, i, l, k, t);
      }
      if (rank(c) < 6) throw RankDeficient("twohop: stacked piece matrix rank-deficient");
      out.max_cond = std::max(out.max_cond, cond_estimate(c));
    }
  }

  // hop 2: per slot one relay pair transmits two same-null combinations for
  // the matching destination pair
  struct Order2 {
    int null_class = 0;
    int dest = 0;    // the destination this value serves directly
    int other = 0;   // its pair partner, which cancels it
    int slot = 0;
    std::array<long long, 2> block;
    std::array<int, 2> relay;
    cd value{};
  };
  std::vector<Order2> order2;
  std::vector<std::array<cd, 3>> rx2;  // per hop-2 slot, destination receptions
  std::vector<std::array<std::array<long long, 2>, 2>> slot_src;  // [(block, relay) x2]
  for (int k = 1; k <= 3; ++k) {
    int a = 0, c = 0;
    for (int s = 1; s <= 3; ++s)
      if (s != k) (a == 0 ? a : c) = s;
    // combos of class k in (block, relay) order, consumed two at a time
    std::vector<std::pair<long long, int>> queue;
    for (long long b = 0; b < blocks; ++b)
      for (int i = 1; i <= 3; ++i) queue.push_back({b, i});
    for (size_t qi = 0; qi + 1 < queue.size(); qi += 2) {
      auto [b1, r1] = queue[qi];
      auto [b2, r2] = queue[qi + 1];
      std::vector<cd> x(3, cd(0));
      x[r1 - 1] = combo[b1][r1 - 1][k - 1];
      x[r2 - 1] = combo[b2][r2 - 1][k - 1];
      for (int rr : {r1, r2}) {
        std::vector<KnowledgeAtom> needs{KnowledgeAtom::global_csi(cursor - 1)};
        for (int t = 0; t < 7; ++t)
          needs.push_back(
              KnowledgeAtom::own_rx(NodeId{2, rr}, slots[rr == r1 ? b1 : b2][t]));
        ledger.assert_knowledge(NodeId{2, rr}, needs, cursor);
      }
      auto y = propagate(ch, 2, cursor, x);
      int slot = cursor++;
      ++out.hop_slots[1];
      rx2.push_back({y[0], y[1], y[2]});
      slot_src.push_back({{{b1, r1}, {b2, r2}}});
      // the piece of source `dest` seen at destination `other` is the
      // order-2 symbol serving `dest`
      auto piece = [&](int at, int src) {
        return ch.coeff(2, at, r1, slot) * part[b1][r1 - 1][k - 1][src - 1] +
               ch.coeff(2, at, r2, slot) * part[b2][r2 - 1][k - 1][src - 1];
      };
      cd split = piece(a, a) + piece(a, c);
      if (std::abs(split - y[a - 1]) > 1e-8 * (1.0 + std::abs(y[a - 1])))
        throw RankDeficient("twohop: reception does not split into two pieces");
      Order2 sa;  // serves a, generated at c's reception
      sa.null_class = k;
      sa.dest = a;
      sa.other = c;
      sa.slot = slot;
      sa.block = {b1, b2};
      sa.relay = {r1, r2};
      sa.value = piece(c, a);
      order2.push_back(sa);
      Order2 sc;  // serves c, generated at a's reception
      sc = sa;
      sc.dest = c;
      sc.other = a;
      sc.value = piece(a, c);
      order2.push_back(sc);
      for (int src : {a, c})
        ledger.assert_knowledge(NodeId{1, src},
                                {KnowledgeAtom::own_message(NodeId{1, src}),
                                 KnowledgeAtom::global_csi(slot)},
                                slot + 1);
    }
  }
  out.order2_count = static_cast<long long>(order2.size());
  out.useful_equations = 2 * out.order2_count;  // one per intended destination
  out.eta2_measured = eta2(Rational(out.order2_count), Rational(out.useful_equations));

  // decode check, order-2 values taken as delivered: destination d stacks
  // its delivered pieces and its own cancelled receptions, 6 rows per block
  for (int d = 1; d <= 3; ++d) {
    const long long n = 6 * blocks;
    ComplexMatrix m(n, n);
    std::vector<cd> rhs(n);
    long long r = 0;
    auto add_piece_row = [&](const Order2& o, int at, cd value) {
      // piece of source d at destination `at`, spanning the two blocks
      for (int half = 0; half < 2; ++half) {
        long long b = o.block[half];
        int relay = o.relay[half];
        for (int t = 0; t < 6; ++t)
          m(r, b * 6 + t) = m(r, b * 6 + t) + ch.coeff(2, at, relay, o.slot) *
                                                   row(b, relay, o.null_class, d, t);
      }
      rhs[r] = value;
      ++r;
    };
    for (size_t oi = 0; oi < order2.size(); oi += 2) {
      const Order2& first = order2[oi];
      const Order2& second = order2[oi + 1];
      const Order2* mine = first.dest == d ? &first : second.dest == d ? &second : nullptr;
      if (!mine) continue;
      const Order2& theirs = mine == &first ? second : first;
      // delivered: my piece as observed at my partner
      add_piece_row(*mine, mine->other, mine->value);
      // own reception minus the partner's delivered piece
      cd own_rx = rx2[mine->slot - static_cast<int>(hop1_slots) - 1][d - 1];
      add_piece_row(*mine, d, own_rx - theirs.value);
    }
    if (r != n) throw DecodeFailure("twohop: equation count mismatch");
    out.max_cond = std::max(out.max_cond, cond_estimate(m));
    auto sol = solve_linear(m, rhs);
    for (long long b = 0; b < blocks; ++b)
      for (int t = 0; t < 6; ++t) {
        double err = std::abs(sol[b * 6 + t] - msg[b][d - 1][t]);
        out.residual_given_delivery =
            std::max(out.residual_given_delivery,
                     err / std::max(1.0, std::abs(msg[b][d - 1][t])));
      }
  }
  out.causality_violations = ledger.violations();
  if (out.residual_given_delivery > tol)
    throw DecodeFailure("twohop: phase-1 decode residual exceeds tolerance");
  return out;
}

}  // namespace dofnet
