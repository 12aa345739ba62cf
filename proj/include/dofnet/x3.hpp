// Full three-phase orchestration for the 3-user 3-hop X network, plus the
// cascade that turns two copies of it into a 3-user 6-hop interference
// network run.
//
// Phase 1 feeds 18-symbol blocks (six fresh symbols per source, all for one
// scheduled destination) through hop 1 with one redundancy slot, forwards
// the nulled combinations over hop 2, and retransmits them over hop 3 in
// groups of five same-destination same-null sets plus one summation slot.
// Every hop-3 slot hands its scheduled destination one useful equation and
// leaves each other destination one directly-delivered piece plus one side
// piece; side pieces pair up across opposite destination orientations into
// order-2 symbols a single source can regenerate. Phase 2 offloads the
// order-2 symbols to the relays at three per slot, repeats the
// one-redundancy-slot transmission over hop 2, and generates order-3
// symbols over hop 3 (each nulled set sent twice; the third destination's
// reception splits into one delivered piece and one side piece; side pieces
// group into same-source triples worth two order-3 symbols each). Phase 3
// offloads the order-3 symbols over hop 2 and delivers them one per slot
// over hop 3.
//
// Exactness forces the batch granularity: every destination needs a set
// count divisible by five (the summation-slot construction) and the side
// pairing needs the three destinations to appear symmetrically, so a single
// round closes only when N1 is a multiple of 270 = 15 blocks of 18.
#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "dofnet/accounting.hpp"
#include "dofnet/complex_matrix.hpp"
#include "dofnet/ledger.hpp"
#include "dofnet/network.hpp"

namespace dofnet {

inline constexpr long long kX3BlockSymbols = 18;
inline constexpr long long kX3RoundGranularity = 270;

struct SlotRecord {
  int slot = 0;   // global slot index, 1-based
  int hop = 0;    // 1..3 within the stage
  int phase = 0;  // 1..3
  std::array<cd, 3> tx{};
  std::array<cd, 3> rx{};
};

struct X3Transcript {
  uint64_t seed = 0;
  long long n1 = 0;
  std::array<std::array<long long, 3>, 3> phase_hop_slots{};  // [phase][hop]
  std::array<long long, 3> hop_slots{};
  std::array<long long, 3> order_counts{};  // measured N_1, N_2, N_3
  long long direct_order2 = 0;
  long long side_pairs = 0;
  Rational measured_dof;
  Rational eta2_measured;
  bool decode_feasible = false;
  double decode_residual = 0.0;
  double max_cond = 0.0;
  // ranks of the destination-side equation systems; the delivery
  // schedule tops out at 27/30 and 5/6, see decode()
  int group_system_rank = 0;   // worst group, out of 30
  int pair_set_rank = 0;       // worst phase-2 set, out of 6
  long long missing_dimensions = 0;
  long long causality_violations = 0;
  size_t audit_entries = 0;
  std::vector<SlotRecord> slots;
};

namespace x3detail {

struct Engine {
  const ChannelTensor& ch;
  int hop_base;   // 0 for the plain X run; 3 for the second cascade stage
  int slot_base;  // global slot offset of this stage
  KnowledgeLedger& ledger;
  X3Transcript& tr;

  long long scale = 0;     // k with n1 = 270 k
  long long blocks = 0;    // 15 k
  long long per_dest = 0;  // 5 k

  std::vector<std::array<std::array<cd, 6>, 3>> msg;  // [block][src-1][t]

  int cursor = 1;  // next free stage-local slot, 1-based

  // phase-1 state ---------------------------------------------------------
  std::vector<std::array<int, 7>> h1_slots;
  std::vector<std::array<std::array<cd, 7>, 3>> h1_rx;
  // per-source split of the nulled combinations, layers 2 and 3:
  // [block][node][null l][src] (src == l entries stay zero)
  std::vector<std::array<std::array<std::array<cd, 3>, 3>, 3>> lc_part, lp_part;
  std::vector<std::array<std::array<cd, 3>, 3>> lc_value;  // formed at layer 2
  std::vector<std::array<std::array<cd, 3>, 3>> lp_value;  // received at layer 3
  std::vector<std::array<int, 3>> h2_slots;

  struct Group {
    int dest = 0, null_src = 0;
    std::array<long long, 5> block;
    std::array<int, 6> slot{};  // five set slots + summation slot
    std::array<std::array<cd, 3>, 6> rx{};
  };
  std::vector<Group> groups;

  struct DirectRec {  // delivered piece: an order-2 symbol for {dest, holder}
    int src = 0, dest = 0, holder = 0;
    int group = -1, pos = 0;
    cd value{};
  };
  struct SideRec {  // side piece: desired by dest, already held at holder
    int src = 0, dest = 0, holder = 0;
    int group = -1, pos = 0;
    cd value{};
  };
  struct PairRec {  // side(dest;holder) + side(holder;dest), same source
    int src = 0;
    int a = 0, b = 0;
    long long s1 = -1, s2 = -1;
    cd value{};
  };
  std::vector<DirectRec> directs;
  std::vector<SideRec> sides;
  std::vector<PairRec> pairs;

  // phase-2 state ---------------------------------------------------------
  struct Order2Ref {
    bool is_pair = false;
    long long idx = -1;
  };
  struct OffloadSlot {
    int slot = 0;
    std::array<Order2Ref, 3> sent;  // by transmitting source
    std::array<cd, 3> rx{};         // actual relay receptions
  };
  std::array<std::vector<OffloadSlot>, 3> offload2;  // per pair key

  struct P2Batch {
    int pair_key = 0;
    std::array<int, 7> slots{};
    std::array<std::array<int, 6>, 3> origin{};  // [relay][t] -> offload index in pair
    std::array<std::array<cd, 6>, 3> sym{};      // relay k's six new order-2 values
    std::array<std::array<cd, 7>, 3> rx{};       // layer-3 receptions
    std::array<std::array<std::array<cd, 3>, 3>, 3> part{};  // [j][l][src relay]
    std::array<std::array<cd, 3>, 3> combo{};                // formed at layer 3
    std::array<std::array<int, 2>, 3> gen_slots{};
    std::array<std::array<std::array<cd, 3>, 2>, 3> gen_rx{};  // [l][rep][dest]
  };
  std::vector<P2Batch> p2;

  struct Direct3Rec {
    int src = 0;  // regenerating layer-2 relay
    int pair_key = 0;
    long long batch = 0;
    int null_l = 0, rep = 0;
    cd value{};
  };
  struct Side3Rec {
    int src = 0;
    int pair_key = 0;
    long long batch = 0;
    int null_l = 0, rep = 0;
    cd value{};
  };
  struct TripleRec {
    int src = 0;
    std::array<long long, 3> member{};  // into sides3, by pair key
    std::array<cd, 3> coef0{}, coef1{};
    cd value0{}, value1{};
  };
  std::vector<Direct3Rec> directs3;
  std::vector<Side3Rec> sides3;
  std::vector<TripleRec> triples;

  // phase-3 state ---------------------------------------------------------
  struct Order3Ref {
    int kind = 0;  // 0 direct3, 1 triple value0, 2 triple value1
    long long idx = -1;
  };
  struct Offload3Slot {
    int slot = 0;
    std::array<Order3Ref, 3> sent;
    std::array<cd, 3> rx{};
  };
  std::vector<Offload3Slot> offload3;
  struct Delivery {
    int slot = 0;
    int holder = 0;
    long long off_slot = 0;
  };
  std::vector<Delivery> deliveries;

  Engine(const ChannelTensor& c, int hb, int sb, KnowledgeLedger& l, X3Transcript& t)
      : ch(c), hop_base(hb), slot_base(sb), ledger(l), tr(t) {}

  // -- helpers ------------------------------------------------------------

  cd h(int hop, int rx, int tx, int slot) const {
    return ch.coeff(hop_base + hop, rx, tx, slot_base + slot);
  }
  NodeId node(int layer, int index) const { return {hop_base + layer, index}; }
  int now() const { return slot_base + cursor; }

  int take_slot(int phase, int hop, const std::array<cd, 3>& x, std::array<cd, 3>& y_out) {
    int slot = cursor++;
    std::vector<cd> xv{x[0], x[1], x[2]};
    auto y = propagate(ch, hop_base + hop, slot_base + slot, xv);
    for (int i = 0; i < 3; ++i) y_out[i] = y[i];
    tr.phase_hop_slots[phase - 1][hop - 1]++;
    tr.slots.push_back({slot_base + slot, hop, phase, x, y_out});
    return slot;
  }

  static int pair_key_of(int a, int b) {
    if (a > b) std::swap(a, b);
    if (a == 1 && b == 2) return 0;
    if (a == 2 && b == 3) return 1;
    return 2;  // {1,3}
  }
  static std::array<int, 2> pair_of_key(int key) {
    constexpr std::array<std::array<int, 2>, 3> p{{{1, 2}, {2, 3}, {1, 3}}};
    return p[key];
  }
  static int observer_of_key(int key) { return key == 0 ? 3 : key == 1 ? 1 : 2; }
  static void others_of(int l, int& a, int& c) {
    a = c = 0;
    for (int s = 1; s <= 3; ++s)
      if (s != l) (a == 0 ? a : c) = s;
  }

  // -- phase 1 ------------------------------------------------------------

  void phase1_hop1() {
    h1_slots.resize(blocks);
    h1_rx.resize(blocks);
    lc_part.resize(blocks);
    lp_part.resize(blocks);
    lc_value.resize(blocks);
    lp_value.resize(blocks);
    for (long long b = 0; b < blocks; ++b)
      for (int t = 0; t < 7; ++t) {
        std::array<cd, 3> x{};
        for (int j = 1; j <= 3; ++j) {
          ledger.assert_knowledge(node(1, j), {KnowledgeAtom::own_message(node(1, j))}, now());
          if (t < 6) x[j - 1] = msg[b][j - 1][t];
          else
            for (int tt = 0; tt < 6; ++tt) x[j - 1] += msg[b][j - 1][tt];
        }
        std::array<cd, 3> y{};
        h1_slots[b][t] = take_slot(1, 1, x, y);
        for (int i = 0; i < 3; ++i) h1_rx[b][i][t] = y[i];
      }
  }

  // coefficient of u_t in the contribution of source k to relay i's
  // combination with source l nulled
  cd combo_row(long long b, int i, int l, int k, int t) const {
    cd h7 = h(1, i, k, h1_slots[b][6]), g7 = h(1, i, l, h1_slots[b][6]);
    cd ht = h(1, i, k, h1_slots[b][t]), gt = h(1, i, l, h1_slots[b][t]);
    return h7 / g7 - ht / gt;
  }

  void phase1_nulling() {
    for (long long b = 0; b < blocks; ++b) {
      int ready = h1_slots[b][6] + 1;
      for (int i = 1; i <= 3; ++i) {
        std::vector<KnowledgeAtom> needs{KnowledgeAtom::global_csi(slot_base + h1_slots[b][6])};
        for (int t = 0; t < 7; ++t)
          needs.push_back(KnowledgeAtom::own_rx(node(2, i), slot_base + h1_slots[b][t]));
        ledger.assert_knowledge(node(2, i), needs, slot_base + ready);
        for (int l = 1; l <= 3; ++l) {
          for (int k = 1; k <= 3; ++k) {
            cd acc = 0.0;
            if (k != l)
              for (int t = 0; t < 6; ++t) acc += combo_row(b, i, l, k, t) * msg[b][k - 1][t];
            lc_part[b][i - 1][l - 1][k - 1] = acc;
          }
          cd formed = h1_rx[b][i - 1][6] / h(1, i, l, h1_slots[b][6]);
          for (int t = 0; t < 6; ++t) formed -= h1_rx[b][i - 1][t] / h(1, i, l, h1_slots[b][t]);
          lc_value[b][i - 1][l - 1] = formed;
          cd split = lc_part[b][i - 1][l - 1][0] + lc_part[b][i - 1][l - 1][1] +
                     lc_part[b][i - 1][l - 1][2];
          if (std::abs(formed - split) > 1e-8 * (1.0 + std::abs(formed)))
            throw RankDeficient("phase1: combination does not split by source");
        }
      }
      // the six piece rows touching each source must be independent, or the
      // scheduled destination could never solve its block
      for (int k = 1; k <= 3; ++k) {
        ComplexMatrix c(6, 6);
        int r = 0;
        for (int l = 1; l <= 3; ++l) {
          if (l == k) continue;
          for (int i = 1; i <= 3; ++i, ++r)
            for (int t = 0; t < 6; ++t) c(r, t) = combo_row(b, i, l, k, t);
        }
        if (rank(c) < 6) throw RankDeficient("phase1: stacked piece matrix rank-deficient");
        tr.max_cond = std::max(tr.max_cond, cond_estimate(c));
      }
    }
  }

  void phase1_hop2() {
    h2_slots.resize(blocks);
    for (long long b = 0; b < blocks; ++b)
      for (int l = 1; l <= 3; ++l) {
        std::array<cd, 3> x{};
        for (int i = 1; i <= 3; ++i) {
          x[i - 1] = lc_value[b][i - 1][l - 1];
          std::vector<KnowledgeAtom> needs{
              KnowledgeAtom::global_csi(slot_base + h1_slots[b][6])};
          for (int t = 0; t < 7; ++t)
            needs.push_back(KnowledgeAtom::own_rx(node(2, i), slot_base + h1_slots[b][t]));
          ledger.assert_knowledge(node(2, i), needs, now());
        }
        std::array<cd, 3> y{};
        h2_slots[b][l - 1] = take_slot(1, 2, x, y);
        for (int j = 1; j <= 3; ++j) {
          lp_value[b][j - 1][l - 1] = y[j - 1];
          for (int k = 1; k <= 3; ++k) {
            cd acc = 0.0;
            for (int i = 1; i <= 3; ++i)
              acc += h(2, j, i, h2_slots[b][l - 1]) * lc_part[b][i - 1][l - 1][k - 1];
            lp_part[b][j - 1][l - 1][k - 1] = acc;
          }
        }
      }
  }

  void phase1_hop3() {
    for (int d = 1; d <= 3; ++d)
      for (int l = 1; l <= 3; ++l)
        for (long long g = 0; g < per_dest / 5; ++g) {
          Group grp;
          grp.dest = d;
          grp.null_src = l;
          for (int s = 0; s < 5; ++s) grp.block[s] = (d - 1) * per_dest + g * 5 + s;
          int gi = static_cast<int>(groups.size());
          std::array<std::array<cd, 3>, 6> txs{};
          for (int s = 0; s < 5; ++s)
            for (int j = 0; j < 3; ++j) txs[s][j] = lp_value[grp.block[s]][j][l - 1];
          for (int j = 0; j < 3; ++j)
            txs[5][j] = txs[0][j] + txs[1][j] + txs[2][j] + txs[3][j] + txs[4][j];
          for (int pos = 0; pos < 6; ++pos) {
            for (int j = 1; j <= 3; ++j) {
              std::vector<KnowledgeAtom> needs;
              if (pos < 5)
                needs.push_back(
                    KnowledgeAtom::own_rx(node(3, j), slot_base + h2_slots[grp.block[pos]][l - 1]));
              else
                for (int s = 0; s < 5; ++s)
                  needs.push_back(KnowledgeAtom::own_tx(node(3, j), slot_base + grp.slot[s]));
              ledger.assert_knowledge(node(3, j), needs, now());
            }
            std::array<cd, 3> y{};
            grp.slot[pos] = take_slot(1, 3, txs[pos], y);
            grp.rx[pos] = y;
          }
          auto piece = [&](int holder, int pos, int src) {
            cd acc = 0.0;
            if (pos < 5) {
              long long b = grp.block[pos];
              for (int j = 1; j <= 3; ++j)
                acc += h(3, holder, j, grp.slot[pos]) * lp_part[b][j - 1][l - 1][src - 1];
            } else {
              for (int s = 0; s < 5; ++s)
                for (int j = 1; j <= 3; ++j)
                  acc += h(3, holder, j, grp.slot[5]) * lp_part[grp.block[s]][j - 1][l - 1][src - 1];
            }
            return acc;
          };
          int a, c;
          others_of(l, a, c);
          for (int pos = 0; pos < 6; ++pos) {
            int pick = (pos % 2 == 0) ? a : c;
            int side = (pos % 2 == 0) ? c : a;
            for (int holder = 1; holder <= 3; ++holder) {
              if (holder == d) continue;
              cd pa = piece(holder, pos, a), pc = piece(holder, pos, c);
              if (std::abs(pa + pc - grp.rx[pos][holder - 1]) >
                  1e-8 * (1.0 + std::abs(grp.rx[pos][holder - 1])))
                throw RankDeficient("phase1: reception does not split into two pieces");
              // both pieces become regenerable by their source one slot later
              for (int src : {pick, side})
                ledger.assert_knowledge(node(1, src),
                                        {KnowledgeAtom::own_message(node(1, src)),
                                         KnowledgeAtom::global_csi(slot_base + grp.slot[pos])},
                                        slot_base + grp.slot[pos] + 1);
              directs.push_back({pick, d, holder, gi, pos, pick == a ? pa : pc});
              sides.push_back({side, d, holder, gi, pos, side == a ? pa : pc});
            }
          }
          groups.push_back(grp);
        }
    // pair the side pieces: (src q | d ; h) with (src q | h ; d)
    std::array<std::array<std::array<std::vector<long long>, 4>, 4>, 4> bucket{};
    for (long long s = 0; s < static_cast<long long>(sides.size()); ++s)
      bucket[sides[s].src][sides[s].dest][sides[s].holder].push_back(s);
    for (int q = 1; q <= 3; ++q)
      for (int d = 1; d <= 3; ++d)
        for (int hd = d + 1; hd <= 3; ++hd) {
          auto& fwd = bucket[q][d][hd];
          auto& rev = bucket[q][hd][d];
          if (fwd.size() != rev.size())
            throw GroupingError("phase1: side pieces cannot be paired");
          for (size_t i = 0; i < fwd.size(); ++i)
            pairs.push_back({q, d, hd, fwd[i], rev[i],
                             sides[fwd[i]].value + sides[rev[i]].value});
        }
    tr.direct_order2 = static_cast<long long>(directs.size());
    tr.side_pairs = static_cast<long long>(pairs.size());
    tr.order_counts[1] = tr.direct_order2 + tr.side_pairs;
  }

  // -- phase 2 ------------------------------------------------------------

  void phase2_offload() {
    std::array<std::array<std::vector<Order2Ref>, 4>, 3> inv;
    for (long long i = 0; i < static_cast<long long>(directs.size()); ++i)
      inv[pair_key_of(directs[i].dest, directs[i].holder)][directs[i].src].push_back({false, i});
    for (long long i = 0; i < static_cast<long long>(pairs.size()); ++i)
      inv[pair_key_of(pairs[i].a, pairs[i].b)][pairs[i].src].push_back({true, i});
    for (int key = 0; key < 3; ++key) {
      size_t n = inv[key][1].size();
      if (inv[key][2].size() != n || inv[key][3].size() != n)
        throw GroupingError("phase2: offload inventory unbalanced across sources");
      for (size_t t = 0; t < n; ++t) {
        OffloadSlot os;
        std::array<cd, 3> x{};
        for (int s = 1; s <= 3; ++s) {
          const Order2Ref& ref = inv[key][s][t];
          os.sent[s - 1] = ref;
          x[s - 1] = ref.is_pair ? pairs[ref.idx].value : directs[ref.idx].value;
          ledger.assert_knowledge(node(1, s),
                                  {KnowledgeAtom::own_message(node(1, s)),
                                   KnowledgeAtom::global_csi(now() - 1)},
                                  now());
        }
        std::array<cd, 3> y{};
        os.slot = take_slot(2, 1, x, y);
        os.rx = y;
        ComplexMatrix mix(3, 3);
        for (int i = 1; i <= 3; ++i)
          for (int j = 1; j <= 3; ++j) mix(i - 1, j - 1) = h(1, i, j, os.slot);
        if (rank(mix) < 3) throw RankDeficient("phase2: offload mixing rank-deficient");
        offload2[key].push_back(os);
      }
    }
  }

  cd p2_row(const P2Batch& b, int j, int l, int k, int t) const {
    cd h7 = h(2, j, k, b.slots[6]), g7 = h(2, j, l, b.slots[6]);
    cd ht = h(2, j, k, b.slots[t]), gt = h(2, j, l, b.slots[t]);
    return h7 / g7 - ht / gt;
  }

  void phase2_psin() {
    for (int key = 0; key < 3; ++key) {
      size_t slots_n = offload2[key].size();
      if (slots_n % 6 != 0) throw GroupingError("phase2: offload count not blockable");
      for (size_t g = 0; g < slots_n / 6; ++g) {
        P2Batch batch;
        batch.pair_key = key;
        for (int t = 0; t < 6; ++t) {
          const OffloadSlot& os = offload2[key][g * 6 + t];
          for (int k = 1; k <= 3; ++k) {
            batch.sym[k - 1][t] = os.rx[k - 1];
            batch.origin[k - 1][t] = static_cast<int>(g * 6 + t);
          }
        }
        for (int t = 0; t < 7; ++t) {
          std::array<cd, 3> x{};
          for (int k = 1; k <= 3; ++k) {
            std::vector<KnowledgeAtom> needs;
            for (int t2 = 0; t2 < 6; ++t2)
              needs.push_back(
                  KnowledgeAtom::own_rx(node(2, k), slot_base + offload2[key][g * 6 + t2].slot));
            ledger.assert_knowledge(node(2, k), needs, now());
            if (t < 6) x[k - 1] = batch.sym[k - 1][t];
            else
              for (int tt = 0; tt < 6; ++tt) x[k - 1] += batch.sym[k - 1][tt];
          }
          std::array<cd, 3> y{};
          batch.slots[t] = take_slot(2, 2, x, y);
          for (int j = 0; j < 3; ++j) batch.rx[j][t] = y[j];
        }
        for (int j = 1; j <= 3; ++j)
          for (int l = 1; l <= 3; ++l) {
            for (int k = 1; k <= 3; ++k) {
              cd acc = 0.0;
              if (k != l)
                for (int t = 0; t < 6; ++t) acc += p2_row(batch, j, l, k, t) * batch.sym[k - 1][t];
              batch.part[j - 1][l - 1][k - 1] = acc;
            }
            cd formed = batch.rx[j - 1][6] / h(2, j, l, batch.slots[6]);
            for (int t = 0; t < 6; ++t) formed -= batch.rx[j - 1][t] / h(2, j, l, batch.slots[t]);
            batch.combo[j - 1][l - 1] = formed;
            cd split = batch.part[j - 1][l - 1][0] + batch.part[j - 1][l - 1][1] +
                       batch.part[j - 1][l - 1][2];
            if (std::abs(formed - split) > 1e-8 * (1.0 + std::abs(formed)))
              throw RankDeficient("phase2: combination does not split by source");
          }
        for (int k = 1; k <= 3; ++k) {
          ComplexMatrix c(6, 6);
          int r = 0;
          for (int l = 1; l <= 3; ++l) {
            if (l == k) continue;
            for (int j = 1; j <= 3; ++j, ++r)
              for (int t = 0; t < 6; ++t) c(r, t) = p2_row(batch, j, l, k, t);
          }
          if (rank(c) < 6) throw RankDeficient("phase2: stacked piece matrix rank-deficient");
          tr.max_cond = std::max(tr.max_cond, cond_estimate(c));
        }
        p2.push_back(std::move(batch));
      }
    }
  }

  void phase2_hop3() {
    for (long long bi = 0; bi < static_cast<long long>(p2.size()); ++bi) {
      P2Batch& batch = p2[bi];
      int observer = observer_of_key(batch.pair_key);
      for (int l = 1; l <= 3; ++l) {
        int a, c;
        others_of(l, a, c);
        for (int rep = 0; rep < 2; ++rep) {
          std::array<cd, 3> x{};
          for (int j = 1; j <= 3; ++j) {
            x[j - 1] = batch.combo[j - 1][l - 1];
            std::vector<KnowledgeAtom> needs{KnowledgeAtom::global_csi(slot_base + batch.slots[6])};
            for (int t = 0; t < 7; ++t)
              needs.push_back(KnowledgeAtom::own_rx(node(3, j), slot_base + batch.slots[t]));
            ledger.assert_knowledge(node(3, j), needs, now());
          }
          std::array<cd, 3> y{};
          int slot = take_slot(2, 3, x, y);
          batch.gen_slots[l - 1][rep] = slot;
          batch.gen_rx[l - 1][rep] = y;
          int pick = rep == 0 ? a : c;
          int side = rep == 0 ? c : a;
          auto piece = [&](int src) {
            cd acc = 0.0;
            for (int j = 1; j <= 3; ++j)
              acc += h(3, observer, j, slot) * batch.part[j - 1][l - 1][src - 1];
            return acc;
          };
          cd pa = piece(a), pc = piece(c);
          if (std::abs(pa + pc - y[observer - 1]) > 1e-8 * (1.0 + std::abs(y[observer - 1])))
            throw RankDeficient("phase2: observer reception does not split");
          for (int src : {pick, side}) {
            std::vector<KnowledgeAtom> needs{KnowledgeAtom::global_csi(slot_base + slot)};
            for (int t = 0; t < 6; ++t)
              needs.push_back(KnowledgeAtom::own_rx(
                  node(2, src), slot_base + offload2[batch.pair_key][batch.origin[src - 1][t]].slot));
            ledger.assert_knowledge(node(2, src), needs, slot_base + slot + 1);
          }
          directs3.push_back({pick, batch.pair_key, bi, l, rep, pick == a ? pa : pc});
          sides3.push_back({side, batch.pair_key, bi, l, rep, side == a ? pa : pc});
        }
      }
    }
    // same-source triples across the three pair keys; combination
    // coefficients are public randomness
    std::array<std::array<std::vector<long long>, 3>, 4> bucket;
    for (long long i = 0; i < static_cast<long long>(sides3.size()); ++i)
      bucket[sides3[i].src][sides3[i].pair_key].push_back(i);
    RandomStream coeffs(tr.seed, 0xC0EFu);
    for (int q = 1; q <= 3; ++q) {
      size_t n = bucket[q][0].size();
      if (bucket[q][1].size() != n || bucket[q][2].size() != n)
        throw GroupingError("phase2: side pieces cannot be grouped into triples");
      for (size_t i = 0; i < n; ++i) {
        TripleRec t;
        t.src = q;
        for (int key = 0; key < 3; ++key) t.member[key] = bucket[q][key][i];
        for (int key = 0; key < 3; ++key) {
          t.coef0[key] = coeffs.complex_normal();
          t.coef1[key] = coeffs.complex_normal();
        }
        for (int key = 0; key < 3; ++key) {
          t.value0 += t.coef0[key] * sides3[t.member[key]].value;
          t.value1 += t.coef1[key] * sides3[t.member[key]].value;
        }
        triples.push_back(t);
      }
    }
    tr.order_counts[2] =
        static_cast<long long>(directs3.size()) + 2 * static_cast<long long>(triples.size());
  }

  // -- phase 3 ------------------------------------------------------------

  void phase3_offload() {
    std::array<std::vector<Order3Ref>, 4> inv;
    for (long long i = 0; i < static_cast<long long>(directs3.size()); ++i)
      inv[directs3[i].src].push_back({0, i});
    for (long long i = 0; i < static_cast<long long>(triples.size()); ++i) {
      inv[triples[i].src].push_back({1, i});
      inv[triples[i].src].push_back({2, i});
    }
    size_t n = inv[1].size();
    if (inv[2].size() != n || inv[3].size() != n)
      throw GroupingError("phase3: offload inventory unbalanced across relays");
    for (size_t t = 0; t < n; ++t) {
      Offload3Slot os;
      std::array<cd, 3> x{};
      for (int s = 1; s <= 3; ++s) {
        const Order3Ref& ref = inv[s][t];
        os.sent[s - 1] = ref;
        x[s - 1] = ref.kind == 0   ? directs3[ref.idx].value
                   : ref.kind == 1 ? triples[ref.idx].value0
                                   : triples[ref.idx].value1;
        // regenerability of each piece was asserted where it was generated;
        // transmitting it here additionally needs only past CSI
        ledger.assert_knowledge(node(2, s), {KnowledgeAtom::global_csi(now() - 1)}, now());
      }
      std::array<cd, 3> y{};
      os.slot = take_slot(3, 2, x, y);
      os.rx = y;
      ComplexMatrix mix(3, 3);
      for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) mix(i - 1, j - 1) = h(2, i, j, os.slot);
      if (rank(mix) < 3) throw RankDeficient("phase3: offload mixing rank-deficient");
      offload3.push_back(os);
    }
  }

  void phase3_delivery() {
    for (long long t = 0; t < static_cast<long long>(offload3.size()); ++t)
      for (int k = 1; k <= 3; ++k) {
        ledger.assert_knowledge(node(3, k),
                                {KnowledgeAtom::own_rx(node(3, k), slot_base + offload3[t].slot)},
                                now());
        std::array<cd, 3> x{};
        x[k - 1] = offload3[t].rx[k - 1];
        std::array<cd, 3> y{};
        int slot = take_slot(3, 3, x, y);
        deliveries.push_back({slot, k, t});
      }
  }

  // -- decoding -----------------------------------------------------------

  struct DecodeOutcome {
    bool feasible = false;
    int group_system_rank = 30;  // worst case over groups
    int pair_set_rank = 6;       // worst case over phase-2 sets
    long long missing_dimensions = 0;
    double residual = 0.0;
    double max_cond = 0.0;
    std::vector<std::array<std::array<cd, 6>, 3>> decoded;
  };

  // destination d's equation matrix for one phase-2 nulled set: two own
  // receptions, two delivered pieces, two side pieces
  ComplexMatrix pair_set_matrix(long long bi, int l, int d) const {
    const P2Batch& batch = p2[bi];
    int observer = observer_of_key(batch.pair_key);
    int a, c;
    others_of(l, a, c);
    ComplexMatrix m(6, 6);
    int row = 0;
    for (int rep = 0; rep < 2; ++rep, ++row) {
      int slot = batch.gen_slots[l - 1][rep];
      for (int j = 1; j <= 3; ++j) {
        m(row, j - 1) = h(3, d, j, slot);
        m(row, 3 + j - 1) = h(3, d, j, slot);
      }
    }
    for (int rep = 0; rep < 2; ++rep) {
      long long rec = gen_record(bi, l, rep);
      int slot = batch.gen_slots[l - 1][rep];
      int pick = directs3[rec].src, side = sides3[rec].src;
      for (int j = 1; j <= 3; ++j)
        m(row, (pick == a ? 0 : 3) + j - 1) = h(3, observer, j, slot);
      ++row;
      for (int j = 1; j <= 3; ++j)
        m(row, (side == a ? 0 : 3) + j - 1) = h(3, observer, j, slot);
      ++row;
    }
    return m;
  }

  // destination g.dest's equation matrix for one phase-1 group: per slot one
  // own reception plus the delivered and side pieces at both holders
  ComplexMatrix group_matrix(size_t gi) const {
    const Group& g = groups[gi];
    const int d = g.dest, l = g.null_src;
    int a, c;
    others_of(l, a, c);
    auto col = [&](int s, int j, int src) { return 2 * (3 * s + (j - 1)) + (src == c ? 1 : 0); };
    ComplexMatrix m(30, 30);
    int row = 0;
    for (int pos = 0; pos < 6; ++pos) {
      int slot = g.slot[pos];
      for (int s = 0; s < 5; ++s) {
        if (pos < 5 && s != pos) continue;
        for (int j = 1; j <= 3; ++j) {
          m(row, col(s, j, a)) = h(3, d, j, slot);
          m(row, col(s, j, c)) = h(3, d, j, slot);
        }
      }
      ++row;
      for (int holder = 1; holder <= 3; ++holder) {
        if (holder == d) continue;
        long long rec = piece_record(gi, pos, holder);
        int pick = directs[rec].src, side = sides[rec].src;
        for (int s = 0; s < 5; ++s) {
          if (pos < 5 && s != pos) continue;
          for (int j = 1; j <= 3; ++j) m(row, col(s, j, pick)) = h(3, holder, j, slot);
        }
        ++row;
        for (int s = 0; s < 5; ++s) {
          if (pos < 5 && s != pos) continue;
          for (int j = 1; j <= 3; ++j) m(row, col(s, j, side)) = h(3, holder, j, slot);
        }
        ++row;
      }
    }
    return m;
  }

  // Rank survey of every destination-side linear system the
  // delivery schedule induces. The schedule delivers, per hop-3 slot, both
  // halves of a single observation direction; together with the scheduled
  // destination's equal-halves own row this caps each phase-2 set at rank
  // 5 of 6 and each phase-1 group at 27 of 30, with probability one. The
  // survey makes the shortfall measurable instead of crashing the solver.
  void rank_survey(DecodeOutcome& out) const {
    out.group_system_rank = 30;
    out.pair_set_rank = 6;
    out.missing_dimensions = 0;
    for (long long bi = 0; bi < static_cast<long long>(p2.size()); ++bi) {
      auto pr = pair_of_key(p2[bi].pair_key);
      for (int l = 1; l <= 3; ++l)
        for (int d : {pr[0], pr[1]}) {
          int r = static_cast<int>(rank(pair_set_matrix(bi, l, d)));
          out.pair_set_rank = std::min(out.pair_set_rank, r);
          out.missing_dimensions += 6 - r;
        }
    }
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      int r = static_cast<int>(rank(group_matrix(gi)));
      out.group_system_rank = std::min(out.group_system_rank, r);
      out.missing_dimensions += 30 - r;
    }
    out.feasible = out.group_system_rank == 30 && out.pair_set_rank == 6;
  }

  long long gen_record(long long batch, int l, int rep) const {
    return (batch * 3 + (l - 1)) * 2 + rep;
  }
  long long piece_record(long long group, int pos, int holder) const {
    const Group& g = groups[group];
    int hpos = 0, seen = 0;
    for (int hh = 1; hh <= 3; ++hh) {
      if (hh == g.dest) continue;
      if (hh == holder) hpos = seen;
      ++seen;
    }
    return (group * 6 + pos) * 2 + hpos;
  }

  // Destinations work from their own hop-3 receptions, global (delayed)
  // CSI, and the public schedule. The shared bookkeeping below walks the
  // chain once for all three of them.
  DecodeOutcome decode() {
    DecodeOutcome out;
    rank_survey(out);
    if (!out.feasible) {
      out.residual = HUGE_VAL;
      return out;
    }
    out.decoded.resize(blocks);
    const int last = cursor - 1;
    for (int d = 1; d <= 3; ++d)
      ledger.assert_knowledge(node(4, d), {KnowledgeAtom::global_csi(slot_base + last)},
                              slot_base + last + 1);

    std::vector<std::array<cd, 3>> rx(cursor);
    for (const auto& rec : tr.slots) {
      int local = rec.slot - slot_base;
      if (local >= 1 && local <= last && rec.hop == 3) rx[local - 1] = rec.rx;
    }
    auto rx_of = [&](int d, int slot) { return rx[slot - 1][d - 1]; };

    // delivered order-3 values, then the offload inversion
    std::vector<std::array<cd, 3>> new3(offload3.size());
    for (const auto& del : deliveries)
      new3[del.off_slot][del.holder - 1] = rx_of(1, del.slot) / h(3, 1, del.holder, del.slot);

    std::vector<cd> direct3_val(directs3.size());
    std::vector<std::array<cd, 2>> triple_val(triples.size());
    for (size_t t = 0; t < offload3.size(); ++t) {
      ComplexMatrix mix(3, 3);
      std::vector<cd> rhs(3);
      for (int k = 1; k <= 3; ++k) {
        for (int s = 1; s <= 3; ++s) mix(k - 1, s - 1) = h(2, k, s, offload3[t].slot);
        rhs[k - 1] = new3[t][k - 1];
      }
      auto orig = solve_linear(mix, rhs);
      for (int s = 1; s <= 3; ++s) {
        const Order3Ref& ref = offload3[t].sent[s - 1];
        if (ref.kind == 0) direct3_val[ref.idx] = orig[s - 1];
        else if (ref.kind == 1) triple_val[ref.idx][0] = orig[s - 1];
        else triple_val[ref.idx][1] = orig[s - 1];
      }
    }

    // side pieces of phase 2: first the member each observer holds, then the
    // two public combinations pin the rest for everyone
    std::vector<std::array<cd, 3>> side3_val(sides3.size());
    for (size_t i = 0; i < sides3.size(); ++i) {
      const Side3Rec& s = sides3[i];
      int observer = observer_of_key(s.pair_key);
      const P2Batch& batch = p2[s.batch];
      int slot = batch.gen_slots[s.null_l - 1][s.rep];
      side3_val[i][observer - 1] = rx_of(observer, slot) - direct3_val[i];
    }
    for (size_t ti = 0; ti < triples.size(); ++ti) {
      const TripleRec& t = triples[ti];
      for (int d = 1; d <= 3; ++d) {
        int held_key = d == 3 ? 0 : d == 1 ? 1 : 2;  // observer_of_key inverse
        cd held = side3_val[t.member[held_key]][d - 1];
        int cols[2], ci = 0;
        for (int key = 0; key < 3; ++key)
          if (key != held_key) cols[ci++] = key;
        ComplexMatrix m(2, 2);
        m(0, 0) = t.coef0[cols[0]];
        m(0, 1) = t.coef0[cols[1]];
        m(1, 0) = t.coef1[cols[0]];
        m(1, 1) = t.coef1[cols[1]];
        auto sol = solve_linear(
            m, {triple_val[ti][0] - t.coef0[held_key] * held,
                triple_val[ti][1] - t.coef1[held_key] * held});
        side3_val[t.member[cols[0]]][d - 1] = sol[0];
        side3_val[t.member[cols[1]]][d - 1] = sol[1];
      }
    }

    // phase-2 structures down to the original order-2 values
    std::vector<cd> direct2_val(directs.size());
    std::vector<cd> pair_val(pairs.size());
    std::vector<bool> have2(directs.size(), false), havep(pairs.size(), false);
    for (int d = 1; d <= 3; ++d)
      for (long long bi = 0; bi < static_cast<long long>(p2.size()); ++bi) {
        const P2Batch& batch = p2[bi];
        auto pr = pair_of_key(batch.pair_key);
        if (pr[0] != d && pr[1] != d) continue;
        int observer = observer_of_key(batch.pair_key);
        std::array<std::array<std::array<cd, 3>, 3>, 3> part_val{};
        for (int l = 1; l <= 3; ++l) {
          int a, c;
          others_of(l, a, c);
          ComplexMatrix m = pair_set_matrix(bi, l, d);
          std::vector<cd> rhs(6);
          int row = 0;
          for (int rep = 0; rep < 2; ++rep, ++row)
            rhs[row] = rx_of(d, batch.gen_slots[l - 1][rep]);
          for (int rep = 0; rep < 2; ++rep) {
            long long rec = gen_record(bi, l, rep);
            rhs[row++] = direct3_val[rec];
            rhs[row++] = side3_val[rec][d - 1];
          }
          out.max_cond = std::max(out.max_cond, cond_estimate(m));
          auto sol = solve_linear(m, rhs);
          for (int j = 1; j <= 3; ++j) {
            part_val[j - 1][l - 1][a - 1] = sol[j - 1];
            part_val[j - 1][l - 1][c - 1] = sol[3 + j - 1];
          }
        }
        std::array<std::array<cd, 6>, 3> sym_val{};
        for (int k = 1; k <= 3; ++k) {
          ComplexMatrix m(6, 6);
          std::vector<cd> rhs(6);
          int row = 0;
          for (int l = 1; l <= 3; ++l) {
            if (l == k) continue;
            for (int j = 1; j <= 3; ++j, ++row) {
              for (int t = 0; t < 6; ++t) m(row, t) = p2_row(batch, j, l, k, t);
              rhs[row] = part_val[j - 1][l - 1][k - 1];
            }
          }
          auto sol = solve_linear(m, rhs);
          for (int t = 0; t < 6; ++t) sym_val[k - 1][t] = sol[t];
        }
        for (int t = 0; t < 6; ++t) {
          const OffloadSlot& os = offload2[batch.pair_key][batch.origin[0][t]];
          ComplexMatrix mix(3, 3);
          std::vector<cd> rhs(3);
          for (int k = 1; k <= 3; ++k) {
            for (int s = 1; s <= 3; ++s) mix(k - 1, s - 1) = h(1, k, s, os.slot);
            rhs[k - 1] = sym_val[k - 1][t];
          }
          auto orig = solve_linear(mix, rhs);
          for (int s = 1; s <= 3; ++s) {
            const Order2Ref& ref = os.sent[s - 1];
            if (ref.is_pair) {
              pair_val[ref.idx] = orig[s - 1];
              havep[ref.idx] = true;
            } else {
              direct2_val[ref.idx] = orig[s - 1];
              have2[ref.idx] = true;
            }
          }
        }
      }
    for (bool b : have2)
      if (!b) throw DecodeFailure("decode: an order-2 piece was never delivered");
    for (bool b : havep)
      if (!b) throw DecodeFailure("decode: a paired order-2 symbol was never delivered");

    // phase-1 side pieces: value at the holder, then the pair values resolve
    // the orientation each destination wants
    std::vector<cd> side_val(sides.size());
    std::vector<cd> side_resolved(sides.size());
    for (size_t i = 0; i < sides.size(); ++i) {
      const SideRec& s = sides[i];
      int slot = groups[s.group].slot[s.pos];
      side_val[i] = rx_of(s.holder, slot) - direct2_val[i];
    }
    for (size_t pi = 0; pi < pairs.size(); ++pi) {
      const PairRec& p = pairs[pi];
      side_resolved[p.s1] = pair_val[pi] - side_val[p.s2];
      side_resolved[p.s2] = pair_val[pi] - side_val[p.s1];
    }

    // phase-1 groups: thirty equations in the thirty per-source hop-2 outputs
    std::vector<std::array<std::array<std::array<cd, 3>, 3>, 5>> lp_val(groups.size());
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      const Group& g = groups[gi];
      const int d = g.dest, l = g.null_src;
      int a, c;
      others_of(l, a, c);
      auto col = [&](int s, int j, int src) { return 2 * (3 * s + (j - 1)) + (src == c ? 1 : 0); };
      ComplexMatrix m = group_matrix(gi);
      std::vector<cd> rhs(30);
      int row = 0;
      for (int pos = 0; pos < 6; ++pos) {
        rhs[row++] = rx_of(d, g.slot[pos]);
        for (int holder = 1; holder <= 3; ++holder) {
          if (holder == d) continue;
          long long rec = piece_record(gi, pos, holder);
          rhs[row++] = direct2_val[rec];
          rhs[row++] = side_resolved[rec];
        }
      }
      out.max_cond = std::max(out.max_cond, cond_estimate(m));
      auto sol = solve_linear(m, rhs);
      for (int s = 0; s < 5; ++s)
        for (int j = 1; j <= 3; ++j) {
          lp_val[gi][s][j - 1][a - 1] = sol[col(s, j, a)];
          lp_val[gi][s][j - 1][c - 1] = sol[col(s, j, c)];
        }
    }

    // hop-2 inversion per (block, null), then the final per-source solves
    std::vector<std::array<std::array<std::array<cd, 3>, 3>, 3>> lc_val(blocks);
    for (size_t gi = 0; gi < groups.size(); ++gi) {
      const Group& g = groups[gi];
      int l = g.null_src;
      for (int s = 0; s < 5; ++s) {
        long long b = g.block[s];
        for (int src = 1; src <= 3; ++src) {
          if (src == l) continue;
          ComplexMatrix m(3, 3);
          std::vector<cd> rhs(3);
          for (int j = 1; j <= 3; ++j) {
            for (int i = 1; i <= 3; ++i) m(j - 1, i - 1) = h(2, j, i, h2_slots[b][l - 1]);
            rhs[j - 1] = lp_val[gi][s][j - 1][src - 1];
          }
          auto sol = solve_linear(m, rhs);
          for (int i = 1; i <= 3; ++i) lc_val[b][i - 1][l - 1][src - 1] = sol[i - 1];
        }
      }
    }
    for (long long b = 0; b < blocks; ++b)
      for (int k = 1; k <= 3; ++k) {
        ComplexMatrix m(6, 6);
        std::vector<cd> rhs(6);
        int row = 0;
        for (int l = 1; l <= 3; ++l) {
          if (l == k) continue;
          for (int i = 1; i <= 3; ++i, ++row) {
            for (int t = 0; t < 6; ++t) m(row, t) = combo_row(b, i, l, k, t);
            rhs[row] = lc_val[b][i - 1][l - 1][k - 1];
          }
        }
        auto sol = solve_linear(m, rhs);
        for (int t = 0; t < 6; ++t) {
          out.decoded[b][k - 1][t] = sol[t];
          double err = std::abs(sol[t] - msg[b][k - 1][t]);
          out.residual = std::max(out.residual, err / std::max(1.0, std::abs(msg[b][k - 1][t])));
        }
      }
    return out;
  }

  void run() {
    phase1_hop1();
    phase1_nulling();
    phase1_hop2();
    phase1_hop3();
    phase2_offload();
    phase2_psin();
    phase2_hop3();
    phase3_offload();
    phase3_delivery();
  }
};

}  // namespace x3detail

inline long long x3_slots_needed(long long n1) {
  return 495 * (n1 / kX3RoundGranularity);  // 53 + 46 + 66 per 90 symbols
}

struct X3Messages {
  std::vector<std::array<std::array<cd, 6>, 3>> blocks;  // [block][src-1][t]
};

inline X3Messages draw_x3_messages(long long n1, uint64_t seed) {
  X3Messages m;
  m.blocks.resize(n1 / kX3BlockSymbols);
  RandomStream rs(seed, 0x5EEDu);
  for (auto& blk : m.blocks)
    for (auto& src : blk)
      for (auto& v : src) v = rs.complex_normal();
  return m;
}

// One full round at granularity n1 (multiple of 270). Throws DecodeFailure
// if any symbol misses the tolerance, CausalityViolation if a computation
// would need knowledge it cannot have, GranularityError for an n1 the
// single-round construction cannot realize exactly.
inline X3Transcript run_x3_on(const ChannelTensor& ch, int hop_base, int slot_base, long long n1,
                              uint64_t seed, const X3Messages& messages, KnowledgeLedger& ledger,
                              std::vector<std::array<std::array<cd, 6>, 3>>* decoded_out = nullptr,
                              double tol = 1e-8, bool require_decode = true) {
  if (n1 <= 0 || n1 % kX3RoundGranularity != 0)
    throw GranularityError("run_x3: N1 must be a positive multiple of 270");
  X3Transcript tr;
  tr.seed = seed;
  tr.n1 = n1;
  tr.order_counts[0] = n1;
  x3detail::Engine eng(ch, hop_base, slot_base, ledger, tr);
  eng.scale = n1 / kX3RoundGranularity;
  eng.blocks = 15 * eng.scale;
  eng.per_dest = 5 * eng.scale;
  eng.msg = messages.blocks;
  if (static_cast<long long>(eng.msg.size()) != eng.blocks)
    throw GranularityError("run_x3: message count does not match N1");
  eng.run();
  if (eng.cursor - 1 != x3_slots_needed(n1))
    throw DecodeFailure("run_x3: slot usage disagrees with the accounting");
  auto outcome = eng.decode();
  tr.decode_feasible = outcome.feasible;
  tr.decode_residual = outcome.residual;
  tr.group_system_rank = outcome.group_system_rank;
  tr.pair_set_rank = outcome.pair_set_rank;
  tr.missing_dimensions = outcome.missing_dimensions;
  tr.max_cond = std::max(tr.max_cond, outcome.max_cond);
  for (int k = 0; k < 3; ++k) {
    tr.hop_slots[k] = 0;
    for (int m = 0; m < 3; ++m) tr.hop_slots[k] += tr.phase_hop_slots[m][k];
  }
  long long busiest = *std::max_element(tr.hop_slots.begin(), tr.hop_slots.end());
  tr.measured_dof = Rational(n1, busiest);
  tr.eta2_measured = eta2(Rational(tr.order_counts[1]),
                          Rational(tr.direct_order2 + 2 * tr.side_pairs));
  tr.causality_violations = ledger.violations();
  tr.audit_entries = ledger.audit().size();
  if (decoded_out) *decoded_out = outcome.decoded;
  if (require_decode) {
    if (!outcome.feasible)
      throw DecodeFailure(
          "run_x3: destination equation systems are rank-deficient (group rank " +
          std::to_string(outcome.group_system_rank) + "/30, pair-set rank " +
          std::to_string(outcome.pair_set_rank) +
          "/6); the delivery schedule cannot pin every symbol");
    if (outcome.residual > tol)
      throw DecodeFailure("run_x3: decode residual " + std::to_string(outcome.residual) +
                          " exceeds tolerance");
  }
  return tr;
}

inline X3Transcript run_x3(long long n1, uint64_t seed, double tol = 1e-8,
                           bool require_decode = true) {
  if (n1 <= 0 || n1 % kX3RoundGranularity != 0)
    throw GranularityError("run_x3: N1 must be a positive multiple of 270");
  NetworkShape shape{3, 3};
  auto ch = draw_channels(shape, static_cast<int>(x3_slots_needed(n1)), RandomStream(seed, 1));
  KnowledgeLedger ledger(shape);
  for (int j = 1; j <= 3; ++j) ledger.grant_message(NodeId{1, j});
  auto msgs = draw_x3_messages(n1, seed);
  return run_x3_on(ch, 0, 0, n1, seed, msgs, ledger, nullptr, tol, require_decode);
}

struct Ic6Transcript {
  X3Transcript stage1, stage2;
  double end_to_end_residual = 0.0;
  long long symbols_delivered = 0;
};

// The 6-hop interference network as two 3-hop X networks back to back:
// stage 1 delivers {u[j]_k}_j to relay column k, stage 2 re-sorts the
// decoded values to their destinations.
inline Ic6Transcript run_ic6(long long n1, uint64_t seed, double tol = 1e-8) {
  if (n1 <= 0 || n1 % kX3RoundGranularity != 0)
    throw GranularityError("run_ic6: N1 must be a positive multiple of 270");
  NetworkShape shape{3, 6};
  long long stage_slots = x3_slots_needed(n1);
  auto ch = draw_channels(shape, static_cast<int>(2 * stage_slots), RandomStream(seed, 1));
  KnowledgeLedger ledger(shape);
  for (int j = 1; j <= 3; ++j) ledger.grant_message(NodeId{1, j});

  // source j holds n1/9 symbols for each relay column k (cell (j, k)); all
  // of them are ultimately desired by D_j
  long long blocks = n1 / kX3BlockSymbols;
  long long per_dest = blocks / 3;
  std::vector<std::array<std::array<std::array<cd, 6>, 3>, 3>> cells(per_dest);
  RandomStream rs(seed, 0xABCDu);
  for (auto& blk : cells)
    for (auto& row : blk)
      for (auto& cell : row)
        for (auto& v : cell) v = rs.complex_normal();

  // stage 1: X traffic (source j -> stage-1 destination k) carries cell (j, k)
  X3Messages m1;
  m1.blocks.resize(blocks);
  for (long long b = 0; b < blocks; ++b) {
    int dest = static_cast<int>(b / per_dest) + 1;
    long long idx = b % per_dest;
    for (int j = 1; j <= 3; ++j) m1.blocks[b][j - 1] = cells[idx][j - 1][dest - 1];
  }
  Ic6Transcript out;
  std::vector<std::array<std::array<cd, 6>, 3>> dec1;
  out.stage1 = run_x3_on(ch, 0, 0, n1, seed, m1, ledger, &dec1, tol);

  // relay column k now holds {u[j]_k}_j and becomes the stage-2 source of
  // cell (k -> j)
  X3Messages m2;
  m2.blocks.resize(blocks);
  for (long long b = 0; b < blocks; ++b) {
    int dest = static_cast<int>(b / per_dest) + 1;
    long long idx = b % per_dest;
    for (int k = 1; k <= 3; ++k) {
      long long b1 = (k - 1) * per_dest + idx;  // stage-1 block that reached column k
      m2.blocks[b][k - 1] = dec1[b1][dest - 1];
    }
  }
  for (int k = 1; k <= 3; ++k) ledger.grant_message(NodeId{4, k});
  std::vector<std::array<std::array<cd, 6>, 3>> dec2;
  out.stage2 =
      run_x3_on(ch, 3, static_cast<int>(stage_slots), n1, seed, m2, ledger, &dec2, tol);

  double res = 0.0;
  long long count = 0;
  for (long long b = 0; b < blocks; ++b) {
    int dest = static_cast<int>(b / per_dest) + 1;
    long long idx = b % per_dest;
    for (int k = 1; k <= 3; ++k)
      for (int t = 0; t < 6; ++t) {
        cd truth = cells[idx][dest - 1][k - 1][t];
        res = std::max(res, std::abs(dec2[b][k - 1][t] - truth) /
                                std::max(1.0, std::abs(truth)));
        ++count;
      }
  }
  out.end_to_end_residual = res;
  out.symbols_delivered = count;
  if (res > tol) throw DecodeFailure("run_ic6: end-to-end residual exceeds tolerance");
  return out;
}

}  // namespace dofnet
