// Building blocks of the K-phase scheme at one-batch granularity: the
// scheduled-and-nulled transmission (L of K transmitters, one redundancy
// slot, per-receiver nulling vectors), symbol offloading, amplify-forward
// relaying, order-(m+1) generation, and final delivery.
#pragma once

#include <vector>

#include "dofnet/accounting.hpp"
#include "dofnet/complex_matrix.hpp"
#include "dofnet/ledger.hpp"
#include "dofnet/network.hpp"

namespace dofnet {

enum class Provenance { Original, Offloaded, RegeneratedPlc, PairedSideInfo };

struct OrderSymbol {
  int order = 1;              // m: useful to exactly |dest_set| destinations
  std::vector<int> dest_set;  // sorted destination indices, |dest_set| == order
  NodeId holder;
  cd value{};
  Provenance provenance = Provenance::Original;
};

// One batch of the scheduled-and-nulled transmission: L transmitters send
// K(L-1)+1 random linear combinations of their K(L-1) order-m symbols, so
// every receiver can null any one transmitter entirely.
struct PsinBatch {
  int users = 3;      // K
  int scheduled = 3;  // L
  int order = 1;      // m
  std::vector<int> dest_set;
  int hop = 1;         // transmitting hop index
  int first_slot = 1;  // batch occupies first_slot .. first_slot + K(L-1)
  std::vector<std::vector<cd>> symbols;  // [transmitter l-1][K(L-1)]
  std::vector<ComplexMatrix> precoders;  // [transmitter l-1], (K(L-1)+1) x K(L-1)

  int block_len() const { return users * (scheduled - 1); }
  int slot_count() const { return block_len() + 1; }

  // precoders are public randomness: drawn from a stream every node can
  // replay, so regeneration under delayed CSI stays legal
  static PsinBatch make(int users, int scheduled, int order, std::vector<int> dest_set, int hop,
                        int first_slot, const std::vector<std::vector<cd>>& symbols,
                        RandomStream precoder_stream) {
    PsinBatch b;
    b.users = users;
    b.scheduled = scheduled;
    b.order = order;
    b.dest_set = std::move(dest_set);
    b.hop = hop;
    b.first_slot = first_slot;
    b.symbols = symbols;
    const int rows = b.slot_count(), cols = b.block_len();
    for (int l = 0; l < scheduled; ++l) {
      ComplexMatrix c(rows, cols);
      for (int t = 0; t < rows; ++t)
        for (int s = 0; s < cols; ++s) c(t, s) = precoder_stream.complex_normal();
      b.precoders.push_back(std::move(c));
    }
    return b;
  }
};

// v_{i\l}^{[l'|I_m]}: the entire contribution of transmitter l' to receiver
// i's nulled combination, as an explicit row over that transmitter's symbols.
struct Plc {
  int receiver = 0;  // i
  int nulled = 0;    // l
  int source = 0;    // l'
  std::vector<cd> coeff_row;
  cd value{};
};

struct NulledCombination {
  int receiver = 0;
  int nulled = 0;
  std::vector<cd> omega;  // left null vector of H_{i,l} C^{[l]}
  cd value{};             // omega^T y_i
  std::vector<Plc> parts;
};

struct PsinResult {
  std::vector<std::vector<cd>> received;      // [receiver i-1][slot within batch]
  std::vector<NulledCombination> combos;      // K*L entries
};

inline ComplexMatrix channel_times_precoder(const ChannelTensor& ch, const PsinBatch& b,
                                            int receiver, int transmitter) {
  const int rows = b.slot_count(), cols = b.block_len();
  ComplexMatrix m(rows, cols);
  for (int t = 0; t < rows; ++t) {
    cd h = ch.coeff(b.hop, receiver, transmitter, b.first_slot + t);
    for (int s = 0; s < cols; ++s) m(t, s) = h * b.precoders[transmitter - 1](t, s);
  }
  return m;
}

// Runs one batch: K(L-1)+1 transmission slots, then every receiver nulls
// every scheduled transmitter in turn. K*L combinations come out, each
// decomposed into its L-1 partial linear combinations.
inline PsinResult psin_run(const ChannelTensor& ch, const PsinBatch& b,
                           KnowledgeLedger* ledger = nullptr) {
  const int K = b.users, L = b.scheduled;
  const int slots = b.slot_count(), len = b.block_len();
  PsinResult out;
  out.received.assign(K, std::vector<cd>(slots, cd(0)));
  for (int t = 0; t < slots; ++t) {
    int slot = b.first_slot + t;
    std::vector<cd> x(K, cd(0));
    for (int l = 1; l <= L; ++l) {
      cd acc = 0.0;
      for (int s = 0; s < len; ++s) acc += b.precoders[l - 1](t, s) * b.symbols[l - 1][s];
      x[l - 1] = acc;
      if (ledger)
        ledger->assert_knowledge(NodeId{b.hop, l},
                                 {KnowledgeAtom::own_message(NodeId{b.hop, l})}, slot);
    }
    auto y = propagate(ch, b.hop, slot, x);
    for (int i = 0; i < K; ++i) out.received[i][t] = y[i];
  }
  // nulling happens after the batch, with full (delayed) CSI of its slots
  const int after = b.first_slot + slots;
  for (int i = 1; i <= K; ++i) {
    if (ledger) {
      std::vector<KnowledgeAtom> needs{KnowledgeAtom::global_csi(b.first_slot + slots - 1)};
      for (int t = 0; t < slots; ++t)
        needs.push_back(KnowledgeAtom::own_rx(NodeId{b.hop + 1, i}, b.first_slot + t));
      ledger->assert_knowledge(NodeId{b.hop + 1, i}, needs, after);
    }
    for (int l = 1; l <= L; ++l) {
      NulledCombination combo;
      combo.receiver = i;
      combo.nulled = l;
      combo.omega = left_null_vector(channel_times_precoder(ch, b, i, l));
      cd val = 0.0;
      for (int t = 0; t < slots; ++t) val += combo.omega[t] * out.received[i - 1][t];
      combo.value = val;
      cd part_sum = 0.0;
      for (int lp = 1; lp <= L; ++lp) {
        if (lp == l) continue;
        Plc p;
        p.receiver = i;
        p.nulled = l;
        p.source = lp;
        ComplexMatrix hc = channel_times_precoder(ch, b, i, lp);
        p.coeff_row.assign(len, cd(0));
        for (int s = 0; s < len; ++s) {
          cd acc = 0.0;
          for (int t = 0; t < slots; ++t) acc += combo.omega[t] * hc(t, s);
          p.coeff_row[s] = acc;
        }
        cd v = 0.0;
        for (int s = 0; s < len; ++s) v += p.coeff_row[s] * b.symbols[lp - 1][s];
        p.value = v;
        part_sum += v;
        combo.parts.push_back(std::move(p));
      }
      if (std::abs(part_sum - combo.value) > 1e-9 * (1.0 + std::abs(combo.value)))
        throw RankDeficient("psin_run: nulled combination does not decompose");
      out.combos.push_back(std::move(combo));
    }
  }
  return out;
}

// The 3-user block with the fixed precoder: each transmitter sends six
// fresh symbols and then their sum, so every receiver can null any one
// transmitter by a reciprocal combination of its seven receptions. Used for
// hop 1 of the 3-user schemes; `interference_traffic` only relabels which
// destination wants which symbols (identical linear algebra).
struct UncodedSumBlock {
  int hop = 1;
  std::array<int, 7> slots{};
  std::array<std::array<cd, 7>, 3> rx{};            // [receiver][t]
  std::array<std::array<cd, 3>, 3> combo{};         // [receiver][nulled]
  // coefficient of symbol t of transmitter k in combo (receiver, nulled):
  std::array<std::array<std::array<std::array<cd, 6>, 3>, 3>, 3> row{};
};

inline UncodedSumBlock uncoded_sum_block(const ChannelTensor& ch, int hop, int first_slot,
                                         const std::array<std::array<cd, 6>, 3>& symbols,
                                         KnowledgeLedger* ledger = nullptr) {
  UncodedSumBlock b;
  b.hop = hop;
  for (int t = 0; t < 7; ++t) {
    b.slots[t] = first_slot + t;
    std::vector<cd> x(3);
    for (int j = 1; j <= 3; ++j) {
      if (ledger)
        ledger->assert_knowledge(NodeId{hop, j}, {KnowledgeAtom::own_message(NodeId{hop, j})},
                                 first_slot + t);
      if (t < 6) x[j - 1] = symbols[j - 1][t];
      else
        for (int tt = 0; tt < 6; ++tt) x[j - 1] += symbols[j - 1][tt];
    }
    auto y = propagate(ch, hop, first_slot + t, x);
    for (int i = 0; i < 3; ++i) b.rx[i][t] = y[i];
  }
  for (int i = 1; i <= 3; ++i) {
    if (ledger) {
      std::vector<KnowledgeAtom> needs{KnowledgeAtom::global_csi(b.slots[6])};
      for (int t = 0; t < 7; ++t)
        needs.push_back(KnowledgeAtom::own_rx(NodeId{hop + 1, i}, b.slots[t]));
      ledger->assert_knowledge(NodeId{hop + 1, i}, needs, b.slots[6] + 1);
    }
    for (int l = 1; l <= 3; ++l) {
      cd formed = b.rx[i - 1][6] / ch.coeff(hop, i, l, b.slots[6]);
      for (int t = 0; t < 6; ++t) formed -= b.rx[i - 1][t] / ch.coeff(hop, i, l, b.slots[t]);
      b.combo[i - 1][l - 1] = formed;
      for (int k = 1; k <= 3; ++k)
        for (int t = 0; t < 6; ++t) {
          if (k == l) {
            b.row[i - 1][l - 1][k - 1][t] = 0.0;
            continue;
          }
          cd h7 = ch.coeff(hop, i, k, b.slots[6]), g7 = ch.coeff(hop, i, l, b.slots[6]);
          cd ht = ch.coeff(hop, i, k, b.slots[t]), gt = ch.coeff(hop, i, l, b.slots[t]);
          b.row[i - 1][l - 1][k - 1][t] = h7 / g7 - ht / gt;
        }
    }
  }
  return b;
}

// One offloading slot: each of the K layer-(m-1) nodes transmits one order-m
// symbol; the K received mixtures become new order-m symbols one layer up.
inline std::vector<OrderSymbol> offload(const ChannelTensor& ch, int hop, int slot,
                                        const std::vector<OrderSymbol>& symbols,
                                        KnowledgeLedger* ledger = nullptr) {
  const int K = ch.shape().users;
  if (static_cast<int>(symbols.size()) != K)
    throw IndexError("offload: need one symbol per transmitter");
  std::vector<cd> x(K);
  for (int j = 0; j < K; ++j) {
    if (symbols[j].holder.layer != hop || symbols[j].holder.index != j + 1)
      throw IndexError("offload: symbol holder does not match transmitter");
    x[j] = symbols[j].value;
  }
  ComplexMatrix mix(K, K);
  for (int i = 1; i <= K; ++i)
    for (int j = 1; j <= K; ++j) mix(i - 1, j - 1) = ch.coeff(hop, i, j, slot);
  if (rank(mix) < static_cast<size_t>(K))
    throw RankDeficient("offload: mixing matrix is rank deficient");
  if (ledger)
    for (int j = 1; j <= K; ++j)
      ledger->assert_knowledge(NodeId{hop, j}, {KnowledgeAtom::global_csi(slot - 1)}, slot);
  auto y = propagate(ch, hop, slot, x);
  std::vector<OrderSymbol> out;
  for (int k = 1; k <= K; ++k) {
    OrderSymbol s;
    s.order = symbols[0].order;
    s.dest_set = symbols[0].dest_set;
    s.holder = NodeId{hop + 1, k};
    s.value = y[k - 1];
    s.provenance = Provenance::Offloaded;
    out.push_back(std::move(s));
  }
  return out;
}

// One amplify-forward slot: layer-k relays retransmit their held
// combinations; the next layer receives the channel-mixed versions.
inline std::vector<cd> af_hop(const ChannelTensor& ch, int hop, int slot,
                              const std::vector<cd>& combinations,
                              KnowledgeLedger* ledger = nullptr) {
  if (ledger) {
    const int K = ch.shape().users;
    for (int j = 1; j <= K; ++j)
      ledger->assert_knowledge(NodeId{hop, j}, {KnowledgeAtom::own_rx(NodeId{hop, j}, slot - 1)},
                               slot);
  }
  return propagate(ch, hop, slot, combinations);
}

// Final delivery: one order-K symbol per slot, time division over holders;
// every destination recovers the value by dividing out its known channel.
struct DeliveryResult {
  int slots_used = 0;
  std::vector<std::vector<cd>> per_destination;  // [dest i-1][symbol]
};

inline DeliveryResult final_delivery(const ChannelTensor& ch, int hop, int first_slot,
                                     const std::vector<OrderSymbol>& symbols) {
  const int K = ch.shape().users;
  DeliveryResult r;
  r.per_destination.assign(K, {});
  int slot = first_slot;
  for (const auto& s : symbols) {
    std::vector<cd> x(K, cd(0));
    x[s.holder.index - 1] = s.value;
    auto y = propagate(ch, hop, slot, x);
    for (int i = 1; i <= K; ++i)
      r.per_destination[i - 1].push_back(y[i - 1] / ch.coeff(hop, i, s.holder.index, slot));
    ++slot;
    ++r.slots_used;
  }
  return r;
}

// Hop-K bookkeeping for one phase-m batch: how many order-(m+1) symbols the
// generation step yields, split into directly-usable pieces and
// remaining-PLC records that only pair up across scheduling permutations.
struct GenerationCounts {
  Rational slots;           // hop-K slots charged to the batch
  long long direct = 0;     // order-(m+1) symbols delivered as-is
  long long remaining = 0;  // remaining PLCs, each m/(m+1) of a symbol
  Rational new_symbols;     // direct + remaining * m/(m+1)
};

inline GenerationCounts generation_counts(int users, int scheduled, int order) {
  const int K = users, L = scheduled, m = order;
  if (m < 1 || m > K - 1) throw DomainError("generation_counts: need 1 <= m <= K-1");
  GenerationCounts g;
  Rational rep(static_cast<long long>(K) * (L - 1),
               static_cast<long long>(K - m) * (L - 1) + 1);
  g.slots = Rational(L) * rep;
  Rational slots = g.slots;
  Rational direct = slots * Rational((K - m) * (L - 2));
  Rational remaining = slots * Rational(K - m);
  g.new_symbols = direct + remaining * Rational(m, m + 1);
  if (direct.is_integer()) g.direct = direct.num().to_i64();
  if (remaining.is_integer()) g.remaining = remaining.num().to_i64();
  // must agree with the per-phase recursion
  Rational batch_symbols(static_cast<long long>(K) * L * (L - 1));
  if (g.new_symbols != batch_symbols * lambda_klj(K, L, m))
    throw DomainError("generation_counts: recursion mismatch");
  return g;
}

// Executable slice of the generation step for one batch when the repetition
// factor is integral: forwards each nulled set over hop K (with repeats),
// splits every non-scheduled destination's reception into per-source pieces,
// and checks each piece against its regeneration from the originating
// transmitter's own data.
struct GenerationRun {
  int slots_used = 0;
  std::vector<OrderSymbol> direct;           // desired by dest_set + observer
  std::vector<OrderSymbol> remaining_plcs;   // one per (slot, observer)
  std::vector<std::vector<cd>> scheduled_rx; // receptions of scheduled destinations
};

inline GenerationRun run_generation(const ChannelTensor& ch, const PsinBatch& b,
                                    const PsinResult& forwarded, int hop, int first_slot,
                                    KnowledgeLedger* ledger = nullptr) {
  const int K = b.users, L = b.scheduled, m = b.order;
  Rational rep(static_cast<long long>(K) * (L - 1),
               static_cast<long long>(K - m) * (L - 1) + 1);
  if (!rep.is_integer())
    throw GroupingError("run_generation: non-integral repetition needs phase-level grouping");
  const long long repeats = rep.num().to_i64();
  GenerationRun out;
  out.scheduled_rx.assign(K, {});
  std::vector<bool> is_scheduled(K + 1, false);
  for (int d : b.dest_set) is_scheduled[d] = true;
  int slot = first_slot;
  for (int l = 1; l <= L; ++l) {
    for (long long r = 0; r < repeats; ++r, ++slot, ++out.slots_used) {
      // layer-K relays forward {L(i\l)}_i
      std::vector<cd> x(K);
      for (int i = 1; i <= K; ++i) x[i - 1] = forwarded.combos[(i - 1) * L + (l - 1)].value;
      auto y = af_hop(ch, hop, slot, x, ledger);
      for (int i = 1; i <= K; ++i) {
        if (is_scheduled[i]) {
          out.scheduled_rx[i - 1].push_back(y[i - 1]);
          continue;
        }
        // observer i: reception splits into L-1 source pieces
        int piece_idx = 0;
        for (int lp = 1; lp <= L; ++lp) {
          if (lp == l) continue;
          cd piece = 0.0;
          for (int j = 1; j <= K; ++j) {
            const Plc& p = forwarded.combos[(j - 1) * L + (l - 1)].parts[lp < l ? lp - 1 : lp - 2];
            piece += ch.coeff(hop, i, j, slot) * p.value;
          }
          if (ledger)  // regenerated later by V^(m)_lp from its own symbols
            ledger->assert_knowledge(NodeId{b.hop, lp},
                                     {KnowledgeAtom::own_message(NodeId{b.hop, lp}),
                                      KnowledgeAtom::global_csi(slot)},
                                     slot + 1);
          OrderSymbol s;
          s.order = m + 1;
          s.dest_set = b.dest_set;
          s.dest_set.push_back(i);
          std::sort(s.dest_set.begin(), s.dest_set.end());
          s.holder = NodeId{b.hop, lp};
          s.value = piece;
          s.provenance = Provenance::RegeneratedPlc;
          if (piece_idx < L - 2) out.direct.push_back(std::move(s));
          else out.remaining_plcs.push_back(std::move(s));
          ++piece_idx;
        }
      }
    }
  }
  return out;
}

}  // namespace dofnet
