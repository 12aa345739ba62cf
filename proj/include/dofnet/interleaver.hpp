// Phase-hop interleaver: round b's chain of (phase, hop) sub-blocks starts
// in block b and advances one block per link, so consecutive rounds overlap
// and every hop stays busy once the pipeline fills. Block length is the
// busiest hop's total, which is what makes the steady-state rate N1 over
// max_k T^(k).
#pragma once

#include <map>
#include <tuple>
#include <vector>

#include "dofnet/accounting.hpp"

namespace dofnet {

enum class InterleaverVariant { X3, GeneralK, TwoHop };

struct SubBlock {
  int phase = 0, hop = 0, round = 0, block = 0;
};

struct InterleaverPlan {
  int users = 0;
  int rounds = 0;
  InterleaverVariant variant{};
  int block_count = 0;
  std::vector<SubBlock> assignment;

  // the (phase, hop) chain of one round, in dependency order
  std::vector<std::pair<int, int>> chain;
};

inline std::vector<std::pair<int, int>> interleaver_chain(int users, InterleaverVariant v) {
  std::vector<std::pair<int, int>> chain;
  switch (v) {
    case InterleaverVariant::X3:
      chain = {{1, 1}, {1, 2}, {1, 3}, {2, 1}, {2, 2}, {2, 3}, {3, 2}, {3, 3}};
      break;
    case InterleaverVariant::TwoHop:
      chain = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
      break;
    case InterleaverVariant::GeneralK:
      for (int m = 1; m <= users; ++m)
        for (int k = (m == 1 ? 1 : m - 1); k <= users; ++k) chain.push_back({m, k});
      break;
  }
  return chain;
}

inline InterleaverPlan build_interleaver(int users, int rounds, InterleaverVariant v) {
  if (rounds < 1) throw DomainError("build_interleaver: rounds must be >= 1");
  if (v == InterleaverVariant::GeneralK && users < 3)
    throw DomainError("build_interleaver: users must be >= 3");
  InterleaverPlan plan;
  plan.users = users;
  plan.rounds = rounds;
  plan.variant = v;
  plan.chain = interleaver_chain(users, v);
  const int len = static_cast<int>(plan.chain.size());
  for (int b = 1; b <= rounds; ++b)
    for (int s = 0; s < len; ++s)
      plan.assignment.push_back({plan.chain[s].first, plan.chain[s].second, b, b + s});
  plan.block_count = rounds + len - 1;
  return plan;
}

struct InterleaverCheck {
  bool no_duplicate_subblocks = true;  // a (phase, hop) slot is never claimed twice per block
  bool hop_budget_ok = true;           // per-hop work in any block fits the block length
  long collisions = 0;
};

// A hop may appear several times inside one block (once per in-flight
// round), but (a) never twice for the same (phase, hop) and (b) its total
// duration within the block must fit into max_k T^(k).
inline InterleaverCheck check_interleaver(const InterleaverPlan& plan, int scheduled) {
  InterleaverCheck out;
  std::map<std::tuple<int, int, int>, int> seen;  // (block, phase, hop) -> count
  for (const auto& sb : plan.assignment)
    if (++seen[{sb.block, sb.phase, sb.hop}] > 1) {
      out.no_duplicate_subblocks = false;
      ++out.collisions;
    }
  if (plan.variant == InterleaverVariant::GeneralK || plan.variant == InterleaverVariant::X3) {
    auto d = durations(SchemeParams::from_kl(plan.users, scheduled), Rational(1));
    Rational block_len = d.hop_total[0];
    for (const auto& t : d.hop_total)
      if (t > block_len) block_len = t;
    std::map<std::pair<int, int>, Rational> load;  // (block, hop) -> duration
    for (const auto& sb : plan.assignment) {
      auto key = std::make_pair(sb.block, sb.hop);
      auto it = load.find(key);
      Rational add = d.entry[sb.phase - 1][sb.hop - 1];
      if (it == load.end()) load.emplace(key, add);
      else it->second += add;
    }
    for (const auto& [key, dur] : load)
      if (dur > block_len) {
        out.hop_budget_ok = false;
        ++out.collisions;
      }
  }
  return out;
}

}  // namespace dofnet
