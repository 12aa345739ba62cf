// Delayed-CSI knowledge ledger. Every scheme computation declares, before
// using a quantity, the atoms it needs: its own message symbols, its own
// past transmissions/receptions, or the global CSI of a past slot. The
// ledger accepts or throws CausalityViolation, and keeps an audit log.
#pragma once

#include <string>
#include <vector>

#include "dofnet/errors.hpp"
#include "dofnet/network.hpp"

namespace dofnet {

enum class AtomKind { OwnMessage, OwnTx, OwnRx, GlobalCsi };

struct KnowledgeAtom {
  AtomKind kind;
  NodeId node;   // owner for Own*; ignored for GlobalCsi
  int slot = 0;  // for OwnTx / OwnRx / GlobalCsi

  static KnowledgeAtom own_message(NodeId n) { return {AtomKind::OwnMessage, n, 0}; }
  static KnowledgeAtom own_tx(NodeId n, int slot) { return {AtomKind::OwnTx, n, slot}; }
  static KnowledgeAtom own_rx(NodeId n, int slot) { return {AtomKind::OwnRx, n, slot}; }
  static KnowledgeAtom global_csi(int slot) { return {AtomKind::GlobalCsi, NodeId{}, slot}; }
};

struct AuditEntry {
  int at_slot;
  NodeId node;
  AtomKind kind;
  NodeId atom_node;
  int atom_slot;
  bool ok;
};

class KnowledgeLedger {
public:
  explicit KnowledgeLedger(NetworkShape shape) : shape_(shape) {}

  void grant_message(NodeId source) { message_holders_.push_back(source); }

  // CSI of slot t becomes global knowledge at slot t+1
  void assert_knowledge(NodeId node, const std::vector<KnowledgeAtom>& needs, int at_slot) {
    for (const auto& a : needs) {
      bool ok = check(node, a, at_slot);
      audit_.push_back({at_slot, node, a.kind, a.node, a.slot, ok});
      if (!ok) {
        ++violations_;
        throw CausalityViolation("node (" + std::to_string(node.layer) + "," +
                                 std::to_string(node.index) + ") at slot " +
                                 std::to_string(at_slot) + " requires illegal atom " +
                                 describe(a));
      }
    }
  }

  const std::vector<AuditEntry>& audit() const { return audit_; }
  long violations() const { return violations_; }

private:
  NetworkShape shape_;
  std::vector<NodeId> message_holders_;
  std::vector<AuditEntry> audit_;
  long violations_ = 0;

  bool check(NodeId node, const KnowledgeAtom& a, int at_slot) const {
    switch (a.kind) {
      case AtomKind::GlobalCsi:
        return a.slot <= at_slot - 1;
      case AtomKind::OwnMessage: {
        if (!(a.node == node)) return false;
        for (const auto& m : message_holders_)
          if (m == node) return true;
        return false;
      }
      case AtomKind::OwnTx:
      case AtomKind::OwnRx:
        // another node's signal is never available, own signals only once past
        return a.node == node && a.slot <= at_slot - 1;
    }
    return false;
  }

  static std::string describe(const KnowledgeAtom& a) {
    switch (a.kind) {
      case AtomKind::OwnMessage:
        return "own-message";
      case AtomKind::OwnTx:
        return "own-tx(slot " + std::to_string(a.slot) + ")";
      case AtomKind::OwnRx:
        return "own-rx(slot " + std::to_string(a.slot) + ")";
      case AtomKind::GlobalCsi:
        return "global-csi(slot " + std::to_string(a.slot) + ")";
    }
    return "?";
  }
};

}  // namespace dofnet
