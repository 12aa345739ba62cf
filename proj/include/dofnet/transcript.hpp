// File outputs: transcript JSON (seed, shape, per-slot vectors, audit log),
// per-run summary CSV, and the table/curve files the command-line tool
// emits. Exact fractions are serialized as "num/den" strings so nothing is
// lost to floating point; decimals ride alongside for humans.
#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dofnet/accounting.hpp"
#include "dofnet/ledger.hpp"
#include "dofnet/x3.hpp"

namespace dofnet {

using nlohmann::json;

inline json rational_json(const Rational& r) {
  return json{{"exact", r.to_string()}, {"decimal", r.to_double()}};
}

inline json complex_json(const cd& v) { return json::array({v.real(), v.imag()}); }

inline const char* atom_kind_name(AtomKind k) {
  switch (k) {
    case AtomKind::OwnMessage:
      return "own-message";
    case AtomKind::OwnTx:
      return "own-tx";
    case AtomKind::OwnRx:
      return "own-rx";
    case AtomKind::GlobalCsi:
      return "global-csi";
  }
  return "?";
}

inline json transcript_json(const X3Transcript& tr, const KnowledgeLedger* ledger = nullptr,
                            size_t audit_cap = 0) {
  json j;
  j["seed"] = tr.seed;
  j["n1"] = tr.n1;
  j["shape"] = {{"users", 3}, {"hops", 3}};
  j["hop_slots"] = tr.hop_slots;
  j["phase_hop_slots"] = tr.phase_hop_slots;
  j["order_counts"] = tr.order_counts;
  j["direct_order2"] = tr.direct_order2;
  j["side_pairs"] = tr.side_pairs;
  j["measured_dof"] = rational_json(tr.measured_dof);
  j["eta2"] = rational_json(tr.eta2_measured);
  j["decode_feasible"] = tr.decode_feasible;
  j["decode_residual"] = tr.decode_residual;
  j["group_system_rank"] = tr.group_system_rank;
  j["pair_set_rank"] = tr.pair_set_rank;
  j["missing_dimensions"] = tr.missing_dimensions;
  j["max_cond"] = tr.max_cond;
  j["causality_violations"] = tr.causality_violations;
  json slots = json::array();
  for (const auto& s : tr.slots) {
    json tx = json::array(), rx = json::array();
    for (int i = 0; i < 3; ++i) {
      tx.push_back(complex_json(s.tx[i]));
      rx.push_back(complex_json(s.rx[i]));
    }
    slots.push_back({{"slot", s.slot}, {"hop", s.hop}, {"phase", s.phase},
                     {"tx", std::move(tx)}, {"rx", std::move(rx)}});
  }
  j["slots"] = std::move(slots);
  if (ledger) {
    json audit = json::array();
    size_t n = ledger->audit().size();
    size_t cap = audit_cap == 0 ? n : std::min(audit_cap, n);
    for (size_t i = 0; i < cap; ++i) {
      const auto& e = ledger->audit()[i];
      audit.push_back({{"at_slot", e.at_slot},
                       {"node", {e.node.layer, e.node.index}},
                       {"atom", atom_kind_name(e.kind)},
                       {"atom_slot", e.atom_slot},
                       {"ok", e.ok}});
    }
    j["audit"] = {{"entries", n}, {"log", std::move(audit)}};
  }
  return j;
}

// per-(phase, hop) slot counts, symbol counts, decode outcome
inline std::string summary_csv(const X3Transcript& tr) {
  std::ostringstream os;
  os << "phase,hop,slots\n";
  for (int m = 1; m <= 3; ++m)
    for (int k = 1; k <= 3; ++k)
      os << m << ',' << k << ',' << tr.phase_hop_slots[m - 1][k - 1] << '\n';
  os << "order,count\n";
  for (int m = 1; m <= 3; ++m) os << m << ',' << tr.order_counts[m - 1] << '\n';
  os << "decode_feasible," << (tr.decode_feasible ? 1 : 0) << '\n';
  os << "decode_residual," << std::setprecision(17) << tr.decode_residual << '\n';
  return os.str();
}

inline json dof_table_json(const std::vector<int>& ks) {
  json rows = json::array();
  for (int k : ks) {
    auto r = dof_report(k);
    json row;
    row["users"] = k;
    row["q_star"] = r.q_star;
    row["t1"] = rational_json(r.t1);
    row["t2"] = rational_json(r.t2);
    row["dof_actual"] = rational_json(r.dof_actual);
    row["dof_relaxed"] = rational_json(r.dof_relaxed);
    row["miso_bc_upper"] = rational_json(r.miso_bc_upper);
    row["t1_float_gamma"] = r.t1_float_gamma;
    rows.push_back(std::move(row));
  }
  return json{{"dof_table", std::move(rows)}};
}

inline std::string hop_durations_csv(int users, int scheduled) {
  auto d = durations(SchemeParams::from_kl(users, scheduled), Rational(1));
  auto b = verify_hop_bounds(users, scheduled);
  Rational sum(0);
  for (const auto& t : d.hop_total) sum += t;
  const Rational& busiest = d.hop_total[b.max_hop_index - 1];
  std::ostringstream os;
  os << "hop,exact,decimal\n";
  for (int k = 1; k <= users; ++k)
    os << k << ',' << d.hop_total[k - 1].to_string() << ',' << std::setprecision(17)
       << d.hop_total[k - 1].to_double() << '\n';
  os << "interior_bound_ok," << (b.interior_bound_ok ? 1 : 0) << '\n';
  os << "endpoint_dominance," << (b.endpoint_ok ? 1 : 0) << '\n';
  os << "max_hop," << b.max_hop_index << '\n';
  // one round spreads over the sum while the rate is set by the busiest hop
  os << "busiest_hop_total," << busiest.to_string() << '\n';
  os << "round_spread," << sum.to_string() << '\n';
  return os.str();
}

inline json hop_durations_json(int users, int scheduled) {
  auto d = durations(SchemeParams::from_kl(users, scheduled), Rational(1));
  auto b = verify_hop_bounds(users, scheduled);
  Rational sum(0);
  for (const auto& t : d.hop_total) sum += t;
  json rows = json::array();
  for (int k = 1; k <= users; ++k)
    rows.push_back({{"hop", k}, {"total", rational_json(d.hop_total[k - 1])}});
  return json{{"users", users},
              {"scheduled", scheduled},
              {"hops", std::move(rows)},
              {"interior_bound_ok", b.interior_bound_ok},
              {"endpoint_dominance", b.endpoint_ok},
              {"max_hop", b.max_hop_index},
              {"busiest_hop_total", rational_json(d.hop_total[b.max_hop_index - 1])},
              {"round_spread", rational_json(sum)}};
}

inline std::string dof_table_csv(const std::vector<int>& ks) {
  std::ostringstream os;
  os << "users,q_star,dof_exact,dof_decimal,upper_exact,upper_decimal\n";
  for (int k : ks) {
    auto r = dof_report(k);
    os << k << ',' << r.q_star << ',' << r.dof_actual.to_string() << ','
       << std::setprecision(17) << r.dof_actual.to_double() << ','
       << r.miso_bc_upper.to_string() << ',' << r.miso_bc_upper.to_double() << '\n';
  }
  return os.str();
}

inline std::string scaling_csv(const std::vector<long long>& ks) {
  auto pts = scaling_curve(ks);
  std::ostringstream os;
  os << "users,f_inv,q_used,dof,ratio\n";
  for (const auto& p : pts)
    os << p.users << ',' << std::setprecision(17) << p.f_inv << ',' << p.q_used << ',' << p.dof
       << ',' << p.ratio << '\n';
  return os.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << contents;
}

}  // namespace dofnet
