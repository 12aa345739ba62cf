// Exact slot accounting for the K-phase scheme: the symbol-count recursion,
// per-(phase, hop) durations, hop totals, the achievable-DoF bounds with a
// floating gamma cross-check, hop-duration inequalities, the x^x scaling
// sweep, and the 3-user 2-hop variants.
//
// Everything here is exact rational arithmetic; doubles appear only in the
// gamma cross-check and the scaling sweep outputs.
#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dofnet/bigint.hpp"
#include "dofnet/errors.hpp"
#include "dofnet/rational.hpp"
#include "dofnet/special.hpp"

namespace dofnet {

struct SchemeParams {
  int users;      // K >= 3
  int scheduled;  // L, with 3 <= L <= K

  int q() const { return scheduled - 1; }

  static SchemeParams from_kl(int K, int L) {
    if (K < 3) throw DomainError("SchemeParams: K must be >= 3");
    if (L < 3 || L > K) throw DomainError("SchemeParams: need 3 <= L <= K");
    return {K, L};
  }
  static SchemeParams from_kq(int K, int q) { return from_kl(K, q + 1); }
};

// Ratio N_{j+1} / N_j of consecutive symbol counts; strictly inside (0,1).
inline Rational lambda_klj(int K, int L, int j) {
  if (j < 1 || j > K - 1) throw DomainError("lambda_klj: need 1 <= j <= K-1");
  long long q = L - 1;
  return Rational(static_cast<long long>(K - j) * (q * (j + 1) - 1),
                  static_cast<long long>(j + 1) * (q * (K - j) + 1));
}

// N_1..N_K, N_{m+1} = N_m * Lambda(m)
inline std::vector<Rational> n_sequence(const SchemeParams& p, const Rational& n1) {
  std::vector<Rational> n{n1};
  for (int m = 1; m < p.users; ++m) n.push_back(n.back() * lambda_klj(p.users, p.scheduled, m));
  return n;
}

struct DurationProfile {
  std::vector<Rational> n_seq;               // N_1..N_K
  std::vector<std::vector<Rational>> entry;  // entry[m-1][k-1] = T_m^(k)
  std::vector<Rational> hop_total;           // T^(1)..T^(K)
};

// Per-(phase, hop) durations. Phase m uses hop m-1 for offloading, hop m for
// the scheduled-and-nulled transmission, hops m+1..K-1 for amplify-forward,
// and hop K to generate the next order (plain delivery once m = K). Hops
// below m-1 are silent.
inline DurationProfile durations(const SchemeParams& p, const Rational& n1) {
  const int K = p.users, L = p.scheduled;
  const long long psin_num = static_cast<long long>(K) * (L - 1) + 1;
  const long long psin_den = static_cast<long long>(K) * L * (L - 1);
  DurationProfile d;
  d.n_seq = n_sequence(p, n1);
  d.entry.assign(K, std::vector<Rational>(K, Rational(0)));
  for (int m = 1; m <= K; ++m) {
    const Rational& nm = d.n_seq[m - 1];
    for (int k = 1; k <= K; ++k) {
      if (k <= m - 2) continue;  // silent
      if (k == m - 1) d.entry[m - 1][k - 1] = nm / Rational(K);
      else if (k == m && m <= K - 1)
        d.entry[m - 1][k - 1] = nm * Rational(psin_num, psin_den);
      else if (k == K)
        d.entry[m - 1][k - 1] =
            nm / Rational(static_cast<long long>(K - m) * (L - 1) + 1);
      else if (k > m && k <= K - 1)
        d.entry[m - 1][k - 1] = nm / Rational(static_cast<long long>(K) * (L - 1));
    }
  }
  d.hop_total.assign(K, Rational(0));
  for (int k = 1; k <= K; ++k)
    for (int m = 1; m <= K; ++m) d.hop_total[k - 1] += d.entry[m - 1][k - 1];
  return d;
}

namespace detail {

// Unreduced fraction accumulation of the hop-K total
//   T = sum_{i=1..K} Nbar_i / (q (K - i) + 1)
// via a backward Horner pass; one gcd at the very end. Keeps the scaling
// sweep polynomial in K instead of quadratic in digit counts.
struct BigFrac {
  BigInt num, den;
};

inline BigFrac t1_accumulate(long long q, long long K) {
  BigFrac s{BigInt(1), BigInt(1)};  // i = K term: c_K = 1
  for (long long i = K - 1; i >= 1; --i) {
    const uint64_t c = static_cast<uint64_t>(q * (K - i) + 1);
    const uint64_t ln = static_cast<uint64_t>((K - i) * (q * (i + 1) - 1));
    const uint64_t ld = static_cast<uint64_t>((i + 1) * (q * (K - i) + 1));
    // S <- 1/c + (ln/ld) S = (den*ld + c*ln*num) / (c*ld*den)
    BigInt t = s.den;
    t.mul_u64_inplace(ld);
    s.num.mul_u64_inplace(c * ln);
    s.num += t;
    s.den.mul_u64_inplace(c * ld);
  }
  return s;
}

}  // namespace detail

// Exact hop-K total (normalized by N_1).
inline Rational t1_exact(int q, long long K) {
  if (q < 2 || q > K - 1) throw DomainError("t1_exact: need 2 <= q <= K-1");
  auto f = detail::t1_accumulate(q, K);
  return Rational(std::move(f.num), std::move(f.den));
}

// Gamma-function closed form of the same quantity, double precision.
inline double t1_gamma(int q, long long K) {
  if (q < 2 || q > K - 1) throw DomainError("t1_gamma: need 2 <= q <= K-1");
  double a = 1.0 / q;
  double fact = 1.0;  // (K-1)!
  for (long long i = 2; i < K; ++i) fact *= static_cast<double>(i);
  return (gamma_fn(a) * fact / gamma_fn(static_cast<double>(K) + a) - 1.0 / K) / (q - 1);
}

// Exact hop-1 total (normalized by N_1).
inline Rational t2(int q, long long K) {
  if (q < 2 || q > K - 1) throw DomainError("t2: need 2 <= q <= K-1");
  Rational a(K * q + 1, q * (q + 1) * K);
  Rational b(static_cast<long long>(2 * q - 1) * (K - 1),
             2 * K * ((K - 1) * static_cast<long long>(q) + 1));
  return a + b;
}

// Same quantity written in terms of alpha = 1/q; used as an algebraic
// consistency check against t2().
inline Rational t2_alpha_form(int q, long long K) {
  Rational alpha(1, q);
  Rational Kr(static_cast<long long>(K));
  Rational first = alpha * (Kr + alpha) / ((Rational(1) + alpha) * Kr);
  Rational second =
      (Rational(2) - alpha) * (Kr - Rational(1)) / (Rational(2) * Kr * (Kr + alpha - Rational(1)));
  return first + second;
}

// K-user broadcast upper bound K / (1 + 1/2 + ... + 1/K)
inline Rational miso_upper(long long K) {
  Rational h(0);
  for (long long i = 1; i <= K; ++i) h += Rational(1, i);
  return Rational(K) / h;
}

struct DofReport {
  int users = 0;
  int q_star = 0;
  Rational t1, t2;          // at q_star
  Rational dof_relaxed;     // 1 / (t1 + t2)
  Rational dof_actual;      // 1 / max(t1, t2)
  Rational miso_bc_upper;
  double t1_float_gamma = 0.0;
};

inline DofReport dof_report(int K) {
  if (K < 3) throw DomainError("dof_report: K must be >= 3");
  DofReport best;
  best.users = K;
  std::optional<Rational> best_max;
  for (int q = 2; q <= K - 1; ++q) {
    Rational a = t1_exact(q, K);
    Rational b = t2(q, K);
    Rational m = a > b ? a : b;
    if (!best_max || m < *best_max) {  // smaller max means larger DoF; ties keep smallest q
      best_max = m;
      best.q_star = q;
      best.t1 = a;
      best.t2 = b;
    }
  }
  best.dof_relaxed = Rational(1) / (best.t1 + best.t2);
  best.dof_actual = Rational(1) / *best_max;
  best.miso_bc_upper = miso_upper(K);
  best.t1_float_gamma = t1_gamma(best.q_star, K);
  return best;
}

struct HopBoundsReport {
  bool interior_bound_ok = false;   // T^(k) <= T^(1) + T^(K), proven, must hold
  bool endpoint_ok = false;   // T^(k) <= max(T^(1), T^(K)), observed, reported
  int max_hop_index = 0;      // 1-based argmax of the hop totals
};

inline HopBoundsReport verify_hop_bounds(int K, int L) {
  auto p = SchemeParams::from_kl(K, L);
  auto d = durations(p, Rational(1));
  const Rational& first = d.hop_total.front();
  const Rational& last = d.hop_total.back();
  Rational sum = first + last;
  Rational ends = first > last ? first : last;
  HopBoundsReport r;
  r.interior_bound_ok = true;
  r.endpoint_ok = true;
  for (int k = 2; k <= K - 1; ++k) {
    if (!(d.hop_total[k - 1] <= sum)) r.interior_bound_ok = false;
    if (!(d.hop_total[k - 1] <= ends)) r.endpoint_ok = false;
  }
  r.max_hop_index = 1;
  for (int k = 2; k <= K; ++k)
    if (d.hop_total[k - 1] > d.hop_total[r.max_hop_index - 1]) r.max_hop_index = k;
  return r;
}

struct ScalingPoint {
  long long users;
  double f_inv;   // x with x^x = K
  int q_used;     // clamp(round(f_inv), 2, K-1)
  double dof;     // 1 / max(t1, t2) at q_used
  double ratio;   // dof / f_inv
};

inline std::vector<ScalingPoint> scaling_curve(const std::vector<long long>& ks) {
  std::vector<ScalingPoint> out;
  out.reserve(ks.size());
  for (long long K : ks) {
    if (K < 3) throw DomainError("scaling_curve: K must be >= 3");
    ScalingPoint pt;
    pt.users = K;
    pt.f_inv = xx_inverse(static_cast<double>(K));
    long long q = std::llround(pt.f_inv);
    q = std::max<long long>(2, std::min<long long>(q, K - 1));
    pt.q_used = static_cast<int>(q);
    auto a = detail::t1_accumulate(q, K);  // unreduced; only compared and rounded
    Rational b = t2(static_cast<int>(q), K);
    // max(t1, t2) without normalizing the big fraction
    bool t1_wins = a.num * b.den() > b.num() * a.den;
    double m;
    if (t1_wins) {
      long long en, ed;
      double mn = a.num.mantissa(en);
      double md = a.den.mantissa(ed);
      m = std::ldexp(mn / md, static_cast<int>(en - ed));
    } else {
      m = b.to_double();
    }
    pt.dof = 1.0 / m;
    pt.ratio = pt.dof / pt.f_inv;
    out.push_back(pt);
  }
  return out;
}

// Extra hops beyond 2K amplify-forward at K values per slot; their duration
// never exceeds the busiest existing hop, so the bound carries over.
inline Rational m_hop_extension(int K, long long M) {
  if (M < 2 * static_cast<long long>(K)) throw DomainError("m_hop_extension: need M >= 2K");
  DofReport rep = dof_report(K);
  auto p = SchemeParams::from_kq(K, rep.q_star);
  auto d = durations(p, Rational(1));
  Rational forwarded(0);
  for (const auto& nm : d.n_seq) forwarded += nm;
  forwarded /= Rational(K);
  Rational busiest = d.hop_total.front();
  for (const auto& t : d.hop_total)
    if (t > busiest) busiest = t;
  if (!(forwarded <= busiest))
    throw DomainError("m_hop_extension: forwarding hop would dominate");
  return rep.dof_actual;
}

// Order-2 efficiency: delivered-useful equations per order-2 symbol, out of
// the ideal two.
inline Rational eta2(const Rational& n2, const Rational& n_i) {
  if (!(n2 > Rational(0))) throw DomainError("eta2: N2 must be positive");
  if (n_i < Rational(0) || n_i > Rational(2) * n2)
    throw DomainError("eta2: need 0 <= N_I <= 2 N2");
  return n_i / (Rational(2) * n2);
}

struct TwoHopEval {
  Rational hop1, hop2, dof;
};

// 3-user 2-hop scheme: a beta fraction of the order-2 symbols takes the
// relay-cooperation route (slot costs 8/9 on hop 1 and 5/6 on hop 2 per
// symbol), the rest the plain route.
inline TwoHopEval two_hop_3user(const Rational& beta, const Rational& n1) {
  if (beta < Rational(0) || beta > Rational(1))
    throw DomainError("two_hop_3user: beta must be in [0,1]");
  Rational one(1);
  TwoHopEval e;
  e.hop1 = n1 * (Rational(7, 18) + Rational(4, 9) * beta + (one - beta) * Rational(1, 4));
  e.hop2 = n1 * (Rational(1, 4) + Rational(5, 12) * beta + (one - beta) * Rational(4, 9));
  e.dof = n1 / (e.hop1 > e.hop2 ? e.hop1 : e.hop2);
  return e;
}

// Balance point of the two hop durations, solved exactly from the linear
// coefficients rather than hard-coded.
inline Rational beta_star() {
  // hop1(b) - hop2(b) = a + c b with
  Rational a = Rational(7, 18) + Rational(1, 4) - Rational(1, 4) - Rational(4, 9);
  Rational c = Rational(4, 9) - Rational(1, 4) - Rational(5, 12) + Rational(4, 9);
  return -a / c;
}

// Smallest N1 making every T_m^(k) an integer slot count, every phase an
// integer number of scheduled-transmission batches, and the hop-K repetition
// integral.
inline Rational minimal_n1(int K, int L) {
  auto p = SchemeParams::from_kl(K, L);
  auto d = durations(p, Rational(1));
  BigInt l(1);
  auto fold = [&l](const Rational& r) {
    if (r.is_zero()) return;
    const BigInt& den = r.den();
    l = l / BigInt::gcd(l, den) * den;
  };
  for (const auto& row : d.entry)
    for (const auto& t : row) fold(t);
  const Rational batch(static_cast<long long>(K) * L * (L - 1));
  for (int m = 1; m <= K - 1; ++m) fold(d.n_seq[m - 1] / batch);
  return Rational(std::move(l));
}

// Published reference values reproduced exactly by dof_report.
inline std::optional<std::pair<Rational, Rational>> published_dof(int K) {
  switch (K) {
    case 3:
      return std::make_pair(Rational(15, 11), Rational(18, 11));
    case 5:
      return std::make_pair(Rational(315, 193), Rational(300, 137));
    case 10:
      return std::make_pair(Rational(92378, 43191), Rational(25200, 7381));
    case 20:
      return std::make_pair(Rational(156, 59), Rational(62078016, 11167027));
    default:
      return std::nullopt;
  }
}

}  // namespace dofnet
