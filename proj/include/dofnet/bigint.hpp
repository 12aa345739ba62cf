// Arbitrary-precision signed integer, base 2^32 sign-magnitude.
// Big enough and fast enough for exact slot accounting; division is
// Knuth algorithm D, gcd is binary.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>
#include <cmath>

namespace dofnet {

class BigInt {
public:
  BigInt() = default;
  BigInt(long long v) {
    neg_ = v < 0;
    unsigned long long u = neg_ ? -static_cast<unsigned long long>(v) : static_cast<unsigned long long>(v);
    while (u) {
      limb_.push_back(static_cast<uint32_t>(u & 0xffffffffu));
      u >>= 32;
    }
  }
  BigInt(int v) : BigInt(static_cast<long long>(v)) {}
  BigInt(unsigned long long u, bool neg = false) {
    while (u) {
      limb_.push_back(static_cast<uint32_t>(u & 0xffffffffu));
      u >>= 32;
    }
    neg_ = neg && !limb_.empty();
  }

  static BigInt from_string(std::string_view s) {
    BigInt r;
    bool neg = false;
    size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
      neg = s[i] == '-';
      ++i;
    }
    if (i == s.size()) throw std::invalid_argument("BigInt: empty string");
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("BigInt: bad digit");
      r.mul_small_inplace(10);
      r.add_small_inplace(static_cast<uint32_t>(s[i] - '0'));
    }
    r.neg_ = neg && !r.is_zero();
    return r;
  }

  bool is_zero() const { return limb_.empty(); }
  bool negative() const { return neg_; }
  int sign() const { return is_zero() ? 0 : (neg_ ? -1 : 1); }

  bool fits_i64() const {
    if (limb_.size() > 2) return false;
    unsigned long long m = mag_u64();
    return neg_ ? m <= 0x8000000000000000ull : m < 0x8000000000000000ull;
  }
  long long to_i64() const {
    unsigned long long m = mag_u64();
    return neg_ ? -static_cast<long long>(m) : static_cast<long long>(m);
  }

  friend bool operator==(const BigInt& a, const BigInt& b) {
    return a.neg_ == b.neg_ && a.limb_ == b.limb_;
  }
  friend bool operator!=(const BigInt& a, const BigInt& b) { return !(a == b); }
  friend bool operator<(const BigInt& a, const BigInt& b) {
    if (a.neg_ != b.neg_) return a.neg_;
    int c = cmp_mag(a.limb_, b.limb_);
    return a.neg_ ? c > 0 : c < 0;
  }
  friend bool operator>(const BigInt& a, const BigInt& b) { return b < a; }
  friend bool operator<=(const BigInt& a, const BigInt& b) { return !(b < a); }
  friend bool operator>=(const BigInt& a, const BigInt& b) { return !(a < b); }

  BigInt operator-() const {
    BigInt r = *this;
    if (!r.is_zero()) r.neg_ = !r.neg_;
    return r;
  }

  friend BigInt operator+(const BigInt& a, const BigInt& b) {
    if (a.neg_ == b.neg_) {
      BigInt r;
      r.limb_ = add_mag(a.limb_, b.limb_);
      r.neg_ = a.neg_ && !r.limb_.empty();
      return r;
    }
    int c = cmp_mag(a.limb_, b.limb_);
    if (c == 0) return BigInt();
    BigInt r;
    if (c > 0) {
      r.limb_ = sub_mag(a.limb_, b.limb_);
      r.neg_ = a.neg_;
    } else {
      r.limb_ = sub_mag(b.limb_, a.limb_);
      r.neg_ = b.neg_;
    }
    return r;
  }
  friend BigInt operator-(const BigInt& a, const BigInt& b) { return a + (-b); }

  friend BigInt operator*(const BigInt& a, const BigInt& b) {
    if (a.is_zero() || b.is_zero()) return BigInt();
    BigInt r;
    r.limb_.assign(a.limb_.size() + b.limb_.size(), 0);
    for (size_t i = 0; i < a.limb_.size(); ++i) {
      uint64_t carry = 0;
      uint64_t ai = a.limb_[i];
      for (size_t j = 0; j < b.limb_.size(); ++j) {
        uint64_t cur = r.limb_[i + j] + ai * b.limb_[j] + carry;
        r.limb_[i + j] = static_cast<uint32_t>(cur);
        carry = cur >> 32;
      }
      size_t k = i + b.limb_.size();
      while (carry) {
        uint64_t cur = r.limb_[k] + carry;
        r.limb_[k] = static_cast<uint32_t>(cur);
        carry = cur >> 32;
        ++k;
      }
    }
    r.trim();
    r.neg_ = (a.neg_ != b.neg_) && !r.limb_.empty();
    return r;
  }

  BigInt& operator+=(const BigInt& b) { return *this = *this + b; }
  BigInt& operator-=(const BigInt& b) { return *this = *this - b; }
  BigInt& operator*=(const BigInt& b) { return *this = *this * b; }

  // In-place multiply by a machine word; the hot path of the Horner
  // accumulation used by the DoF scaling sweep.
  void mul_u64_inplace(uint64_t m) {
    if (m == 0 || is_zero()) {
      limb_.clear();
      neg_ = false;
      return;
    }
    unsigned __int128 carry = 0;
    for (auto& l : limb_) {
      unsigned __int128 cur = static_cast<unsigned __int128>(l) * m + carry;
      l = static_cast<uint32_t>(cur & 0xffffffffu);
      carry = cur >> 32;
    }
    while (carry) {
      limb_.push_back(static_cast<uint32_t>(carry & 0xffffffffu));
      carry >>= 32;
    }
  }

  // quotient toward zero; remainder has the dividend's sign
  static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r) {
    if (b.is_zero()) throw std::domain_error("BigInt: division by zero");
    int c = cmp_mag(a.limb_, b.limb_);
    if (c < 0) {
      q = BigInt();
      r = a;
      return;
    }
    if (b.limb_.size() == 1) {
      q.limb_.assign(a.limb_.size(), 0);
      uint64_t rem = 0, d = b.limb_[0];
      for (size_t i = a.limb_.size(); i-- > 0;) {
        uint64_t cur = (rem << 32) | a.limb_[i];
        q.limb_[i] = static_cast<uint32_t>(cur / d);
        rem = cur % d;
      }
      q.trim();
      r = BigInt(static_cast<unsigned long long>(rem));
    } else {
      divmod_knuth(a.limb_, b.limb_, q.limb_, r.limb_);
      q.trim();
      r.trim();
    }
    q.neg_ = (a.neg_ != b.neg_) && !q.limb_.empty();
    r.neg_ = a.neg_ && !r.limb_.empty();
  }

  friend BigInt operator/(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    divmod(a, b, q, r);
    return q;
  }
  friend BigInt operator%(const BigInt& a, const BigInt& b) {
    BigInt q, r;
    divmod(a, b, q, r);
    return r;
  }

  static BigInt gcd(BigInt a, BigInt b) {
    a.neg_ = b.neg_ = false;
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    int sa = a.ctz(), sb = b.ctz();
    int shift = std::min(sa, sb);
    a.shr_inplace(sa);
    b.shr_inplace(sb);
    while (true) {
      int c = cmp_mag(a.limb_, b.limb_);
      if (c == 0) break;
      if (c < 0) a.limb_.swap(b.limb_);
      a.limb_ = sub_mag(a.limb_, b.limb_);
      a.trim();
      if (a.is_zero()) {
        a.limb_.swap(b.limb_);
        break;
      }
      a.shr_inplace(a.ctz());
    }
    a.shl_inplace(shift);
    return a;
  }

  std::string to_string() const {
    if (is_zero()) return "0";
    std::vector<uint32_t> chunks;  // base 1e9, little endian
    BigInt t = *this;
    t.neg_ = false;
    while (!t.is_zero()) chunks.push_back(t.divmod_small_inplace(1000000000u));
    std::string s;
    if (neg_) s.push_back('-');
    s += std::to_string(chunks.back());
    for (size_t i = chunks.size() - 1; i-- > 0;) {
      std::string part = std::to_string(chunks[i]);
      s += std::string(9 - part.size(), '0') + part;
    }
    return s;
  }

  size_t bit_length() const {
    if (is_zero()) return 0;
    size_t bits = (limb_.size() - 1) * 32;
    uint32_t top = limb_.back();
    while (top) {
      ++bits;
      top >>= 1;
    }
    return bits;
  }

  // signed mantissa in (-1, 1) with value = mantissa * 2^exp2; exact for
  // small values, top-64-bit truncation for large ones
  double mantissa(long long& exp2) const {
    if (is_zero()) {
      exp2 = 0;
      return 0.0;
    }
    size_t bits = bit_length();
    exp2 = static_cast<long long>(bits);
    uint64_t top;
    size_t drop;
    if (bits <= 64) {
      top = mag_u64();
      drop = 0;
    } else {
      drop = bits - 64;
      top = 0;
      for (size_t i = limb_.size(); i-- > 0;) {
        size_t lo = i * 32;
        if (lo + 32 <= drop) break;
        long long off = static_cast<long long>(lo) - static_cast<long long>(drop);
        if (off >= 0 && off < 64) top |= static_cast<uint64_t>(limb_[i]) << off;
        else if (off < 0 && off > -32) top |= static_cast<uint64_t>(limb_[i]) >> (-off);
      }
    }
    double m = std::ldexp(static_cast<double>(top), -static_cast<int>(bits - drop));
    return neg_ ? -m : m;
  }

  double to_double() const {
    long long e;
    double m = mantissa(e);
    return std::ldexp(m, static_cast<int>(e));
  }

private:
  std::vector<uint32_t> limb_;  // little endian, no trailing zero limb
  bool neg_ = false;

  void trim() {
    while (!limb_.empty() && limb_.back() == 0) limb_.pop_back();
    if (limb_.empty()) neg_ = false;
  }
  unsigned long long mag_u64() const {
    unsigned long long m = 0;
    if (limb_.size() > 0) m = limb_[0];
    if (limb_.size() > 1) m |= static_cast<unsigned long long>(limb_[1]) << 32;
    return m;
  }
  int ctz() const {
    int n = 0;
    for (uint32_t l : limb_) {
      if (l == 0) {
        n += 32;
        continue;
      }
      n += __builtin_ctz(l);
      break;
    }
    return n;
  }
  void shr_inplace(int k) {
    int words = k / 32, bits = k % 32;
    if (words) limb_.erase(limb_.begin(), limb_.begin() + std::min<size_t>(words, limb_.size()));
    if (bits && !limb_.empty()) {
      for (size_t i = 0; i + 1 < limb_.size(); ++i)
        limb_[i] = (limb_[i] >> bits) | (limb_[i + 1] << (32 - bits));
      limb_.back() >>= bits;
    }
    trim();
  }
  void shl_inplace(int k) {
    if (is_zero() || k == 0) return;
    int words = k / 32, bits = k % 32;
    if (bits) {
      uint32_t carry = 0;
      for (auto& l : limb_) {
        uint32_t nc = l >> (32 - bits);
        l = (l << bits) | carry;
        carry = nc;
      }
      if (carry) limb_.push_back(carry);
    }
    limb_.insert(limb_.begin(), words, 0);
  }
  void mul_small_inplace(uint32_t m) {
    uint64_t carry = 0;
    for (auto& l : limb_) {
      uint64_t cur = static_cast<uint64_t>(l) * m + carry;
      l = static_cast<uint32_t>(cur);
      carry = cur >> 32;
    }
    if (carry) limb_.push_back(static_cast<uint32_t>(carry));
    trim();
  }
  void add_small_inplace(uint32_t v) {
    uint64_t carry = v;
    for (auto& l : limb_) {
      if (!carry) break;
      uint64_t cur = l + carry;
      l = static_cast<uint32_t>(cur);
      carry = cur >> 32;
    }
    if (carry) limb_.push_back(static_cast<uint32_t>(carry));
  }
  uint32_t divmod_small_inplace(uint32_t d) {
    uint64_t rem = 0;
    for (size_t i = limb_.size(); i-- > 0;) {
      uint64_t cur = (rem << 32) | limb_[i];
      limb_[i] = static_cast<uint32_t>(cur / d);
      rem = cur % d;
    }
    trim();
    return static_cast<uint32_t>(rem);
  }

  static int cmp_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    for (size_t i = a.size(); i-- > 0;)
      if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
    return 0;
  }
  static std::vector<uint32_t> add_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    const auto& big = a.size() >= b.size() ? a : b;
    const auto& small = a.size() >= b.size() ? b : a;
    std::vector<uint32_t> r(big.size());
    uint64_t carry = 0;
    for (size_t i = 0; i < big.size(); ++i) {
      uint64_t cur = static_cast<uint64_t>(big[i]) + (i < small.size() ? small[i] : 0u) + carry;
      r[i] = static_cast<uint32_t>(cur);
      carry = cur >> 32;
    }
    if (carry) r.push_back(static_cast<uint32_t>(carry));
    return r;
  }
  // requires |a| >= |b|
  static std::vector<uint32_t> sub_mag(const std::vector<uint32_t>& a, const std::vector<uint32_t>& b) {
    std::vector<uint32_t> r(a.size());
    int64_t borrow = 0;
    for (size_t i = 0; i < a.size(); ++i) {
      int64_t cur = static_cast<int64_t>(a[i]) - (i < b.size() ? b[i] : 0u) - borrow;
      borrow = cur < 0;
      if (cur < 0) cur += (1ll << 32);
      r[i] = static_cast<uint32_t>(cur);
    }
    while (!r.empty() && r.back() == 0) r.pop_back();
    return r;
  }

  static void divmod_knuth(const std::vector<uint32_t>& a_in, const std::vector<uint32_t>& b_in,
                           std::vector<uint32_t>& q, std::vector<uint32_t>& r) {
    // Knuth TAOCP 4.3.1 algorithm D, base 2^32
    int shift = __builtin_clz(b_in.back());
    std::vector<uint32_t> u(a_in.size() + 1, 0), v(b_in.size());
    for (size_t i = 0; i < a_in.size(); ++i) u[i] = a_in[i];
    if (shift) {
      for (size_t i = u.size(); i-- > 1;)
        u[i] = (u[i] << shift) | (u[i - 1] >> (32 - shift));
      u[0] <<= shift;
      for (size_t i = v.size(); i-- > 1;)
        v[i] = (b_in[i] << shift) | (b_in[i - 1] >> (32 - shift));
      v[0] = b_in[0] << shift;
    } else {
      v = b_in;
    }
    size_t n = v.size(), m = a_in.size() - n;
    q.assign(m + 1, 0);
    for (size_t j = m + 1; j-- > 0;) {
      uint64_t num = (static_cast<uint64_t>(u[j + n]) << 32) | u[j + n - 1];
      uint64_t qhat = num / v[n - 1];
      uint64_t rhat = num % v[n - 1];
      while (qhat >= (1ull << 32) ||
             (n >= 2 && qhat * v[n - 2] > ((rhat << 32) | u[j + n - 2]))) {
        --qhat;
        rhat += v[n - 1];
        if (rhat >= (1ull << 32)) break;
      }
      // u[j..j+n] -= qhat * v
      int64_t borrow = 0;
      uint64_t carry = 0;
      for (size_t i = 0; i < n; ++i) {
        uint64_t p = qhat * v[i] + carry;
        carry = p >> 32;
        int64_t t = static_cast<int64_t>(u[i + j]) - static_cast<int64_t>(p & 0xffffffffu) - borrow;
        borrow = t < 0;
        if (t < 0) t += (1ll << 32);
        u[i + j] = static_cast<uint32_t>(t);
      }
      int64_t t = static_cast<int64_t>(u[j + n]) - static_cast<int64_t>(carry) - borrow;
      if (t < 0) {
        // qhat was one too large; add back
        --qhat;
        uint64_t c2 = 0;
        for (size_t i = 0; i < n; ++i) {
          uint64_t cur = static_cast<uint64_t>(u[i + j]) + v[i] + c2;
          u[i + j] = static_cast<uint32_t>(cur);
          c2 = cur >> 32;
        }
        t += static_cast<int64_t>(c2);
      }
      u[j + n] = static_cast<uint32_t>(t);
      q[j] = static_cast<uint32_t>(qhat);
    }
    r.assign(u.begin(), u.begin() + n);
    if (shift) {
      for (size_t i = 0; i + 1 < r.size(); ++i)
        r[i] = (r[i] >> shift) | (r[i + 1] << (32 - shift));
      r[n - 1] >>= shift;
    }
  }
};

}  // namespace dofnet
