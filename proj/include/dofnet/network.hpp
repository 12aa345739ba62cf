// Physical model of the layered K-user N-hop network: per-slot channel
// draws for every hop and noise-free linear propagation. Layer 1 holds the
// sources, layer N+1 the destinations; hop n connects layer n to n+1.
#pragma once

#include <complex>
#include <vector>

#include "dofnet/errors.hpp"
#include "dofnet/rng.hpp"

namespace dofnet {

using cd = std::complex<double>;

struct NetworkShape {
  int users = 3;  // K
  int hops = 1;   // N
};

struct NodeId {
  int layer = 1;  // 1..N+1
  int index = 1;  // 1..K
  friend bool operator==(const NodeId&, const NodeId&) = default;
};

class ChannelTensor {
public:
  ChannelTensor() = default;
  ChannelTensor(NetworkShape shape, int slots, std::vector<cd> entries)
      : shape_(shape), slots_(slots), h_(std::move(entries)) {}

  NetworkShape shape() const { return shape_; }
  int slots() const { return slots_; }

  // h^(n)_{ij}(t): hop n in 1..N, receiver i, transmitter j in 1..K, slot t in 1..slots
  const cd& coeff(int hop, int rx, int tx, int slot) const {
    check(hop, rx, tx, slot);
    return h_[idx(hop, rx, tx, slot)];
  }

private:
  NetworkShape shape_;
  int slots_ = 0;
  std::vector<cd> h_;

  size_t idx(int hop, int rx, int tx, int slot) const {
    size_t K = shape_.users;
    return (((static_cast<size_t>(hop - 1) * K + (rx - 1)) * K + (tx - 1)) * slots_) + (slot - 1);
  }
  void check(int hop, int rx, int tx, int slot) const {
    if (hop < 1 || hop > shape_.hops || rx < 1 || rx > shape_.users || tx < 1 ||
        tx > shape_.users || slot < 1 || slot > slots_)
      throw IndexError("ChannelTensor: index out of range");
  }
};

// i.i.d. complex normal coefficients for every (hop, rx, tx, slot); exact
// zero draws are rejected so every coefficient is invertible.
inline ChannelTensor draw_channels(NetworkShape shape, int slots, RandomStream stream) {
  if (slots < 1) throw DomainError("draw_channels: slots must be >= 1");
  size_t K = shape.users, N = shape.hops;
  std::vector<cd> h;
  h.reserve(N * K * K * static_cast<size_t>(slots));
  for (size_t n = 0; n < N; ++n)
    for (size_t i = 0; i < K; ++i)
      for (size_t j = 0; j < K; ++j)
        for (int t = 0; t < slots; ++t) h.push_back(stream.nonzero_complex_normal());
  return ChannelTensor(shape, slots, std::move(h));
}

// y_i = sum_j h^(n)_{ij}(t) x_j, noise set to zero
inline std::vector<cd> propagate(const ChannelTensor& ch, int hop, int slot,
                                 const std::vector<cd>& x) {
  int K = ch.shape().users;
  if (static_cast<int>(x.size()) != K) throw IndexError("propagate: x must have K entries");
  std::vector<cd> y(K, cd(0.0));
  for (int i = 1; i <= K; ++i) {
    cd acc = 0.0;
    for (int j = 1; j <= K; ++j) acc += ch.coeff(hop, i, j, slot) * x[j - 1];
    y[i - 1] = acc;
  }
  return y;
}

}  // namespace dofnet
