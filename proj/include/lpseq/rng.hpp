#pragma once

#include <cstdint>
#include <random>

#include "lpseq/norms.hpp"

namespace lpseq {

/// Identifies one independent normal stream: (seed, cell, trial, stream).
///
/// Every stream is derived only from its key, so draws do not depend on the
/// order in which cells or trials are executed.
struct TrialKey {
  std::uint64_t seed = 0;
  std::uint64_t cell = 0;
  std::uint64_t trial = 0;
  std::uint32_t stream = 0;
};

class NormalStream {
 public:
  explicit NormalStream(const TrialKey& key) : engine_(make_engine(key)) {}

  double next() { return normal_(engine_); }

  void fill(Vector& out) {
    for (double& v : out) v = normal_(engine_);
  }

  Vector draw(std::size_t d) {
    Vector out(d);
    fill(out);
    return out;
  }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

 private:
  static std::mt19937_64 make_engine(const TrialKey& key) {
    auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
    auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
    std::seed_seq seq{lo(key.seed), hi(key.seed), lo(key.cell), hi(key.cell),
                      lo(key.trial), hi(key.trial), key.stream};
    return std::mt19937_64(seq);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// A standard normal vector of length d for the given key.
inline Vector standard_normal(const TrialKey& key, std::size_t d) { return NormalStream(key).draw(d); }

}  // namespace lpseq
