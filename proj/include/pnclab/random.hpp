#pragma once

// Deterministic randomness. Everything random in the project derives from an
// explicit 64-bit seed; there is no ambient entropy.

#include <cstdint>
#include <random>

#include "pnclab/gf.hpp"

namespace pnclab {

constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

/// Child seed number `index` of `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return hash_combine(mix64(master), index);
}

/// mt19937_64 with bounded draws done by rejection, so sequences do not depend
/// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  /// Uniform in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  gf::Elem element(const gf::Field& field) { return static_cast<gf::Elem>(below(field.order())); }

 private:
  std::mt19937_64 engine_;
};

/// Keyed coding-coefficient stream. The coefficient used by the vertex with
/// key `vertex` on its output number `output` for input number `input` is a
/// pure function of (seed, vertex, output, input), which lets a protocol run
/// and a circuit evaluation draw identical coefficients.
class CoefficientOracle {
 public:
  CoefficientOracle(const gf::Field& field, std::uint64_t seed) : field_(&field), seed_(seed) {}

  gf::Elem operator()(std::uint64_t vertex, std::uint32_t output, std::uint32_t input) const {
    std::uint64_t h = hash_combine(mix64(seed_), vertex);
    h = hash_combine(h, (static_cast<std::uint64_t>(output) << 32) | input);
    auto c = static_cast<gf::Elem>(h & (field_->order() - 1));
    if (perturbed_ && vertex == perturb_vertex_ && output == perturb_output_ && input == perturb_input_)
      c = static_cast<gf::Elem>((c ^ 1u) & (field_->order() - 1));
    return c;
  }

  /// Flips one draw; used as a negative control for equivalence checks.
  void perturb(std::uint64_t vertex, std::uint32_t output, std::uint32_t input) {
    perturbed_ = true;
    perturb_vertex_ = vertex;
    perturb_output_ = output;
    perturb_input_ = input;
  }

  const gf::Field& field() const { return *field_; }
  std::uint64_t seed() const { return seed_; }

 private:
  const gf::Field* field_;
  std::uint64_t seed_;
  bool perturbed_ = false;
  std::uint64_t perturb_vertex_ = 0;
  std::uint32_t perturb_output_ = 0;
  std::uint32_t perturb_input_ = 0;
};

}  // namespace pnclab
