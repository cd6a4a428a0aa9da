#ifndef SIMPLEX_EVAL_RNG_HPP
#define SIMPLEX_EVAL_RNG_HPP

#include <cstdint>
#include <random>

namespace simplex_eval {

// Deterministic random stream.  All stochastic code in the library draws
// through this class instead of the <random> distribution adaptors, whose
// output is implementation defined.  Given the same seed the sequence of
// uniform/normal/gamma variates is identical on every platform.
//
// Parallel work units (chains, per-label draw loops) each derive their own
// stream with derive(), keyed by stable integer ids, so results do not
// depend on thread count or scheduling.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();

  // Uniform on (0, 1), never returns 0; safe under log().
  double uniform_pos();

  // Standard normal via Box-Muller; pairs are generated together and the
  // spare is cached, so draws come in a fixed order.
  double normal();

  // Gamma(shape, 1) by Marsaglia-Tsang squeeze for shape >= 1, with the
  // u^(1/shape) boost for shape < 1.  shape must be positive.
  double gamma(double shape);

  // Child stream keyed by (a, b); stable under reordering of calls.
  RngStream derive(std::uint64_t a, std::uint64_t b = 0) const;

private:
  std::mt19937_64 eng_;
  std::uint64_t seed_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// SplitMix64 finalizer; used for seed derivation.
std::uint64_t mix_u64(std::uint64_t x);

}  // namespace simplex_eval

#endif
