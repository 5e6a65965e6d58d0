#ifndef RADI_RNG_HPP_
#define RADI_RNG_HPP_

#include <array>
#include <cstdint>
#include <string_view>

namespace radi {

/// Identity of a random stream. Equal states and equal call sequences give
/// equal draws on every platform.
struct RngState {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const RngState&, const RngState&) = default;
};

/// Philox4x64-10 counter-based generator (Salmon et al., Random123).
///
/// The 128-bit key is (seed, stream_id) and the 256-bit counter is the block
/// index, so streams with different ids never share a block. Each block yields
/// four 64-bit words, consumed in order. The first block uses counter 1, which
/// makes the raw output identical to numpy.random.Philox(key=[seed, stream_id]).
///
/// Derived draws:
///   uniform()       (x >> 11) * 2^-53                 in [0, 1)
///   uniform_open()  ((x >> 11) + 0.5) * 2^-53         in (0, 1)
///   normal()        Box-Muller on two uniform_open() draws, no caching
///   below(n)        Lemire's nearly-divisionless rejection
class Rng {
 public:
  explicit Rng(RngState state);
  Rng(std::uint64_t seed, std::uint64_t stream_id) : Rng(RngState{seed, stream_id}) {}

  const RngState& state() const noexcept { return state_; }

  std::uint64_t next_u64();
  double uniform();
  double uniform_open();
  double normal();
  std::uint64_t below(std::uint64_t n);

  /// A generator for an independent child stream keyed by `tag`.
  Rng child(std::uint64_t tag) const;
  Rng child(std::string_view tag) const;

  /// One Philox4x64-10 block; exposed for known-answer tests.
  static std::array<std::uint64_t, 4> block(const std::array<std::uint64_t, 4>& counter,
                                            const std::array<std::uint64_t, 2>& key);

 private:
  void refill();

  RngState state_;
  std::array<std::uint64_t, 4> counter_{};
  std::array<std::uint64_t, 4> buffer_{};
  unsigned used_ = 4;
};

/// SplitMix64 finaliser; used to derive stream ids.
std::uint64_t mix64(std::uint64_t x);
/// Stream id for a child of `parent` labelled `tag`.
std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t tag);
/// FNV-1a over the bytes of `text`.
std::uint64_t fnv1a(std::string_view text, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace radi

#endif  // RADI_RNG_HPP_
