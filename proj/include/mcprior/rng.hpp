#pragma once

#include <cstdint>
#include <random>

namespace mcprior {

// splitmix64 finalizer. Used only to derive seeds for substreams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed for substream `stream` / element `index` of a master seed.
// mix64(mix64(mix64(master) ^ stream) ^ index), fixed for reproducibility.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

// Substream tags. Training corpora, test instances, sweeps and searches
// draw from disjoint streams of one master seed.
namespace stream {
inline constexpr std::uint64_t kTrain = 0x74726169;
inline constexpr std::uint64_t kTest = 0x74657374;
inline constexpr std::uint64_t kSweep = 0x73776565;
inline constexpr std::uint64_t kSearch = 0x73726368;
}  // namespace stream

// Seedable generator with a fixed, portable output sequence. mt19937_64 is
// pinned down by the standard; doubles are built from the top 53 bits here
// because std::uniform_real_distribution is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform in [0, n). Multiply-shift reduction, deterministic everywhere gcc/clang run.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mcprior
