#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace drbeta {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for the named substream of one replication. The derivation is a
/// pure function of (master seed, replication index, stream name), so any
/// replication can be regenerated in isolation.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replication,
                          std::string_view stream);

/// Random stream with a platform-independent normal generator (Marsaglia
/// polar method on top of mt19937_64), so fixed-seed outputs are
/// reproducible bit-for-bit across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t master, std::uint64_t replication,
               std::string_view stream)
      : engine_(derive_seed(master, replication, stream)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace drbeta
