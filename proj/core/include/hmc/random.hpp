#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hmc/util.hpp"

namespace hmc {

std::uint64_t splitmix64(std::uint64_t x);

// Stable substream derivation: mixing string/integer tags into a parent seed
// keeps parallel workers reproducible independently of scheduling.
std::uint64_t derive_seed(std::uint64_t base, const std::string& tag);
std::uint64_t derive_seed(std::uint64_t base, const std::string& tag,
                          std::uint64_t n);
std::uint64_t derive_seed(std::uint64_t base, const std::string& tag,
                          std::uint64_t n, std::uint64_t m);

// mt19937_64 wrapper with hand-rolled distributions so that sequences are
// identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed + 0x9e3779b97f4a7c15ull)) {}

  std::uint64_t next() { return gen_(); }

  // [0, 1)
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // [0, n); n must be > 0
  std::size_t uniform_below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = uniform_below(i + 1);
      std::swap(v[i], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hmc
