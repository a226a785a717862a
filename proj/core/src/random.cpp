#include "hmc/random.hpp"

namespace hmc {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
  std::uint64_t h = fnv1a64(tag, base ^ 0xcbf29ce484222325ull);
  return splitmix64(h);
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag,
                          std::uint64_t n) {
  return splitmix64(derive_seed(base, tag) ^ splitmix64(n));
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag,
                          std::uint64_t n, std::uint64_t m) {
  return splitmix64(derive_seed(base, tag, n) ^ splitmix64(m + 0x51ull));
}

}  // namespace hmc
