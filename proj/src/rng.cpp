#include "raresplit/rng.hpp"

#include <stdexcept>

namespace raresplit {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t stream_seed(const StreamId& id) {
  std::uint64_t h = splitmix(id.seed);
  h = splitmix(h ^ id.client);
  h = splitmix(h ^ id.simulation);
  h = splitmix(h ^ id.generation);
  return h;
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return splitmix(splitmix(parent) ^ (index + 0x51ed270b27a3c5e1ULL));
}

Rng::Rng(const StreamId& id) : id_(id) {
  engine_.seed(stream_seed(id));
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Rng::index on empty range");
  if (n == 1) return 0;
  // Lemire-style rejection keeps the result exactly uniform and platform independent.
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::size_t>(m >> 64);
  }
}

}  // namespace raresplit
