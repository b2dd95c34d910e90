#include "obcsaa/rng.hpp"

#include <cmath>
#include <numbers>

namespace obcsaa {

namespace {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view purpose,
                          std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = splitmix64(master ^ 0x6f62637361615f31ULL);
  h = splitmix64(h ^ fnv1a64(purpose));
  h = splitmix64(h ^ (a * 0x9e3779b97f4a7c15ULL + 1));
  h = splitmix64(h ^ (b * 0xd1b54a32d192ed03ULL + 1));
  return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Multiply-shift with rejection on the biased zone.
  for (;;) {
    std::uint64_t x = engine_();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo >= n) return static_cast<std::uint64_t>(m >> 64);
    std::uint64_t threshold = (0ULL - n) % n;
    if (lo >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] so the log is finite.
  double u1 =
      (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace obcsaa
