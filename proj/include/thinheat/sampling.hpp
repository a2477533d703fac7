#pragma once

// Low-discrepancy (Halton) sample sets for sup-norm estimation.

#include <cstdint>

namespace thinheat {

inline double halton(std::uint64_t index, std::uint64_t base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

// Deterministic point sequence in (0,1)^3; `seed` offsets the start index.
struct Halton3 {
  std::uint64_t next = 0;
  explicit Halton3(std::uint64_t seed) : next(20 + 1000 * seed) {}
  void operator()(double& a, double& b, double& c) {
    ++next;
    a = halton(next, 2);
    b = halton(next, 3);
    c = halton(next, 5);
  }
};

}  // namespace thinheat
