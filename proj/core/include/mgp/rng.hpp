#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mgp {

// Deterministic random stream.  std::mt19937_64 has a bit-exact specification,
// but the std:: distributions do not, so we draw uniforms and normals by hand:
//   uniform: top 53 bits of the engine output, scaled by 2^-53  -> [0, 1)
//   normal:  Box-Muller on two uniforms, second deviate cached
// Identical seeds therefore give identical streams on every platform.
class rng {
 public:
  explicit rng(std::uint64_t seed) : engine_(seed) {}

  // U[0, 1).  Never returns 1.0; can return exactly 0.0.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // N(0, 1).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // reject u1 == 0 so log(u1) is finite
    double u1 = uniform();
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mgp
