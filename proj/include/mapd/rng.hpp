#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace mapd {

// Deterministic seeded generator. All randomness in the workbench flows
// through explicit Rng instances; there is no global RNG. The uniform/normal
// transforms are implemented here (not via std distributions) so results are
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Independent substream for (seed, stream). splitmix64 mixing keeps
  // low-entropy seeds apart.
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(mix(seed) ^ mix(stream * 0x9e3779b97f4a7c15ULL + 1)));
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

  // Standard normal via Box-Muller. Stateless between calls (no cached
  // second variate) so serialized engine state fully describes the stream.
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = gen_() % i;
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string state_string() const {
    std::ostringstream os;
    os << gen_;
    return os.str();
  }

  void set_state_string(const std::string& s) {
    std::istringstream is(s);
    is >> gen_;
  }

 private:
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 gen_;
};

}  // namespace mapd
