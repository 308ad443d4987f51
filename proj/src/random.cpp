#include "cpa/random.hpp"

#include <cmath>
#include <numbers>

namespace cpa {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

}  // namespace

std::uint64_t sub_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) {
  std::uint64_t h = splitmix(seed);
  for (std::uint64_t c : coords) h = splitmix(h ^ splitmix(c + 0x632be59bd9b4e019ULL));
  return h;
}

CScalar sample_unit_disk(Rng& rng) {
  const double r = std::sqrt(uniform01(rng));
  const double theta = 2.0 * std::numbers::pi * uniform01(rng);
  return std::polar(r, theta);
}

CVector sample_generic_points(std::size_t count, Rng& rng, double min_separation) {
  CVector pts;
  pts.reserve(count);
  while (pts.size() < count) {
    const CScalar z = sample_unit_disk(rng);
    bool ok = true;
    for (CScalar p : pts) {
      if (std::abs(p - z) < min_separation) {
        ok = false;
        break;
      }
    }
    if (ok) pts.push_back(z);
  }
  return pts;
}

CVector sample_weights(std::size_t count, Rng& rng) {
  CVector w(count);
  for (auto& x : w) {
    const double r = 0.5 + uniform01(rng);
    x = std::polar(r, 2.0 * std::numbers::pi * uniform01(rng));
  }
  return w;
}

CVector sample_gaussian(std::size_t count, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CVector v(count);
  for (auto& x : v) {
    const double re = n(rng);
    x = CScalar{re, n(rng)};
  }
  return v;
}

}  // namespace cpa
