#include "fleetpdm/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fleetpdm {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 14695981039346656037ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a64(std::string_view text) { return fnv1a64(text.data(), text.size()); }

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view tag, std::uint64_t a,
                             std::uint64_t b) {
  std::uint64_t state = seed ^ fnv1a64(tag);
  std::uint64_t h = splitmix64(state);
  state ^= a + 0x9e3779b97f4a7c15ull;
  h ^= splitmix64(state);
  state ^= b + 0xc2b2ae3d27d4eb4full;
  h ^= splitmix64(state);
  return h;
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  // Box-Muller; u1 pulled away from zero so the log stays finite.
  double u1 = 1.0 - uniform01();
  double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential(double rate) {
  if (!(rate > 0)) throw std::invalid_argument("exponential: rate must be positive");
  return -std::log(1.0 - uniform01()) / rate;
}

long Rng::poisson(double mean) {
  if (mean < 0) throw std::invalid_argument("poisson: mean must be non-negative");
  if (mean == 0) return 0;
  // Knuth; fine for the small per-hour intensities used here.
  const double threshold = std::exp(-mean);
  long k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01();
  } while (p > threshold);
  return k - 1;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace fleetpdm
