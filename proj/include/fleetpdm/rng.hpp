// Deterministic randomness. Every consumer derives a named substream from
// a root seed, so per-machine or per-tree work can run in any order (or in
// parallel) without changing a single drawn value. Distribution sampling is
// implemented here rather than with std::*_distribution because the standard
// does not pin those algorithms down across library implementations.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace fleetpdm {

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(std::string_view text);

std::uint64_t splitmix64(std::uint64_t& state);

// Seed for a named substream of `seed`. Extra indices select e.g. a machine
// or a tree within the stream family.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view tag,
                             std::uint64_t a = 0, std::uint64_t b = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform01();
  // Uniform integer in [0, n); n > 0. Unbiased via rejection.
  std::uint64_t uniform_below(std::uint64_t n);
  // Standard normal (Box-Muller, no state carried between calls).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  // Exponential waiting time with the given rate (> 0).
  double exponential(double rate);
  // Poisson count; intended for small means (Knuth multiplication method).
  long poisson(double mean);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // First k elements of a Fisher-Yates pass over 0..n-1.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace fleetpdm
