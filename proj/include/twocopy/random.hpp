#pragma once

#include <cstdint>
#include <random>

namespace twocopy {

/// Root of a reproducible random stream.
struct Seed {
  std::uint64_t value = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Derives the seed of child stream `index`. Children of one parent are
/// statistically independent, and the mapping is a pure function, so work
/// split across any number of shards draws the same numbers.
constexpr Seed split(Seed parent, std::uint64_t index) noexcept {
  return Seed{detail::splitmix64(detail::splitmix64(parent.value) ^
                                 detail::splitmix64(index + 0x632BE59BD9B4E019ULL))};
}

/// Owning generator for one stream.
class RandomStream {
 public:
  explicit RandomStream(Seed seed) : engine_(detail::splitmix64(seed.value)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

  std::uint64_t binomial(std::uint64_t trials, double p) {
    if (trials == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    std::binomial_distribution<std::uint64_t> dist(trials, p);
    return dist(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace twocopy
