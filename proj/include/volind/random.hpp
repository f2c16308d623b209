#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace volind {

/// Explicit source of randomness. Every sampling routine takes one by reference;
/// there is no global generator.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for a task identified by `key` under `master`.
    /// The result depends only on (master, key), never on scheduling.
    static RandomStream derive(std::uint64_t master, std::initializer_list<std::uint64_t> key);

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal() { return normal_(engine_); }
    std::uint64_t poisson(double mean);
    std::uint64_t uniform_index(std::uint64_t bound) {
        return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace volind
