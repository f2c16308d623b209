#include "volind/random.hpp"

namespace volind {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream RandomStream::derive(std::uint64_t master, std::initializer_list<std::uint64_t> key) {
    std::uint64_t h = splitmix64(master);
    for (std::uint64_t k : key) {
        h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
    }
    return RandomStream(h);
}

std::uint64_t RandomStream::poisson(double mean) {
    if (mean <= 0.0) {
        return 0;
    }
    return static_cast<std::uint64_t>(std::poisson_distribution<long long>(mean)(engine_));
}

}  // namespace volind
