#pragma once

#include <cmath>
#include <cstdint>

#include "qelogit/stats.hpp"

namespace qelogit {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256** stream. Substreams are keyed by (master seed, replication,
// unit), so a simulation draws the same numbers regardless of how
// replications are distributed over worker threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : s_) word = splitmix64(s);
    }

    static Rng stream(std::uint64_t master, std::uint64_t replication, std::uint64_t unit) {
        std::uint64_t s1 = master + (replication + 1) * 0x9e3779b97f4a7c15ULL;
        const std::uint64_t a = splitmix64(s1);
        std::uint64_t s2 = a + (unit + 1) * 0xd1342543de82ef95ULL;
        return Rng(splitmix64(s2));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Strictly inside (0,1) so that quantile transforms stay finite.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal(double mean = 0.0, double sd = 1.0) {
        return mean + sd * normal_quantile(uniform01());
    }

    double logistic() {
        const double u = uniform01();
        return std::log(u) - std::log1p(-u);
    }

    double chisq1() {
        const double z = normal();
        return z * z;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

}  // namespace qelogit
