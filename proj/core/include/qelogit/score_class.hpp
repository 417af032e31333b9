#pragma once

#include <cstdint>
#include <vector>

namespace qelogit {

// Exact enumeration only; above this cap the class sizes explode
// (C(25,12) is already ~5.2 million configurations).
inline constexpr int kMaxEnumerationT = 25;

std::uint64_t binomial(int n, int m);

// All binary response configurations of length T with total score y_plus.
// Bit (t-1) of a mask holds z_t. Configurations are ordered by ascending
// one-position tuples, so (1,0,0) precedes (0,1,0) precedes (0,0,1).
struct ScoreClass {
    int T = 0;
    int y_plus = 0;
    std::vector<std::uint32_t> configs;

    std::size_t size() const { return configs.size(); }
};

// Cached per (T, y_plus); the cache is safe for concurrent lookup and
// returned references stay valid for the program lifetime.
const ScoreClass& score_class(int T, int y_plus);

}  // namespace qelogit
