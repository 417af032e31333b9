#include "qelogit/score_class.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

#include "qelogit/panel.hpp"

namespace qelogit {

std::uint64_t binomial(int n, int m) {
    if (m < 0 || m > n) return 0;
    m = std::min(m, n - m);
    std::uint64_t r = 1;
    for (int i = 1; i <= m; ++i) {
        r = r * static_cast<std::uint64_t>(n - m + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

namespace {

ScoreClass enumerate(int T, int y_plus) {
    ScoreClass sc;
    sc.T = T;
    sc.y_plus = y_plus;
    sc.configs.reserve(binomial(T, y_plus));
    if (y_plus == 0) {
        sc.configs.push_back(0u);
        return sc;
    }
    // Walk combinations of one-positions in lexicographic tuple order.
    std::vector<int> pos(static_cast<std::size_t>(y_plus));
    for (int i = 0; i < y_plus; ++i) pos[i] = i;
    const int m = y_plus;
    while (true) {
        std::uint32_t mask = 0;
        for (int p : pos) mask |= (1u << p);
        sc.configs.push_back(mask);
        int i = m - 1;
        while (i >= 0 && pos[i] == T - m + i) --i;
        if (i < 0) break;
        ++pos[i];
        for (int j = i + 1; j < m; ++j) pos[j] = pos[j - 1] + 1;
    }
    return sc;
}

}  // namespace

const ScoreClass& score_class(int T, int y_plus) {
    if (T < 1 || T > kMaxEnumerationT)
        throw CapacityError("score class enumeration supports 1 <= T <= " +
                            std::to_string(kMaxEnumerationT) + ", got T=" + std::to_string(T));
    if (y_plus < 0 || y_plus > T)
        throw std::invalid_argument("score_class: y_plus must lie in [0, T]");

    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<ScoreClass>> cache;

    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{T, y_plus}];
    if (!slot) slot = std::make_unique<ScoreClass>(enumerate(T, y_plus));
    return *slot;
}

}  // namespace qelogit
