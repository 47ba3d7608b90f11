#pragma once

#include <cstdint>
#include <stdexcept>

namespace fcs {

// Orders above 20 overflow the exact integer coefficients and are numerically
// meaningless in double precision anyway.
inline constexpr int kMaxCumulantOrder = 20;

// Exact C(n, k) for 0 <= k <= n <= 20, returned as a double.
inline double binomial(int n, int k) {
    if (n < 0 || k < 0 || k > n) throw std::invalid_argument("binomial: bad arguments");
    if (n > kMaxCumulantOrder) throw std::invalid_argument("binomial: order above 20");
    std::uint64_t c = 1;
    if (k > n - k) k = n - k;
    for (int i = 0; i < k; ++i) c = c * static_cast<std::uint64_t>(n - i) / static_cast<std::uint64_t>(i + 1);
    return static_cast<double>(c);
}

// Exact n! / (i! j! k!) with i + j + k = n.
inline double multinomial3(int n, int i, int j, int k) {
    if (i + j + k != n) throw std::invalid_argument("multinomial3: indices must sum to n");
    return binomial(n, i) * binomial(n - i, j);
}

}  // namespace fcs
