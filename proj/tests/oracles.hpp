/**
 * @file oracles.hpp
 * @brief Test-only counting oracles written independently of the library:
 *        factorial-sum permanent, permutation-average hafnian and the
 *        folklore subset DP for set partitions.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <vector>

#include "kronscale/algebra.hpp"

namespace kronscale::testing {

/// perm A = sum over all n! permutations of prod_i a_{i, sigma(i)}.
inline std::uint64_t naive_permanent(const Field& f, const Matrix& a) {
    const std::size_t n = a.rows();
    std::vector<std::size_t> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::uint64_t total = 0;
    do {
        std::uint64_t t = f.one();
        for (std::size_t i = 0; i < n; ++i) t = f.mul(t, a.at(i, sigma[i]));
        total = f.add(total, t);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return total;
}

/// haf A = (2^n n!)^{-1} sum_{sigma in S_2n} prod_i a_{sigma(2i), sigma(2i+1)} (prime fields).
inline std::uint64_t permutation_hafnian(const Field& f, const Matrix& a) {
    const std::size_t N = a.rows();
    if (N % 2) return 0;
    std::vector<std::size_t> sigma(N);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::uint64_t total = 0;
    do {
        std::uint64_t t = f.one();
        for (std::size_t i = 0; i < N; i += 2) t = f.mul(t, a.at(sigma[i], sigma[i + 1]));
        total = f.add(total, t);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    std::uint64_t norm = f.one();
    for (std::size_t i = 1; i <= N / 2; ++i) norm = f.mul(norm, f.from_int(static_cast<std::int64_t>(2 * i)));
    return f.mul(total, f.inv(norm));
}

/// ways[U] = number of sub-families partitioning U, by always covering min(U) first.
inline std::uint64_t setpart_dp(unsigned n, const std::vector<std::uint64_t>& members) {
    std::vector<std::uint64_t> ways(std::size_t{1} << n, 0);
    ways[0] = 1;
    for (std::uint64_t u = 1; u < ways.size(); ++u) {
        const std::uint64_t low = u & (~u + 1);
        for (std::uint64_t s : members)
            if ((s & low) && (s & ~u) == 0) ways[u] += ways[u & ~s];
    }
    return ways.back();
}

}  // namespace kronscale::testing
