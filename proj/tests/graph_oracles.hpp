/**
 * @file graph_oracles.hpp
 * @brief Test-only exhaustive oracles for the detection problems: simple
 *        paths and cycles by depth-first search, disjoint triples by
 *        backtracking, and common bases by Gaussian elimination.
 */
#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "kronscale/algebra.hpp"

namespace kronscale::testing {

using EdgeList = std::vector<std::pair<unsigned, unsigned>>;

inline std::vector<std::vector<unsigned>> adjacency(unsigned n, const EdgeList& edges, bool directed) {
    std::vector<std::vector<unsigned>> adj(n);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        if (!directed) adj[v].push_back(u);
    }
    return adj;
}

namespace detail {
inline bool extend_path(const std::vector<std::vector<unsigned>>& adj, unsigned u, unsigned left,
                        std::uint64_t used) {
    if (left == 0) return true;
    for (unsigned w : adj[u])
        if (!(used >> w & 1) && extend_path(adj, w, left - 1, used | std::uint64_t{1} << w)) return true;
    return false;
}

inline bool close_cycle(const std::vector<std::vector<unsigned>>& adj, unsigned start, unsigned u, unsigned len,
                        unsigned k, std::uint64_t used) {
    for (unsigned w : adj[u]) {
        if (w == start && len >= 3 && len >= k) return true;
        // only vertices above the start, so each cycle is rooted at its least vertex
        if (w > start && !(used >> w & 1) &&
            close_cycle(adj, start, w, len + 1, k, used | std::uint64_t{1} << w))
            return true;
    }
    return false;
}
}  // namespace detail

/// Is there a simple path with k edges?
inline bool has_k_path(unsigned n, const EdgeList& edges, bool directed, unsigned k) {
    auto adj = adjacency(n, edges, directed);
    for (unsigned s = 0; s < n; ++s)
        if (detail::extend_path(adj, s, k, std::uint64_t{1} << s)) return true;
    return false;
}

/// Is there a simple cycle of length >= k in an undirected graph?
inline bool has_long_cycle(unsigned n, const EdgeList& edges, unsigned k) {
    auto adj = adjacency(n, edges, false);
    for (unsigned s = 0; s < n; ++s)
        if (detail::close_cycle(adj, s, s, 1, k, std::uint64_t{1} << s)) return true;
    return false;
}

/// Are there k pairwise disjoint triples?
inline bool has_disjoint_triples(const std::vector<std::array<unsigned, 3>>& triples, unsigned k,
                                 std::size_t from = 0, std::uint64_t u = 0, std::uint64_t v = 0,
                                 std::uint64_t w = 0) {
    if (k == 0) return true;
    for (std::size_t i = from; i < triples.size(); ++i) {
        const auto& t = triples[i];
        if ((u >> t[0] & 1) || (v >> t[1] & 1) || (w >> t[2] & 1)) continue;
        if (has_disjoint_triples(triples, k - 1, i + 1, u | std::uint64_t{1} << t[0], v | std::uint64_t{1} << t[1],
                                 w | std::uint64_t{1} << t[2]))
            return true;
    }
    return false;
}

/// Rank of the columns of `a` selected by `cols`, by elimination over `f`.
inline std::size_t column_rank(const Field& f, const Matrix& a, std::uint64_t cols) {
    std::vector<std::vector<std::uint64_t>> m;
    for (std::size_t j = 0; j < a.cols(); ++j) {
        if (!(cols >> j & 1)) continue;
        std::vector<std::uint64_t> col(a.rows());
        for (std::size_t i = 0; i < a.rows(); ++i) col[i] = a.at(i, j);
        m.push_back(std::move(col));
    }
    std::size_t rank = 0;
    for (std::size_t i = 0; i < a.rows() && rank < m.size(); ++i) {
        std::size_t piv = rank;
        while (piv < m.size() && m[piv][i] == 0) ++piv;
        if (piv == m.size()) continue;
        std::swap(m[piv], m[rank]);
        const std::uint64_t inv = f.inv(m[rank][i]);
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == rank || m[r][i] == 0) continue;
            const std::uint64_t factor = f.mul(m[r][i], inv);
            for (std::size_t c = 0; c < a.rows(); ++c) m[r][c] = f.sub(m[r][c], f.mul(factor, m[rank][c]));
        }
        ++rank;
    }
    return rank;
}

/// Is there a k-set of columns that is a basis in each of a, b and c?
inline bool has_common_basis(const Field& f, const Matrix& a, const Matrix& b, const Matrix& c) {
    const std::size_t k = a.rows(), m = a.cols();
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << m); ++s) {
        if (static_cast<std::size_t>(__builtin_popcountll(s)) != k) continue;
        if (column_rank(f, a, s) == k && column_rank(f, b, s) == k && column_rank(f, c, s) == k) return true;
    }
    return false;
}

}  // namespace kronscale::testing
