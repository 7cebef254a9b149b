/**
 * @file steinitz.hpp
 * @brief Exact Steinitz prefix rebalancing and the concentration partition.
 *
 * Vectors are rational with a common positive denominator, so every
 * quantity below is computed with exact integer arithmetic.  The norm is
 * the infinity norm throughout.
 *
 * steinitz_permutation() finds a permutation pi minimizing
 *   max_k || sum_{i<=k} u_{pi(i)} - ((k-d)/r) sum_i u_i ||
 * over all permutations.  Because the deviation after k steps depends only
 * on the multiset of vectors placed so far, the search runs over the
 * lattice of per-class placed counts (the "subcollections" of the classic
 * dynamic-programming remark) as a bottleneck shortest-path problem; the
 * last-placed class is recorded per state to trace the permutation back.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kronscale/errors.hpp"

namespace kronscale {

/// Exact nonnegative-denominator rational, kept in lowest terms.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    static Rational make(std::int64_t n, std::int64_t d);
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string to_string() const;

    friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
    }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
};

/// r vectors in Q^d with common denominator `den`.
struct VectorFamily {
    std::size_t dim = 0;
    std::int64_t den = 1;
    std::vector<std::vector<std::int64_t>> nums;  ///< r rows of d numerators

    std::size_t size() const { return nums.size(); }
    /// Infinity norm of vector i.
    Rational norm(std::size_t i) const;
    /// Checks the shape and the bound ||v_i|| <= 1; throws InvalidArgument.
    void validate() const;

    /// Distinct vectors in lexicographic order (the class order used for tie-breaks).
    std::vector<std::vector<std::int64_t>> classes() const;
};

/// Parses `d r` followed by r lines of d rationals `p/q` (or integers).
VectorFamily parse_vector_family(std::istream& in);
VectorFamily parse_vector_family(const std::string& text);

/// Default cap on the number of distinct vectors.
inline constexpr std::size_t kMaxSteinitzClasses = 64;

struct SteinitzResult {
    std::vector<std::size_t> perm;   ///< perm[k] = index of the (k+1)-th vector
    Rational bound;                  ///< achieved max prefix deviation (optimal)
    std::vector<Rational> prefix;    ///< deviation after k+1 vectors, k = 0..r-1
    std::size_t states_explored = 0;
};

/**
 * Optimal prefix ordering.  Throws TooManyClasses if there are more than
 * `max_classes` distinct vectors, TooLarge if the count lattice does not fit
 * in 64-bit state codes.  Ties are broken toward the least class index.
 */
SteinitzResult steinitz_permutation(const VectorFamily& f, std::size_t max_classes = kMaxSteinitzClasses);

/// Prefix deviations of an arbitrary order (for checking and oracles).
std::vector<Rational> prefix_deviations(const VectorFamily& f, const std::vector<std::size_t>& perm);

struct ConcentrationPartition {
    std::vector<std::vector<std::size_t>> groups;  ///< G_1..G_s (indices sorted)
    std::vector<std::size_t> sizes;                ///< g_1..g_s
    std::vector<Rational> deviation;               ///< per-group infinity-norm deviation
    SteinitzResult steinitz;                       ///< ordering of the centred vectors
};

/**
 * Splits [r] into groups of the given sizes, formed from consecutive
 * blocks of the optimal ordering of u_i = v_i/2 - (1/2r) sum v, so that each
 * group average deviates from the global average by at most 4d/g_j.
 * Throws PartitionSizeError if the sizes do not sum to r or any is zero.
 */
ConcentrationPartition concentration_partition(const VectorFamily& f, const std::vector<std::size_t>& sizes,
                                               std::size_t max_classes = kMaxSteinitzClasses);

/// Exact deviation || (1/|G|) sum_{G} v - (1/r) sum v || of an index set.
Rational group_deviation(const VectorFamily& f, const std::vector<std::size_t>& group);

}  // namespace kronscale
