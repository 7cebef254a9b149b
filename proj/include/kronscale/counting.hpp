/**
 * @file counting.hpp
 * @brief Exact counting applications — permanent, hafnian and set
 *        partitions — built on coefficient extraction and on the uniform
 *        P_n circuits, together with brute-force oracles.
 *
 * Matrix entries enter every circuit as inputs named `a:{i,j}` (1-based);
 * the hafnian uses only i < j.  Extraction variables are `x:{i}`.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "kronscale/circuit.hpp"
#include "kronscale/coeffx.hpp"
#include "kronscale/scaling.hpp"

namespace kronscale {

/// How the coefficient of the full monomial is obtained.
enum class CountingMode { Direct, Tripartition };

/// Parses "direct" / "tri" (also "tripartition"); throws InvalidArgument.
CountingMode parse_counting_mode(std::string_view text);

// ------------------------------------------------------------ matrices

/// Matrix file: the order n, then n rows of n field values.
Matrix parse_matrix(std::istream& in, const FieldSpec& spec);
Matrix parse_matrix(std::string_view text, const FieldSpec& spec);
std::string format_matrix(const Matrix& m, const FieldSpec& spec);

/// Uniformly random n x n matrix; symmetric with zero diagonal if requested.
Matrix random_matrix(const Field& f, Rng& rng, unsigned n, bool symmetric = false);

/// Input name of matrix entry (i, j), 0-based arguments.
std::string entry_name(unsigned i, unsigned j);

/// Assignment of `a:{i,j}` names; for symmetric use only i < j is emitted.
Assignment matrix_assignment(const Matrix& m, bool symmetric = false);

/// Extraction variables x:{1} .. x:{n}.
std::vector<std::string> extraction_variables(unsigned n);

/**
 * Borders `m` with an identity block up to the next multiple of 3; the
 * permanent is unchanged.
 */
Matrix border_to_multiple_of_three(const Matrix& m);

// ------------------------------------------------------------ permanent

/// Size accounting of build_permanent_circuit.
struct PermanentStats {
    std::size_t bottom_arcs = 0;  ///< arcs of the three subset DPs
    std::size_t top_arcs = 0;     ///< arcs of the P_{n/3} combine
    BuildStats p;
};

/// Documented constant K of the bottom-DP bound K * C(n, n/3) * n.
inline constexpr std::size_t kPermanentBottomFactor = 4;

/**
 * Block construction: rows are split into three contiguous blocks of n/3;
 * each block runs a subset DP over columns up to size n/3, and the three
 * tables feed one P_{n/3} circuit over the columns.  All n^2 entry inputs
 * are created in row-major order.  Throws DivisibilityError if 3 does not
 * divide n (n = 0 is rejected as well).  opt.b/opt.g/opt.provider select the
 * P_{n/3} builder as in ExtractionOptions.
 */
Circuit build_permanent_circuit(unsigned n, const ExtractionOptions& opt = {}, PermanentStats* stats = nullptr,
                                FieldSpec spec = FieldSpec::default_prime());

/// prod_i sum_j a_{ij} x_j, a 1-skew circuit whose full-monomial coefficient is perm A.
Circuit permanent_polynomial(unsigned n, FieldSpec spec = FieldSpec::default_prime());

/**
 * Permanent circuit in the given mode: Direct extracts from the product of
 * linear forms; Tripartition is build_permanent_circuit (n divisible by 3).
 */
Circuit permanent_circuit(unsigned n, CountingMode mode, const ExtractionOptions& opt = {},
                          FieldSpec spec = FieldSpec::default_prime());

/// Ryser's inclusion-exclusion formula with Gray-code updates (n <= 24).
std::uint64_t permanent_ryser(const Field& f, const Matrix& a);

// ------------------------------------------------------------ hafnian

/**
 * Alternating-clow polynomial for a symmetric matrix of order two_n.  Red
 * edges are {2i-1, 2i} with variable x_i; black edges carry a:{i,j}.  The
 * coefficient of x_1 ... x_n is haf A.  Throws ParityError for odd order.
 */
Circuit hafnian_polynomial(unsigned two_n, FieldSpec spec = FieldSpec::default_prime());

/// Hafnian circuit over the a:{i,j} inputs (i < j).
Circuit build_hafnian_circuit(unsigned two_n, CountingMode mode, const ExtractionOptions& opt = {},
                              FieldSpec spec = FieldSpec::default_prime());

/// Sum over all perfect matchings (order <= 16; odd order gives 0).
std::uint64_t hafnian_bruteforce(const Field& f, const Matrix& a);

// ------------------------------------------------------------ set partitions

/**
 * A family of non-empty subsets of [n] with at most q elements each
 * (duplicates allowed; q-uniform in the usual case); bit i is element i+1.
 */
struct SetFamily {
    unsigned n = 0;
    unsigned q = 0;  ///< largest member size; the polynomial is q-skew
    std::vector<Mask> members;
    /// Throws InvalidArgument if a member is empty, larger than q, outside [n], or n > 64.
    void validate() const;
};

/// Family file: `n q m`, then m lines of at most q distinct elements each.
SetFamily parse_family(std::istream& in);
SetFamily parse_family(std::string_view text);
std::string format_family(const SetFamily& f);

/// prod_{S in F} (1 + prod_{i in S} x_i), a q-skew circuit over x:{1..n}.
Circuit set_partition_polynomial(const SetFamily& f, FieldSpec spec = FieldSpec::default_prime());

/// Number of sub-families partitioning [n], modulo the field characteristic.
std::uint64_t count_set_partitions(const SetFamily& f, CountingMode mode, const ExtractionOptions& opt = {},
                                   FieldSpec spec = FieldSpec::default_prime());

/// True when the exact count may reach the field size (2^|F| >= |field|).
bool set_partition_count_may_wrap(const SetFamily& f, const FieldSpec& spec);

/// Exhaustive count over all 2^|F| sub-families (|F| <= 24).
std::uint64_t setpart_bruteforce(const SetFamily& f);

}  // namespace kronscale
