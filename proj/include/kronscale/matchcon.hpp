/**
 * @file matchcon.hpp
 * @brief Matchings-connectivity machinery: fingerprints, basis matchings,
 *        the matchings connectivity tensor H_q, the GF(2) basis identity,
 *        exhaustive verification of the block (Kronecker) factorization of
 *        H_q, and brute-force validation of the join formula of the
 *        Hamiltonicity dynamic programme over nice tree decompositions.
 *
 * Conventions.  Ground elements and bag positions are 0-based.  A pairing
 * is a list of unordered pairs {u, v} stored with u < v and sorted.  The
 * union of pairings is a multigraph; a doubled pair is a 2-cycle, and the
 * empty union counts as the degenerate (empty) cycle, so that an empty
 * partial solution is consistent with the empty Hamiltonian cycle.
 */
#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kronscale/algebra.hpp"
#include "kronscale/graph.hpp"
#include "kronscale/tensor.hpp"

namespace kronscale {

/// Largest ground set (and bag) handled by fingerprint encodings.
inline constexpr unsigned kMaxFingerprintGround = 8;

using Pairing = std::vector<std::pair<unsigned, unsigned>>;

/// Sorts each pair and the list; throws InvalidArgument on a repeated vertex.
Pairing normalize_pairing(Pairing p);

/**
 * Does the multigraph union of the pairings form exactly one cycle through
 * all touched vertices?  A doubled pair is a 2-cycle; the empty union is
 * the degenerate cycle and counts as true.
 */
bool is_single_cycle(const std::vector<const Pairing*>& parts);
bool is_single_cycle(const Pairing& m1, const Pairing& m2, const Pairing& m3 = {});

// ------------------------------------------------------------ basis matchings

/// B(X, a): X sorted, a holds |X|/2 - 1 bits (bit i = a_{i+1}).
struct BasisMatching {
    std::vector<unsigned> xs;
    std::uint64_t a = 0;
    Pairing edges;
};

/// Number of bits in the index of B(X, .) for |X| = size (0 for |X| <= 2).
unsigned basis_bits(std::size_t size);

/**
 * B(X, a) by the recursion B(X, a0) = B(X - {x_{q-1}, x_q}, a) + {x_{q-1} x_q}
 * and B(X, a1) = B(X - {x_{q-2}, x_q}, a) + {x_{q-2} x_q}; B(empty) = {}.
 * Throws ParityError for odd |X|.
 */
Pairing basis_matching(const std::vector<unsigned>& xs, std::uint64_t a);

/// All 2^{|X|/2-1} basis matchings of X (one, the empty matching, for X = {}).
std::vector<BasisMatching> basis_matchings(const std::vector<unsigned>& xs);

/// The complementary index: all |X|/2 - 1 bits flipped.
std::uint64_t basis_complement(std::size_t size, std::uint64_t a);

/// Edges of the ladder graph Z_X that contains every basis matching.
Pairing ladder_edges(const std::vector<unsigned>& xs);

/// All (|X|-1)!! perfect matchings of the complete graph on X.
std::vector<Pairing> perfect_matchings(const std::vector<unsigned>& xs);

struct BasisIdentityReport {
    bool ok = true;
    std::size_t pairs_checked = 0;
    std::optional<std::pair<Pairing, Pairing>> counterexample;
};

/**
 * Checks [M1 u M2 is a Hamiltonian cycle] == sum_a [M1 u B(X,a) HC][M2 u B(X,~a) HC]
 * (mod 2) over all pairs of perfect matchings of K_X.  ParityError for odd |X|.
 */
BasisIdentityReport verify_basis_identity(const std::vector<unsigned>& xs);

/// Every basis matching of {0..size-1} has at most two edges across each prefix cut.
bool verify_cut_observation(unsigned size);

/**
 * GF(2) rank of the incidence matrix [B u M is HC] between the basis
 * matchings B of {0..size-1} (rows) and all perfect matchings M (columns).
 */
std::size_t basis_incidence_rank(unsigned size);

// ------------------------------------------------------------ fingerprints

/// (d, M) over the ground {0..q-1}: d(v) in {0,1,2}, M a perfect matching of d^{-1}(1).
struct Fingerprint {
    std::vector<std::uint8_t> d;
    Pairing m;

    std::vector<unsigned> ones() const;
    /// Throws InvalidArgument if d or M violate the invariants.
    void validate() const;
    /// 2 bits of d per element in bits 0..15, the partner of each degree-1
    /// element as a nibble at bit 16 + 4v.  Requires q <= 8.
    std::uint64_t code() const;
    static Fingerprint decode(std::uint64_t code, unsigned q);
    friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

/// Basis: M ranges over basis matchings of d^{-1}(1); All: over all perfect matchings.
enum class MatchingFamily { Basis, All };

/// Every fingerprint over {0..q-1}; TooLarge for q > 8.
std::vector<Fingerprint> fingerprints(unsigned q, MatchingFamily family = MatchingFamily::Basis);

/**
 * Entry of the matchings connectivity tensor: d1 + d2 = d3 pointwise and
 * M1 u M2 u M3 a single cycle (or empty).  Ground sizes must agree.
 */
bool connectivity_entry(const Fingerprint& f1, const Fingerprint& f2, const Fingerprint& f3);

/**
 * H_q over basis fingerprints (codes as opaque tensor indices, coefficient 1
 * over GF(2^8)).  TooLarge for q > 8.
 */
Tensor build_H(unsigned q, MatchingFamily family = MatchingFamily::Basis);

/**
 * Restricts H_q to the slice where every element >= q' has the fixed
 * degrees `tail` in the three slots, re-encoded over {0..q'-1}.
 */
Tensor restrict_H(const Tensor& h, unsigned q, unsigned q_prime, const std::array<std::uint8_t, 3>& tail);

// ------------------------------------------------------------ factorization

struct FactorizationReport {
    unsigned q = 0, b = 0, blocks = 0;
    std::size_t triples = 0;          ///< degree-feasible basis fingerprint triples
    std::size_t types = 0;            ///< distinct crossing types among them
    bool type_bound_ok = true;        ///< types <= (20b)^{12 blocks}
    std::size_t expansion_checks = 0, expansion_failures = 0;  ///< basis expansion after contraction
    std::size_t reroute_checks = 0, reroute_failures = 0;      ///< per-term block factorization
    std::size_t coefficient_checks = 0, coefficient_failures = 0;  ///< full sum against build_H
    std::vector<std::string> failures;  ///< first few failing triples with their type and term
    bool ok() const {
        return type_bound_ok && expansion_failures == 0 && reroute_failures == 0 && coefficient_failures == 0;
    }
};

/**
 * Verifies that H_q equals, coefficient by coefficient mod 2, the sum over
 * crossing types and basis terms of the Kronecker product of per-block
 * tensors H_b evaluated at the rerouted fingerprints.  Blocks are
 * consecutive runs of b elements.  Requires q <= 6, b <= 3 (TooLarge else).
 */
FactorizationReport verify_factorization(unsigned q, unsigned b);

// ------------------------------------------------------------ tree decompositions

enum class BagKind { Leaf, IntroduceVertex, IntroduceEdge, Forget, Join };

struct Bag {
    unsigned id = 0;
    std::optional<unsigned> parent;  ///< bag id; none for the root
    BagKind kind = BagKind::Leaf;
    unsigned vertex = 0;                        ///< introduce-vertex / forget
    std::pair<unsigned, unsigned> edge{0, 0};   ///< introduce-edge (0-based, u < v)
    std::vector<unsigned> members;              ///< sorted, 0-based
};

/// Nice tree decomposition; bags are kept in file order.
struct NiceTreeDecomposition {
    std::vector<Bag> bags;

    std::size_t index_of(unsigned id) const;  ///< throws InvalidArgument
    std::size_t root() const;
    std::vector<std::size_t> children(std::size_t index) const;
    /// Checks tree shape, bag-kind rules, root bag empty, every vertex's bags
    /// connected, and every edge of g introduced exactly once.
    void validate(const Graph& g) const;
};

/// Format: one line per bag `bag <id> <parent|-> <kind> [vertex|u-v] {m1,m2,...}`, 1-based vertices.
NiceTreeDecomposition parse_tree_decomposition(std::istream& in);
NiceTreeDecomposition parse_tree_decomposition(std::string_view text);
std::string format_tree_decomposition(const NiceTreeDecomposition& td);

/// Small hand-built instances: C4 with a join over two 2-edge halves, and
/// K4 with a join over {12, 34, 13} and {24, 14, 23}.
std::pair<Graph, NiceTreeDecomposition> c4_join_fixture();
std::pair<Graph, NiceTreeDecomposition> k4_join_fixture();

/// Edge weights drawn uniformly from [1, n^2].
std::vector<std::uint64_t> default_weights(const Graph& g, Rng& rng);

/// Key of a table entry: (fingerprint code over bag positions, weight).
struct TableKey {
    std::uint64_t fingerprint = 0;
    std::uint64_t weight = 0;
    friend auto operator<=>(const TableKey&, const TableKey&) = default;
};

/// Parity tables: for each bag (in decomposition order), the sorted keys with odd count.
struct DpTables {
    std::vector<std::vector<TableKey>> odd;
    std::size_t entries() const;
};

/**
 * t_i[d, w, M] = parity of the number of X subset E_i with deg_X = 2 on
 * V_i - B_i, deg_X = d on B_i, weight w, X u M a single cycle (or empty),
 * and X cycle-free unless d has no 1s.  M ranges over basis matchings of
 * d^{-1}(1) in bag positions.  TooLarge when some |E_i| > 20 or |B_i| > 8.
 */
DpTables bruteforce_tables(const Graph& g, const NiceTreeDecomposition& td,
                           const std::vector<std::uint64_t>& weights);

struct JoinReport {
    bool ok = true;
    std::size_t joins = 0;
    std::size_t entries_checked = 0;
    struct Counterexample {
        unsigned bag = 0;
        Fingerprint f;
        std::uint64_t weight = 0;
        bool lhs = false;
    };
    std::optional<Counterexample> counterexample;
};

/// Checks the join recurrence at every join bag against the brute-force tables.
JoinReport verify_join(const Graph& g, const NiceTreeDecomposition& td, const std::vector<std::uint64_t>& weights);

}  // namespace kronscale
