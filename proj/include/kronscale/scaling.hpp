/**
 * @file scaling.hpp
 * @brief Intersection types, the Kronecker-scaling decomposition of the
 *        balanced tripartitioning tensor P_n, Yates evaluation of Kronecker
 *        powers, and the uniform P_n circuit builder.
 *
 * Ground elements of P_n are 0..3n-1; the blocks are U_i = {3b i, ..., 3b i + 3b - 1}.
 * For a type tau = (alpha, beta, gamma) the blocks are grouped by the
 * concentration partition, and each group j is padded by a set V_j (split into
 * V_j^alpha, V_j^beta, V_j^gamma) so that every projected part has exactly
 * d_eff elements.  Padding elements are virtual: they never appear as circuit
 * variables, they only fix which variables of the Kronecker power survive the
 * restriction.
 *
 * Padding is adaptive by default: d_eff = bg + Delta with Delta the largest
 * exact group deviation over all types.  The worst-case padding 36b can be
 * requested for inspection (paper_padding), but it is far beyond what can be
 * built or verified.
 */
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "kronscale/circuit.hpp"
#include "kronscale/tensor.hpp"

namespace kronscale {

/// b, g, s with n = b g s and r = g s blocks of size 3b.
struct BlockStructure {
    unsigned b = 1, g = 1, s = 1;

    unsigned n() const { return b * g * s; }
    unsigned r() const { return g * s; }
    /// Elements of block i as a mask over [3n].
    Mask block(unsigned i) const { return low_bits(3 * b) << (3 * b * i); }
    /// Throws InvalidArgument for zero parameters, TooLarge if 3n > 63.
    void validate() const;
};

/// (alpha, beta, gamma), each an r-vector summing to n with alpha_i + beta_i + gamma_i = 3b.
struct IntersectionType {
    std::vector<unsigned> alpha, beta, gamma;

    const std::vector<unsigned>& side(int k) const { return k == 0 ? alpha : k == 1 ? beta : gamma; }
    friend bool operator==(const IntersectionType&, const IntersectionType&) = default;
    friend auto operator<=>(const IntersectionType&, const IntersectionType&) = default;
};

/// Default cap on the number of enumerated types.
inline constexpr std::size_t kTypeBudget = std::size_t{1} << 22;

/// All intersection types in lexicographic order of (alpha, beta, gamma).
std::vector<IntersectionType> enumerate_types(const BlockStructure& bs, std::size_t budget = kTypeBudget);

/// The type of a balanced tripartition of [3n].
IntersectionType type_of(const BlockStructure& bs, const Triple& t);

/// One summand of the decomposition: a type with its groups and padding.
struct ScalingComponent {
    IntersectionType type;
    std::vector<std::vector<unsigned>> groups;     ///< G_j: block indices, sorted
    std::vector<std::array<unsigned, 3>> padding;  ///< |V_j^alpha|, |V_j^beta|, |V_j^gamma|
    unsigned deviation = 0;                        ///< max_j,side |sum_{G_j} alpha_i - bg|

    /// Ground elements of group j (the U-part of the padded block), sorted.
    Mask group_ground(const BlockStructure& bs, unsigned j) const;
};

struct ScalingOptions {
    bool paper_padding = false;        ///< pad to bg + 36b instead of the adaptive bound
    std::size_t type_budget = kTypeBudget;
};

struct ScalingDecomposition {
    BlockStructure bs;
    unsigned delta = 0;   ///< padding slack: d_eff - bg
    unsigned d_eff = 0;   ///< side of every Kronecker factor P_{d_eff}
    bool paper_padding = false;
    std::vector<ScalingComponent> components;  ///< one per type, in type order

    unsigned pad_size() const { return 3 * delta; }  ///< |V_j|
};

/**
 * Computes the groups (concentration partition of v_i = (alpha_i, beta_i,
 * gamma_i)/3b into s groups of g) and the padding of every type.
 * Throws InternalError if a padding size would be negative.
 */
ScalingDecomposition decompose_P(const BlockStructure& bs, const ScalingOptions& opt = {});

/**
 * The restriction of the Kronecker-power variable indexed by the per-group
 * subsets `parts` (parts[j] is a subset of [3 d_eff], mapped onto group j's
 * padded block) for side k (0 = x, 1 = y, 2 = z).  Returns the original
 * variable's subset of [3n], or nullopt when the restriction sends the
 * variable to zero.
 */
std::optional<Mask> restrict_variable(const ScalingDecomposition& sd, const ScalingComponent& comp, int side,
                                      std::span<const Mask> parts);

struct ScalingCheck {
    bool ok = true;
    std::size_t types = 0;
    std::size_t monomials = 0;  ///< projected monomials over all components (with multiplicity)
    std::size_t expected = 0;   ///< number of balanced tripartitions of [3n]
    unsigned d_eff = 0;
    Triple counterexample{};    ///< least tripartition with multiplicity != 1
    std::size_t multiplicity = 0;
};

/**
 * Exhaustive check of the decomposition identity: projects every nonzero
 * monomial of every restricted Kronecker power and compares the multiset to
 * the tripartitions of [3n].  Requires n <= 5.
 */
ScalingCheck verify_scaling(const BlockStructure& bs, const ScalingOptions& opt = {});

// ------------------------------------------------------------ Yates

/// Default arc budget for generated circuits.
inline constexpr std::size_t kArcBudget = std::size_t{1} << 28;

/// Row-wise sparse view of a decomposition, shared across many Yates copies.
struct PreparedDecomposition {
    const RankDecomposition* dec = nullptr;
    /// rows[k][i] = nonzero (rank index, coefficient) pairs of row i of U/V/W.
    std::array<std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>>, 3> rows;

    explicit PreparedDecomposition(const RankDecomposition& d);
    std::size_t side_size(int k) const { return rows[k].size(); }
};

/// Gate for the variable of side k indexed by a tuple of side indices.
using TupleBinder = std::function<GateId(int side, std::span<const std::uint32_t> tuple)>;

/**
 * Builds the s-th Kronecker power polynomial of the decomposed tensor inside
 * `c`, restricted to the input tuples whose t-th index lies in
 * allowed[side][t] (all other inputs are structural zeros).  Rank indices
 * that cannot receive a nonzero value on all three sides are skipped.
 * Returns the output gate, or kNoGate if the result is structurally zero.
 * Throws TooLarge when the circuit grows beyond `arc_budget` arcs.
 */
GateId yates_into(Circuit& c, const PreparedDecomposition& pd, unsigned s,
                  const std::array<std::vector<std::vector<std::uint32_t>>, 3>& allowed, const TupleBinder& bind,
                  std::size_t arc_budget = kArcBudget);

/**
 * Standalone Yates circuit for the s-th Kronecker power.  The variable for
 * the index tuple (i_1..i_s) of side x is named x:{...} after the subset
 * union_t side_x[i_t] shifted by t * period (period 0 = ground width of the
 * decomposition), i.e. the variables of kronecker_power(T, s, period).
 */
Circuit yates_circuit(const RankDecomposition& dec, unsigned s, unsigned period = 0,
                      std::size_t arc_budget = kArcBudget);

// ------------------------------------------------------------ P_n builder

/// Supplies a rank decomposition of P_d (ground [3d]); throws ProviderError.
using DecompositionProvider = std::function<RankDecomposition(unsigned d)>;

/// Provider returning trivial_decomposition(generate_P(d)).
DecompositionProvider trivial_provider(FieldSpec spec = FieldSpec::default_prime());
/// Provider returning a fixed decomposition, which must be one of P_d.
DecompositionProvider fixed_provider(RankDecomposition dec);

/// Gate of the P_n variable of side k (0,1,2) for a subset of [3n]; kNoGate = zero.
using SubsetBinder = std::function<GateId(int side, Mask subset)>;

struct BuildStats {
    std::size_t types = 0;
    std::size_t live_types = 0;  ///< types whose Yates copy is not structurally zero
    unsigned d_eff = 0;
    std::size_t rank = 0;
};

/**
 * Adds P_n(x, y, z) to `c` via the decomposition: one zero-aware Yates copy
 * per type, wired through the restriction, summed.  `dec` must decompose
 * P_{sd.d_eff}.  Returns kNoGate if structurally zero.
 */
GateId build_P_into(Circuit& c, const ScalingDecomposition& sd, const RankDecomposition& dec,
                    const SubsetBinder& bind, BuildStats* stats = nullptr, std::size_t arc_budget = kArcBudget);
/// Same, reusing a prepared view of the decomposition across many copies.
GateId build_P_into(Circuit& c, const ScalingDecomposition& sd, const PreparedDecomposition& pd,
                    const SubsetBinder& bind, BuildStats* stats = nullptr, std::size_t arc_budget = kArcBudget);

/**
 * Decomposition of P_n for the given (b, g) together with a verified
 * certificate of P_{d_eff} from the provider (ProviderError otherwise).
 */
struct PPlan {
    ScalingDecomposition sd;
    RankDecomposition dec;
};
PPlan plan_P(unsigned n, unsigned b, unsigned g, const DecompositionProvider& provider, const ScalingOptions& opt = {});


/**
 * Circuit with inputs x:A, y:B, z:C for all n-subsets of [3n] (colex order)
 * and one output P_n.  Throws DivisibilityError unless b g divides n,
 * ProviderError if the provider fails or returns a decomposition that does not
 * verify against P_{d_eff}.
 */
Circuit build_P_circuit(unsigned n, unsigned b, unsigned g, const DecompositionProvider& provider,
                        const ScalingOptions& opt = {}, BuildStats* stats = nullptr,
                        std::size_t arc_budget = kArcBudget);

}  // namespace kronscale
