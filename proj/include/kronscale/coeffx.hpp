/**
 * @file coeffx.hpp
 * @brief Compilers that extract the coefficient of the full multilinear
 *        monomial x_1 x_2 ... x_n from a skew arithmetic circuit.
 *
 * Two methods are provided:
 *   - direct: every gate g becomes gates g_S (S a subset of [n]) holding the
 *     coefficient of prod_{i in S} x_i; size O*(2^n).
 *   - tripartition: the circuit is rewritten into a homogeneous 1-skew
 *     layered form, cut at degrees n/3 and 2n/3, the three layers are reduced
 *     to multilinear tables of size C(n, n/3), and they are recombined with
 *     copies of the P_{n/3} circuit from the scaling module.
 *
 * Degrees here count only the extraction variables; every other input is a
 * coefficient (degree 0) and stays an input of the compiled circuit.  A
 * product is q-skew when one factor has extraction degree at most q.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kronscale/circuit.hpp"
#include "kronscale/scaling.hpp"

namespace kronscale {

/// Documented cap on the skewness accepted by both methods.
inline constexpr Degree kMaxExtractionSkew = 4;

enum class ExtractionMethod { Direct, Tripartition };

struct ExtractionOptions {
    Degree max_skew = kMaxExtractionSkew;
    /// Block parameters of the P_{n/3} builder; 0 selects b = g = 1 (s = n/3), which
    /// keeps the base tensor of the Kronecker scaling at P_3 or smaller.
    unsigned b = 0, g = 0;
    DecompositionProvider provider;  ///< empty = trivial certificates
    std::size_t arc_budget = kArcBudget;
};

/// Measured sizes of an extraction.
struct ExtractionStats {
    unsigned n = 0;                 ///< number of extraction variables (after padding)
    std::size_t table_entries = 0;  ///< allocated table cells
    std::size_t cut_y = 0, cut_z = 0, pairs = 0;  ///< tripartition path only
    std::size_t p_copies = 0;
};

/// Extraction-variable degree of every gate (other inputs have degree 0).
std::vector<Degree> variable_degrees(const Circuit& c, const std::vector<std::string>& vars);

/// Inputs of `c` whose name has the given prefix before ':' (or equals it), in input order.
std::vector<std::string> select_variables(const Circuit& c, const std::string& prefix);

/**
 * Direct subset DP.  The result has the non-extraction inputs of `c` (in
 * their original order) and one output per output of `c`.  Throws NotSkew if
 * a product has both factors of degree above opt.max_skew, InvalidArgument if
 * a name in `vars` is repeated or n > 24.
 */
Circuit extract_coeff_direct(const Circuit& c, const std::vector<std::string>& vars,
                             const ExtractionOptions& opt = {}, ExtractionStats* stats = nullptr);

/**
 * Numeric version of the direct DP: the coefficient (per output) at the given
 * values of the non-extraction inputs.
 */
std::vector<std::uint64_t> coeff_direct_value(const Circuit& c, const std::vector<std::string>& vars,
                                              const Assignment& others, Degree max_skew = kMaxExtractionSkew);

/// Padded circuit: output multiplied by fresh extraction variables.
struct PaddedCircuit {
    Circuit circuit;
    std::vector<std::string> vars;
    unsigned n = 0;
};

/// Rounds the number of variables up to a multiple of 3 that is at least 9.
PaddedCircuit pad_degree(const Circuit& c, const std::vector<std::string>& vars);

/**
 * Homogeneous 1-skew layered form used by the tripartition method: every
 * product is (degree-0 gate) * g or (variable) * g, every gate has a single
 * degree, and the output is the degree-n part (up to terms that cannot reach
 * the full multilinear monomial).
 */
struct LayeredCircuit {
    Circuit circuit;
    std::vector<Degree> degree;  ///< per gate of `circuit`
    std::vector<GateId> x;       ///< input gate of each extraction variable
    GateId output = kNoGate;     ///< kNoGate: the coefficient is structurally zero
    unsigned n = 0;
};

/// Builds the layered form (single-output circuits only).
LayeredCircuit layer_circuit(const Circuit& c, const std::vector<std::string>& vars,
                             Degree max_skew = kMaxExtractionSkew);

/**
 * Tripartition method (single-output circuits).  Pads to n' = 3m >= 9 first.
 * The result has the non-extraction inputs of `c` and one output.
 */
Circuit extract_coeff_tripartition(const Circuit& c, const std::vector<std::string>& vars,
                                   const ExtractionOptions& opt = {}, ExtractionStats* stats = nullptr);

/// Dispatches on the method.
Circuit extract_coeff(const Circuit& c, const std::vector<std::string>& vars, ExtractionMethod method,
                      const ExtractionOptions& opt = {}, ExtractionStats* stats = nullptr);

}  // namespace kronscale
