/**
 * @file circuit.hpp
 * @brief Arithmetic-circuit IR: construction, evaluation, formal degrees,
 *        homogenization, skewness analysis, the Baur-Strassen gradient
 *        transform, and the line-oriented text format.
 *
 * A circuit is a DAG stored in topological order: every argument id is
 * smaller than the id of the gate using it.  Gates are inputs (named),
 * constants, n-ary additions and multiplications.  Multiplications built by
 * mul() and by the parser are binary; n-ary products (mul_n) exist only so
 * that non-binary circuits can be represented and detected, and
 * normalize_binary() rewrites them as chains.
 *
 * Size is the arc count (total number of gate arguments).
 *
 * Input names follow a structured grammar:
 *   - `x:{i,j,...}`, `y:{...}`, `z:{...}`: strictly increasing 1-based
 *     element lists (subset-indexed tensor variables, `{}` is the empty set);
 *   - `<letter>:{i,j,...}`: other tuple-indexed variables (e.g. `a:{i,j}`);
 *   - `v:<ident>`: free-form names without whitespace.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "kronscale/algebra.hpp"

namespace kronscale {

using GateId = std::uint32_t;
inline constexpr GateId kNoGate = 0xFFFFFFFFu;

enum class GateKind : std::uint8_t { Input, Const, Add, Mul };

/// Formal degree of a gate; saturates at kDegreeTop (the unknown/overflow marker).
using Degree = std::uint64_t;
inline constexpr Degree kDegreeTop = ~Degree{0};

// ------------------------------------------------------------ input names

/// `side:{...}` for the subset `mask` (bit i is element i+1).
std::string subset_name(char side, std::uint64_t mask);
/// `prefix:{i,j}` (1-based indices supplied by the caller).
std::string tuple_name(char prefix, std::initializer_list<int> idx);
/// `v:<ident>`.
std::string free_name(std::string_view ident);
/// Decodes `x:{...}`/`y:{...}`/`z:{...}` names; false for anything else.
bool parse_subset_name(std::string_view name, char& side, std::uint64_t& mask);
/// Throws InvalidArgument if the name violates the grammar above.
void validate_input_name(std::string_view name);

// ------------------------------------------------------------ the IR

class Circuit {
public:
    explicit Circuit(FieldSpec spec = FieldSpec::default_prime());

    const FieldSpec& spec() const { return spec_; }
    const Field& field() const { return field_; }

    /// Input gate with the given name; returns the existing gate if present.
    GateId input(std::string_view name);
    /// Constant gate; equal values share one gate unless `fresh` is set.
    GateId constant(std::uint64_t value, bool fresh = false);
    GateId zero();  ///< shared constant-0 gate (created on first use)
    GateId one();   ///< shared constant-1 gate (created on first use)
    GateId add(std::span<const GateId> args);
    GateId add(std::initializer_list<GateId> args) { return add(std::span(args.begin(), args.size())); }
    GateId mul(GateId a, GateId b);
    /// n-ary product gate (fan-in >= 1); not q-skew unless fan-in is 2.
    GateId mul_n(std::span<const GateId> args);

    /// Sum of `terms`, skipping kNoGate entries: kNoGate if empty, the term
    /// itself if single, otherwise one Add gate.
    GateId sum_or_none(std::span<const GateId> terms);
    /// Product where kNoGate denotes a structural zero.
    GateId mul_or_none(GateId a, GateId b) { return a == kNoGate || b == kNoGate ? kNoGate : mul(a, b); }
    /// Replaces kNoGate with the shared zero constant.
    GateId or_zero(GateId g) { return g == kNoGate ? zero() : g; }

    void add_output(GateId g);
    void set_outputs(std::vector<GateId> outs);
    const std::vector<GateId>& outputs() const { return outputs_; }

    std::size_t num_gates() const { return kind_.size(); }
    GateKind kind(GateId g) const { return static_cast<GateKind>(kind_[g]); }
    std::span<const GateId> args(GateId g) const {
        return {args_.data() + beg_[g], static_cast<std::size_t>(beg_[g + 1] - beg_[g])};
    }
    std::uint64_t const_value(GateId g) const { return payload_[g]; }
    /// Index of an input gate among all inputs (creation order).
    std::size_t input_index(GateId g) const { return payload_[g]; }
    const std::string& input_name(GateId g) const { return input_names_[payload_[g]]; }

    std::size_t num_inputs() const { return input_gates_.size(); }
    const std::vector<GateId>& input_gates() const { return input_gates_; }
    const std::vector<std::string>& input_names() const { return input_names_; }
    /// Input gate for `name`, or kNoGate.
    GateId find_input(std::string_view name) const;

    /// Arc count.
    std::size_t size() const { return args_.size(); }

    /// Structural equality (gates, payloads, names, outputs, field).
    friend bool operator==(const Circuit& a, const Circuit& b);

    void reserve(std::size_t gates, std::size_t arcs);

private:
    GateId push(GateKind k, std::uint64_t payload);

    FieldSpec spec_;
    Field field_;
    std::vector<std::uint8_t> kind_;
    std::vector<std::uint64_t> beg_{0};
    std::vector<GateId> args_;
    std::vector<std::uint64_t> payload_;
    std::vector<GateId> input_gates_;
    std::vector<std::string> input_names_;
    std::unordered_map<std::string, GateId> by_name_;
    std::unordered_map<std::uint64_t, GateId> const_cache_;
    std::vector<GateId> outputs_;
};

/// Name -> value assignment (canonical raw values of the circuit's field).
using Assignment = std::unordered_map<std::string, std::uint64_t>;
/// Name -> tagged element assignment (checked against the circuit's field).
using ElementAssignment = std::unordered_map<std::string, FieldElement>;

/// Evaluates all outputs; throws UnassignedInput for a missing name.
std::vector<std::uint64_t> evaluate(const Circuit& c, const Assignment& assignment);
/// Checked variant; throws FieldMismatch when a value belongs to another field.
std::vector<FieldElement> evaluate(const Circuit& c, const ElementAssignment& assignment);
/// Fast path: values indexed by input index (Circuit::input_index order).
std::vector<std::uint64_t> evaluate_inputs(const Circuit& c, std::span<const std::uint64_t> inputs);
/// Values of every gate (same indexing as evaluate_inputs).
std::vector<std::uint64_t> evaluate_all(const Circuit& c, std::span<const std::uint64_t> inputs);

/// Formal degree of every gate (saturating at kDegreeTop).
std::vector<Degree> formal_degrees(const Circuit& c);

/// Least q such that c is q-skew, or nullopt (⊤) when some Mul has fan-in
/// other than 2.  A circuit without Mul gates is 0-skew.
std::optional<Degree> analyze_skew(const Circuit& c);

/// Rewrites every n-ary Mul as a left-to-right chain of binary Muls.
Circuit normalize_binary(const Circuit& c);

/// Removes gates not reachable from an output (inputs are kept, so input
/// indices and names are preserved).
Circuit eliminate_dead(const Circuit& c);

/**
 * Copies `src` into `dst`, replacing each input of `src` by the gate
 * `bind(name)` of `dst` (kNoGate means "structural zero").  Returns the dst
 * gates of src's outputs (kNoGate for outputs that are structurally zero).
 * Zero propagation is structural: products with a zero factor and sums of
 * zeros vanish, so unused parts of `src` are never materialized.
 */
std::vector<GateId> inline_circuit(Circuit& dst, const Circuit& src,
                                   const std::function<GateId(const std::string&)>& bind);

/// Result of homogenize: the circuit plus the component table.
struct Homogenized {
    Circuit circuit;
    Degree degree = 0;
    /// comp[g * (degree + 1) + k] = gate computing the degree-k part of the
    /// original gate g, or kNoGate when that part is structurally zero.
    std::vector<GateId> comp;
    GateId component(GateId g, Degree k) const { return comp[g * (degree + 1) + k]; }
};

/**
 * Splits every gate into homogeneous components of degree 0..d.  Outputs of
 * the result are, for each original output o, its d+1 components in degree
 * order (structurally zero components point to a shared constant 0), so the
 * sum of those components equals the original output.  Size is at most
 * kHomogenizeFactor(q) * d * size(c) for d >= 1, where q is the skewness of
 * the binary-normalized input.  Components of degree > d are dropped;
 * throws DegreeBound if an output has formal degree > d.
 */
Homogenized homogenize(const Circuit& c, Degree d);
/// The documented constant K = 3(q+1) of the homogenization size bound.
inline constexpr std::uint64_t homogenize_factor(Degree q) { return 3 * (q + 1); }

/**
 * Reverse-mode differentiation: a circuit whose outputs are dP/dx for each
 * name in `wrt` (in order).  Inputs absent from `c` yield constant 0.  Size
 * is at most kBaurStrassenFactor * size(c).  Requires a single output and
 * binary Mul gates.
 */
Circuit baur_strassen(const Circuit& c, const std::vector<std::string>& wrt);
inline constexpr std::uint64_t kBaurStrassenFactor = 4;

/// Gate/arc statistics.
struct CircuitStats {
    std::size_t gates = 0, arcs = 0, inputs = 0, constants = 0, adds = 0, muls = 0;
    std::size_t outputs = 0;
    std::size_t depth = 0;
    Degree max_output_degree = 0;
    std::optional<Degree> skew;
};
CircuitStats circuit_stats(const Circuit& c);

/// Writes the text format v1.  Throws InvalidCircuit for non-binary Mul gates.
void serialize(const Circuit& c, std::ostream& out);
std::string serialize(const Circuit& c);
/// Parses the text format v1; throws ParseError with the offending line.
Circuit parse_circuit(std::istream& in);
Circuit parse_circuit(std::string_view text);

}  // namespace kronscale
