/**
 * @file sieving.hpp
 * @brief Randomized determinantal and odd sieving over characteristic-2
 *        fields, the clow-sequence determinant circuit, and the k-path,
 *        3-matroid-intersection and bipartite long-cycle detectors.
 *
 * A sieve takes a circuit for P(x) and a k x n matrix A.  Each variable
 * x_i is replaced by x_i * sum_j y_j A[j,i] (determinantal) or by
 * x_i * (1 + x'_i * sum_j y_j A[j,i]) (odd), the x (and x') are set to
 * random field values, and the coefficient of y_1 ... y_k is extracted.
 * A nonzero value certifies a term m of P with A[., supp(m)] nonsingular
 * (resp. A[., osupp(m)] of full row rank); the test is one-sided.
 *
 * Naming: sieved variables are the circuit's `x:{i}` inputs (i = column i
 * of A), the sieve variables are `y:{j}`, and the odd-sieve companions x'_i
 * are `p:{i}`.
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

#include "kronscale/circuit.hpp"
#include "kronscale/coeffx.hpp"
#include "kronscale/graph.hpp"

namespace kronscale {

/// GF(2^32): Schwartz–Zippel error per trial at most deg / 2^32.
FieldSpec default_sieve_field();

/// A k x n matrix over a characteristic-2 field.
struct SieveMatrix {
    FieldSpec spec;
    Matrix a;
    std::size_t rows() const { return a.rows(); }
    std::size_t cols() const { return a.cols(); }
};

/**
 * k x n Vandermonde matrix A[i][j] = t_j^i for n distinct random nonzero
 * points t_j.  Throws FieldTooSmall if the field has fewer than n+1 elements.
 */
SieveMatrix vandermonde(unsigned k, unsigned n, const FieldSpec& spec, Rng& rng);

/// Coefficient extraction used inside a sieve.
enum class SieveMethod { Auto, Direct, Tripartition };
/// Auto switches from the direct DP to the tripartition path above this k.
inline constexpr unsigned kSieveDirectMaxK = 12;

SieveMethod parse_sieve_method(std::string_view text);

struct SieveOptions {
    unsigned trials = 7;
    SieveMethod method = SieveMethod::Auto;
    ExtractionOptions extraction;
};

struct SieveResult {
    bool found = false;
    unsigned trials_run = 0;
    std::optional<unsigned> hit_trial;  ///< first successful trial (0-based)
};

/// Sieve variables y:{1} .. y:{k}.
std::vector<std::string> sieve_variables(unsigned k);

/**
 * Determinantal substitution x_i -> x_i * sum_j y_j A[j, i] for the inputs
 * named in `xvars` (xvars[i] <-> column i).  The x inputs remain inputs (to
 * receive random values); the result is 1-skew in y when c is 1-skew.
 */
Circuit det_substitute(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a);

/// Odd substitution x_i -> x_i * (1 + p_i * sum_j y_j A[j, i]) with fresh inputs p:{i}.
Circuit odd_substitute(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a);

/**
 * Determinantal sieve.  Throws CharacteristicError outside characteristic 2,
 * FieldTooSmall when |F| < 2k, ShapeError if xvars.size() != A.cols().
 * Stops at the first successful trial.
 */
SieveResult det_sieve(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a, Rng& rng,
                      const SieveOptions& opt = {});

/// Odd sieve (|F| >= deg + k required).
SieveResult odd_sieve(const Circuit& c, const std::vector<std::string>& xvars, const SieveMatrix& a, Rng& rng,
                      const SieveOptions& opt = {});

// ------------------------------------------------------------ determinant

/// Square matrix of gate ids; kNoGate denotes a zero entry.
using GateMatrix = std::vector<std::vector<GateId>>;

/**
 * Clow-sequence determinant (equal to the permanent in characteristic 2)
 * built inside `c`; skew whenever the entries have degree at most one.
 * Throws CharacteristicError outside characteristic 2.
 */
GateId mv_det_into(Circuit& c, const GateMatrix& m);

/// Determinant circuit of a generic k x k matrix with inputs a:{i,j}.
Circuit mv_det_circuit(unsigned k, const FieldSpec& spec);

// ------------------------------------------------------------ k-path

/**
 * P(x) = 1^T A_1 ... A_k alpha with A_i[u,w] = yhat_{i,(u,w)} x_u on arcs
 * and alpha[w] = x_w; labels are drawn from `rng`.  Homogeneous of degree
 * k+1 and 1-skew over inputs x:{v}.  Undirected edges count both ways.
 */
Circuit kpath_circuit(const Graph& g, unsigned k, const FieldSpec& spec, Rng& rng);

/// Path with k edges (k+1 distinct vertices)?  Labels are fresh per trial.
SieveResult kpath_detect(const Graph& g, unsigned k, Rng& rng, const SieveOptions& opt = {},
                         const FieldSpec& spec = default_sieve_field());

// ------------------------------------------------------------ matroid intersection

/// P(x) = det(A diag(x_1..x_m) B^T) over inputs x:{1..m}; ShapeError on mismatch.
Circuit matroid_polynomial(const SieveMatrix& a, const SieveMatrix& b);

/// Is there S with A[., S], B[., S], C[., S] all nonsingular?
SieveResult matroid3_detect(const SieveMatrix& a, const SieveMatrix& b, const SieveMatrix& c, Rng& rng,
                            const SieveOptions& opt = {});

/// Triples over U x V x W (0-based coordinates).
struct TripleSystem {
    unsigned nu = 0, nv = 0, nw = 0;
    std::vector<std::array<unsigned, 3>> triples;
    void validate() const;
};

/// Triples file: `nu nv nw m`, then m lines `u v w` (1-based).
TripleSystem parse_triples(std::istream& in);
TripleSystem parse_triples(std::string_view text);
std::string format_triples(const TripleSystem& t);

/// The three k x m matrices whose j-th columns are the Vandermonde columns of triple j's coordinates.
std::array<SieveMatrix, 3> matching3d_matrices(const TripleSystem& t, unsigned k, const FieldSpec& spec, Rng& rng);

/// k pairwise disjoint triples?
SieveResult matching3d_detect(const TripleSystem& t, unsigned k, Rng& rng, const SieveOptions& opt = {},
                              const FieldSpec& spec = default_sieve_field());

// ------------------------------------------------------------ long cycle

/**
 * det A for G minus edge e = {s, t}: A[u,w] = A[w,u] = x_f for the other
 * edges f (input x:{f+1}), A[t,s] = 1, and A[v,v] = 1 for every vertex.
 */
Circuit longcycle_polynomial(const Graph& g, std::size_t edge, const FieldSpec& spec);

/// Cycle of length at least k in a bipartite graph?
SieveResult longcycle_detect(const Graph& g, unsigned k, Rng& rng, const SieveOptions& opt = {},
                             const FieldSpec& spec = default_sieve_field());

}  // namespace kronscale
