/**
 * @file tensor.hpp
 * @brief Explicit set-multilinear three-tensors, Kronecker products,
 *        balanced-tripartitioning generators and rank-decomposition
 *        certificates.
 *
 * A tensor S(x,y,z) = sum s_{ABC} x_A y_B z_C is stored as a sparse map from
 * (A,B,C) triples of 64-bit subset masks over a ground set of at most 63
 * elements (bit i is element i; text formats use 1-based labels i+1).
 * Within one side, subsets are ordered colexicographically, which for
 * single-word masks coincides with numeric order.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "kronscale/algebra.hpp"

namespace kronscale {

using Mask = std::uint64_t;

/// Index of one tensor coefficient.
struct Triple {
    Mask a = 0, b = 0, c = 0;
    friend bool operator==(const Triple& x, const Triple& y) {
        return x.a == y.a && x.b == y.b && x.c == y.c;
    }
    friend bool operator<(const Triple& x, const Triple& y) {
        if (x.a != y.a) return x.a < y.a;
        if (x.b != y.b) return x.b < y.b;
        return x.c < y.c;
    }
};

struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
        std::uint64_t h = t.a * 0x9E3779B97F4A7C15ULL;
        h ^= (t.b + 0x632BE59BD9B4E019ULL) * 0xC2B2AE3D27D4EB4FULL;
        h ^= (t.c + 0x165667B19E3779F9ULL) * 0x94D049BB133111EBULL;
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

/// Mask with the low `n` bits set.
inline constexpr Mask low_bits(unsigned n) { return n >= 64 ? ~Mask{0} : ((Mask{1} << n) - 1); }
/// Number of ground positions spanned by `ground` (index of highest element + 1).
unsigned ground_width(Mask ground);

class Tensor {
public:
    Tensor() : Tensor(FieldSpec::default_prime(), 0) {}
    /// Empty tensor over `ground` (bit mask of elements, at most 63 of them).
    Tensor(FieldSpec spec, Mask ground);
    /// Tensor whose keys are opaque 64-bit codes rather than subsets of a
    /// ground set (used for fingerprint-indexed tensors).
    static Tensor opaque(FieldSpec spec);

    const FieldSpec& spec() const { return spec_; }
    Mask ground() const { return ground_; }
    bool is_opaque() const { return opaque_; }

    std::uint64_t get(const Triple& t) const;
    /// Sets a coefficient (storing nothing for zero).
    void set(const Triple& t, std::uint64_t v);
    /// Adds to a coefficient.
    void add(const Triple& t, std::uint64_t v);

    std::size_t nnz() const { return entries_.size(); }
    const std::unordered_map<Triple, std::uint64_t, TripleHash>& entries() const { return entries_; }
    /// Nonzero entries sorted by (A,B,C).
    std::vector<std::pair<Triple, std::uint64_t>> sorted_entries() const;

    friend bool operator==(const Tensor& x, const Tensor& y) {
        return x.spec_ == y.spec_ && x.ground_ == y.ground_ && x.opaque_ == y.opaque_ &&
               x.entries_ == y.entries_;
    }

private:
    FieldSpec spec_;
    Mask ground_ = 0;
    bool opaque_ = false;
    Field field_;
    std::unordered_map<Triple, std::uint64_t, TripleHash> entries_;
};

/// Maximum ground size for explicit enumeration of P_q.
inline constexpr unsigned kMaxTripartitionGround = 21;

/// Balanced tripartitioning tensor P_q over `ground` (|ground| = 3q <= 21).
Tensor generate_P(unsigned q, const std::vector<unsigned>& ground,
                  FieldSpec spec = FieldSpec::default_prime());
/// Convenience: P_q over elements 0..3q-1.
Tensor generate_P(unsigned q, FieldSpec spec = FieldSpec::default_prime());

/// Kronecker product on the disjoint union of the grounds.
Tensor kronecker(const Tensor& s, const Tensor& t);
/// Relabels every element i as i + offset.
Tensor shift(const Tensor& t, unsigned offset);
/// s-fold Kronecker power with copy k shifted by k * period
/// (period 0 means ground_width(t.ground())).
Tensor kronecker_power(const Tensor& t, unsigned s, unsigned period = 0);
/// Keeps only entries satisfying `keep`.
Tensor restrict_tensor(const Tensor& t, const std::function<bool(const Triple&)>& keep);

/// Certificate of a rank-r expression: sum over l of
/// (sum_A U[A,l] x_A)(sum_B V[B,l] y_B)(sum_C W[C,l] z_C).
struct RankDecomposition {
    FieldSpec spec = FieldSpec::default_prime();
    std::vector<Mask> side_x, side_y, side_z;
    std::size_t rank = 0;
    Matrix U, V, W;

    /// Union of all subsets listed on the three sides.
    Mask support() const;
};

/// Verification outcome: ok, or the least (A,B,C) where the identity fails.
struct DecompositionCheck {
    bool ok = true;
    Triple counterexample{};
    std::uint64_t expected = 0, got = 0;
};

/**
 * Checks sum_l U[A,l] V[B,l] W[C,l] = s_{ABC} for every triple (entries of the
 * tensor whose subsets are absent from the index lists count as failures).
 * Throws ShapeError on inconsistent dimensions or duplicate index subsets,
 * FieldMismatch when the fields differ.
 */
DecompositionCheck verify_decomposition(const Tensor& t, const RankDecomposition& d);

/// One rank-one term per nonzero entry; sides listed in colex order.
RankDecomposition trivial_decomposition(const Tensor& t);

using SideAssignment = std::unordered_map<Mask, std::uint64_t>;
/// Direct summation of s_{ABC} x_A y_B z_C; throws UnassignedInput for a missing value.
std::uint64_t tensor_eval(const Tensor& t, const SideAssignment& x, const SideAssignment& y,
                          const SideAssignment& z);

/// Matrix-multiplication tensor <n,n,n> = sum a_{ij} b_{jk} c_{ik}; variables
/// a_{ij}, b_{jk}, c_{ik} are the singletons at positions
/// i*n+j, n^2 + j*n+k and 2n^2 + i*n+k (0-based).
Tensor matmul_tensor(unsigned n, FieldSpec spec = FieldSpec::default_prime());

/// Text format `rankdec v1`.
void write_rankdec(const RankDecomposition& d, std::ostream& out);
std::string write_rankdec(const RankDecomposition& d);
RankDecomposition read_rankdec(std::istream& in);
RankDecomposition read_rankdec_string(const std::string& text);
RankDecomposition read_rankdec_file(const std::string& path);

/// Formats a subset as `{i,j,...}` with 1-based labels.
std::string format_subset(Mask m);

}  // namespace kronscale
