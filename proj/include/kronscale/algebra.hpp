/**
 * @file algebra.hpp
 * @brief Exact field arithmetic, seeded randomness and small dense matrices.
 *
 * Two families of finite fields are supported:
 *   - prime fields Z_p for primes p < 2^62 (products via 128-bit integers,
 *     with a fast path for the default Mersenne prime 2^61 - 1);
 *   - binary extension fields GF(2^w), w in {8,16,32,64}, each with a fixed
 *     irreducible reduction polynomial so serialized values are portable.
 *
 * Field elements are plain canonical 64-bit words.  The hot paths (circuit
 * evaluation, dynamic programs) use the raw-word interface of Field; the
 * tagged FieldElement/field_arith interface exists for API boundaries where
 * mixing elements of different fields must be detected.
 */
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kronscale/errors.hpp"

namespace kronscale {

enum class FieldKind : std::uint8_t { Prime, GF2Ext };

/// Largest prime below 2^61 (the Mersenne prime 2^61 - 1).
inline constexpr std::uint64_t kDefaultPrime = (std::uint64_t{1} << 61) - 1;

/// Identifies a concrete finite field.
struct FieldSpec {
    FieldKind kind = FieldKind::Prime;
    std::uint64_t modulus = kDefaultPrime;  ///< prime kind only
    unsigned width = 0;                     ///< gf2ext kind only
    std::uint64_t poly_low = 0;             ///< reduction polynomial minus x^w

    static FieldSpec prime(std::uint64_t p);
    static FieldSpec gf2(unsigned w);
    static FieldSpec default_prime() { return prime(kDefaultPrime); }
    /// Parses `p=<decimal prime>` or `gf2 w=<8|16|32|64>`.
    static FieldSpec parse(std::string_view text);
    std::string to_string() const;

    bool is_char2() const { return kind == FieldKind::GF2Ext; }
    /// True iff the field has at least `n` elements.
    bool has_at_least(std::uint64_t n) const;

    friend bool operator==(const FieldSpec& a, const FieldSpec& b) {
        return a.kind == b.kind && a.modulus == b.modulus && a.width == b.width &&
               a.poly_low == b.poly_low;
    }
    friend bool operator!=(const FieldSpec& a, const FieldSpec& b) { return !(a == b); }
};

/// Deterministic primality test for 64-bit integers (Miller-Rabin).
bool is_prime_u64(std::uint64_t n);

/**
 * Named, versioned, splittable random generator.
 *
 * The stream is std::mt19937_64 seeded with the 64-bit seed; split() derives
 * an independent child generator through a splitmix64 finalizer, which is how
 * parallel or per-trial code obtains reproducible sub-streams.
 */
class Rng {
public:
    static constexpr const char* kAlgorithm = "mt19937_64+splitmix64/v1";

    explicit Rng(std::uint64_t seed = 1) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t next() { return engine_(); }
    /// Uniform integer in [0, bound) by rejection sampling; bound > 0.
    std::uint64_t below(std::uint64_t bound);
    /// Uniform integer in [lo, hi].
    std::int64_t range(std::int64_t lo, std::int64_t hi);
    /// Bernoulli trial with probability num/den.
    bool chance(std::uint64_t num, std::uint64_t den) { return below(den) < num; }
    /// Child generator for sub-stream `stream`; does not advance this one.
    Rng split(std::uint64_t stream) const;
    /// Child generator drawn from this stream (advances it).
    Rng fork() { return Rng(mix(next())); }

    static std::uint64_t mix(std::uint64_t x);

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Fast raw-word arithmetic in one field.
class Field {
public:
    explicit Field(const FieldSpec& spec);
    Field() : Field(FieldSpec::default_prime()) {}

    const FieldSpec& spec() const { return spec_; }
    bool is_char2() const { return spec_.is_char2(); }

    std::uint64_t zero() const { return 0; }
    std::uint64_t one() const { return 1; }
    bool valid(std::uint64_t a) const;

    std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        if (char2_) return a ^ b;
        std::uint64_t s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    std::uint64_t sub(std::uint64_t a, std::uint64_t b) const {
        if (char2_) return a ^ b;
        return a >= b ? a - b : a + (p_ - b);
    }
    std::uint64_t neg(std::uint64_t a) const {
        if (char2_ || a == 0) return a;
        return p_ - a;
    }
    std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        return char2_ ? gf2_mul(a, b) : prime_mul(a, b);
    }
    std::uint64_t pow(std::uint64_t a, std::uint64_t e) const;
    /// Multiplicative inverse; throws DivisionByZero for 0.
    std::uint64_t inv(std::uint64_t a) const;
    /// Image of a signed integer under the canonical ring map Z -> F.
    std::uint64_t from_int(std::int64_t v) const;
    /// Uniform element (optionally nonzero).
    std::uint64_t random(Rng& rng, bool nonzero = false) const;

private:
    std::uint64_t prime_mul(std::uint64_t a, std::uint64_t b) const;
    std::uint64_t gf2_mul(std::uint64_t a, std::uint64_t b) const;

    FieldSpec spec_;
    bool char2_;
    bool mersenne61_;
    std::uint64_t p_;
    unsigned w_;
    std::uint64_t low_;
    std::uint64_t mask_;
};

/// Field element tagged with its field, for checked API boundaries.
struct FieldElement {
    FieldSpec spec;
    std::uint64_t value = 0;
    friend bool operator==(const FieldElement& a, const FieldElement& b) {
        return a.spec == b.spec && a.value == b.value;
    }
};

enum class FieldOp : std::uint8_t { Add, Sub, Mul, Inv, Pow };

/**
 * Checked single operation.  For Inv only `a` is used; for Pow, `b.value`
 * is the (integer) exponent.  Operands from another field raise
 * FieldMismatch; inverting zero raises DivisionByZero.
 */
FieldElement field_arith(const FieldSpec& spec, FieldOp op, const FieldElement& a,
                         const FieldElement& b);

/// Uniform random element of the field (nonzero if requested).
FieldElement random_element(const FieldSpec& spec, Rng& rng, bool nonzero = false);

/// Formats a canonical value (decimal for prime fields, 0x-hex for GF(2^w)).
std::string format_value(const FieldSpec& spec, std::uint64_t v);
/// Parses decimal or 0x-hex text into a canonical value of the field.
std::uint64_t parse_value(const FieldSpec& spec, std::string_view text);

/// Small dense row-major matrix over a field.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, 0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::uint64_t& at(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    std::uint64_t at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    /// Column submatrix with the listed columns (in order).
    Matrix columns(const std::vector<std::size_t>& cols) const;
    Matrix transpose() const;

    friend bool operator==(const Matrix& x, const Matrix& y) {
        return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.a_ == y.a_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<std::uint64_t> a_;
};

/// Determinant by Gaussian elimination (square matrices only).
std::uint64_t determinant(const Field& f, Matrix m);
/// Rank by Gaussian elimination.
std::size_t rank(const Field& f, Matrix m);
/// Matrix product.
Matrix multiply(const Field& f, const Matrix& a, const Matrix& b);

}  // namespace kronscale
