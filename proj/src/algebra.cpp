/**
 * @file algebra.cpp
 * @brief Prime-field and GF(2^w) arithmetic, the seeded generator, and dense
 *        Gaussian elimination.
 */
#include "kronscale/algebra.hpp"

#include <charconv>
#include <cstdio>
#include <utility>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define KRONSCALE_HAVE_X86 1
#endif

namespace kronscale {

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

u64 mulmod_u64(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod_u64(u64 a, u64 e, u64 m) {
    u64 r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, m);
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    return r;
}

/// Low part (coefficients below x^w) of the fixed irreducible polynomial.
u64 reduction_low(unsigned w) {
    switch (w) {
        case 8: return 0x1B;   // x^8 + x^4 + x^3 + x + 1
        case 16: return 0x2B;  // x^16 + x^5 + x^3 + x + 1
        case 32: return 0x8D;  // x^32 + x^7 + x^3 + x^2 + 1
        case 64: return 0x1B;  // x^64 + x^4 + x^3 + x + 1
        default: throw InvalidField("unsupported extension width " + std::to_string(w));
    }
}

/// Carry-less 64x64 -> 128 product, software version.
u128 clmul_soft(u64 a, u64 b) {
    u128 r = 0;
    u128 aa = a;
    while (b) {
        if (b & 1) r ^= aa;
        aa <<= 1;
        b >>= 1;
    }
    return r;
}

#ifdef KRONSCALE_HAVE_X86
__attribute__((target("pclmul,sse2"))) u128 clmul_hw(u64 a, u64 b) {
    __m128i va = _mm_set_epi64x(0, static_cast<long long>(a));
    __m128i vb = _mm_set_epi64x(0, static_cast<long long>(b));
    __m128i p = _mm_clmulepi64_si128(va, vb, 0x00);
    u64 lo = static_cast<u64>(_mm_cvtsi128_si64(p));
    u64 hi = static_cast<u64>(_mm_cvtsi128_si64(_mm_unpackhi_epi64(p, p)));
    return (static_cast<u128>(hi) << 64) | lo;
}

bool detect_pclmul() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("pclmul");
}
#endif

const bool kHavePclmul =
#ifdef KRONSCALE_HAVE_X86
    detect_pclmul();
#else
    false;
#endif

inline u128 clmul(u64 a, u64 b) {
#ifdef KRONSCALE_HAVE_X86
    if (kHavePclmul) return clmul_hw(a, b);
#endif
    return clmul_soft(a, b);
}

/// Carry-less product of a 64-bit word with a small (<= 8 bit) polynomial.
inline u128 clmul_small(u64 a, u64 low) {
    u128 r = 0;
    for (unsigned i = 0; low >> i; ++i)
        if ((low >> i) & 1) r ^= static_cast<u128>(a) << i;
    return r;
}

}  // namespace

// ---------------------------------------------------------------- primality

bool is_prime_u64(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // These twelve bases are deterministic for all n < 2^64.
    for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        u64 x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (unsigned r = 1; r < s; ++r) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

// ---------------------------------------------------------------- FieldSpec

FieldSpec FieldSpec::prime(u64 p) {
    if (p >= (u64{1} << 62)) throw InvalidField("prime modulus must be below 2^62");
    if (!is_prime_u64(p)) throw InvalidField("modulus " + std::to_string(p) + " is not prime");
    FieldSpec s;
    s.kind = FieldKind::Prime;
    s.modulus = p;
    s.width = 0;
    s.poly_low = 0;
    return s;
}

FieldSpec FieldSpec::gf2(unsigned w) {
    FieldSpec s;
    s.kind = FieldKind::GF2Ext;
    s.modulus = 2;
    s.width = w;
    s.poly_low = reduction_low(w);
    return s;
}

FieldSpec FieldSpec::parse(std::string_view text) {
    auto trim = [](std::string_view v) {
        while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
        while (!v.empty() && (v.back() == ' ' || v.back() == '\t' || v.back() == '\r'))
            v.remove_suffix(1);
        return v;
    };
    text = trim(text);
    auto parse_uint = [&](std::string_view v) -> u64 {
        v = trim(v);
        u64 out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
            throw InvalidField("bad number in field spec '" + std::string(text) + "'");
        return out;
    };
    if (text.rfind("p=", 0) == 0) return prime(parse_uint(text.substr(2)));
    if (text.rfind("gf2", 0) == 0) {
        std::string_view rest = trim(text.substr(3));
        if (rest.rfind("w=", 0) != 0) throw InvalidField("expected 'gf2 w=<width>'");
        return gf2(static_cast<unsigned>(parse_uint(rest.substr(2))));
    }
    throw InvalidField("unrecognized field spec '" + std::string(text) + "'");
}

std::string FieldSpec::to_string() const {
    if (kind == FieldKind::Prime) return "p=" + std::to_string(modulus);
    return "gf2 w=" + std::to_string(width);
}

bool FieldSpec::has_at_least(u64 n) const {
    if (kind == FieldKind::Prime) return modulus >= n;
    if (width >= 64) return true;
    return (u64{1} << width) >= n;
}

// ---------------------------------------------------------------- Rng

u64 Rng::mix(u64 x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

u64 Rng::below(u64 bound) {
    if (bound == 0) throw InvalidArgument("Rng::below requires a positive bound");
    // Reject the lowest 2^64 mod bound values so the remainder is unbiased.
    const u64 threshold = (0 - bound) % bound;
    for (;;) {
        u64 v = engine_();
        if (v >= threshold) return v % bound;
    }
}

std::int64_t Rng::range(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw InvalidArgument("Rng::range with empty interval");
    u64 span = static_cast<u64>(hi) - static_cast<u64>(lo);
    if (span == ~u64{0}) return static_cast<std::int64_t>(next());
    return lo + static_cast<std::int64_t>(below(span + 1));
}

Rng Rng::split(u64 stream) const { return Rng(mix(seed_ ^ mix(stream + 1))); }

// ---------------------------------------------------------------- Field

Field::Field(const FieldSpec& spec)
    : spec_(spec),
      char2_(spec.kind == FieldKind::GF2Ext),
      mersenne61_(spec.kind == FieldKind::Prime && spec.modulus == kDefaultPrime),
      p_(spec.modulus),
      w_(spec.width),
      low_(spec.poly_low),
      mask_(spec.width >= 64 ? ~u64{0} : ((u64{1} << spec.width) - 1)) {
    if (char2_) {
        if (reduction_low(w_) != low_) throw InvalidField("non-standard reduction polynomial");
    } else if (p_ < 2) {
        throw InvalidField("prime modulus must be at least 2");
    }
}

bool Field::valid(u64 a) const { return char2_ ? (a & ~mask_) == 0 : a < p_; }

u64 Field::prime_mul(u64 a, u64 b) const {
    u128 prod = static_cast<u128>(a) * b;
    if (mersenne61_) {
        u64 lo = static_cast<u64>(prod) & kDefaultPrime;
        u64 hi = static_cast<u64>(prod >> 61);
        u64 s = lo + hi;
        return s >= kDefaultPrime ? s - kDefaultPrime : s;
    }
    return static_cast<u64>(prod % p_);
}

u64 Field::gf2_mul(u64 a, u64 b) const {
    u128 prod = clmul(a, b);
    if (w_ == 64) {
        // Fold the high word twice: deg(low) <= 7 so the second fold is tiny.
        u64 hi = static_cast<u64>(prod >> 64);
        u64 lo = static_cast<u64>(prod);
        u128 f = clmul_small(hi, low_);
        lo ^= static_cast<u64>(f);
        u64 hi2 = static_cast<u64>(f >> 64);
        lo ^= static_cast<u64>(clmul_small(hi2, low_));
        return lo;
    }
    u64 v = static_cast<u64>(prod);  // 2w-1 <= 63 bits
    while (v >> w_) {
        u64 hi = v >> w_;
        v = (v & mask_) ^ static_cast<u64>(clmul_small(hi, low_));
    }
    return v;
}

u64 Field::pow(u64 a, u64 e) const {
    u64 r = 1;
    while (e) {
        if (e & 1) r = mul(r, a);
        a = mul(a, a);
        e >>= 1;
    }
    return r;
}

u64 Field::inv(u64 a) const {
    if (a == 0) throw DivisionByZero("inverse of zero");
    if (char2_) return pow(a, mask_ - 1);  // a^(2^w - 2)
    return pow(a, p_ - 2);
}

u64 Field::from_int(std::int64_t v) const {
    if (char2_) return static_cast<u64>(v) & 1;
    std::int64_t m = static_cast<std::int64_t>(p_);
    std::int64_t r = v % m;
    if (r < 0) r += m;
    return static_cast<u64>(r);
}

u64 Field::random(Rng& rng, bool nonzero) const {
    for (;;) {
        u64 v = char2_ ? (rng.next() & mask_) : rng.below(p_);
        if (!nonzero || v != 0) return v;
    }
}

// ---------------------------------------------------------------- checked API

FieldElement field_arith(const FieldSpec& spec, FieldOp op, const FieldElement& a,
                         const FieldElement& b) {
    if (a.spec != spec) throw FieldMismatch("left operand belongs to " + a.spec.to_string());
    if (op != FieldOp::Inv && op != FieldOp::Pow && b.spec != spec)
        throw FieldMismatch("right operand belongs to " + b.spec.to_string());
    Field f(spec);
    if (!f.valid(a.value)) throw InvalidArgument("left operand is not canonical");
    if (op != FieldOp::Inv && op != FieldOp::Pow && !f.valid(b.value))
        throw InvalidArgument("right operand is not canonical");
    FieldElement r{spec, 0};
    switch (op) {
        case FieldOp::Add: r.value = f.add(a.value, b.value); break;
        case FieldOp::Sub: r.value = f.sub(a.value, b.value); break;
        case FieldOp::Mul: r.value = f.mul(a.value, b.value); break;
        case FieldOp::Inv: r.value = f.inv(a.value); break;
        case FieldOp::Pow: r.value = f.pow(a.value, b.value); break;
    }
    return r;
}

FieldElement random_element(const FieldSpec& spec, Rng& rng, bool nonzero) {
    Field f(spec);
    return FieldElement{spec, f.random(rng, nonzero)};
}

std::string format_value(const FieldSpec& spec, u64 v) {
    if (spec.kind == FieldKind::Prime) return std::to_string(v);
    char buf[24];
    std::snprintf(buf, sizeof buf, "0x%llx", static_cast<unsigned long long>(v));
    return buf;
}

u64 parse_value(const FieldSpec& spec, std::string_view text) {
    u64 out = 0;
    int base = 10;
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
        text.remove_prefix(2);
        base = 16;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out, base);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw InvalidArgument("malformed field value '" + std::string(text) + "'");
    if (!Field(spec).valid(out))
        throw InvalidArgument("value " + std::string(text) + " is not canonical in " +
                              spec.to_string());
    return out;
}

// ---------------------------------------------------------------- matrices

Matrix Matrix::columns(const std::vector<std::size_t>& cols) const {
    Matrix m(rows_, cols.size());
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j] >= cols_) throw ShapeError("column index out of range");
            m.at(i, j) = at(i, cols[j]);
        }
    return m;
}

Matrix Matrix::transpose() const {
    Matrix m(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) m.at(j, i) = at(i, j);
    return m;
}

u64 determinant(const Field& f, Matrix m) {
    if (m.rows() != m.cols()) throw ShapeError("determinant of a non-square matrix");
    const std::size_t n = m.rows();
    u64 det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && m.at(piv, c) == 0) ++piv;
        if (piv == n) return 0;
        if (piv != c) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m.at(piv, j), m.at(c, j));
            det = f.neg(det);
        }
        det = f.mul(det, m.at(c, c));
        u64 iv = f.inv(m.at(c, c));
        for (std::size_t r = c + 1; r < n; ++r) {
            if (m.at(r, c) == 0) continue;
            u64 factor = f.mul(m.at(r, c), iv);
            for (std::size_t j = c; j < n; ++j)
                m.at(r, j) = f.sub(m.at(r, j), f.mul(factor, m.at(c, j)));
        }
    }
    return det;
}

std::size_t rank(const Field& f, Matrix m) {
    std::size_t rk = 0;
    for (std::size_t c = 0; c < m.cols() && rk < m.rows(); ++c) {
        std::size_t piv = rk;
        while (piv < m.rows() && m.at(piv, c) == 0) ++piv;
        if (piv == m.rows()) continue;
        for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m.at(piv, j), m.at(rk, j));
        u64 iv = f.inv(m.at(rk, c));
        for (std::size_t r = rk + 1; r < m.rows(); ++r) {
            if (m.at(r, c) == 0) continue;
            u64 factor = f.mul(m.at(r, c), iv);
            for (std::size_t j = c; j < m.cols(); ++j)
                m.at(r, j) = f.sub(m.at(r, j), f.mul(factor, m.at(rk, j)));
        }
        ++rk;
    }
    return rk;
}

Matrix multiply(const Field& f, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matrix product dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            u64 v = a.at(i, k);
            if (v == 0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                c.at(i, j) = f.add(c.at(i, j), f.mul(v, b.at(k, j)));
        }
    return c;
}

}  // namespace kronscale
