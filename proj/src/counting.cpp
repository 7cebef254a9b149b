/**
 * @file counting.cpp
 * @brief Permanent, hafnian and set-partition circuits and their
 *        brute-force oracles.
 */
#include "kronscale/counting.hpp"

#include "line_reader.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <istream>
#include <sstream>

namespace kronscale {

namespace {

std::uint64_t parse_entry(const FieldSpec& spec, const std::string& tok, std::size_t line) {
    try {
        if (!tok.empty() && tok[0] == '-') {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (ec != std::errc() || p != tok.data() + tok.size()) throw InvalidArgument("bad integer");
            return Field(spec).from_int(v);
        }
        return parse_value(spec, tok);
    } catch (const InvalidArgument&) {
        throw ParseError(line, "bad field value '" + tok + "' for " + spec.to_string());
    }
}

void check_square(const Matrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("matrix must be square");
}

}  // namespace

CountingMode parse_counting_mode(std::string_view text) {
    if (text == "direct") return CountingMode::Direct;
    if (text == "tri" || text == "tripartition") return CountingMode::Tripartition;
    throw InvalidArgument("unknown mode '" + std::string(text) + "' (expected direct|tri)");
}

// ------------------------------------------------------------ matrices

Matrix parse_matrix(std::istream& in, const FieldSpec& spec) {
    detail::LineReader r(in);
    auto head = r.tokens("matrix order");
    if (head.size() != 1) throw ParseError(r.line(), "expected the matrix order alone on the first line");
    const std::uint64_t n = r.integer(head[0]);
    if (n > 64) throw ParseError(r.line(), "matrix order above 64");
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = r.tokens("row " + std::to_string(i + 1));
        if (row.size() != n)
            throw ParseError(r.line(), "expected " + std::to_string(n) + " entries, got " + std::to_string(row.size()));
        for (std::size_t j = 0; j < n; ++j) m.at(i, j) = parse_entry(spec, row[j], r.line());
    }
    return m;
}

Matrix parse_matrix(std::string_view text, const FieldSpec& spec) {
    std::istringstream in{std::string(text)};
    return parse_matrix(in, spec);
}

std::string format_matrix(const Matrix& m, const FieldSpec& spec) {
    std::ostringstream out;
    out << m.rows() << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? " " : "") << format_value(spec, m.at(i, j));
        out << '\n';
    }
    return out.str();
}

Matrix random_matrix(const Field& f, Rng& rng, unsigned n, bool symmetric) {
    Matrix m(n, n);
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j) {
            if (!symmetric) {
                m.at(i, j) = f.random(rng);
            } else if (i < j) {
                m.at(i, j) = m.at(j, i) = f.random(rng);
            }
        }
    return m;
}

std::string entry_name(unsigned i, unsigned j) {
    return tuple_name('a', {static_cast<int>(i + 1), static_cast<int>(j + 1)});
}

Assignment matrix_assignment(const Matrix& m, bool symmetric) {
    check_square(m);
    Assignment a;
    for (unsigned i = 0; i < m.rows(); ++i)
        for (unsigned j = symmetric ? i + 1 : 0; j < m.cols(); ++j) a[entry_name(i, j)] = m.at(i, j);
    return a;
}

std::vector<std::string> extraction_variables(unsigned n) {
    std::vector<std::string> v;
    v.reserve(n);
    for (unsigned i = 0; i < n; ++i) v.push_back(subset_name('x', Mask{1} << i));
    return v;
}

Matrix border_to_multiple_of_three(const Matrix& m) {
    check_square(m);
    const std::size_t n = m.rows(), n3 = (n + 2) / 3 * 3;
    Matrix out(n3, n3);
    for (std::size_t i = 0; i < n3; ++i)
        for (std::size_t j = 0; j < n3; ++j) out.at(i, j) = i < n && j < n ? m.at(i, j) : (i == j ? 1 : 0);
    return out;
}

// ------------------------------------------------------------ permanent

Circuit build_permanent_circuit(unsigned n, const ExtractionOptions& opt, PermanentStats* stats, FieldSpec spec) {
    if (n == 0 || n % 3 != 0) throw DivisibilityError("block permanent needs 3 | n, got n = " + std::to_string(n));
    if (n > 21) throw TooLarge("block permanent supports n <= 21");
    const unsigned m = n / 3;
    Circuit c(spec);
    std::vector<std::vector<GateId>> a(n, std::vector<GateId>(n));
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j) a[i][j] = c.input(entry_name(i, j));

    // Block l covers rows l*m .. l*m+m-1; table[l][U] (|U| <= m) sums the
    // products of the first |U| rows of the block over bijections onto U.
    const std::size_t full = std::size_t{1} << n;
    std::vector<std::vector<GateId>> table(3, std::vector<GateId>(full, kNoGate));
    std::vector<GateId> terms;
    for (unsigned l = 0; l < 3; ++l) {
        for (Mask u = 1; u < full; ++u) {
            const unsigned k = static_cast<unsigned>(std::popcount(u));
            if (k > m) continue;
            const unsigned row = l * m + k - 1;
            if (k == 1) {
                table[l][u] = a[row][std::countr_zero(u)];
                continue;
            }
            terms.clear();
            for (Mask rest = u; rest; rest &= rest - 1) {
                const unsigned j = static_cast<unsigned>(std::countr_zero(rest));
                terms.push_back(c.mul(a[row][j], table[l][u & ~(Mask{1} << j)]));
            }
            table[l][u] = c.add(terms);
        }
    }
    PermanentStats st;
    st.bottom_arcs = c.size();

    PPlan plan = plan_P(m, opt.b ? opt.b : 1, opt.g ? opt.g : 1, opt.provider ? opt.provider : trivial_provider(spec));
    PreparedDecomposition pd(plan.dec);
    auto bind = [&](int side, Mask s) -> GateId { return table[side][s]; };
    GateId top = build_P_into(c, plan.sd, pd, bind, &st.p, opt.arc_budget);
    c.add_output(c.or_zero(top));
    st.top_arcs = c.size() - st.bottom_arcs;
    if (stats) *stats = st;
    return c;
}

Circuit permanent_polynomial(unsigned n, FieldSpec spec) {
    Circuit c(spec);
    std::vector<std::vector<GateId>> a(n, std::vector<GateId>(n));
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j) a[i][j] = c.input(entry_name(i, j));
    std::vector<GateId> x;
    for (const auto& name : extraction_variables(n)) x.push_back(c.input(name));
    GateId acc = c.one();
    std::vector<GateId> terms;
    for (unsigned i = 0; i < n; ++i) {
        terms.clear();
        for (unsigned j = 0; j < n; ++j) terms.push_back(c.mul(a[i][j], x[j]));
        acc = c.mul(c.sum_or_none(terms), acc);
    }
    c.add_output(acc);
    return c;
}

Circuit permanent_circuit(unsigned n, CountingMode mode, const ExtractionOptions& opt, FieldSpec spec) {
    if (mode == CountingMode::Tripartition) return build_permanent_circuit(n, opt, nullptr, spec);
    return extract_coeff_direct(permanent_polynomial(n, spec), extraction_variables(n), opt);
}

std::uint64_t permanent_ryser(const Field& f, const Matrix& a) {
    check_square(a);
    const std::size_t n = a.rows();
    if (n > 24) throw TooLarge("Ryser permanent supports n <= 24");
    if (n == 0) return f.one();
    // perm A = sum_{S nonempty} (-1)^{n-|S|} prod_i sum_{j in S} a_ij,
    // visiting S in Gray-code order so each step changes one column.
    std::vector<std::uint64_t> rowsum(n, 0);
    std::uint64_t total = 0;
    Mask gray = 0;
    for (Mask k = 1; k < (Mask{1} << n); ++k) {
        const unsigned j = static_cast<unsigned>(std::countr_zero(k));
        gray ^= Mask{1} << j;
        const bool added = gray >> j & 1;
        for (std::size_t i = 0; i < n; ++i)
            rowsum[i] = added ? f.add(rowsum[i], a.at(i, j)) : f.sub(rowsum[i], a.at(i, j));
        std::uint64_t prod = f.one();
        for (std::size_t i = 0; i < n && prod; ++i) prod = f.mul(prod, rowsum[i]);
        const bool negative = (n - static_cast<std::size_t>(std::popcount(gray))) % 2 == 1;
        total = negative ? f.sub(total, prod) : f.add(total, prod);
    }
    return total;
}

// ------------------------------------------------------------ hafnian

Circuit hafnian_polynomial(unsigned two_n, FieldSpec spec) {
    if (two_n % 2 != 0) throw ParityError("hafnian needs an even order, got " + std::to_string(two_n));
    if (two_n > 48) throw TooLarge("hafnian circuit supports order <= 48");
    const unsigned N = two_n, n = two_n / 2;
    Circuit c(spec);
    // Entry inputs first (i < j), then the red-edge variables.
    std::vector<std::vector<GateId>> a(N, std::vector<GateId>(N, kNoGate));
    for (unsigned i = 0; i < N; ++i)
        for (unsigned j = i + 1; j < N; ++j) a[i][j] = a[j][i] = c.input(entry_name(i, j));
    std::vector<GateId> x;
    for (const auto& name : extraction_variables(n)) x.push_back(c.input(name));

    // Vertices are 0-based; the red edge of v is {v, v^1} with variable
    // x[v/2].  A clow starts at an even anchor h with its red edge, then
    // alternates black and red steps through vertices > h, and closes with
    // a black step back to h.  Anchors increase along the sequence.
    //   closed[h+1]  : sequences whose last clow is anchored at h (slot 0 = empty)
    //   red[i*N+h]   : open clow at i, last step red
    //   black[j*N+h] : open clow at j, last step black
    using Terms = std::vector<GateId>;
    const unsigned L = 2 * n;
    std::vector<Terms> closed(N + 1), red(N * N), black(N * N);
    closed[0].push_back(c.one());
    for (unsigned len = 0; len < L; ++len) {
        std::vector<Terms> nclosed(N + 1), nred(N * N), nblack(N * N);
        // Start a new clow at anchor h after any sequence ending below h.
        GateId below = kNoGate;
        for (unsigned h = 0; h < N; h += 2) {
            Terms acc;
            if (below != kNoGate) acc.push_back(below);
            for (unsigned slot = h == 0 ? 0 : h - 1; slot <= h; ++slot)
                if (GateId g = c.sum_or_none(closed[slot]); g != kNoGate) acc.push_back(g);
            below = c.sum_or_none(acc);
            if (below != kNoGate) nred[(h + 1) * N + h].push_back(c.mul(x[h / 2], below));
        }
        for (unsigned h = 0; h < N; h += 2) {
            for (unsigned i = h + 1; i < N; ++i) {
                // Black step from a red-ended state.
                if (GateId g = c.sum_or_none(red[i * N + h]); g != kNoGate) {
                    for (unsigned j = h; j < N; ++j) {
                        if (j == i) continue;
                        GateId t = c.mul(a[i][j], g);
                        (j == h ? nclosed[h + 1] : nblack[j * N + h]).push_back(t);
                    }
                }
                // Red step from a black-ended state.
                if (GateId g = c.sum_or_none(black[i * N + h]); g != kNoGate) {
                    const unsigned p = i ^ 1u;
                    if (p > h) nred[p * N + h].push_back(c.mul(x[i / 2], g));
                }
            }
        }
        closed = std::move(nclosed);
        red = std::move(nred);
        black = std::move(nblack);
    }
    Terms fin;
    for (unsigned slot = 1; slot <= N; ++slot)
        if (GateId g = c.sum_or_none(closed[slot]); g != kNoGate) fin.push_back(g);
    if (N == 0) fin.push_back(c.one());
    c.add_output(c.or_zero(c.sum_or_none(fin)));
    return eliminate_dead(c);
}

Circuit build_hafnian_circuit(unsigned two_n, CountingMode mode, const ExtractionOptions& opt, FieldSpec spec) {
    Circuit p = hafnian_polynomial(two_n, spec);
    return extract_coeff(p, extraction_variables(two_n / 2),
                         mode == CountingMode::Direct ? ExtractionMethod::Direct : ExtractionMethod::Tripartition, opt);
}

std::uint64_t hafnian_bruteforce(const Field& f, const Matrix& a) {
    check_square(a);
    const std::size_t n = a.rows();
    if (n > 16) throw TooLarge("brute-force hafnian supports order <= 16");
    if (n % 2) return f.zero();
    // Pair the lowest unmatched vertex with every other unmatched vertex.
    auto rec = [&](auto&& self, Mask left) -> std::uint64_t {
        if (!left) return f.one();
        const unsigned i = static_cast<unsigned>(std::countr_zero(left));
        const Mask rest = left & ~(Mask{1} << i);
        std::uint64_t sum = f.zero();
        for (Mask r = rest; r; r &= r - 1) {
            const unsigned j = static_cast<unsigned>(std::countr_zero(r));
            if (a.at(i, j)) sum = f.add(sum, f.mul(a.at(i, j), self(self, rest & ~(Mask{1} << j))));
        }
        return sum;
    };
    return rec(rec, low_bits(static_cast<unsigned>(n)));
}

// ------------------------------------------------------------ set partitions

void SetFamily::validate() const {
    if (n > 64) throw InvalidArgument("set family ground size above 64");
    const Mask ground = low_bits(n);
    for (Mask s : members) {
        if (s & ~ground) throw InvalidArgument("member outside the ground set [" + std::to_string(n) + "]");
        const unsigned size = static_cast<unsigned>(std::popcount(s));
        if (size == 0 || size > q)
            throw InvalidArgument("member of size " + std::to_string(size) + " in a family with member sizes 1.." +
                                  std::to_string(q));
    }
}

SetFamily parse_family(std::istream& in) {
    detail::LineReader r(in);
    auto head = r.tokens("'n q m' header");
    if (head.size() != 3) throw ParseError(r.line(), "expected 'n q m'");
    SetFamily f;
    const std::uint64_t n = r.integer(head[0]), q = r.integer(head[1]), m = r.integer(head[2]);
    if (n > 64) throw ParseError(r.line(), "ground size above 64");
    if (q > n && m > 0) throw ParseError(r.line(), "member size exceeds the ground size");
    f.n = static_cast<unsigned>(n);
    f.q = static_cast<unsigned>(q);
    for (std::uint64_t k = 0; k < m; ++k) {
        auto row = r.tokens("member " + std::to_string(k + 1));
        if (row.empty() || row.size() > q)
            throw ParseError(r.line(), "expected between 1 and " + std::to_string(q) + " elements");
        Mask s = 0;
        for (const auto& tok : row) {
            const std::uint64_t e = r.integer(tok);
            if (e < 1 || e > n) throw ParseError(r.line(), "element " + tok + " outside [1, " + std::to_string(n) + "]");
            if (s >> (e - 1) & 1) throw ParseError(r.line(), "repeated element " + tok);
            s |= Mask{1} << (e - 1);
        }
        f.members.push_back(s);
    }
    return f;
}

SetFamily parse_family(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_family(in);
}

std::string format_family(const SetFamily& f) {
    std::ostringstream out;
    out << f.n << ' ' << f.q << ' ' << f.members.size() << '\n';
    for (Mask s : f.members) {
        bool first = true;
        for (Mask r = s; r; r &= r - 1) {
            out << (first ? "" : " ") << std::countr_zero(r) + 1;
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

Circuit set_partition_polynomial(const SetFamily& f, FieldSpec spec) {
    f.validate();
    Circuit c(spec);
    std::vector<GateId> x;
    for (const auto& name : extraction_variables(f.n)) x.push_back(c.input(name));
    GateId acc = c.one();
    for (Mask s : f.members) {
        GateId mono = kNoGate;
        for (Mask r = s; r; r &= r - 1) {
            GateId xi = x[std::countr_zero(r)];
            mono = mono == kNoGate ? xi : c.mul(xi, mono);
        }
        GateId factor = c.add({c.one(), mono});
        acc = c.mul(factor, acc);
    }
    c.add_output(acc);
    return c;
}

std::uint64_t count_set_partitions(const SetFamily& f, CountingMode mode, const ExtractionOptions& opt,
                                   FieldSpec spec) {
    Circuit p = set_partition_polynomial(f, spec);
    Circuit e = extract_coeff(p, extraction_variables(f.n),
                              mode == CountingMode::Direct ? ExtractionMethod::Direct : ExtractionMethod::Tripartition,
                              opt);
    return evaluate(e, Assignment{})[0];
}

bool set_partition_count_may_wrap(const SetFamily& f, const FieldSpec& spec) {
    const std::size_t m = f.members.size();
    if (spec.is_char2()) return m >= 1;
    return m >= 64 || (std::uint64_t{1} << m) >= spec.modulus;
}

std::uint64_t setpart_bruteforce(const SetFamily& f) {
    f.validate();
    const std::size_t m = f.members.size();
    if (m > 24) throw TooLarge("brute-force set partition supports at most 24 members");
    const Mask ground = low_bits(f.n);
    std::uint64_t count = 0;
    for (Mask pick = 0; pick < (Mask{1} << m); ++pick) {
        Mask covered = 0;
        bool disjoint = true;
        for (Mask r = pick; r && disjoint; r &= r - 1) {
            const Mask s = f.members[std::countr_zero(r)];
            disjoint = (covered & s) == 0;
            covered |= s;
        }
        if (disjoint && covered == ground) ++count;
    }
    return count;
}

}  // namespace kronscale
