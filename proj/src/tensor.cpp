/**
 * @file tensor.cpp
 * @brief Sparse three-tensors, generators, Kronecker products and rank
 *        decomposition certificates.
 */
#include "kronscale/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace kronscale {

unsigned ground_width(Mask ground) { return ground == 0 ? 0 : 64 - std::countl_zero(ground); }

std::string format_subset(Mask m) {
    std::string s = "{";
    bool first = true;
    for (unsigned i = 0; i < 64; ++i) {
        if (!((m >> i) & 1)) continue;
        if (!first) s += ',';
        s += std::to_string(i + 1);
        first = false;
    }
    return s + "}";
}

// ------------------------------------------------------------ Tensor

Tensor::Tensor(FieldSpec spec, Mask ground) : spec_(spec), ground_(ground), field_(spec) {
    if (ground >> 63) throw TooLarge("ground sets are limited to 63 elements");
}

Tensor Tensor::opaque(FieldSpec spec) {
    Tensor t(spec, 0);
    t.opaque_ = true;
    return t;
}

std::uint64_t Tensor::get(const Triple& t) const {
    auto it = entries_.find(t);
    return it == entries_.end() ? 0 : it->second;
}

void Tensor::set(const Triple& t, std::uint64_t v) {
    if (!field_.valid(v)) throw InvalidArgument("tensor coefficient is not canonical");
    if (!opaque_ && ((t.a | t.b | t.c) & ~ground_))
        throw InvalidArgument("tensor index " + format_subset(t.a | t.b | t.c) + " leaves the ground set");
    if (v == 0) entries_.erase(t);
    else entries_[t] = v;
}

void Tensor::add(const Triple& t, std::uint64_t v) { set(t, field_.add(get(t), v)); }

std::vector<std::pair<Triple, std::uint64_t>> Tensor::sorted_entries() const {
    std::vector<std::pair<Triple, std::uint64_t>> v(entries_.begin(), entries_.end());
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return v;
}

// ------------------------------------------------------------ generators

namespace {

/// All subsets of `pool` of size k (as masks), in colex order.
void subsets_of_size(Mask pool, unsigned k, std::vector<Mask>& out) {
    out.clear();
    std::vector<unsigned> el;
    for (unsigned i = 0; i < 64; ++i)
        if ((pool >> i) & 1) el.push_back(i);
    if (k > el.size()) return;
    // Gosper's hack over index space, mapped back to elements.
    const unsigned n = static_cast<unsigned>(el.size());
    if (k == 0) {
        out.push_back(0);
        return;
    }
    std::uint64_t v = low_bits(k);
    while (!(v >> n)) {
        Mask m = 0;
        for (unsigned i = 0; i < n; ++i)
            if ((v >> i) & 1) m |= Mask{1} << el[i];
        out.push_back(m);
        std::uint64_t t = v | (v - 1);
        v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
    }
}

}  // namespace

Tensor generate_P(unsigned q, const std::vector<unsigned>& ground, FieldSpec spec) {
    if (ground.size() != 3 * q) throw ShapeError("P_q needs exactly 3q ground elements");
    if (ground.size() > kMaxTripartitionGround)
        throw TooLarge("explicit P_q enumeration is limited to 21 ground elements");
    Mask g = 0;
    for (unsigned e : ground) {
        if (e >= 63) throw TooLarge("ground element beyond 63");
        if ((g >> e) & 1) throw InvalidArgument("repeated ground element");
        g |= Mask{1} << e;
    }
    Tensor t(spec, g);
    std::vector<Mask> as, bs;
    subsets_of_size(g, q, as);
    for (Mask a : as) {
        subsets_of_size(g & ~a, q, bs);
        for (Mask b : bs) t.set({a, b, g & ~a & ~b}, 1);
    }
    return t;
}

Tensor generate_P(unsigned q, FieldSpec spec) {
    std::vector<unsigned> ground(3 * q);
    for (unsigned i = 0; i < 3 * q; ++i) ground[i] = i;
    return generate_P(q, ground, spec);
}

Tensor kronecker(const Tensor& s, const Tensor& t) {
    if (s.spec() != t.spec()) throw FieldMismatch("Kronecker product of tensors over different fields");
    if (s.is_opaque() || t.is_opaque()) throw InvalidArgument("Kronecker product needs subset-indexed tensors");
    if (s.ground() & t.ground()) throw GroundOverlap("grounds share " + format_subset(s.ground() & t.ground()));
    Tensor r(s.spec(), s.ground() | t.ground());
    Field f(s.spec());
    for (const auto& [k1, v1] : s.entries())
        for (const auto& [k2, v2] : t.entries())
            r.set({k1.a | k2.a, k1.b | k2.b, k1.c | k2.c}, f.mul(v1, v2));
    return r;
}

Tensor shift(const Tensor& t, unsigned offset) {
    if (t.is_opaque()) throw InvalidArgument("cannot relabel an opaque tensor");
    if (ground_width(t.ground()) + offset > 63) throw TooLarge("shifted ground exceeds 63 elements");
    Tensor r(t.spec(), t.ground() << offset);
    for (const auto& [k, v] : t.entries()) r.set({k.a << offset, k.b << offset, k.c << offset}, v);
    return r;
}

Tensor kronecker_power(const Tensor& t, unsigned s, unsigned period) {
    if (s == 0) throw InvalidArgument("Kronecker power needs s >= 1");
    if (period == 0) period = ground_width(t.ground());
    Tensor acc = t;
    for (unsigned k = 1; k < s; ++k) acc = kronecker(acc, shift(t, k * period));
    return acc;
}

Tensor restrict_tensor(const Tensor& t, const std::function<bool(const Triple&)>& keep) {
    Tensor r = t.is_opaque() ? Tensor::opaque(t.spec()) : Tensor(t.spec(), t.ground());
    for (const auto& [k, v] : t.entries())
        if (keep(k)) r.set(k, v);
    return r;
}

Tensor matmul_tensor(unsigned n, FieldSpec spec) {
    if (3 * n * n > 63) throw TooLarge("matrix-multiplication tensor exceeds 63 ground elements");
    Tensor t(spec, low_bits(3 * n * n));
    for (unsigned i = 0; i < n; ++i)
        for (unsigned j = 0; j < n; ++j)
            for (unsigned k = 0; k < n; ++k)
                t.set({Mask{1} << (i * n + j), Mask{1} << (n * n + j * n + k), Mask{1} << (2 * n * n + i * n + k)},
                      1);
    return t;
}

// ------------------------------------------------------------ decompositions

Mask RankDecomposition::support() const {
    Mask m = 0;
    for (const auto* side : {&side_x, &side_y, &side_z})
        for (Mask s : *side) m |= s;
    return m;
}

namespace {

void check_shape(const std::vector<Mask>& side, const Matrix& m, std::size_t r, const char* name) {
    if (m.rows() != side.size() || m.cols() != r)
        throw ShapeError(std::string(name) + " matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(side.size()) + "x" +
                         std::to_string(r));
    std::set<Mask> seen(side.begin(), side.end());
    if (seen.size() != side.size()) throw ShapeError(std::string(name) + " side lists a subset twice");
}

}  // namespace

DecompositionCheck verify_decomposition(const Tensor& t, const RankDecomposition& d) {
    if (t.spec() != d.spec) throw FieldMismatch("decomposition and tensor use different fields");
    check_shape(d.side_x, d.U, d.rank, "U");
    check_shape(d.side_y, d.V, d.rank, "V");
    check_shape(d.side_z, d.W, d.rank, "W");
    Field f(d.spec);
    std::unordered_map<Triple, std::uint64_t, TripleHash> sum;
    std::vector<std::size_t> nx, ny, nz;
    for (std::size_t l = 0; l < d.rank; ++l) {
        nx.clear();
        ny.clear();
        nz.clear();
        for (std::size_t i = 0; i < d.side_x.size(); ++i)
            if (d.U.at(i, l)) nx.push_back(i);
        for (std::size_t i = 0; i < d.side_y.size(); ++i)
            if (d.V.at(i, l)) ny.push_back(i);
        for (std::size_t i = 0; i < d.side_z.size(); ++i)
            if (d.W.at(i, l)) nz.push_back(i);
        for (std::size_t i : nx)
            for (std::size_t j : ny) {
                std::uint64_t uv = f.mul(d.U.at(i, l), d.V.at(j, l));
                for (std::size_t k : nz) {
                    auto& slot = sum[{d.side_x[i], d.side_y[j], d.side_z[k]}];
                    slot = f.add(slot, f.mul(uv, d.W.at(k, l)));
                }
            }
    }
    DecompositionCheck res;
    auto consider = [&](const Triple& k, std::uint64_t expected, std::uint64_t got) {
        if (expected == got) return;
        if (res.ok || k < res.counterexample) {
            res.ok = false;
            res.counterexample = k;
            res.expected = expected;
            res.got = got;
        }
    };
    for (const auto& [k, v] : sum) consider(k, t.get(k), v);
    for (const auto& [k, v] : t.entries()) {
        auto it = sum.find(k);
        consider(k, v, it == sum.end() ? 0 : it->second);
    }
    return res;
}

RankDecomposition trivial_decomposition(const Tensor& t) {
    RankDecomposition d;
    d.spec = t.spec();
    auto entries = t.sorted_entries();
    std::set<Mask> xs, ys, zs;
    for (const auto& [k, v] : entries) {
        xs.insert(k.a);
        ys.insert(k.b);
        zs.insert(k.c);
    }
    d.side_x.assign(xs.begin(), xs.end());
    d.side_y.assign(ys.begin(), ys.end());
    d.side_z.assign(zs.begin(), zs.end());
    d.rank = entries.size();
    d.U = Matrix(d.side_x.size(), d.rank);
    d.V = Matrix(d.side_y.size(), d.rank);
    d.W = Matrix(d.side_z.size(), d.rank);
    auto index = [](const std::vector<Mask>& side, Mask m) {
        return static_cast<std::size_t>(std::lower_bound(side.begin(), side.end(), m) - side.begin());
    };
    for (std::size_t l = 0; l < entries.size(); ++l) {
        const auto& [k, v] = entries[l];
        d.U.at(index(d.side_x, k.a), l) = v;
        d.V.at(index(d.side_y, k.b), l) = 1;
        d.W.at(index(d.side_z, k.c), l) = 1;
    }
    return d;
}

std::uint64_t tensor_eval(const Tensor& t, const SideAssignment& x, const SideAssignment& y,
                          const SideAssignment& z) {
    Field f(t.spec());
    auto look = [](const SideAssignment& m, Mask k, char side) {
        auto it = m.find(k);
        if (it == m.end()) throw UnassignedInput(std::string(1, side) + format_subset(k) + " has no value");
        return it->second;
    };
    std::uint64_t s = 0;
    for (const auto& [k, v] : t.entries())
        s = f.add(s, f.mul(v, f.mul(look(x, k.a, 'x'), f.mul(look(y, k.b, 'y'), look(z, k.c, 'z')))));
    return s;
}

// ------------------------------------------------------------ file format

void write_rankdec(const RankDecomposition& d, std::ostream& out) {
    out << "rankdec v1\n";
    out << "field " << d.spec.to_string() << '\n';
    out << "r=" << d.rank << '\n';
    auto side = [&](const char* name, const std::vector<Mask>& s) {
        out << name;
        for (Mask m : s) out << ' ' << format_subset(m);
        out << '\n';
    };
    side("xside:", d.side_x);
    side("yside:", d.side_y);
    side("zside:", d.side_z);
    auto mat = [&](const char* name, const Matrix& m) {
        out << name << '\n';
        for (std::size_t i = 0; i < m.rows(); ++i) {
            for (std::size_t j = 0; j < m.cols(); ++j)
                out << (j ? " " : "") << format_value(d.spec, m.at(i, j));
            out << '\n';
        }
    };
    mat("U:", d.U);
    mat("V:", d.V);
    mat("W:", d.W);
}

std::string write_rankdec(const RankDecomposition& d) {
    std::ostringstream os;
    write_rankdec(d, os);
    return os.str();
}

namespace {

Mask parse_subset_token(std::string_view tok, std::size_t line) {
    if (tok.size() < 2 || tok.front() != '{' || tok.back() != '}')
        throw ParseError(line, "expected a subset '{i,j,...}', got '" + std::string(tok) + "'");
    tok = tok.substr(1, tok.size() - 2);
    Mask m = 0;
    unsigned prev = 0;
    std::size_t pos = 0;
    while (!tok.empty() && pos <= tok.size()) {
        std::size_t comma = std::min(tok.find(',', pos), tok.size());
        std::string_view num = tok.substr(pos, comma - pos);
        unsigned v = 0;
        auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
        if (num.empty() || ec != std::errc() || p != num.data() + num.size() || v == 0 || v > 63 || v <= prev)
            throw ParseError(line, "bad subset element '" + std::string(num) + "'");
        m |= Mask{1} << (v - 1);
        prev = v;
        pos = comma + 1;
        if (comma == tok.size()) break;
    }
    return m;
}

}  // namespace

RankDecomposition read_rankdec(std::istream& in) {
    RankDecomposition d;
    std::string raw;
    std::size_t lineno = 0;
    enum Section { kHeader, kField, kRank, kSides, kU, kV, kW } sec = kHeader;
    std::vector<std::vector<std::uint64_t>> rows[3];
    std::size_t rows_line[3] = {0, 0, 0};
    bool have_side[3] = {false, false, false};
    while (std::getline(in, raw)) {
        ++lineno;
        std::string_view line(raw);
        if (auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
        std::vector<std::string_view> toks;
        {
            std::size_t i = 0;
            while (i < line.size()) {
                while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
                std::size_t j = i;
                while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
                if (j > i) toks.push_back(line.substr(i, j - i));
                i = j;
            }
        }
        if (toks.empty()) continue;
        try {
            if (sec == kHeader) {
                if (toks.size() != 2 || toks[0] != "rankdec" || toks[1] != "v1")
                    throw ParseError(lineno, "expected 'rankdec v1'");
                sec = kField;
            } else if (sec == kField) {
                if (toks[0] != "field") throw ParseError(lineno, "expected 'field <spec>'");
                d.spec = FieldSpec::parse(line.substr(line.find("field") + 5));
                sec = kRank;
            } else if (sec == kRank) {
                if (toks.size() != 1 || toks[0].substr(0, 2) != "r=") throw ParseError(lineno, "expected 'r=<int>'");
                auto num = toks[0].substr(2);
                auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), d.rank);
                if (ec != std::errc() || p != num.data() + num.size()) throw ParseError(lineno, "bad rank");
                sec = kSides;
            } else if (toks[0] == "xside:" || toks[0] == "yside:" || toks[0] == "zside:") {
                if (sec != kSides) throw ParseError(lineno, "side lists must precede the matrices");
                int which = toks[0][0] - 'x';
                if (have_side[which]) throw ParseError(lineno, "side listed twice");
                have_side[which] = true;
                auto& side = which == 0 ? d.side_x : which == 1 ? d.side_y : d.side_z;
                for (std::size_t i = 1; i < toks.size(); ++i) side.push_back(parse_subset_token(toks[i], lineno));
            } else if (toks.size() == 1 && (toks[0] == "U:" || toks[0] == "V:" || toks[0] == "W:")) {
                Section want = toks[0] == "U:" ? kU : toks[0] == "V:" ? kV : kW;
                if (static_cast<int>(want) != static_cast<int>(sec) + 1 && !(want == kU && sec == kSides))
                    throw ParseError(lineno, "matrix blocks must appear in the order U, V, W");
                if (!(have_side[0] && have_side[1] && have_side[2]))
                    throw ParseError(lineno, "missing side list");
                sec = want;
                rows_line[want - kU] = lineno;
            } else if (sec >= kU) {
                std::vector<std::uint64_t> row;
                for (auto tok : toks) row.push_back(parse_value(d.spec, tok));
                if (row.size() != d.rank)
                    throw ParseError(lineno, "matrix row has " + std::to_string(row.size()) + " entries, expected r=" +
                                                 std::to_string(d.rank));
                rows[sec - kU].push_back(std::move(row));
            } else {
                throw ParseError(lineno, "unexpected line");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (sec != kW) throw ParseError(lineno + 1, "truncated rank decomposition");
    const std::vector<Mask>* sides[3] = {&d.side_x, &d.side_y, &d.side_z};
    Matrix* mats[3] = {&d.U, &d.V, &d.W};
    for (int k = 0; k < 3; ++k) {
        if (rows[k].size() != sides[k]->size())
            throw ParseError(rows_line[k], std::string(1, "UVW"[k]) + " block has " + std::to_string(rows[k].size()) +
                                               " rows, expected " + std::to_string(sides[k]->size()));
        *mats[k] = Matrix(sides[k]->size(), d.rank);
        for (std::size_t i = 0; i < rows[k].size(); ++i)
            for (std::size_t j = 0; j < d.rank; ++j) mats[k]->at(i, j) = rows[k][i][j];
    }
    return d;
}

RankDecomposition read_rankdec_string(const std::string& text) {
    std::istringstream is(text);
    return read_rankdec(is);
}

RankDecomposition read_rankdec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    return read_rankdec(in);
}

}  // namespace kronscale
