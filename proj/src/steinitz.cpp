/**
 * @file steinitz.cpp
 * @brief Bottleneck search over the count lattice for optimal Steinitz
 *        orderings, and the concentration partition built on it.
 */
#include "kronscale/steinitz.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <istream>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <unordered_map>

namespace kronscale {

Rational Rational::make(std::int64_t n, std::int64_t d) {
    if (d == 0) throw DivisionByZero("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) {
        n /= g;
        d /= g;
    }
    return Rational{n, d};
}

std::string Rational::to_string() const {
    return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Rational VectorFamily::norm(std::size_t i) const {
    std::int64_t m = 0;
    for (std::int64_t v : nums[i]) m = std::max(m, v < 0 ? -v : v);
    return Rational::make(m, den);
}

void VectorFamily::validate() const {
    if (den <= 0) throw InvalidArgument("vector family needs a positive denominator");
    for (std::size_t i = 0; i < nums.size(); ++i) {
        if (nums[i].size() != dim) throw InvalidArgument("vector " + std::to_string(i + 1) + " has wrong dimension");
        for (std::int64_t v : nums[i])
            if (v > den || v < -den)
                throw InvalidArgument("vector " + std::to_string(i + 1) + " has infinity norm above 1");
    }
}

std::vector<std::vector<std::int64_t>> VectorFamily::classes() const {
    std::vector<std::vector<std::int64_t>> c = nums;
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    return c;
}

// ------------------------------------------------------------ parsing

VectorFamily parse_vector_family(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    };
    if (!next_line()) throw ParseError(lineno + 1, "missing 'd r' header");
    std::istringstream hs(line);
    long long d = -1, r = -1;
    if (!(hs >> d >> r) || d < 0 || r < 0) throw ParseError(lineno, "expected 'd r'");
    struct Q {
        std::int64_t p, q;
    };
    std::vector<std::vector<Q>> rows;
    std::int64_t lcm = 1;
    for (long long i = 0; i < r; ++i) {
        if (!next_line()) throw ParseError(lineno + 1, "expected " + std::to_string(r) + " vectors");
        std::istringstream ls(line);
        std::string tok;
        std::vector<Q> row;
        while (ls >> tok) {
            auto slash = tok.find('/');
            std::int64_t p = 0, q = 1;
            auto parse = [&](std::string_view s, std::int64_t& out) {
                auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
                if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
                    throw ParseError(lineno, "bad rational '" + tok + "'");
            };
            std::string_view sv(tok);
            parse(sv.substr(0, slash), p);
            if (slash != std::string::npos) parse(sv.substr(slash + 1), q);
            if (q <= 0) throw ParseError(lineno, "denominator must be positive in '" + tok + "'");
            row.push_back({p, q});
            lcm = std::lcm(lcm, q);
            if (lcm > (std::int64_t{1} << 40)) throw ParseError(lineno, "denominators too large");
        }
        if (static_cast<long long>(row.size()) != d)
            throw ParseError(lineno, "expected " + std::to_string(d) + " coordinates");
        rows.push_back(std::move(row));
    }
    VectorFamily f;
    f.dim = static_cast<std::size_t>(d);
    f.den = lcm;
    for (const auto& row : rows) {
        std::vector<std::int64_t> v;
        for (const auto& [p, q] : row) v.push_back(p * (lcm / q));
        f.nums.push_back(std::move(v));
    }
    try {
        f.validate();
    } catch (const Error& e) {
        throw ParseError(lineno, e.what());
    }
    return f;
}

VectorFamily parse_vector_family(const std::string& text) {
    std::istringstream is(text);
    return parse_vector_family(is);
}

// ------------------------------------------------------------ Steinitz ordering

namespace {

std::int64_t iabs(std::int64_t v) { return v < 0 ? -v : v; }

/// Numerator (over r * den) of || P - ((k - d)/r) S ||.
std::int64_t deviation_num(const std::vector<std::int64_t>& prefix, const std::vector<std::int64_t>& total,
                           std::int64_t k, std::int64_t r, std::int64_t d) {
    std::int64_t m = 0;
    for (std::size_t t = 0; t < prefix.size(); ++t) m = std::max(m, iabs(r * prefix[t] - (k - d) * total[t]));
    return m;
}

}  // namespace

std::vector<Rational> prefix_deviations(const VectorFamily& f, const std::vector<std::size_t>& perm) {
    const auto r = static_cast<std::int64_t>(f.size());
    const auto d = static_cast<std::int64_t>(f.dim);
    std::vector<std::int64_t> total(f.dim, 0), prefix(f.dim, 0);
    for (const auto& v : f.nums)
        for (std::size_t t = 0; t < f.dim; ++t) total[t] += v[t];
    std::vector<Rational> out;
    for (std::size_t k = 0; k < perm.size(); ++k) {
        for (std::size_t t = 0; t < f.dim; ++t) prefix[t] += f.nums[perm[k]][t];
        out.push_back(Rational::make(deviation_num(prefix, total, static_cast<std::int64_t>(k + 1), r, d), r * f.den));
    }
    return out;
}

SteinitzResult steinitz_permutation(const VectorFamily& f, std::size_t max_classes) {
    f.validate();
    SteinitzResult res;
    const std::size_t r = f.size();
    if (r == 0) return res;
    const auto classes = f.classes();
    const std::size_t C = classes.size();
    if (C > max_classes)
        throw TooManyClasses(std::to_string(C) + " distinct vectors exceed the cap of " + std::to_string(max_classes));

    std::vector<std::vector<std::size_t>> members(C);
    for (std::size_t i = 0; i < r; ++i) {
        auto j = static_cast<std::size_t>(std::lower_bound(classes.begin(), classes.end(), f.nums[i]) - classes.begin());
        members[j].push_back(i);
    }
    std::vector<std::uint64_t> stride(C);
    std::uint64_t radix = 1;
    for (std::size_t j = 0; j < C; ++j) {
        stride[j] = radix;
        const std::uint64_t base = members[j].size() + 1;
        if (radix > (std::uint64_t{1} << 62) / base) throw TooLarge("count lattice too large for exact search");
        radix *= base;
    }
    const std::uint64_t full = radix - 1;

    const auto ri = static_cast<std::int64_t>(r);
    const auto di = static_cast<std::int64_t>(f.dim);
    std::vector<std::int64_t> total(f.dim, 0);
    for (const auto& v : f.nums)
        for (std::size_t t = 0; t < f.dim; ++t) total[t] += v[t];

    struct Node {
        std::int64_t best;
        std::uint32_t parent;  // class placed last
        bool done;
    };
    std::unordered_map<std::uint64_t, Node> nodes;
    nodes.reserve(1024);
    using Item = std::tuple<std::int64_t, std::int64_t, std::uint64_t>;  // (value, -k, code)
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    nodes[0] = Node{0, 0xFFFFFFFFu, false};
    pq.emplace(0, 0, 0);
    std::vector<std::uint64_t> count(C);
    std::vector<std::int64_t> prefix(f.dim);
    while (!pq.empty()) {
        auto [val, negk, code] = pq.top();
        pq.pop();
        Node& cur = nodes[code];
        if (cur.done || val != cur.best) continue;
        cur.done = true;
        ++res.states_explored;
        if (code == full) break;
        std::uint64_t rest = code;
        std::fill(prefix.begin(), prefix.end(), 0);
        for (std::size_t j = C; j-- > 0;) {
            count[j] = rest / stride[j];
            rest %= stride[j];
            for (std::size_t t = 0; t < f.dim; ++t)
                prefix[t] += static_cast<std::int64_t>(count[j]) * classes[j][t];
        }
        const std::int64_t k = -negk + 1;
        for (std::size_t j = 0; j < C; ++j) {
            if (count[j] == members[j].size()) continue;
            for (std::size_t t = 0; t < f.dim; ++t) prefix[t] += classes[j][t];
            std::int64_t nv = std::max(val, deviation_num(prefix, total, k, ri, di));
            for (std::size_t t = 0; t < f.dim; ++t) prefix[t] -= classes[j][t];
            const std::uint64_t nc = code + stride[j];
            auto it = nodes.find(nc);
            if (it == nodes.end()) {
                nodes.emplace(nc, Node{nv, static_cast<std::uint32_t>(j), false});
                pq.emplace(nv, -k, nc);
            } else if (!it->second.done) {
                if (nv < it->second.best) {
                    it->second.best = nv;
                    it->second.parent = static_cast<std::uint32_t>(j);
                    pq.emplace(nv, -k, nc);
                } else if (nv == it->second.best && j < it->second.parent) {
                    it->second.parent = static_cast<std::uint32_t>(j);
                }
            }
        }
    }
    // Trace back the class sequence.
    std::vector<std::size_t> cls;
    for (std::uint64_t code = full; code != 0;) {
        std::uint32_t j = nodes.at(code).parent;
        cls.push_back(j);
        code -= stride[j];
    }
    std::reverse(cls.begin(), cls.end());
    std::vector<std::size_t> used(C, 0);
    for (std::size_t j : cls) res.perm.push_back(members[j][used[j]++]);
    res.prefix = prefix_deviations(f, res.perm);
    res.bound = Rational::make(nodes.at(full).best, ri * f.den);
    return res;
}

// ------------------------------------------------------------ concentration

Rational group_deviation(const VectorFamily& f, const std::vector<std::size_t>& group) {
    if (group.empty()) throw PartitionSizeError("empty group");
    const auto r = static_cast<std::int64_t>(f.size());
    const auto g = static_cast<std::int64_t>(group.size());
    std::int64_t m = 0;
    for (std::size_t t = 0; t < f.dim; ++t) {
        std::int64_t total = 0, part = 0;
        for (const auto& v : f.nums) total += v[t];
        for (std::size_t i : group) part += f.nums[i][t];
        m = std::max(m, iabs(r * part - g * total));
    }
    return Rational::make(m, g * r * f.den);
}

ConcentrationPartition concentration_partition(const VectorFamily& f, const std::vector<std::size_t>& sizes,
                                               std::size_t max_classes) {
    f.validate();
    const std::size_t r = f.size();
    std::size_t sum = 0;
    for (std::size_t g : sizes) {
        if (g == 0) throw PartitionSizeError("group sizes must be positive");
        sum += g;
    }
    if (sum != r)
        throw PartitionSizeError("group sizes sum to " + std::to_string(sum) + ", expected r=" + std::to_string(r));

    // u_i = v_i/2 - (1/2r) sum v  =  (r v_i - S) / (2 r den)
    VectorFamily u;
    u.dim = f.dim;
    const auto ri = static_cast<std::int64_t>(r);
    u.den = 2 * ri * f.den;
    std::vector<std::int64_t> total(f.dim, 0);
    for (const auto& v : f.nums)
        for (std::size_t t = 0; t < f.dim; ++t) total[t] += v[t];
    for (const auto& v : f.nums) {
        std::vector<std::int64_t> w(f.dim);
        for (std::size_t t = 0; t < f.dim; ++t) w[t] = ri * v[t] - total[t];
        u.nums.push_back(std::move(w));
    }
    ConcentrationPartition cp;
    cp.sizes = sizes;
    cp.steinitz = steinitz_permutation(u, max_classes);
    std::size_t pos = 0;
    for (std::size_t g : sizes) {
        std::vector<std::size_t> grp(cp.steinitz.perm.begin() + static_cast<std::ptrdiff_t>(pos),
                                     cp.steinitz.perm.begin() + static_cast<std::ptrdiff_t>(pos + g));
        std::sort(grp.begin(), grp.end());
        cp.deviation.push_back(group_deviation(f, grp));
        cp.groups.push_back(std::move(grp));
        pos += g;
    }
    return cp;
}

}  // namespace kronscale
