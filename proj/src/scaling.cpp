/**
 * @file scaling.cpp
 * @brief Intersection types, Steinitz-balanced decomposition of P_n, the
 *        zero-aware Yates construction and the uniform P_n builder.
 */
#include "kronscale/scaling.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <unordered_map>

#include "kronscale/steinitz.hpp"

namespace kronscale {

void BlockStructure::validate() const {
    if (b == 0 || g == 0 || s == 0) throw InvalidArgument("b, g, s must be positive");
    if (3ull * b * g * s > 63) throw TooLarge("ground set of 3n elements exceeds 63");
}

// ------------------------------------------------------------ types

std::vector<IntersectionType> enumerate_types(const BlockStructure& bs, std::size_t budget) {
    bs.validate();
    const unsigned r = bs.r(), n = bs.n(), cap = 3 * bs.b;
    std::vector<IntersectionType> out;
    IntersectionType cur;
    cur.alpha.assign(r, 0);
    cur.beta.assign(r, 0);
    cur.gamma.assign(r, 0);

    // beta_i <= cap - alpha_i, sum beta = n; gamma is then forced.
    std::vector<unsigned> beta_room(r + 1, 0);
    std::function<void(unsigned, unsigned)> rec_beta = [&](unsigned i, unsigned left) {
        if (i == r) {
            if (left != 0) return;
            for (unsigned t = 0; t < r; ++t) cur.gamma[t] = cap - cur.alpha[t] - cur.beta[t];
            if (out.size() >= budget) throw TooLarge("number of intersection types exceeds the budget");
            out.push_back(cur);
            return;
        }
        const unsigned hi = std::min(cap - cur.alpha[i], left);
        for (unsigned v = 0; v <= hi; ++v) {
            if (left - v > beta_room[i + 1]) continue;
            cur.beta[i] = v;
            rec_beta(i + 1, left - v);
        }
    };
    std::function<void(unsigned, unsigned)> rec_alpha = [&](unsigned i, unsigned left) {
        if (i == r) {
            if (left != 0) return;
            beta_room[r] = 0;
            for (unsigned t = r; t-- > 0;) beta_room[t] = beta_room[t + 1] + cap - cur.alpha[t];
            rec_beta(0, n);
            return;
        }
        const unsigned hi = std::min(cap, left);
        for (unsigned v = 0; v <= hi; ++v) {
            if (left - v > cap * (r - i - 1)) continue;
            cur.alpha[i] = v;
            rec_alpha(i + 1, left - v);
        }
    };
    rec_alpha(0, n);
    return out;
}

IntersectionType type_of(const BlockStructure& bs, const Triple& t) {
    IntersectionType ty;
    for (unsigned i = 0; i < bs.r(); ++i) {
        const Mask blk = bs.block(i);
        ty.alpha.push_back(static_cast<unsigned>(std::popcount(t.a & blk)));
        ty.beta.push_back(static_cast<unsigned>(std::popcount(t.b & blk)));
        ty.gamma.push_back(static_cast<unsigned>(std::popcount(t.c & blk)));
    }
    return ty;
}

Mask ScalingComponent::group_ground(const BlockStructure& bs, unsigned j) const {
    Mask m = 0;
    for (unsigned i : groups[j]) m |= bs.block(i);
    return m;
}

// ------------------------------------------------------------ decomposition

ScalingDecomposition decompose_P(const BlockStructure& bs, const ScalingOptions& opt) {
    bs.validate();
    ScalingDecomposition sd;
    sd.bs = bs;
    sd.paper_padding = opt.paper_padding;
    const unsigned bg = bs.b * bs.g;
    const std::vector<std::size_t> sizes(bs.s, bs.g);
    for (auto& ty : enumerate_types(bs, opt.type_budget)) {
        ScalingComponent comp;
        VectorFamily f;
        f.dim = 3;
        f.den = 3 * bs.b;
        for (unsigned i = 0; i < bs.r(); ++i)
            f.nums.push_back({static_cast<std::int64_t>(ty.alpha[i]), static_cast<std::int64_t>(ty.beta[i]),
                              static_cast<std::int64_t>(ty.gamma[i])});
        auto cp = concentration_partition(f, sizes);
        for (auto& grp : cp.groups) {
            std::vector<unsigned> gj(grp.begin(), grp.end());
            for (int k = 0; k < 3; ++k) {
                unsigned sum = 0;
                for (unsigned i : gj) sum += ty.side(k)[i];
                comp.deviation = std::max(comp.deviation, sum > bg ? sum - bg : bg - sum);
            }
            comp.groups.push_back(std::move(gj));
        }
        comp.type = std::move(ty);
        sd.delta = std::max(sd.delta, comp.deviation);
        sd.components.push_back(std::move(comp));
    }
    if (opt.paper_padding) sd.delta = 36 * bs.b;
    sd.d_eff = bg + sd.delta;
    for (auto& comp : sd.components) {
        for (const auto& gj : comp.groups) {
            std::array<unsigned, 3> pad{};
            for (int k = 0; k < 3; ++k) {
                unsigned sum = 0;
                for (unsigned i : gj) sum += comp.type.side(k)[i];
                if (sum > sd.d_eff) throw InternalError("negative padding size");
                pad[k] = sd.d_eff - sum;
            }
            if (pad[0] + pad[1] + pad[2] != sd.pad_size()) throw InternalError("padding does not fill V_j");
            comp.padding.push_back(pad);
        }
    }
    return sd;
}

namespace {

/// Restriction of one group's part: local subset of [3 d_eff] -> U-part, or nullopt.
std::optional<Mask> restrict_group(const ScalingDecomposition& sd, const ScalingComponent& comp, unsigned j, int side,
                                   Mask local) {
    const BlockStructure& bs = sd.bs;
    const unsigned ubits = 3 * bs.b * bs.g;
    const auto& pad = comp.padding[j];
    const unsigned off = side == 0 ? 0 : side == 1 ? pad[0] : pad[0] + pad[1];
    const Mask vpart = ubits >= 64 ? 0 : local >> ubits;
    if (vpart != (low_bits(pad[side]) << off)) return std::nullopt;
    // Deposit the low ubits bits onto the group's ground elements (sorted).
    Mask ground = comp.group_ground(bs, j), upart = 0;
    for (unsigned e = 0; ground != 0; ++e, ground &= ground - 1)
        if ((local >> e) & 1) upart |= ground & (~ground + 1);
    for (unsigned i : comp.groups[j])
        if (static_cast<unsigned>(std::popcount(upart & bs.block(i))) != comp.type.side(side)[i]) return std::nullopt;
    return upart;
}

template <class F>
void for_each_subset_of_size(Mask ground, unsigned k, F&& f) {
    for (Mask sub = ground;; sub = (sub - 1) & ground) {
        if (static_cast<unsigned>(std::popcount(sub)) == k) f(sub);
        if (sub == 0) break;
    }
}

}  // namespace

std::optional<Mask> restrict_variable(const ScalingDecomposition& sd, const ScalingComponent& comp, int side,
                                      std::span<const Mask> parts) {
    if (parts.size() != sd.bs.s) throw ShapeError("expected one part per group");
    Mask out = 0;
    for (unsigned j = 0; j < sd.bs.s; ++j) {
        auto u = restrict_group(sd, comp, j, side, parts[j]);
        if (!u) return std::nullopt;
        out |= *u;
    }
    return out;
}

ScalingCheck verify_scaling(const BlockStructure& bs, const ScalingOptions& opt) {
    bs.validate();
    if (bs.n() > 5) throw TooLarge("exhaustive verification needs n <= 5");
    if (opt.paper_padding) throw InvalidArgument("worst-case padding is not verifiable at this scale");
    ScalingDecomposition sd = decompose_P(bs, opt);
    const unsigned de = sd.d_eff;
    const unsigned ubits = 3 * bs.b * bs.g;
    if (3 * de > 64) throw TooLarge("padded block exceeds 64 elements");
    ScalingCheck res;
    res.types = sd.components.size();
    res.d_eff = de;
    std::unordered_map<Triple, std::size_t, TripleHash> seen;

    for (const auto& comp : sd.components) {
        // Surviving monomials of each factor P_{d_eff}[bar U_j], as projected U-parts.
        std::vector<std::vector<Triple>> per_group(bs.s);
        for (unsigned j = 0; j < bs.s; ++j) {
            const auto& pad = comp.padding[j];
            const Mask vA = low_bits(pad[0]) << ubits;
            const Mask vB = low_bits(pad[1]) << (ubits + pad[0]);
            const Mask vC = low_bits(pad[2]) << (ubits + pad[0] + pad[1]);
            const Mask local_u = low_bits(ubits);
            for_each_subset_of_size(local_u, de - pad[0], [&](Mask a) {
                for_each_subset_of_size(local_u & ~a, de - pad[1], [&](Mask b) {
                    const Mask c = local_u & ~a & ~b;
                    const Triple loc{a | vA, b | vB, c | vC};
                    // pad-size invariant: every part of the padded block has d_eff elements
                    if (std::popcount(loc.a) != static_cast<int>(de) || std::popcount(loc.b) != static_cast<int>(de) ||
                        std::popcount(loc.c) != static_cast<int>(de))
                        throw InternalError("padded part is not of size d_eff");
                    auto ra = restrict_group(sd, comp, j, 0, loc.a);
                    auto rb = restrict_group(sd, comp, j, 1, loc.b);
                    auto rc = restrict_group(sd, comp, j, 2, loc.c);
                    if (ra && rb && rc) per_group[j].push_back({*ra, *rb, *rc});
                });
            });
        }
        std::function<void(unsigned, Triple)> rec = [&](unsigned j, Triple acc) {
            if (j == bs.s) {
                ++seen[acc];
                ++res.monomials;
                return;
            }
            for (const Triple& t : per_group[j]) rec(j + 1, {acc.a | t.a, acc.b | t.b, acc.c | t.c});
        };
        rec(0, {0, 0, 0});
    }

    Tensor p = generate_P(bs.n());
    res.expected = p.nnz();
    std::vector<Triple> bad;
    for (const auto& [t, v] : p.entries()) {
        auto it = seen.find(t);
        std::size_t m = it == seen.end() ? 0 : it->second;
        if (m != 1) bad.push_back(t);
    }
    for (const auto& [t, m] : seen)
        if (p.get(t) == 0) bad.push_back(t);
    if (!bad.empty()) {
        res.ok = false;
        res.counterexample = *std::min_element(bad.begin(), bad.end());
        auto it = seen.find(res.counterexample);
        res.multiplicity = it == seen.end() ? 0 : it->second;
    }
    return res;
}

// ------------------------------------------------------------ Yates

PreparedDecomposition::PreparedDecomposition(const RankDecomposition& d) : dec(&d) {
    const Matrix* ms[3] = {&d.U, &d.V, &d.W};
    const std::size_t sides[3] = {d.side_x.size(), d.side_y.size(), d.side_z.size()};
    for (int k = 0; k < 3; ++k) {
        if (ms[k]->rows() != sides[k] || ms[k]->cols() != d.rank)
            throw ShapeError("decomposition matrix shape does not match its index lists");
        rows[k].resize(sides[k]);
        for (std::size_t i = 0; i < sides[k]; ++i)
            for (std::size_t l = 0; l < d.rank; ++l)
                if (std::uint64_t v = ms[k]->at(i, l); v != 0) rows[k][i].emplace_back(static_cast<std::uint32_t>(l), v);
    }
}

GateId yates_into(Circuit& c, const PreparedDecomposition& pd, unsigned s,
                  const std::array<std::vector<std::vector<std::uint32_t>>, 3>& allowed, const TupleBinder& bind,
                  std::size_t arc_budget) {
    if (s == 0) throw InvalidArgument("Kronecker power exponent must be positive");
    for (int k = 0; k < 3; ++k)
        if (allowed[k].size() != s) throw ShapeError("one allowed-index list per coordinate is required");
    const std::size_t start = c.size();
    auto check_budget = [&]() {
        if (c.size() - start > arc_budget) throw TooLarge("Yates circuit exceeds the arc budget");
    };

    // Rank indices that can be nonzero on all three sides, per coordinate.
    std::vector<std::vector<std::uint32_t>> demand(s);
    for (unsigned t = 0; t < s; ++t) {
        std::vector<std::uint8_t> hit(pd.dec->rank, 0);
        for (int k = 0; k < 3; ++k)
            for (std::uint32_t i : allowed[k][t]) {
                if (i >= pd.side_size(k)) throw ShapeError("allowed index out of range");
                for (const auto& [l, v] : pd.rows[k][i])
                    if (hit[l] == k) hit[l] = static_cast<std::uint8_t>(k + 1);
            }
        for (std::uint32_t l = 0; l < pd.dec->rank; ++l)
            if (hit[l] == 3) demand[t].push_back(l);
        if (demand[t].empty()) return kNoGate;
    }
    std::size_t final_size = 1;
    for (unsigned t = 0; t < s; ++t) {
        final_size *= demand[t].size();
        if (final_size > arc_budget) throw TooLarge("Kronecker power rank exceeds the arc budget");
    }

    // Transform one side: inputs over allowed lists -> values over demand lists.
    std::array<std::vector<GateId>, 3> hat;
    std::vector<std::uint32_t> tuple(s);
    std::vector<GateId> terms;
    for (int k = 0; k < 3; ++k) {
        std::vector<std::size_t> dims(s);
        std::size_t total = 1;
        for (unsigned t = 0; t < s; ++t) {
            dims[t] = allowed[k][t].size();
            total *= dims[t];
            if (total > arc_budget) throw TooLarge("Yates input layer exceeds the arc budget");
        }
        std::vector<GateId> cur(total);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rest = idx;
            for (unsigned t = 0; t < s; ++t) {
                tuple[t] = allowed[k][t][rest % dims[t]];
                rest /= dims[t];
            }
            cur[idx] = bind(k, tuple);
        }
        for (unsigned t = 0; t < s; ++t) {
            // For each demanded rank index, its (position in allowed list, coefficient) pairs.
            std::unordered_map<std::uint32_t, std::uint32_t> pos_of;
            for (std::uint32_t q = 0; q < demand[t].size(); ++q) pos_of.emplace(demand[t][q], q);
            std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> cols(demand[t].size());
            for (std::uint32_t p = 0; p < allowed[k][t].size(); ++p)
                for (const auto& [l, v] : pd.rows[k][allowed[k][t][p]])
                    if (auto it = pos_of.find(l); it != pos_of.end()) cols[it->second].emplace_back(p, v);
            std::size_t before = 1, after = 1;
            for (unsigned u = 0; u < t; ++u) before *= dims[u];
            for (unsigned u = t + 1; u < s; ++u) after *= dims[u];
            const std::size_t old_d = dims[t], new_d = demand[t].size();
            if (before * new_d * after > arc_budget) throw TooLarge("Yates layer exceeds the arc budget");
            std::vector<GateId> next(before * new_d * after);
            for (std::size_t hi = 0; hi < after; ++hi)
                for (std::size_t q = 0; q < new_d; ++q)
                    for (std::size_t lo = 0; lo < before; ++lo) {
                        terms.clear();
                        for (const auto& [p, v] : cols[q]) {
                            GateId g = cur[lo + before * (p + old_d * hi)];
                            if (g == kNoGate) continue;
                            terms.push_back(v == 1 ? g : c.mul(c.constant(v), g));
                        }
                        next[lo + before * (q + new_d * hi)] = c.sum_or_none(terms);
                    }
            dims[t] = new_d;
            cur = std::move(next);
            check_budget();
        }
        hat[k] = std::move(cur);
    }
    terms.clear();
    for (std::size_t idx = 0; idx < final_size; ++idx) {
        GateId g = c.mul_or_none(c.mul_or_none(hat[0][idx], hat[1][idx]), hat[2][idx]);
        if (g != kNoGate) terms.push_back(g);
    }
    GateId out = c.sum_or_none(terms);
    check_budget();
    return out;
}

Circuit yates_circuit(const RankDecomposition& dec, unsigned s, unsigned period, std::size_t arc_budget) {
    if (period == 0) period = std::max(1u, ground_width(dec.support()));
    if (static_cast<std::uint64_t>(period) * s > 64) throw TooLarge("Kronecker power ground exceeds 64 elements");
    PreparedDecomposition pd(dec);
    Circuit c(dec.spec);
    std::array<std::vector<std::vector<std::uint32_t>>, 3> allowed;
    const std::vector<Mask>* sides[3] = {&dec.side_x, &dec.side_y, &dec.side_z};
    for (int k = 0; k < 3; ++k) {
        std::vector<std::uint32_t> all(sides[k]->size());
        for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
        allowed[k].assign(s, all);
    }
    static constexpr char kSide[3] = {'x', 'y', 'z'};
    auto bind = [&](int k, std::span<const std::uint32_t> tuple) {
        Mask m = 0;
        for (unsigned t = 0; t < tuple.size(); ++t) m |= (*sides[k])[tuple[t]] << (t * period);
        return c.input(subset_name(kSide[k], m));
    };
    GateId out = yates_into(c, pd, s, allowed, bind, arc_budget);
    c.add_output(c.or_zero(out));
    return c;
}

// ------------------------------------------------------------ P_n builder

DecompositionProvider trivial_provider(FieldSpec spec) {
    return [spec](unsigned d) {
        try {
            return trivial_decomposition(generate_P(d, spec));
        } catch (const TooLarge& e) {
            throw ProviderError("no trivial decomposition of P_" + std::to_string(d) + ": " + e.what());
        }
    };
}

DecompositionProvider fixed_provider(RankDecomposition dec) {
    return [dec = std::move(dec)](unsigned d) {
        const Mask limit = low_bits(3 * d);
        if ((dec.support() & ~limit) != 0)
            throw ProviderError("supplied decomposition is not one of P_" + std::to_string(d));
        return dec;
    };
}

GateId build_P_into(Circuit& c, const ScalingDecomposition& sd, const RankDecomposition& dec, const SubsetBinder& bind,
                    BuildStats* stats, std::size_t arc_budget) {
    return build_P_into(c, sd, PreparedDecomposition(dec), bind, stats, arc_budget);
}

GateId build_P_into(Circuit& c, const ScalingDecomposition& sd, const PreparedDecomposition& pd,
                    const SubsetBinder& bind, BuildStats* stats, std::size_t arc_budget) {
    const BlockStructure& bs = sd.bs;
    const RankDecomposition& dec = *pd.dec;
    if (3 * sd.d_eff > 64) throw TooLarge("padded block exceeds 64 elements");
    if ((dec.support() & ~low_bits(3 * sd.d_eff)) != 0)
        throw ShapeError("decomposition ground does not match P_" + std::to_string(sd.d_eff));
    const std::vector<Mask>* sides[3] = {&dec.side_x, &dec.side_y, &dec.side_z};
    std::vector<GateId> outs;
    std::size_t live = 0;
    for (const auto& comp : sd.components) {
        std::array<std::vector<std::vector<std::uint32_t>>, 3> allowed;
        std::array<std::vector<std::vector<Mask>>, 3> upart;  // [side][group][side index]
        bool dead = false;
        for (int k = 0; k < 3 && !dead; ++k) {
            allowed[k].resize(bs.s);
            upart[k].resize(bs.s);
            for (unsigned j = 0; j < bs.s && !dead; ++j) {
                upart[k][j].assign(sides[k]->size(), 0);
                for (std::uint32_t i = 0; i < sides[k]->size(); ++i)
                    if (auto u = restrict_group(sd, comp, j, k, (*sides[k])[i])) {
                        allowed[k][j].push_back(i);
                        upart[k][j][i] = *u;
                    }
                dead = allowed[k][j].empty();
            }
        }
        if (dead) continue;
        auto tb = [&](int k, std::span<const std::uint32_t> tuple) {
            Mask m = 0;
            for (unsigned j = 0; j < tuple.size(); ++j) m |= upart[k][j][tuple[j]];
            return bind(k, m);
        };
        const std::size_t used = c.size();
        GateId g = yates_into(c, pd, bs.s, allowed, tb, arc_budget);
        if (c.size() > arc_budget + used) throw TooLarge("P_n circuit exceeds the arc budget");
        if (g != kNoGate) {
            outs.push_back(g);
            ++live;
        }
        arc_budget -= std::min(arc_budget, c.size() - used);
    }
    if (stats) {
        stats->types = sd.components.size();
        stats->live_types = live;
        stats->d_eff = sd.d_eff;
        stats->rank = dec.rank;
    }
    return c.sum_or_none(outs);
}

PPlan plan_P(unsigned n, unsigned b, unsigned g, const DecompositionProvider& provider, const ScalingOptions& opt) {
    if (n == 0 || b == 0 || g == 0) throw InvalidArgument("n, b, g must be positive");
    if (n % (b * g) != 0)
        throw DivisibilityError("n=" + std::to_string(n) + " is not a multiple of b*g=" + std::to_string(b * g));
    PPlan plan;
    plan.sd = decompose_P(BlockStructure{b, g, n / (b * g)}, opt);
    const unsigned de = plan.sd.d_eff;
    try {
        plan.dec = provider(de);
    } catch (const ProviderError&) {
        throw;
    } catch (const Error& e) {
        throw ProviderError(std::string("decomposition provider failed: ") + e.what());
    }
    try {
        auto chk = verify_decomposition(generate_P(de, plan.dec.spec), plan.dec);
        if (!chk.ok) throw ProviderError("supplied decomposition does not decompose P_" + std::to_string(de));
    } catch (const ProviderError&) {
        throw;
    } catch (const Error& e) {
        throw ProviderError(std::string("cannot verify the supplied decomposition: ") + e.what());
    }
    return plan;
}

Circuit build_P_circuit(unsigned n, unsigned b, unsigned g, const DecompositionProvider& provider,
                        const ScalingOptions& opt, BuildStats* stats, std::size_t arc_budget) {
    PPlan plan = plan_P(n, b, g, provider, opt);
    const ScalingDecomposition& sd = plan.sd;
    const RankDecomposition& dec = plan.dec;
    Circuit c(dec.spec);
    static constexpr char kSide[3] = {'x', 'y', 'z'};
    std::array<std::unordered_map<Mask, GateId>, 3> gate_of;
    const Mask ground = low_bits(3 * n);
    for (int k = 0; k < 3; ++k) {
        if (n == 0) continue;
        for (Mask m = low_bits(n); m <= ground && m != 0;) {
            gate_of[k].emplace(m, c.input(subset_name(kSide[k], m)));
            const Mask lo = m & (~m + 1), ripple = m + lo;
            m = ripple == 0 ? 0 : ripple | (((m ^ ripple) >> 2) / lo);
            if ((m & ~ground) != 0) break;
        }
    }
    auto bind = [&](int k, Mask m) {
        auto it = gate_of[k].find(m);
        if (it == gate_of[k].end()) throw InternalError("restriction produced a non-balanced subset");
        return it->second;
    };
    GateId out = build_P_into(c, sd, dec, bind, stats, arc_budget);
    c.add_output(c.or_zero(out));
    return c;
}

}  // namespace kronscale
