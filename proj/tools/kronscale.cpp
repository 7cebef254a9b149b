/**
 * @file kronscale.cpp
 * @brief Command-line entry point: dispatches to every library module and
 *        prints a human-readable or JSON run report.
 *
 * Exit codes: 0 success / ok verdict, 1 negative detection or verification
 * counterexample, 2 usage or input error.
 */
#include <chrono>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "kronscale/circuit.hpp"
#include "kronscale/coeffx.hpp"
#include "kronscale/counting.hpp"
#include "kronscale/errors.hpp"
#include "kronscale/matchcon.hpp"
#include "kronscale/scaling.hpp"
#include "kronscale/sieving.hpp"
#include "kronscale/steinitz.hpp"

using json = nlohmann::ordered_json;
using namespace kronscale;

namespace {

constexpr int kExitOk = 0, kExitNegative = 1, kExitUsage = 2;

/// Options shared by every subcommand.
struct Common {
    std::uint64_t seed = 1;
    bool json = false;
    unsigned threads = 1;
};

/// Accumulates the report of one run.
struct Run {
    std::string command;
    json parameters = json::object();
    json result = json::object();
    json sizes = json::object();
    int exit_code = kExitOk;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw InvalidArgument("cannot write '" + path + "'");
    out << text;
}

std::string value_text(const FieldSpec& spec, std::uint64_t v) { return format_value(spec, v); }

void print_human(const json& report) {
    std::cout << report["command"].get<std::string>() << " (seed " << report["seed"] << ")\n";
    auto print_obj = [](const json& obj) {
        for (const auto& [k, v] : obj.items())
            std::cout << "  " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    };
    print_obj(report["result"]);
    if (!report["sizes"].empty()) {
        std::cout << "  sizes:\n";
        for (const auto& [k, v] : report["sizes"].items()) std::cout << "    " << k << ": " << v.dump() << "\n";
    }
    std::cout << "  wall time: " << report["wall_time_s"].get<double>() << " s\n";
}

json rational_json(const Rational& r) { return r.to_string(); }

ExtractionOptions extraction_options(const std::string& dec_path, unsigned b, unsigned g) {
    ExtractionOptions opt;
    opt.b = b;
    opt.g = g;
    if (!dec_path.empty()) opt.provider = fixed_provider(read_rankdec_file(dec_path));
    return opt;
}

CountingMode counting_mode(const std::string& s) { return parse_counting_mode(s); }

// ------------------------------------------------------------ handlers

void run_verify_scaling(Run& run, unsigned b, unsigned g, unsigned s, bool paper) {
    run.parameters = {{"b", b}, {"g", g}, {"s", s}, {"paper_padding", paper}};
    ScalingOptions opt;
    opt.paper_padding = paper;
    const ScalingCheck chk = verify_scaling(BlockStructure{b, g, s}, opt);
    run.result = {{"verdict", chk.ok ? "ok" : "counterexample"},
                  {"types", chk.types},
                  {"monomials", chk.monomials},
                  {"expected_tripartitions", chk.expected},
                  {"d_eff", chk.d_eff}};
    if (!chk.ok) {
        run.result["counterexample"] = {format_subset(chk.counterexample.a), format_subset(chk.counterexample.b),
                                        format_subset(chk.counterexample.c)};
        run.result["multiplicity"] = chk.multiplicity;
        run.exit_code = kExitNegative;
    }
}

void run_build_p(Run& run, unsigned n, unsigned b, unsigned g, const std::string& dec, const std::string& out,
                 bool paper) {
    run.parameters = {{"n", n}, {"b", b}, {"g", g}, {"dec", dec}, {"out", out}, {"paper_padding", paper}};
    ScalingOptions opt;
    opt.paper_padding = paper;
    BuildStats st;
    const Circuit c = build_P_circuit(n, b, g, dec.empty() ? trivial_provider() : fixed_provider(read_rankdec_file(dec)),
                                      opt, &st);
    if (!out.empty()) write_file(out, serialize(c));
    run.result = {{"verdict", "built"}, {"d_eff", st.d_eff}, {"rank", st.rank}};
    run.sizes = {{"gates", c.num_gates()}, {"arcs", c.size()}, {"types", st.types}, {"live_types", st.live_types}};
}

void run_extract(Run& run, const std::string& file, const std::string& prefix, const std::string& method,
                 const std::string& out, const std::string& dec) {
    run.parameters = {{"circuit", file}, {"vars", prefix}, {"method", method}, {"out", out}, {"dec", dec}};
    const Circuit c = parse_circuit(read_file(file));
    const auto vars = select_variables(c, prefix);
    if (vars.empty()) throw InvalidArgument("no input matches the variable prefix '" + prefix + "'");
    ExtractionMethod m;
    if (method == "direct") m = ExtractionMethod::Direct;
    else if (method == "tri") m = ExtractionMethod::Tripartition;
    else throw InvalidArgument("method must be direct or tri");
    ExtractionStats st;
    const Circuit e = extract_coeff(c, vars, m, extraction_options(dec, 0, 0), &st);
    if (!out.empty()) write_file(out, serialize(e));
    run.result = {{"verdict", "extracted"}, {"variables", vars.size()}, {"n", st.n}};
    run.sizes = {{"input_arcs", c.size()}, {"output_gates", e.num_gates()}, {"output_arcs", e.size()},
                 {"table_entries", st.table_entries}, {"p_copies", st.p_copies}};
}

void run_perm(Run& run, const std::string& file, const std::string& mode, const std::string& dec,
              const std::string& field) {
    const FieldSpec spec = FieldSpec::parse(field);
    run.parameters = {{"in", file}, {"mode", mode}, {"dec", dec}, {"field", spec.to_string()}};
    const Field f(spec);
    Matrix a = parse_matrix(read_file(file), spec);
    const CountingMode cm = counting_mode(mode);
    const Matrix used = cm == CountingMode::Tripartition ? border_to_multiple_of_three(a) : a;
    const Circuit c = permanent_circuit(static_cast<unsigned>(used.rows()), cm, extraction_options(dec, 0, 0), spec);
    const std::uint64_t v = evaluate(c, matrix_assignment(used))[0];
    run.result = {{"value", value_text(spec, v)}, {"order", a.rows()}, {"bordered_order", used.rows()}};
    if (a.rows() <= 20) {
        const std::uint64_t ref = permanent_ryser(f, a);
        run.result["ryser"] = value_text(spec, ref);
        run.result["agrees"] = ref == v;
        if (ref != v) run.exit_code = kExitNegative;
    }
    run.sizes = {{"gates", c.num_gates()}, {"arcs", c.size()}};
}

void run_haf(Run& run, const std::string& file, const std::string& mode, const std::string& dec,
             const std::string& field) {
    const FieldSpec spec = FieldSpec::parse(field);
    run.parameters = {{"in", file}, {"mode", mode}, {"dec", dec}, {"field", spec.to_string()}};
    const Field f(spec);
    const Matrix a = parse_matrix(read_file(file), spec);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (a.at(i, j) != a.at(j, i)) throw InvalidArgument("hafnian input must be symmetric");
    const Circuit c =
        build_hafnian_circuit(static_cast<unsigned>(a.rows()), counting_mode(mode), extraction_options(dec, 0, 0), spec);
    const std::uint64_t v = evaluate(c, matrix_assignment(a, true))[0];
    run.result = {{"value", value_text(spec, v)}, {"order", a.rows()}};
    if (a.rows() <= 16) {
        const std::uint64_t ref = hafnian_bruteforce(f, a);
        run.result["bruteforce"] = value_text(spec, ref);
        run.result["agrees"] = ref == v;
        if (ref != v) run.exit_code = kExitNegative;
    }
    run.sizes = {{"gates", c.num_gates()}, {"arcs", c.size()}};
}

void run_setpart(Run& run, const std::string& file, const std::string& mode, const std::string& dec,
                 const std::string& field) {
    const FieldSpec spec = FieldSpec::parse(field);
    run.parameters = {{"in", file}, {"mode", mode}, {"dec", dec}, {"field", spec.to_string()}};
    const SetFamily fam = parse_family(read_file(file));
    const std::uint64_t v = count_set_partitions(fam, counting_mode(mode), extraction_options(dec, 0, 0), spec);
    run.result = {{"value", value_text(spec, v)}, {"n", fam.n}, {"q", fam.q}, {"members", fam.members.size()},
                  {"may_wrap", set_partition_count_may_wrap(fam, spec)}};
    if (fam.members.size() <= 24) {
        const std::uint64_t exact = setpart_bruteforce(fam);
        const Field f(spec);
        const std::uint64_t ref = f.from_int(static_cast<std::int64_t>(exact));
        run.result["bruteforce"] = exact;
        run.result["agrees"] = ref == v;
        if (ref != v) run.exit_code = kExitNegative;
    }
}

void finish_sieve(Run& run, const SieveResult& r) {
    run.result = {{"verdict", r.found ? "found" : "not found"}, {"trials_run", r.trials_run}};
    if (r.hit_trial) run.result["hit_trial"] = *r.hit_trial;
    if (!r.found) run.exit_code = kExitNegative;
}

SieveOptions sieve_options(unsigned trials, const std::string& method) {
    SieveOptions opt;
    opt.trials = trials;
    opt.method = parse_sieve_method(method);
    return opt;
}

void run_sieve(Run& run, const std::string& problem, const std::string& file, unsigned k, unsigned trials,
               const std::string& method, std::uint64_t seed) {
    run.parameters = {{"problem", problem}, {"input", file}, {"k", k}, {"trials", trials}, {"method", method}};
    Rng rng(seed);
    const SieveOptions opt = sieve_options(trials, method);
    if (problem == "matroid3") {
        const TripleSystem t = parse_triples(read_file(file));
        run.sizes = {{"triples", t.triples.size()}};
        finish_sieve(run, matching3d_detect(t, k, rng, opt));
        return;
    }
    const Graph g = parse_graph(read_file(file));
    run.sizes = {{"vertices", g.n}, {"edges", g.edges.size()}};
    finish_sieve(run, problem == "kpath" ? kpath_detect(g, k, rng, opt) : longcycle_detect(g, k, rng, opt));
}

json pairing_json(const Pairing& p) {
    json out = json::array();
    for (auto [u, v] : p) out.push_back({u + 1, v + 1});
    return out;
}

void run_verify_basis(Run& run, unsigned q) {
    run.parameters = {{"q", q}};
    std::vector<unsigned> xs(q);
    std::iota(xs.begin(), xs.end(), 0u);
    const auto rep = verify_basis_identity(xs);
    const bool cut = verify_cut_observation(q);
    run.result = {{"verdict", rep.ok && cut ? "ok" : "counterexample"},
                  {"pairs_checked", rep.pairs_checked},
                  {"basis_matchings", basis_matchings(xs).size()},
                  {"cut_observation", cut}};
    if (q <= 6) run.result["incidence_rank"] = basis_incidence_rank(q);
    if (rep.counterexample)
        run.result["counterexample"] = {pairing_json(rep.counterexample->first), pairing_json(rep.counterexample->second)};
    if (!rep.ok || !cut) run.exit_code = kExitNegative;
}

void run_verify_fac(Run& run, unsigned q, unsigned b) {
    run.parameters = {{"q", q}, {"b", b}};
    const auto rep = verify_factorization(q, b);
    run.result = {{"verdict", rep.ok() ? "ok" : "counterexample"},
                  {"blocks", rep.blocks},
                  {"triples", rep.triples},
                  {"types", rep.types},
                  {"type_bound_ok", rep.type_bound_ok},
                  {"expansion_checks", rep.expansion_checks},
                  {"expansion_failures", rep.expansion_failures},
                  {"reroute_checks", rep.reroute_checks},
                  {"reroute_failures", rep.reroute_failures},
                  {"coefficient_checks", rep.coefficient_checks},
                  {"coefficient_failures", rep.coefficient_failures}};
    if (!rep.failures.empty()) run.result["failures"] = rep.failures;
    if (!rep.ok()) run.exit_code = kExitNegative;
}

void run_verify_join(Run& run, const std::string& graph, const std::string& td_file, std::uint64_t seed) {
    run.parameters = {{"graph", graph}, {"td", td_file}};
    const Graph g = parse_graph(read_file(graph));
    const NiceTreeDecomposition td = parse_tree_decomposition(read_file(td_file));
    Rng rng(seed);
    const auto weights = default_weights(g, rng);
    const auto rep = verify_join(g, td, weights);
    run.result = {{"verdict", rep.ok ? "ok" : "counterexample"}, {"joins", rep.joins}, {"weights", weights}};
    run.sizes = {{"entries_checked", rep.entries_checked}, {"bags", td.bags.size()}};
    if (rep.counterexample) {
        const auto& ce = *rep.counterexample;
        json d = json::array();
        for (auto x : ce.f.d) d.push_back(x);
        run.result["counterexample"] = {{"bag", ce.bag}, {"d", d}, {"M", pairing_json(ce.f.m)}, {"w", ce.weight},
                                        {"lhs", ce.lhs}};
        run.exit_code = kExitNegative;
    }
}

Assignment read_assignment(const Circuit& c, const std::string& path, Rng& rng, json& randomized) {
    Assignment a;
    if (!path.empty()) {
        std::istringstream in(read_file(path));
        std::string line;
        for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
            if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
            std::istringstream ls(line);
            std::string name, value;
            if (!(ls >> name)) continue;
            if (!(ls >> value)) throw ParseError(lineno, "expected 'name value'");
            a[name] = parse_value(c.spec(), value);
        }
    }
    for (const auto& name : c.input_names())
        if (!a.count(name)) {
            a[name] = random_element(c.spec(), rng).value;
            randomized[name] = value_text(c.spec(), a[name]);
        }
    return a;
}

void run_circuit(Run& run, const std::string& action, const std::string& file, const std::string& assign,
                 unsigned degree, const std::string& wrt, const std::string& out, std::uint64_t seed) {
    run.parameters = {{"action", action}, {"circuit", file}};
    const Circuit c = parse_circuit(read_file(file));
    const FieldSpec spec = c.spec();
    run.sizes = {{"gates", c.num_gates()}, {"arcs", c.size()}};
    if (action == "eval") {
        run.parameters["assign"] = assign;
        Rng rng(seed);
        json randomized = json::object();
        const auto values = evaluate(c, read_assignment(c, assign, rng, randomized));
        json outs = json::array();
        for (auto v : values) outs.push_back(value_text(spec, v));
        run.result = {{"outputs", outs}};
        if (!randomized.empty()) run.result["random_inputs"] = randomized;
    } else if (action == "homogenize") {
        run.parameters["degree"] = degree;
        run.parameters["out"] = out;
        const Homogenized h = homogenize(c, degree);
        if (!out.empty()) write_file(out, serialize(h.circuit));
        const Degree q = circuit_stats(normalize_binary(c)).skew.value_or(degree);
        const std::uint64_t bound = homogenize_factor(q) * std::max<Degree>(degree, 1) * std::max<std::size_t>(c.size(), 1);
        run.result = {{"components_per_output", degree + 1}, {"size_bound", bound},
                      {"within_bound", h.circuit.size() <= bound}};
        run.sizes["output_gates"] = h.circuit.num_gates();
        run.sizes["output_arcs"] = h.circuit.size();
    } else if (action == "grad") {
        run.parameters["wrt"] = wrt;
        run.parameters["out"] = out;
        const auto vars = select_variables(c, wrt);
        if (vars.empty()) throw InvalidArgument("no input matches the prefix '" + wrt + "'");
        const Circuit g = baur_strassen(c, vars);
        if (!out.empty()) write_file(out, serialize(g));
        run.result = {{"partials", vars}, {"size_bound", kBaurStrassenFactor * c.size()},
                      {"within_bound", g.size() <= kBaurStrassenFactor * c.size()}};
        run.sizes["output_gates"] = g.num_gates();
        run.sizes["output_arcs"] = g.size();
    } else {
        const CircuitStats s = circuit_stats(c);
        run.result = {{"inputs", s.inputs}, {"constants", s.constants}, {"adds", s.adds}, {"muls", s.muls},
                      {"outputs", s.outputs}, {"depth", s.depth}, {"max_output_degree", s.max_output_degree}};
        run.result["skew"] = s.skew ? json(*s.skew) : json("none");
    }
}

void run_steinitz(Run& run, const std::string& action, const std::string& file, const std::vector<std::size_t>& sizes) {
    run.parameters = {{"action", action}, {"in", file}};
    const VectorFamily fam = parse_vector_family(read_file(file));
    if (action == "perm") {
        const SteinitzResult r = steinitz_permutation(fam);
        json perm = json::array(), prefix = json::array();
        for (auto i : r.perm) perm.push_back(i + 1);
        for (const auto& p : r.prefix) prefix.push_back(rational_json(p));
        run.result = {{"permutation", perm}, {"bound", rational_json(r.bound)}, {"prefix_deviations", prefix}};
        run.sizes = {{"states_explored", r.states_explored}};
    } else {
        run.parameters["sizes"] = sizes;
        const ConcentrationPartition p = concentration_partition(fam, sizes);
        json groups = json::array(), dev = json::array();
        for (const auto& g : p.groups) {
            json grp = json::array();
            for (auto i : g) grp.push_back(i + 1);
            groups.push_back(grp);
        }
        for (const auto& d : p.deviation) dev.push_back(rational_json(d));
        run.result = {{"groups", groups}, {"deviations", dev}, {"prefix_bound", rational_json(p.steinitz.bound)}};
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kronscale: Kronecker-scaling circuits, exact counting, algebraic sieving and "
                 "matchings-connectivity verification"};
    app.require_subcommand(1);
    Common common;
    std::function<void(Run&)> action;
    std::string chosen;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", common.seed, "random seed")->capture_default_str();
        sub->add_flag("--json", common.json, "print the report as JSON");
        sub->add_option("--threads", common.threads, "cap on internal parallelism")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
    };

    // verify-scaling
    unsigned b = 1, g = 1, s = 1, n = 0, q = 0, k = 0, trials = 7, degree = 0;
    bool paper = false;
    std::string dec, out, file, vars, method = "direct", mode = "direct", field = "p=2305843009213693951";
    std::string graph, td, assign, wrt;
    std::vector<std::size_t> sizes;

    auto* vs = app.add_subcommand("verify-scaling", "exhaustively verify the Kronecker-scaling identity");
    vs->add_option("--b", b, "block size")->required();
    vs->add_option("--g", g, "group size")->required();
    vs->add_option("--s", s, "number of groups")->required();
    vs->add_flag("--paper-padding", paper, "pad to bg + 36b");
    add_common(vs);
    vs->callback([&] { action = [&](Run& r) { run_verify_scaling(r, b, g, s, paper); }; });

    auto* bp = app.add_subcommand("build-p", "build the balanced-tripartition circuit P_n");
    bp->add_option("--n", n, "part size")->required();
    bp->add_option("--b", b, "block size")->capture_default_str();
    bp->add_option("--g", g, "group size")->capture_default_str();
    bp->add_option("--dec", dec, "rank-decomposition file of the base tensor (default: trivial)");
    bp->add_option("--out", out, "write the circuit here");
    bp->add_flag("--paper-padding", paper, "pad to bg + 36b");
    add_common(bp);
    bp->callback([&] { action = [&](Run& r) { run_build_p(r, n, b, g, dec, out, paper); }; });

    auto* ex = app.add_subcommand("extract", "extract the full multilinear coefficient");
    ex->add_option("--circuit", file, "circuit file")->required();
    ex->add_option("--vars", vars, "input-name prefix of the extraction variables")->required();
    ex->add_option("--method", method, "direct|tri")->check(CLI::IsMember({"direct", "tri"}))->capture_default_str();
    ex->add_option("--out", out, "write the extracted circuit here");
    ex->add_option("--dec", dec, "rank-decomposition file for the tripartition method");
    add_common(ex);
    ex->callback([&] { action = [&](Run& r) { run_extract(r, file, vars, method, out, dec); }; });

    for (const char* name : {"perm", "haf", "setpart"}) {
        auto* sub = app.add_subcommand(name, std::string(name) == "perm"  ? "permanent of a matrix file"
                                             : std::string(name) == "haf" ? "hafnian of a symmetric matrix file"
                                                                          : "count exact covers of a set-family file");
        sub->add_option("--in", file, "input file")->required();
        sub->add_option("--mode", mode, "direct|tri")->check(CLI::IsMember({"direct", "tri"}))->capture_default_str();
        sub->add_option("--dec", dec, "rank-decomposition file for the tripartition mode");
        sub->add_option("--field", field, "field spec, e.g. 'p=1000003' or 'gf2 w=64'")->capture_default_str();
        add_common(sub);
        const std::string cmd = name;
        sub->callback([&, cmd] {
            action = [&, cmd](Run& r) {
                if (cmd == "perm") run_perm(r, file, mode, dec, field);
                else if (cmd == "haf") run_haf(r, file, mode, dec, field);
                else run_setpart(r, file, mode, dec, field);
            };
        });
    }

    auto* sieve = app.add_subcommand("sieve", "randomized algebraic detection");
    sieve->require_subcommand(1);
    for (const char* name : {"kpath", "matroid3", "longcycle"}) {
        const std::string problem = name;
        auto* sub = sieve->add_subcommand(name, problem == "kpath"      ? "path with k edges"
                                                 : problem == "matroid3" ? "k disjoint triples (3-matroid intersection)"
                                                                         : "cycle of length >= k in a bipartite graph");
        sub->add_option(problem == "matroid3" ? "--graph,--in" : "--graph", graph,
                        problem == "matroid3" ? "triples file" : "graph file")
            ->required();
        sub->add_option("--k", k, "size parameter")->required();
        sub->add_option("--trials", trials, "independent trials")->capture_default_str();
        sub->add_option("--method", method, "auto|direct|tri")
            ->check(CLI::IsMember({"auto", "direct", "tri"}))
            ->capture_default_str();
        add_common(sub);
        sub->callback([&, problem] {
            action = [&, problem](Run& r) { run_sieve(r, problem, graph, k, trials, method, common.seed); };
        });
    }

    auto* mc = app.add_subcommand("matchcon", "matchings-connectivity verification");
    mc->require_subcommand(1);
    auto* vb = mc->add_subcommand("verify-basis", "basis identity over all pairs of perfect matchings");
    vb->add_option("--q", q, "ground size (even, <= 8)")->required();
    add_common(vb);
    vb->callback([&] { action = [&](Run& r) { run_verify_basis(r, q); }; });
    auto* vf = mc->add_subcommand("verify-fac", "block factorization of the connectivity tensor");
    vf->add_option("--q", q, "ground size (<= 6)")->required();
    vf->add_option("--b", b, "block size (<= 3)")->required();
    add_common(vf);
    vf->callback([&] { action = [&](Run& r) { run_verify_fac(r, q, b); }; });
    auto* vj = mc->add_subcommand("verify-join", "join recurrence against brute-force tables");
    vj->add_option("--graph", graph, "graph file")->required();
    vj->add_option("--td", td, "nice tree decomposition file")->required();
    add_common(vj);
    vj->callback([&] { action = [&](Run& r) { run_verify_join(r, graph, td, common.seed); }; });

    auto* circ = app.add_subcommand("circuit", "circuit utilities");
    circ->require_subcommand(1);
    for (const char* name : {"eval", "homogenize", "grad", "stats"}) {
        const std::string act = name;
        auto* sub = circ->add_subcommand(name, act == "eval"         ? "evaluate (unassigned inputs are random)"
                                               : act == "homogenize" ? "split into homogeneous components"
                                               : act == "grad"       ? "all first partial derivatives"
                                                                     : "gate and degree statistics");
        sub->add_option("--circuit", file, "circuit file")->required();
        if (act == "eval") sub->add_option("--assign", assign, "assignment file: lines 'name value'");
        if (act == "homogenize") sub->add_option("--degree", degree, "maximum degree")->required();
        if (act == "grad") sub->add_option("--wrt", wrt, "input-name prefix to differentiate by")->required();
        if (act == "homogenize" || act == "grad") sub->add_option("--out", out, "write the result here");
        add_common(sub);
        sub->callback([&, act] {
            action = [&, act](Run& r) { run_circuit(r, act, file, assign, degree, wrt, out, common.seed); };
        });
    }

    auto* st = app.add_subcommand("steinitz", "Steinitz rearrangement and concentration partitions");
    st->require_subcommand(1);
    auto* sp = st->add_subcommand("perm", "optimal prefix-balanced ordering");
    sp->add_option("--in", file, "vector file")->required();
    add_common(sp);
    sp->callback([&] { action = [&](Run& r) { run_steinitz(r, "perm", file, {}); }; });
    auto* spart = st->add_subcommand("partition", "split into groups of given sizes near the mean");
    spart->add_option("--in", file, "vector file")->required();
    spart->add_option("--sizes", sizes, "group sizes")->required()->delimiter(',');
    add_common(spart);
    spart->callback([&] { action = [&](Run& r) { run_steinitz(r, "partition", file, sizes); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    // full command path for the report
    for (const CLI::App* cur = &app; !cur->get_subcommands().empty();) {
        cur = cur->get_subcommands().front();
        chosen += (chosen.empty() ? "" : " ") + cur->get_name();
    }
    Run run;
    run.command = chosen;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        action(run);
    } catch (const Error& e) {
        std::cerr << "kronscale " << chosen << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "kronscale " << chosen << ": " << e.what() << "\n";
        return kExitUsage;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    json report = {{"command", run.command},
                   {"parameters", run.parameters},
                   {"seed", common.seed},
                   {"threads", common.threads},
                   {"result", run.result},
                   {"sizes", run.sizes},
                   {"exit_code", run.exit_code},
                   {"wall_time_s", wall}};
    if (common.json) std::cout << report.dump(2) << "\n";
    else print_human(report);
    return run.exit_code;
}
