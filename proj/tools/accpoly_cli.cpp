#include "accpoly/accuracy.hpp"
#include "accpoly/dag.hpp"
#include "accpoly/decide.hpp"
#include "accpoly/dominance.hpp"
#include "accpoly/generators.hpp"
#include "accpoly/io.hpp"
#include "accpoly/polynomial.hpp"
#include "accpoly/structured.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <numeric>

namespace {

using namespace accpoly;

// Smallest variable count covering every x<k> mentioned in the text.
int infer_nvars(const std::string& text) {
    int best = 1;
    for (std::size_t i = 0; i + 1 < text.size(); ++i) {
        if (text[i] != 'x' || !std::isdigit(static_cast<unsigned char>(text[i + 1]))) continue;
        int v = 0;
        std::size_t j = i + 1;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
            v = v * 10 + (text[j++] - '0');
        best = std::max(best, v);
    }
    return best;
}

Polynomial poly_from_flags(const std::string& text, int nvars) {
    int n = nvars > 0 ? nvars : infer_nvars(text);
    return parse_polynomial(text, n);
}

std::uint64_t seed_from_env(std::uint64_t flag_seed, bool seed_given) {
    if (seed_given) return flag_seed;
    if (const char* env = std::getenv("ACC_SEED")) {
        try {
            return static_cast<std::uint64_t>(std::stoull(env));
        } catch (...) {
            throw Error("ACC_SEED must be an unsigned integer");
        }
    }
    return flag_seed;
}

void emit_text(const std::string& text, const std::string& out_path) {
    if (out_path.empty())
        std::cout << text;
    else
        write_text_file(out_path, text);
}

std::vector<BlackBoxOp> ops_vector(const BlackBoxRegistry& reg) {
    std::vector<BlackBoxOp> v;
    for (const auto& [name, op] : reg.all()) v.push_back(op);
    return v;
}

// Nonblank non-comment lines, trimmed; used for point and matrix files.
std::vector<std::string> content_rows(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        std::size_t a = 0, b = cur.size();
        while (a < b && std::isspace(static_cast<unsigned char>(cur[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(cur[b - 1]))) --b;
        std::string t = cur.substr(a, b - a);
        if (!t.empty() && t[0] != '#') out.push_back(t);
        cur.clear();
    };
    for (char c : text) {
        if (c == '\n')
            flush();
        else
            cur.push_back(c);
    }
    flush();
    return out;
}

std::vector<std::string> comma_split(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

void print_verdict(const Verdict& v) {
    std::cout << "status=" << to_string(v.status) << "\n";
    if (v.status == Status::Evaluable) {
        std::cout << "c=" << v.c.get_str() << "\n";
        std::string fs;
        for (std::size_t i = 0; i < v.factors.size(); ++i) {
            if (i) fs += ";";
            fs += v.factors[i].to_string();
        }
        std::cout << "factors=" << fs << "\n";
    }
    if (v.remainder) std::cout << "remainder=" << v.remainder->to_string() << "\n";
    if (v.witness) std::cout << "witness=" << point_to_string(*v.witness) << "\n";
    if (v.restriction) std::cout << "restriction=" << v.restriction->to_string() << "\n";
    if (!v.reason.empty()) std::cout << "reason=" << v.reason << "\n";
}

int finish_with_expectation(const Verdict& v, const std::string& expect) {
    if (expect == "evaluable" && v.status == Status::NotEvaluable) return 2;
    return 0;
}

struct DecideArgs {
    std::string field = "c";
    std::string poly;
    std::string ops_path;
    std::string candidates_path;
    std::string emit_path;
    std::string expect;
    int nvars = 0;
};

int run_decide(const DecideArgs& a) {
    Polynomial p = poly_from_flags(a.poly, a.nvars);
    if (a.field == "r") {
        if (a.candidates_path.empty())
            throw Error("decide --field r needs --candidates with one point per line");
        std::vector<Point> candidates;
        for (const auto& raw : content_rows(read_text_file(a.candidates_path)))
            candidates.push_back(parse_point(raw));
        auto w = real_nonevaluability_witness(p, candidates);
        Verdict v;
        if (w) {
            v.status = Status::NotEvaluable;
            v.witness = w->x;
            v.restriction = w->restriction;
            v.reason = "variety point in general position";
        } else {
            v.status = Status::Unknown;
            v.reason = "no candidate lies on the variety in general position";
        }
        print_verdict(v);
        return finish_with_expectation(v, a.expect);
    }
    if (a.field != "c") throw Error("--field must be c or r");

    BlackBoxRegistry reg;
    Verdict v;
    if (!a.ops_path.empty()) {
        reg = parse_ops(read_text_file(a.ops_path));
        v = decide_blackbox_affine(p, ops_vector(reg));
    } else {
        v = decide_complex(p);
    }
    print_verdict(v);
    if (v.status == Status::Evaluable) {
        Dag d = compile_product(v.c, v.factors, reg);
        std::string text = dag_to_text(d);
        if (!a.emit_path.empty()) write_text_file(a.emit_path, text);
        std::cout << text;
    }
    return finish_with_expectation(v, a.expect);
}

struct CompileArgs {
    std::string strategy;
    std::string poly;
    long k = 0;
    std::string out_path;
    std::string ops_out_path;
    std::string expect;
    int nvars = 0;
};

int run_compile(const CompileArgs& a) {
    if (a.strategy == "monomial-sum") {
        auto r = gen_monomial_sum(poly_from_flags(a.poly, a.nvars));
        std::cout << "strategy=monomial-sum\n" << "f=" << r.f << "\n";
        emit_text(dag_to_text(r.dag), a.out_path);
        return 0;
    }
    if (a.strategy == "motzkin") {
        long k = a.k > 0 ? a.k : 3;
        if (k % 3 != 0) throw Error("motzkin needs --k divisible by 3");
        BranchProgram bp = gen_motzkin(k / 3, k);
        std::cout << "strategy=motzkin\n" << "k=" << k << "\n";
        emit_text(program_to_text(bp), a.out_path);
        return 0;
    }
    if (a.strategy == "product") {
        Verdict v = decide_complex(poly_from_flags(a.poly, a.nvars));
        print_verdict(v);
        if (v.status != Status::Evaluable) return finish_with_expectation(v, a.expect);
        emit_text(dag_to_text(compile_product(v.c, v.factors)), a.out_path);
        return 0;
    }
    if (a.strategy == "compensated") {
        if (a.k < 1) throw Error("compensated needs --k >= 1");
        Polynomial p = poly_from_flags(a.poly, a.nvars);
        BlackBoxRegistry reg;
        register_compensated_ops({p}, static_cast<int>(a.k), reg);
        Dag d = gen_compensated_sum({p}, static_cast<int>(a.k), reg);
        std::cout << "strategy=compensated\n" << "k=" << a.k << "\n";
        if (!a.ops_out_path.empty()) write_text_file(a.ops_out_path, ops_to_text(reg));
        emit_text(dag_to_text(d), a.out_path);
        return 0;
    }
    throw Error("unknown strategy '" + a.strategy + "'");
}

struct SimulateArgs {
    std::string dag_path;
    std::string program_path;
    std::string ops_path;
    std::string near;
    std::string sampler = "sphere";
    std::string component;
    std::string eps = "1e-8";
    std::string radius = "1/10";
    std::string eta = "1";
    long budget = 100000;
    long samples = 0;
    std::uint64_t seed = 1;
    int threads = 1;
};

int run_simulate(const SimulateArgs& a) {
    BlackBoxRegistry reg;
    if (!a.ops_path.empty()) reg = parse_ops(read_text_file(a.ops_path));
    Rational eps = parse_rational(a.eps);

    if (!a.near.empty()) {
        if (a.dag_path.empty()) throw Error("adversarial search needs --dag");
        Dag d = parse_dag(read_text_file(a.dag_path));
        Polynomial p = extract_polynomial(d, reg);
        Point center = parse_point(a.near);
        AccuracyReport r = adversarial_search(d, p, center, parse_rational(a.radius), eps,
                                              a.budget, a.seed, reg);
        std::cout << report_lines(r);
        return 0;
    }

    long samples = a.samples > 0 ? a.samples : 1000;
    SamplerSpec sampler;
    if (a.sampler == "sphere") {
        sampler.kind = SamplerSpec::Kind::UnitSphere;
    } else if (a.sampler == "cube") {
        sampler.kind = SamplerSpec::Kind::Cube;
    } else if (a.sampler == "near-variety") {
        sampler.kind = SamplerSpec::Kind::NearVariety;
    } else {
        throw Error("--sampler must be sphere, cube, or near-variety");
    }
    Rational eta = parse_rational(a.eta);

    if (!a.program_path.empty()) {
        BranchProgram bp = parse_program(read_text_file(a.program_path));
        if (sampler.kind == SamplerSpec::Kind::NearVariety) {
            ComponentSpec spec = parse_component(a.component, bp.nvars);
            sampler.zero_vars = spec.zeros;
            for (const auto& ch : spec.chains) sampler.chains.emplace_back(ch.vars, ch.signs);
        }
        // Every leaf extracts to the same polynomial; grab it from the first one.
        std::optional<Polynomial> p;
        for_each_leaf(bp, [&](const Dag& leaf) {
            if (!p) p = extract_polynomial(leaf, reg);
        });
        if (!p) throw Error("program has no leaves");
        AccuracyReport r =
            sample_accuracy_report(bp, *p, sampler, eps, eta, samples, a.seed, a.threads, reg);
        std::cout << report_lines(r);
        return 0;
    }
    if (a.dag_path.empty()) throw Error("simulate needs --dag or --program");
    Dag d = parse_dag(read_text_file(a.dag_path));
    if (sampler.kind == SamplerSpec::Kind::NearVariety) {
        ComponentSpec spec = parse_component(a.component, d.nvars);
        sampler.zero_vars = spec.zeros;
        for (const auto& ch : spec.chains) sampler.chains.emplace_back(ch.vars, ch.signs);
    }
    Polynomial p = extract_polynomial(d, reg);
    AccuracyReport r = sample_accuracy_report(d, p, sampler, eps, eta, samples, a.seed,
                                              a.threads, reg);
    std::cout << report_lines(r);
    return 0;
}

std::string lambdas_to_string(const std::vector<std::vector<std::uint32_t>>& lambdas) {
    std::string s;
    for (const auto& l : lambdas) {
        s += "(";
        for (std::size_t i = 0; i < l.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(l[i]);
        }
        s += ")";
    }
    return s;
}

std::string block_to_string(const std::vector<int>& block) {
    std::string s;
    for (std::size_t i = 0; i < block.size(); ++i) {
        if (i) s += ",";
        s += "x" + std::to_string(block[i] + 1);
    }
    return s;
}

struct DominantArgs {
    std::string poly;
    std::string component;
    int nvars = 0;
};

int run_dominant(const DominantArgs& a) {
    Polynomial p = poly_from_flags(a.poly, a.nvars);
    ComponentSpec spec = parse_component(a.component, p.nvars());
    auto changes = enumerate_standard_changes(spec);
    std::cout << "changes=" << changes.size() << "\n";
    std::size_t reported = 0;
    for (std::size_t ci = 0; ci < changes.size(); ++ci) {
        const auto& cov = changes[ci];
        std::cout << "change=" << ci << " block=" << block_to_string(cov.block)
                  << " superset=" << component_to_string(cov.superset) << "\n";
        Polynomial tilde = changed_polynomial(p, cov);
        std::vector<DominanceRegion> regions;
        try {
            regions = dominance_regions(tilde, cov.block);
        } catch (const BudgetError& e) {
            // One change blowing its enumeration budget should not hide the others.
            std::cout << "change=" << ci << " skipped=" << e.what() << "\n";
            continue;
        }
        ++reported;
        for (std::size_t ri = 0; ri < regions.size(); ++ri) {
            const auto& reg = regions[ri];
            std::cout << "change=" << ci << " region=" << ri
                      << " facet=" << (reg.facet ? "true" : "false")
                      << " lambdas=" << lambdas_to_string(reg.lambdas) << " generator=";
            const auto& g = reg.generators.at(0);
            for (std::size_t q = 0; q < g.size(); ++q)
                std::cout << (q ? "," : "") << g[q];
            std::cout << " exp_cond=" << (satisfies_exp_cond(reg, cov) ? "true" : "false")
                      << " dominant=" << dominant_term(p, spec, cov, reg).p_dom.to_string()
                      << "\n";
        }
    }
    if (reported == 0 && !changes.empty())
        throw BudgetError("every standard change exceeded the region enumeration budget");
    return 0;
}

struct PruneArgs {
    std::string dag_path;
    std::string component;
    std::string eta;
    std::string out_path;
};

int run_prune(const PruneArgs& a) {
    Dag d = parse_dag(read_text_file(a.dag_path));
    ComponentSpec spec = parse_component(a.component, d.nvars);
    std::vector<long> eta;
    for (const auto& q : parse_point(a.eta)) {
        if (q.get_den() != 1 || q < 0) throw Error("--eta takes nonnegative integers");
        eta.push_back(q.get_num().get_si());
    }
    Polynomial p = extract_polynomial(d);

    auto changes = enumerate_standard_changes(spec);
    for (std::size_t ci = 0; ci < changes.size(); ++ci) {
        const auto& cov = changes[ci];
        if (cov.block.size() != eta.size()) continue;
        Polynomial tilde = changed_polynomial(p, cov);
        auto regions = dominance_regions(tilde, cov.block);
        auto slices = support_projection(tilde, cov.block);
        // The region selected by eta: minimal weighted exponents over the support.
        long long best = 0;
        bool first = true;
        for (const auto& s : slices) {
            long long v = 0;
            for (std::size_t q = 0; q < eta.size(); ++q)
                v += eta[q] * static_cast<long long>(s.lambda[q]);
            if (first || v < best) {
                best = v;
                first = false;
            }
        }
        std::vector<std::vector<std::uint32_t>> am;
        for (const auto& s : slices) {
            long long v = 0;
            for (std::size_t q = 0; q < eta.size(); ++q)
                v += eta[q] * static_cast<long long>(s.lambda[q]);
            if (v == best) am.push_back(s.lambda);
        }
        for (const auto& region : regions) {
            if (region.lambdas != am) continue;
            if (!satisfies_exp_cond(region, cov)) continue;
            Dag pruned = prune(d, spec, cov, region, eta);
            std::cout << "change=" << ci << " block=" << block_to_string(cov.block)
                      << " lambdas=" << lambdas_to_string(region.lambdas) << "\n";
            emit_text(dag_to_text(pruned), a.out_path);
            return 0;
        }
    }
    throw Error("no standard change admits this eta with the representative condition");
}

struct MatrixArgs {
    std::string which;
    int n = 0;
    std::string lambda;
    std::string c_path;
    int i = 0;
};

Partition parse_partition(const std::string& text) {
    Partition lam;
    if (text.empty()) return lam;
    for (const auto& tok : comma_split(text)) {
        Rational q = parse_rational(tok);
        if (q.get_den() != 1 || q < 0) throw Error("--lambda takes nonnegative integers");
        lam.push_back(static_cast<int>(q.get_num().get_si()));
    }
    return lam;
}

int run_matrix(const MatrixArgs& a) {
    if (a.which == "toeplitz") {
        Polynomial det = toeplitz_det(a.n);
        auto cert = toeplitz_certificate(det, a.n);
        std::cout << "poly=" << det.to_string() << "\n"
                  << "certificate=" << (cert.ok ? "ok" : cert.detail) << "\n";
        return 0;
    }
    if (a.which == "vandermonde") {
        if (a.n < 1 || a.n > 6) throw Error("--n must be between 1 and 6");
        Polynomial prod = Polynomial::constant(a.n, Rational(1));
        for (int r = 0; r < a.n; ++r)
            for (int c = r + 1; c < a.n; ++c)
                prod = prod * (Polynomial::variable(a.n, c) - Polynomial::variable(a.n, r));
        std::cout << "poly=" << prod.to_string() << "\n";
        return 0;
    }
    if (a.which == "gvander") {
        Partition lam = parse_partition(a.lambda);
        auto chk = generalized_vandermonde_check(lam, a.n);
        std::cout << "identity=" << (chk.ok ? "true" : "false") << "\n"
                  << "schur=" << schur_function(lam, a.n).to_string() << "\n";
        if (!chk.ok) std::cout << "residual=" << chk.residual.to_string() << "\n";
        return 0;
    }
    if (a.which == "pvminor") {
        std::vector<std::vector<Rational>> C;
        if (a.c_path.empty()) {
            C.assign(static_cast<std::size_t>(a.n), std::vector<Rational>(static_cast<std::size_t>(a.n), Rational(0)));
            for (int d = 0; d < a.n; ++d) C[static_cast<std::size_t>(d)][static_cast<std::size_t>(d)] = 1;
        } else {
            for (const auto& line : content_rows(read_text_file(a.c_path)))
                C.push_back(parse_point(line));
        }
        int i = a.i > 0 ? a.i : a.n;
        auto chk = poly_vandermonde_minor_check(C, a.n, i);
        std::cout << "identity=" << (chk.ok ? "true" : "false") << "\n"
                  << "E=" << chk.E.get_str() << "\n"
                  << "F=" << chk.F.get_str() << "\n";
        if (!chk.ok) std::cout << "residual=" << chk.residual.to_string() << "\n";
        Verdict v = minor_evaluability_verdict(a.n, chk.E, chk.F);
        print_verdict(v);
        return 0;
    }
    throw Error("matrix kind must be toeplitz, vandermonde, gvander, or pvminor");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"accurate polynomial evaluation toolkit"};
    app.require_subcommand(1);

    DecideArgs dec;
    auto* decide_cmd = app.add_subcommand("decide", "decide accurate evaluability");
    decide_cmd->add_option("--field", dec.field, "c (complex) or r (real witness)");
    decide_cmd->add_option("--poly", dec.poly, "polynomial text")->required();
    decide_cmd->add_option("--ops", dec.ops_path, "black-box op file");
    decide_cmd->add_option("--candidates", dec.candidates_path, "candidate points, one per line");
    decide_cmd->add_option("--emit", dec.emit_path, "write the certificate DAG here");
    decide_cmd->add_option("--expect", dec.expect, "exit 2 unless this verdict (evaluable)");
    decide_cmd->add_option("--nvars", dec.nvars, "variable count (default: inferred)");

    CompileArgs comp;
    auto* compile_cmd = app.add_subcommand("compile", "generate an evaluator");
    compile_cmd->add_option("--strategy", comp.strategy, "monomial-sum|motzkin|product|compensated")
        ->required();
    compile_cmd->add_option("--poly", comp.poly, "polynomial text");
    compile_cmd->add_option("--k", comp.k, "stage count / family parameter");
    compile_cmd->add_option("--out", comp.out_path, "output file (default: stdout)");
    compile_cmd->add_option("--ops-out", comp.ops_out_path, "write generated ops here");
    compile_cmd->add_option("--expect", comp.expect, "exit 2 unless this verdict (evaluable)");
    compile_cmd->add_option("--nvars", comp.nvars, "variable count (default: inferred)");

    SimulateArgs sim;
    bool seed_given = false;
    auto* sim_cmd = app.add_subcommand("simulate", "measure relative error");
    sim_cmd->add_option("--dag", sim.dag_path, "DAG file");
    sim_cmd->add_option("--program", sim.program_path, "branch program file");
    sim_cmd->add_option("--ops", sim.ops_path, "black-box op file");
    sim_cmd->add_option("--near", sim.near, "adversarial search around this point");
    sim_cmd->add_option("--sampler", sim.sampler, "sphere|cube|near-variety");
    sim_cmd->add_option("--component", sim.component, "component text for near-variety");
    sim_cmd->add_option("--eps", sim.eps, "rounding bound (exact rational or decimal)");
    sim_cmd->add_option("--radius", sim.radius, "box radius for --near");
    sim_cmd->add_option("--eta", sim.eta, "pass/fail target for sampling");
    sim_cmd->add_option("--budget", sim.budget, "evaluation budget for --near");
    sim_cmd->add_option("--samples", sim.samples, "sample count");
    sim_cmd->add_option("--seed", sim.seed, "random seed")->each([&](const std::string&) {
        seed_given = true;
    });
    sim_cmd->add_option("--threads", sim.threads, "worker threads");

    DominantArgs dom;
    auto* dom_cmd = app.add_subcommand("dominant", "dominance regions and dominant terms");
    dom_cmd->add_option("--poly", dom.poly, "polynomial text")->required();
    dom_cmd->add_option("--component", dom.component, "component text")->required();
    dom_cmd->add_option("--nvars", dom.nvars, "variable count (default: inferred)");

    PruneArgs pru;
    auto* prune_cmd = app.add_subcommand("prune", "prune a DAG toward a dominant term");
    prune_cmd->add_option("--dag", pru.dag_path, "DAG file")->required();
    prune_cmd->add_option("--component", pru.component, "component text")->required();
    prune_cmd->add_option("--eta", pru.eta, "weights for the block, e.g. 1,1,1")->required();
    prune_cmd->add_option("--out", pru.out_path, "output file (default: stdout)");

    MatrixArgs mat;
    auto* mat_cmd = app.add_subcommand("matrix", "structured determinant corpus");
    mat_cmd->add_option("kind", mat.which, "toeplitz|vandermonde|gvander|pvminor")->required();
    mat_cmd->add_option("--n", mat.n, "matrix size")->required();
    mat_cmd->add_option("--lambda", mat.lambda, "partition, e.g. 2,1");
    mat_cmd->add_option("--C", mat.c_path, "upper-triangular basis matrix file");
    mat_cmd->add_option("--i", mat.i, "deleted row (1-based, default n)");

    CLI11_PARSE(app, argc, argv);

    try {
        sim.seed = seed_from_env(sim.seed, seed_given);
        if (decide_cmd->parsed()) return run_decide(dec);
        if (compile_cmd->parsed()) return run_compile(comp);
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (dom_cmd->parsed()) return run_dominant(dom);
        if (prune_cmd->parsed()) return run_prune(pru);
        if (mat_cmd->parsed()) return run_matrix(mat);
        std::cerr << "error=no subcommand\n";
        return 1;
    } catch (const BudgetError& e) {
        std::cerr << "error=" << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error=" << e.what() << "\n";
        return 1;
    }
}
