#include "accpoly/generators.hpp"

#include <algorithm>
#include <map>

namespace accpoly {

namespace {

// Pairwise reduction keeps the op depth of an n-way combine at ceil(log2 n).
Edge balanced_combine(DagBuilder& b, std::vector<Edge> items, NodeKind kind) {
    while (items.size() > 1) {
        std::vector<Edge> next;
        for (std::size_t i = 0; i + 1 < items.size(); i += 2) {
            int id = kind == NodeKind::mul ? b.mul(items[i], items[i + 1])
                                           : b.add(items[i], items[i + 1]);
            next.push_back(ref(id));
        }
        if (items.size() % 2 == 1) next.push_back(items.back());
        items = std::move(next);
    }
    return items.at(0);
}

// e scaled by a positive integer using doubling additions.
Edge scale_by_integer(DagBuilder& b, Edge e, const mpz_class& a) {
    if (a <= 0) throw Error("internal: scale factor must be positive");
    if (a == 1) return e;
    std::size_t bits = mpz_sizeinbase(a.get_mpz_t(), 2);
    Edge power = e;
    std::optional<Edge> acc;
    if (mpz_tstbit(a.get_mpz_t(), 0)) acc = e;
    for (std::size_t i = 1; i < bits; ++i) {
        power = ref(b.add(power, power));
        if (mpz_tstbit(a.get_mpz_t(), i)) acc = acc ? ref(b.add(*acc, power)) : power;
    }
    return *acc;
}

// Largest number of (1+delta) factors any single term of the output can carry.
// Additions pass each term through one side, so they take the larger input count;
// multiplications combine a term from each side, so the counts add.
int rounded_factor_bound(const Dag& d) {
    auto topo = require_valid(d);
    std::map<int, int> count;
    for (int idx : topo) {
        const Node& nd = d.nodes[static_cast<std::size_t>(idx)];
        if (nd.kind == NodeKind::source) {
            count[nd.id] = 0;
            continue;
        }
        int m = 0;
        if (nd.kind == NodeKind::mul) {
            for (const auto& e : nd.inputs) m += count.at(e.node);
        } else {
            for (const auto& e : nd.inputs) m = std::max(m, count.at(e.node));
        }
        count[nd.id] = m + (nd.delta > 0 ? 1 : 0);
    }
    return count.at(d.output.node);
}

Polynomial poly_pow(const Polynomial& p, long e) {
    Polynomial r = Polynomial::constant(p.nvars(), Rational(1));
    for (long i = 0; i < e; ++i) r = r * p;
    return r;
}

}  // namespace

MonomialSumResult gen_monomial_sum(const Polynomial& p) {
    if (!p.has_integer_coefficients())
        throw Error("gen_monomial_sum: integer coefficients required");
    if (p.is_zero()) throw Error("gen_monomial_sum: zero polynomial");
    auto deg = p.homogeneous_degree();
    if (!deg) throw Error("gen_monomial_sum: homogeneous polynomial required");
    if (*deg == 0) throw Error("gen_monomial_sum: a constant has no input to evaluate");

    DagBuilder b(p.nvars(), "monomial_sum");
    std::vector<Edge> terms;
    for (const auto& [m, c] : p.terms()) {
        std::vector<Edge> factors;
        for (std::size_t v = 0; v < m.e.size(); ++v)
            for (std::uint32_t q = 0; q < m.e[v]; ++q)
                factors.push_back(ref(b.source(static_cast<int>(v))));
        Edge mono = balanced_combine(b, std::move(factors), NodeKind::mul);
        mpz_class a = c.get_num();
        Edge scaled = scale_by_integer(b, mono, abs(a));
        terms.push_back(a < 0 ? Edge{scaled.node, !scaled.negated} : scaled);
    }
    Edge out = balanced_combine(b, std::move(terms), NodeKind::add);
    b.set_output(out);
    MonomialSumResult r{b.take(), 0};
    r.f = rounded_factor_bound(r.dag);
    return r;
}

namespace {

// The matching-signs leaf, written exactly as displayed: powers of x3 against
// brackets in u = x1 - x3 and v = x2 - x3. Every bracket vanishes with u and v,
// so points with x1 = x2 = x3 come out exactly zero under any rounding.
Dag motzkin_displayed_leaf(long j) {
    DagBuilder b(3, "motzkin_leaf_ppp");
    Edge x1 = ref(b.source(0)), x2 = ref(b.source(1)), x3 = ref(b.source(2));
    Edge u = ref(b.sub(x1, x3));
    Edge v = ref(b.sub(x2, x3));
    Edge u2 = ref(b.mul(u, u)), v2 = ref(b.mul(v, v)), uv = ref(b.mul(u, v));
    Edge u3 = ref(b.mul(u2, u)), v3 = ref(b.mul(v2, v));
    Edge u4 = ref(b.mul(u2, u2)), v4 = ref(b.mul(v2, v2));
    Edge vu2 = ref(b.mul(uv, u)), v2u = ref(b.mul(uv, v));
    Edge vu3 = ref(b.mul(uv, u2)), v3u = ref(b.mul(uv, v2));
    Edge v2u2 = ref(b.mul(uv, uv));
    Edge x32 = ref(b.mul(x3, x3));
    Edge x33 = ref(b.mul(x32, x3));
    Edge x34 = ref(b.mul(x32, x32));
    auto times = [&](Edge e, long c) { return scale_by_integer(b, e, mpz_class(c)); };

    // 4*(u^2 + v^2 + u*v)
    Edge sq_sum = ref(b.add(u2, v2));
    Edge bracket4 = times(ref(b.add(sq_sum, uv)), 4);
    // 2*(2u^3 + 5vu^2 + 5v^2u + 2v^3)
    Edge b3a = ref(b.add(times(u3, 2), times(vu2, 5)));
    Edge b3b = ref(b.add(times(v2u, 5), times(v3, 2)));
    Edge bracket3 = times(ref(b.add(b3a, b3b)), 2);
    // u^4 + 8vu^3 + 9v^2u^2 + 8v^3u + v^4
    Edge b2a = ref(b.add(u4, times(vu3, 8)));
    Edge b2b = ref(b.add(times(v2u2, 9), times(v3u, 8)));
    Edge bracket2 = ref(b.add(ref(b.add(b2a, b2b)), v4));
    // 2vu*(u^3 + 2vu^2 + 2v^2u + v^3)
    Edge inner = ref(b.add(ref(b.add(u3, times(vu2, 2))), ref(b.add(times(v2u, 2), v3))));
    Edge bracket1 = times(ref(b.mul(uv, inner)), 2);
    // v^2u^2*(u^2 + v^2)
    Edge bracket0 = ref(b.mul(v2u2, sq_sum));

    Edge t4 = ref(b.mul(x34, bracket4));
    Edge t3 = ref(b.mul(x33, bracket3));
    Edge t2 = ref(b.mul(x32, bracket2));
    Edge t1 = ref(b.mul(x3, bracket1));
    Edge total = ref(b.add(ref(b.add(ref(b.add(t4, t3)), ref(b.add(t2, t1)))), bracket0));
    b.set_output(scale_by_integer(b, total, mpz_class(j)));
    return b.take();
}

// Image of a DAG under x_i -> sigma_i * x_i: dotted edges appear on every use of a
// flipped source, so the transformation is exact.
Dag flip_sources(const Dag& d, const int sigma[3], const std::string& name) {
    Dag out = d;
    out.name = name;
    auto flipped = [&](int id) {
        const Node* n = d.find(id);
        return n && n->kind == NodeKind::source && sigma[n->var] < 0;
    };
    for (auto& nd : out.nodes)
        for (auto& e : nd.inputs)
            if (flipped(e.node)) e.negated = !e.negated;
    if (flipped(out.output.node)) out.output.negated = !out.output.negated;
    return out;
}

}  // namespace

BranchProgram gen_motzkin(long j, long k) {
    if (j < 1) throw Error("gen_motzkin: j must be a positive integer");
    if (k != 3 * j) throw Error("gen_motzkin: defined only for k = 3j");

    Dag displayed = motzkin_displayed_leaf(j);
    auto leaf_for = [&](int b1, int b2, int b3) {
        int s3 = b3 ? 1 : -1;
        int sigma[3] = {s3 * (b1 ? 1 : -1), s3 * (b2 ? 1 : -1), s3};
        std::string name = "motzkin_leaf_";
        for (int s : sigma) name += s > 0 ? 'p' : 'm';
        if (sigma[0] > 0 && sigma[1] > 0 && sigma[2] > 0) return branch_leaf(displayed);
        return branch_leaf(flip_sources(displayed, sigma, name));
    };

    auto var = [](int i) { return Polynomial::variable(3, i); };
    auto square_guard = [&](int a, int c) {
        Polynomial diff = var(a) - var(c);
        Polynomial sum = var(a) + var(c);
        return Guard{diff * diff, Cmp::LessEq, sum * sum};
    };
    Guard t1 = square_guard(0, 2), t2 = square_guard(1, 2), t3 = square_guard(0, 1);

    auto level3 = [&](int b1, int b2) {
        return branch_if(t3, leaf_for(b1, b2, 1), leaf_for(b1, b2, 0));
    };
    auto level2 = [&](int b1) { return branch_if(t2, level3(b1, 1), level3(b1, 0)); };
    BranchProgram bp;
    bp.name = "motzkin";
    bp.nvars = 3;
    bp.root = branch_if(t1, level2(1), level2(0));
    return bp;
}

namespace {

Polynomial summand_total(const std::vector<Polynomial>& summands) {
    if (summands.empty()) throw Error("compensated sum: no summands");
    Polynomial total = summands[0];
    for (std::size_t i = 1; i < summands.size(); ++i) {
        if (summands[i].nvars() != total.nvars())
            throw Error("compensated sum: summands disagree on the variable count");
        total += summands[i];
    }
    return total;
}

std::string shift_name(int m) { return "sumshift" + std::to_string(m); }
std::string acc_name(int k) { return "sumacc" + std::to_string(k); }

BlackBoxOp shift_op(const Polynomial& total, int m) {
    int n = total.nvars();
    Polynomial poly = extend_vars(total, n + m);
    for (int l = 0; l < m; ++l) poly -= Polynomial::variable(n + m, n + l);
    return BlackBoxOp{shift_name(m), n + m, std::move(poly), false};
}

BlackBoxOp acc_op(int k) {
    Polynomial poly(k);
    for (int i = 0; i < k; ++i) poly += Polynomial::variable(k, i);
    return BlackBoxOp{acc_name(k), k, std::move(poly), true};
}

}  // namespace

void register_compensated_ops(const std::vector<Polynomial>& summands, int k,
                              BlackBoxRegistry& reg) {
    if (k < 1) throw Error("compensated sum: k must be at least 1");
    Polynomial total = summand_total(summands);
    for (int m = 0; m < k; ++m) reg.add(shift_op(total, m));
    reg.add(acc_op(k));
}

Dag gen_compensated_sum(const std::vector<Polynomial>& summands, int k,
                        const BlackBoxRegistry& reg) {
    if (k < 1) throw Error("compensated sum: k must be at least 1");
    Polynomial total = summand_total(summands);
    for (int m = 0; m < k; ++m) {
        const BlackBoxOp* op = reg.find(shift_name(m));
        if (!op) throw Error("compensated sum: " + shift_name(m) + " is not registered");
        BlackBoxOp want = shift_op(total, m);
        if (op->arity != want.arity || !(op->poly == want.poly) || op->exact)
            throw Error("compensated sum: " + shift_name(m) + " does not match the summands");
    }
    const BlackBoxOp* fin = reg.find(acc_name(k));
    if (!fin) throw Error("compensated sum: " + acc_name(k) + " is not registered");
    if (fin->arity != k || !fin->exact)
        throw Error("compensated sum: " + acc_name(k) + " must be the exact k-ary sum");

    int n = total.nvars();
    DagBuilder b(n, "compensated_sum");
    std::vector<Edge> xs;
    for (int v = 0; v < n; ++v) xs.push_back(ref(b.source(v)));
    std::vector<Edge> ys;
    for (int m = 0; m < k; ++m) {
        std::vector<Edge> inputs = xs;
        inputs.insert(inputs.end(), ys.begin(), ys.end());
        ys.push_back(ref(b.blackbox(shift_name(m), std::move(inputs), false)));
    }
    b.set_output(ref(b.blackbox(acc_name(k), ys, true)));
    return b.take();
}

BranchProgram branching_evaluator(const Polynomial& p, const std::vector<EvalPlan>& plans) {
    if (p.is_zero()) throw Error("branching_evaluator: zero polynomial");
    if (!p.homogeneous_degree()) throw Error("branching_evaluator: homogeneous polynomial required");
    int n = p.nvars();

    // Two plans claiming the same region must agree on the closeness threshold,
    // otherwise some point would be promised two different accuracy budgets.
    std::map<std::pair<IntMatrix, std::vector<std::vector<std::uint32_t>>>, long> claimed;
    for (const auto& plan : plans) {
        if (plan.closeness < 1) throw Error("branching_evaluator: closeness must be a positive integer");
        if (plan.change.nvars != n) throw Error("branching_evaluator: plan variable count mismatch");
        if (plan.region.block != plan.change.block)
            throw Error("branching_evaluator: plan region and change disagree on the block");
        auto key = std::make_pair(plan.change.C, plan.region.lambdas);
        auto [it, fresh] = claimed.emplace(key, plan.closeness);
        if (!fresh && it->second != plan.closeness)
            throw Error("branching_evaluator: conflicting closeness for one region");
        if (std::holds_alternative<Dag>(plan.leaf)) {
            const Dag& d = std::get<Dag>(plan.leaf);
            if (d.nvars != n) throw Error("branching_evaluator: leaf variable count mismatch");
            require_valid(d);
        } else {
            const BranchProgram& bp = std::get<BranchProgram>(plan.leaf);
            if (bp.nvars != n || !bp.root)
                throw Error("branching_evaluator: leaf program is empty or mismatched");
            for_each_leaf(bp, [&](const Dag& d) { require_valid(d); });
        }
    }

    auto rest = branch_leaf(gen_monomial_sum(p).dag);
    for (auto it = plans.rbegin(); it != plans.rend(); ++it) {
        const EvalPlan& plan = *it;
        std::vector<Polynomial> linear;
        for (int i = 0; i < n; ++i) {
            Polynomial L(n);
            for (int jv = 0; jv < n; ++jv) {
                long c = plan.change.C[static_cast<std::size_t>(i)][static_cast<std::size_t>(jv)];
                if (c != 0) L += Polynomial::variable(n, jv) * Rational(c);
            }
            linear.push_back(std::move(L));
        }
        std::vector<bool> in_block(static_cast<std::size_t>(n), false);
        for (int bvar : plan.region.block) in_block[static_cast<std::size_t>(bvar)] = true;

        std::vector<Guard> guards;
        {
            // closeness^2 * sum of squared block coordinates <= sum of the others
            Polynomial lhs(n), rhs(n);
            for (int i = 0; i < n; ++i) {
                Polynomial sq = linear[static_cast<std::size_t>(i)] * linear[static_cast<std::size_t>(i)];
                if (in_block[static_cast<std::size_t>(i)])
                    lhs += sq;
                else
                    rhs += sq;
            }
            lhs = lhs * Rational(plan.closeness * plan.closeness);
            guards.push_back(Guard{std::move(lhs), Cmp::LessEq, std::move(rhs)});
        }
        for (const auto& row : plan.region.widened) {
            Polynomial lhs = Polynomial::constant(n, Rational(1));
            Polynomial rhs = lhs;
            for (std::size_t c = 0; c < row.size(); ++c) {
                const Polynomial& L = linear[static_cast<std::size_t>(plan.region.block[c])];
                if (row[c] > 0)
                    lhs = lhs * poly_pow(L, 2 * row[c]);
                else if (row[c] < 0)
                    rhs = rhs * poly_pow(L, -2 * row[c]);
            }
            guards.push_back(Guard{std::move(lhs), Cmp::LessEq, std::move(rhs)});
        }

        std::shared_ptr<const BranchNode> leaf_node =
            std::holds_alternative<Dag>(plan.leaf)
                ? branch_leaf(std::get<Dag>(plan.leaf))
                : std::get<BranchProgram>(plan.leaf).root;
        std::shared_ptr<const BranchNode> node = leaf_node;
        for (auto git = guards.rbegin(); git != guards.rend(); ++git)
            node = branch_if(*git, node, rest);
        rest = node;
    }

    BranchProgram bp;
    bp.name = "branching";
    bp.nvars = n;
    bp.root = rest;
    return bp;
}

}  // namespace accpoly
