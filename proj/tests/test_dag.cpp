#include "accpoly/dag.hpp"

#include "accpoly/polynomial.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <map>
#include <vector>

using namespace accpoly;

namespace {

Dag naive_sum3() {
    DagBuilder b(3, "naive_sum");
    int s1 = b.source(0), s2 = b.source(1), s3 = b.source(2);
    int a = b.add(ref(s1), ref(s2));
    int o = b.add(ref(a), ref(s3));
    b.set_output(ref(o));
    return b.take();
}

// The five-variable running example: x1^2*x2^2 + (x2-x3)^4 + (x3-x4)^2*x5^2,
// with the operation order fixed so the rounding indices are reproducible.
Dag two_branch_sum() {
    DagBuilder b(5, "two_branch_sum");
    int x1 = b.source(0), x2 = b.source(1), x3 = b.source(2), x4 = b.source(3), x5 = b.source(4);
    int sq1 = b.mul(ref(x1), ref(x1));
    int sq2 = b.mul(ref(x2), ref(x2));
    int left = b.mul(ref(sq1), ref(sq2));
    int d23 = b.sub(ref(x2), ref(x3));
    int d23_2 = b.mul(ref(d23), ref(d23));
    int d23_4 = b.mul(ref(d23_2), ref(d23_2));
    int pair = b.add(ref(left), ref(d23_4));
    int d34 = b.sub(ref(x3), ref(x4));
    int d34_2 = b.mul(ref(d34), ref(d34));
    int sq5 = b.mul(ref(x5), ref(x5));
    int right = b.mul(ref(d34_2), ref(sq5));
    int out = b.add(ref(pair), ref(right));
    b.set_output(ref(out));
    return b.take();
}

DeltaAssignment deltas_for(const Dag& d, const std::vector<Rational>& vals,
                           const Rational& eps) {
    DeltaAssignment a;
    a.eps = eps;
    for (std::size_t i = 0; i < vals.size(); ++i) a.values[static_cast<int>(i) + 1] = vals[i];
    return a;
}

}  // namespace

TEST_CASE("validation accepts the straightforward cases") {
    CHECK(validate(naive_sum3()).ok());
    CHECK(validate(two_branch_sum()).ok());
}

TEST_CASE("validation reports structural defects") {
    SUBCASE("self-feeding node") {
        Dag d;
        d.nvars = 1;
        d.nodes.push_back(Node{1, NodeKind::source, 0, "", {}, -1});
        d.nodes.push_back(Node{2, NodeKind::add, -1, "", {ref(2), ref(1)}, 1});
        d.output = ref(2);
        auto diag = validate(d);
        CHECK_FALSE(diag.ok());
    }
    SUBCASE("wrong black-box arity") {
        BlackBoxRegistry reg;
        reg.add(BlackBoxOp{"fma", 3, parse_polynomial("x1 + x2*x3", 3), false});
        Dag d;
        d.nvars = 2;
        d.nodes.push_back(Node{1, NodeKind::source, 0, "", {}, -1});
        d.nodes.push_back(Node{2, NodeKind::source, 1, "", {}, -1});
        d.nodes.push_back(Node{3, NodeKind::blackbox, -1, "fma", {ref(1), ref(2)}, 1});
        d.output = ref(3);
        CHECK_FALSE(validate(d, reg).ok());
        CHECK_THROWS_AS(require_valid(d, reg), Error);
    }
    SUBCASE("unknown black-box name") {
        Dag d;
        d.nvars = 1;
        d.nodes.push_back(Node{1, NodeKind::source, 0, "", {}, -1});
        d.nodes.push_back(Node{2, NodeKind::blackbox, -1, "mystery", {ref(1)}, 1});
        d.output = ref(2);
        CHECK_FALSE(validate(d).ok());
    }
    SUBCASE("dangling reference and missing output") {
        Dag d;
        d.nvars = 1;
        d.nodes.push_back(Node{1, NodeKind::source, 0, "", {}, -1});
        d.output = ref(9);
        CHECK_FALSE(validate(d).ok());
    }
}

TEST_CASE("rounded evaluation multiplies each operation by 1 + delta") {
    auto d = naive_sum3();

    SUBCASE("error survives at a sum zero") {
        Rational e(1, 100000000);
        auto val = eval_rounded(d, {1, 1, -2}, deltas_for(d, {e, e}, e));
        CHECK(val == 2 * e * (1 + e));
    }
    SUBCASE("zero deltas reproduce the polynomial") {
        auto val = eval_rounded(d, {Rational(2, 3), 1, 7}, DeltaAssignment::zeros(d));
        CHECK(val == Rational(2, 3) + 1 + 7);
    }
    SUBCASE("single product") {
        DagBuilder b(2);
        int m = b.mul(ref(b.source(0)), ref(b.source(1)));
        b.set_output(ref(m));
        auto prod = b.take();
        auto val = eval_rounded(prod, {3, 4}, deltas_for(prod, {Rational(1, 10)}, Rational(1, 10)));
        CHECK(val == Rational(66, 5));
    }
    SUBCASE("missing delta entry is an error") {
        CHECK_THROWS_AS(eval_rounded(d, {1, 1, 1}, deltas_for(d, {Rational(0)}, 0)), Error);
    }
}

TEST_CASE("negated edges flip signs exactly") {
    DagBuilder b(2);
    int s1 = b.source(0), s2 = b.source(1);
    int a = b.add(ref(s1), neg(s2));
    b.set_output(ref(a));
    auto d = b.take();
    CHECK(extract_polynomial(d) == parse_polynomial("x1 - x2", 2));

    // Flipping a negation twice leaves the computed function unchanged.
    auto twice = d;
    twice.nodes[2].inputs[1].negated = false;
    twice.nodes[2].inputs[1].negated = true;
    oracle::TestRng rng(3);
    for (int t = 0; t < 10; ++t) {
        auto x = rng.point(2);
        auto dl = deltas_for(d, {rng.rational(4) / 100}, 1);
        CHECK(eval_rounded(d, x, dl) == eval_rounded(twice, x, dl));
    }
}

TEST_CASE("polynomial extraction at zero rounding") {
    CHECK(extract_polynomial(naive_sum3()) == parse_polynomial("x1 + x2 + x3", 3));
    CHECK(extract_polynomial(two_branch_sum()) ==
          parse_polynomial("x1^2*x2^2 + (x2 - x3)^4 + (x3 - x4)^2*x5^2", 5));
}

TEST_CASE("error expansion of the naive sum") {
    auto exp = error_expansion(naive_sum3(), 2);
    CHECK(exp.m == 2);
    auto p01 = exp.coeffs.at({0, 1});
    auto p10 = exp.coeffs.at({1, 0});
    auto p11 = exp.coeffs.at({1, 1});
    CHECK(p10 == parse_polynomial("x1 + x2", 3));
    CHECK(p01 == parse_polynomial("x1 + x2 + x3", 3));
    CHECK(p11 == parse_polynomial("x1 + x2", 3));
    CHECK(exp.coeffs.at({0, 0}) == parse_polynomial("x1 + x2 + x3", 3));
    CHECK(exp.coeffs.size() == 4);
}

TEST_CASE("error expansion agrees with the node-by-node oracle") {
    std::vector<Dag> corpus;
    corpus.push_back(naive_sum3());
    corpus.push_back(two_branch_sum());
    {
        DagBuilder b(2, "squares");
        int s1 = b.source(0), s2 = b.source(1);
        int q1 = b.mul(ref(s1), ref(s1));
        int q2 = b.mul(ref(s2), neg(s2));
        int o = b.sub(ref(q1), ref(q2));
        b.set_output(ref(o));
        corpus.push_back(b.take());
    }
    for (const auto& d : corpus) {
        for (int order = 1; order <= 3; ++order) {
            auto got = error_expansion(d, order);
            auto want = oracle::delta_expansion(d, order);
            std::map<std::vector<std::uint32_t>, Polynomial> got_nonzero;
            for (const auto& [e, p] : got.coeffs)
                if (!p.is_zero()) got_nonzero.emplace(e, p);
            CHECK(got_nonzero == want);
        }
    }
}

TEST_CASE("symbolic rounding lays variables out as x then delta") {
    DagBuilder b(2);
    int m = b.mul(ref(b.source(0)), ref(b.source(1)));
    b.set_output(ref(m));
    auto sv = symbolic_rounded(b.take());
    CHECK(sv.nx == 2);
    CHECK(sv.m == 1);
    CHECK(sv.value == parse_polynomial("x1*x2*(1 + x3)", 3));
}

TEST_CASE("delta support enumerates the nonzero expansion indices") {
    auto support = delta_support(naive_sum3(), 2);
    std::vector<std::vector<std::uint32_t>> want = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    CHECK(support == want);
}

TEST_CASE("black boxes carry one rounding factor on the whole output") {
    BlackBoxRegistry reg;
    reg.add(BlackBoxOp{"fma", 3, parse_polynomial("x1 + x2*x3", 3), false});
    reg.add(BlackBoxOp{"join", 2, parse_polynomial("x1 + x2", 2), true});

    DagBuilder b(3);
    int s1 = b.source(0), s2 = b.source(1), s3 = b.source(2);
    int f = b.blackbox("fma", {ref(s1), ref(s2), ref(s3)});
    int j = b.blackbox("join", {ref(f), ref(s1)}, true);
    b.set_output(ref(j));
    auto d = b.take();
    REQUIRE(validate(d, reg).ok());

    // The exact combine owns no rounding index; only the fma does.
    CHECK(d.max_delta() == 1);
    DeltaAssignment a;
    a.eps = Rational(1, 2);
    a.values[1] = Rational(1, 2);
    CHECK(eval_rounded(d, {1, 2, 3}, a, reg) == Rational(7) * Rational(3, 2) + 1);
    CHECK(extract_polynomial(d, reg) == parse_polynomial("2*x1 + x2*x3", 3));
}

TEST_CASE("homogeneity check") {
    SUBCASE("balanced product is homogeneous") {
        DagBuilder b(3);
        int s1 = b.source(0), s2 = b.source(1), s3 = b.source(2);
        int diff = b.sub(ref(s1), ref(s2));
        int o = b.mul(ref(s3), ref(diff));
        b.set_output(ref(o));
        auto res = check_homogeneous_algorithm(b.take());
        CHECK(res.ok);
        CHECK(res.degree == 2);
    }
    SUBCASE("mixing degrees in an addition fails") {
        DagBuilder b(2);
        int s1 = b.source(0), s2 = b.source(1);
        int m = b.mul(ref(s1), ref(s2));
        int o = b.add(ref(m), ref(s1));
        b.set_output(ref(o));
        CHECK_FALSE(check_homogeneous_algorithm(b.take()).ok);
    }
    SUBCASE("the running five-variable example is homogeneous of degree 4") {
        auto res = check_homogeneous_algorithm(two_branch_sum());
        CHECK(res.ok);
        CHECK(res.degree == 4);
    }
}

TEST_CASE("branch programs route every point to exactly one leaf") {
    // |x1| <= |x2| via the squared comparison, then a trivial leaf either way.
    DagBuilder lo(2, "lo");
    lo.set_output(ref(lo.source(0)));
    DagBuilder hi(2, "hi");
    hi.set_output(ref(hi.source(1)));

    BranchProgram bp;
    bp.name = "pick";
    bp.nvars = 2;
    bp.root = branch_if(Guard{parse_polynomial("x1^2", 2), Cmp::LessEq, parse_polynomial("x2^2", 2)},
                        branch_leaf(lo.take()), branch_leaf(hi.take()));

    CHECK(route(bp, {1, 2}).name == "lo");
    CHECK(route(bp, {3, -2}).name == "hi");
    CHECK(route(bp, {2, 2}).name == "lo");  // ties take the then-branch

    int leaves = 0;
    for_each_leaf(bp, [&](const Dag&) { ++leaves; });
    CHECK(leaves == 2);

    oracle::TestRng rng(9);
    for (int t = 0; t < 50; ++t) {
        auto x = rng.point(2);
        const Dag& leaf = route(bp, x);
        bool small = abs(x[0]) <= abs(x[1]);
        CHECK(leaf.name == (small ? "lo" : "hi"));
    }
}

TEST_CASE("guard comparators") {
    auto one = Polynomial::constant(1, 1);
    auto x = parse_polynomial("x1", 1);
    CHECK(guard_holds(Guard{x, Cmp::Less, one}, {Rational(1, 2)}));
    CHECK_FALSE(guard_holds(Guard{x, Cmp::Less, one}, {1}));
    CHECK(guard_holds(Guard{x, Cmp::LessEq, one}, {1}));
    CHECK(guard_holds(Guard{x, Cmp::Eq, one}, {1}));
    CHECK_FALSE(guard_holds(Guard{x, Cmp::Eq, one}, {2}));
}

TEST_CASE("builder shares source nodes per variable") {
    DagBuilder b(2);
    int a = b.source(0);
    int c = b.source(0);
    CHECK(a == c);
    int m = b.mul(ref(a), ref(b.source(1)));
    b.set_output(ref(m));
    auto d = b.take();
    CHECK(d.nodes.size() == 3);
}

TEST_CASE("delta assignment bounds") {
    auto d = naive_sum3();
    auto zero = DeltaAssignment::zeros(d, Rational(1, 4));
    CHECK(zero.within_bound());
    auto a = deltas_for(d, {Rational(1, 2), Rational(0)}, Rational(1, 4));
    CHECK_FALSE(a.within_bound());
}
