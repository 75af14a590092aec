#include "accpoly/dominance.hpp"

#include "accpoly/dag.hpp"
#include "accpoly/decide.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <set>

using namespace accpoly;

namespace {

Polynomial P(const std::string& text, int nvars) { return parse_polynomial(text, nvars); }

ComponentSpec zero_pair_chain() {
    ComponentSpec spec;
    spec.nvars = 5;
    spec.zeros = {0, 1};
    spec.chains = {Chain{{2, 3, 4}, {1, -1, 1}}};
    return spec;
}

// x1 = 0 together with x2 = x3 = x4, the pruning running example.
ComponentSpec zero_one_chain() {
    ComponentSpec spec;
    spec.nvars = 5;
    spec.zeros = {0};
    spec.chains = {Chain{{1, 2, 3}, {1, 1, 1}}};
    return spec;
}

Rational int_det(const IntMatrix& C) {
    std::vector<std::vector<Polynomial>> m;
    for (const auto& row : C) {
        std::vector<Polynomial> prow;
        for (long v : row) prow.push_back(Polynomial::constant(1, Rational(v)));
        m.push_back(std::move(prow));
    }
    return oracle::det_cofactor(m).constant_value();
}

std::vector<Polynomial> rows_as_images(const IntMatrix& C) {
    int n = static_cast<int>(C.size());
    std::vector<Polynomial> images;
    for (const auto& row : C) {
        Polynomial img(n);
        for (int j = 0; j < n; ++j)
            if (row[static_cast<std::size_t>(j)] != 0)
                img += Polynomial::variable(n, j) * Rational(row[static_cast<std::size_t>(j)]);
        images.push_back(std::move(img));
    }
    return images;
}

const DominanceRegion& region_for_eta(const std::vector<DominanceRegion>& regions,
                                      const std::vector<SupportSlice>& slices,
                                      const std::vector<long>& eta) {
    std::vector<std::vector<std::uint32_t>> lambdas;
    for (const auto& s : slices) lambdas.push_back(s.lambda);
    auto idx = oracle::argmin_weight(lambdas, eta);
    std::vector<std::vector<std::uint32_t>> want;
    for (int i : idx) want.push_back(lambdas[static_cast<std::size_t>(i)]);
    for (const auto& r : regions) {
        auto sorted_r = r.lambdas;
        auto sorted_w = want;
        std::sort(sorted_r.begin(), sorted_r.end());
        std::sort(sorted_w.begin(), sorted_w.end());
        if (sorted_r == sorted_w) return r;
    }
    throw Error("test: no region matches the weight vector");
}

Dag figure6_dag() {
    DagBuilder b(5, "extract");
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

struct PruneSetup {
    ChangeOfVariables change;
    std::vector<DominanceRegion> regions;
    std::vector<SupportSlice> slices;
};

PruneSetup figure6_setup(const Polynomial& p, const ComponentSpec& spec) {
    auto changes = enumerate_standard_changes(spec);
    for (const auto& cov : changes) {
        if (cov.block != std::vector<int>{0, 2, 3}) continue;
        auto tilde = changed_polynomial(p, cov);
        return PruneSetup{cov, dominance_regions(tilde, cov.block),
                          support_projection(tilde, cov.block)};
    }
    throw Error("test: expected change of variables not enumerated");
}

}  // namespace

TEST_CASE("component validation") {
    CHECK_NOTHROW(validate_component(zero_pair_chain()));

    ComponentSpec overlap;
    overlap.nvars = 3;
    overlap.zeros = {0};
    overlap.chains = {Chain{{0, 1}, {1, 1}}};
    CHECK_THROWS_AS(validate_component(overlap), Error);

    ComponentSpec short_chain;
    short_chain.nvars = 3;
    short_chain.chains = {Chain{{1}, {1}}};
    CHECK_THROWS_AS(validate_component(short_chain), Error);

    ComponentSpec bad_sign;
    bad_sign.nvars = 3;
    bad_sign.chains = {Chain{{0, 1}, {1, 2}}};
    CHECK_THROWS_AS(validate_component(bad_sign), Error);

    ComponentSpec out_of_range;
    out_of_range.nvars = 2;
    out_of_range.zeros = {5};
    CHECK_THROWS_AS(validate_component(out_of_range), Error);
}

TEST_CASE("standard change enumeration counts") {
    SUBCASE("a single zero variable admits only the identity") {
        ComponentSpec spec;
        spec.nvars = 2;
        spec.zeros = {0};
        auto changes = enumerate_standard_changes(spec);
        REQUIRE(changes.size() == 1);
        CHECK(changes[0].block == std::vector<int>{0});
        CHECK(int_det(changes[0].C) == 1);
        CHECK(changes[0].C == IntMatrix{{1, 0}, {0, 1}});
    }
    SUBCASE("one chain of two gives a change per representative") {
        ComponentSpec spec;
        spec.nvars = 2;
        spec.chains = {Chain{{0, 1}, {1, 1}}};
        auto changes = enumerate_standard_changes(spec);
        REQUIRE(changes.size() == 2);
        std::set<std::vector<int>> blocks;
        for (const auto& cov : changes) blocks.insert(cov.block);
        CHECK(blocks == std::set<std::vector<int>>{{0}, {1}});
    }
    SUBCASE("two zeros and one three-chain give fifteen changes") {
        auto changes = enumerate_standard_changes(zero_pair_chain());
        CHECK(changes.size() == 15);
        std::set<IntMatrix> seen;
        for (const auto& cov : changes) {
            CHECK(abs(int_det(cov.C)) == 1);
            seen.insert(cov.C);
            // Superset chains are normalized representative-first with sign +1.
            for (std::size_t q = 0; q < cov.superset.chains.size(); ++q)
                CHECK(cov.superset.chains[q].signs[0] == 1);
        }
        CHECK(seen.size() == 15);
    }
}

TEST_CASE("changed polynomials compose with the change matrix") {
    oracle::TestRng rng(83);
    auto changes = enumerate_standard_changes(zero_pair_chain());
    for (const auto& cov : changes) {
        Polynomial p(5);
        for (int t = 0; t < 5; ++t) {
            Monomial m(5);
            for (auto& e : m.e) e = static_cast<std::uint32_t>(rng.integer(0, 2));
            p.add_term(m, rng.rational(6));
        }
        auto tilde = changed_polynomial(p, cov);
        CHECK(substitute_linear(tilde, rows_as_images(cov.C)) == p);
    }
}

TEST_CASE("changed polynomial vanishes where the block coordinates vanish") {
    auto p = P("x1^2*x2^2 + (x2 - x3)^4 + (x3 - x4)^2*x5^2", 5);
    auto setup = figure6_setup(p, zero_one_chain());
    auto tilde = changed_polynomial(p, setup.change);
    // Substitute x_block = 0: the component maps onto the block coordinates.
    std::vector<Polynomial> images;
    for (int i = 0; i < 5; ++i) images.push_back(Polynomial::variable(5, i));
    for (int b : setup.change.block) images[static_cast<std::size_t>(b)] = Polynomial(5);
    CHECK(substitute_linear(tilde, images).is_zero());
}

TEST_CASE("dominance regions of the two-block example") {
    auto p = P("x2^8*x3^12 + x1^2*x2^2*x3^16 + x1^8*x3^12 + x1^6*x2^14 + x1^10*x2^6*x3^4", 3);
    auto regions = dominance_regions(p, {0, 1});
    auto slices = support_projection(p, {0, 1});

    SUBCASE("both useful facet regions appear") {
        int facet_hits = 0;
        for (const auto& r : regions) {
            if (!r.facet) continue;
            auto lam = r.lambdas;
            std::sort(lam.begin(), lam.end());
            if (lam == std::vector<std::vector<std::uint32_t>>{{0, 8}, {2, 2}} ||
                lam == std::vector<std::vector<std::uint32_t>>{{2, 2}, {8, 0}})
                ++facet_hits;
        }
        CHECK(facet_hits == 2);
    }

    SUBCASE("stored generators satisfy strict minimality") {
        std::vector<std::vector<std::uint32_t>> lambdas;
        for (const auto& s : slices) lambdas.push_back(s.lambda);
        for (const auto& r : regions) {
            REQUIRE_FALSE(r.generators.empty());
            for (const auto& g : r.generators) {
                auto idx = oracle::argmin_weight(lambdas, g);
                std::vector<std::vector<std::uint32_t>> arg;
                for (int i : idx) arg.push_back(lambdas[static_cast<std::size_t>(i)]);
                auto lam = r.lambdas;
                std::sort(arg.begin(), arg.end());
                std::sort(lam.begin(), lam.end());
                CHECK(arg == lam);
            }
        }
    }

    SUBCASE("every grid weight vector realizes a stored region") {
        std::vector<std::vector<std::uint32_t>> lambdas;
        for (const auto& s : slices) lambdas.push_back(s.lambda);
        std::set<std::vector<std::vector<std::uint32_t>>> stored;
        for (const auto& r : regions) {
            auto lam = r.lambdas;
            std::sort(lam.begin(), lam.end());
            stored.insert(lam);
        }
        CHECK(stored.size() == regions.size());
        for (long a = 0; a <= 8; ++a) {
            for (long b = 0; b <= 8; ++b) {
                if (a == 0 && b == 0) continue;
                auto idx = oracle::argmin_weight(lambdas, {a, b});
                std::vector<std::vector<std::uint32_t>> pattern;
                for (int i : idx) pattern.push_back(lambdas[static_cast<std::size_t>(i)]);
                std::sort(pattern.begin(), pattern.end());
                CHECK(stored.count(pattern) == 1);
            }
        }
    }
}

TEST_CASE("dominance regions of a sum of squares") {
    auto regions = dominance_regions(P("x1^2 + x2^2", 2), {0, 1});
    int facets = 0;
    for (const auto& r : regions) {
        if (!r.facet) continue;
        ++facets;
        auto lam = r.lambdas;
        std::sort(lam.begin(), lam.end());
        CHECK(lam == std::vector<std::vector<std::uint32_t>>{{0, 2}, {2, 0}});
        REQUIRE(r.generators.size() == 1);
        CHECK(r.generators[0] == std::vector<long>{1, 1});
    }
    CHECK(facets == 1);
}

TEST_CASE("a single monomial spans one full-quadrant region") {
    auto regions = dominance_regions(P("x1^3*x2", 2), {0, 1});
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].lambdas == std::vector<std::vector<std::uint32_t>>{{3, 1}});
    CHECK_FALSE(regions[0].facet);
    // No ray comparisons, only the unit-box normalization rows.
    CHECK(regions[0].widened == std::vector<std::vector<long>>{{1, 0}, {0, 1}});
    CHECK(slice_membership({Rational(1, 2), Rational(9, 10)}, regions[0]));
    CHECK_FALSE(slice_membership({Rational(1, 2), Rational(5)}, regions[0]));
}

TEST_CASE("enumeration budgets are enforced") {
    SUBCASE("block dimension cap") {
        Polynomial p(7);
        Monomial m(7);
        m.e[0] = 1;
        p.add_term(m, 1);
        CHECK_THROWS_AS(dominance_regions(p, {0, 1, 2, 3, 4, 5, 6}), BudgetError);
    }
    SUBCASE("support size cap") {
        Polynomial p(2);
        for (std::uint32_t i = 0; i < 26; ++i) {
            Monomial m(2);
            m.e[0] = i;
            m.e[1] = 26 - i;
            p.add_term(m, 1);
        }
        CHECK_THROWS_AS(dominance_regions(p, {0, 1}), BudgetError);
    }
    SUBCASE("zero-group partition cap") {
        ComponentSpec spec;
        spec.nvars = 10;
        for (int i = 0; i < 9; ++i) spec.zeros.push_back(i);
        CHECK_THROWS_AS(enumerate_standard_changes(spec), BudgetError);
    }
}

TEST_CASE("dominant terms") {
    SUBCASE("running five-variable example") {
        auto p = P("x1^2*x2^2 + (x2 - x3)^4 + (x3 - x4)^2*x5^2", 5);
        auto spec = zero_one_chain();
        auto setup = figure6_setup(p, spec);
        const auto& region = region_for_eta(setup.regions, setup.slices, {1, 1, 1});
        auto dom = dominant_term(p, spec, setup.change, region);
        CHECK(dom.p_dom == P("x1^2*x2^2 + (x3 - x4)^2*x5^2", 5));
    }
    SUBCASE("squares against a coefficient polynomial") {
        auto p = P("x1^4 + x2^4 + (x1^2 + x2^2)*x3^2", 3);
        ComponentSpec spec;
        spec.nvars = 3;
        spec.zeros = {0, 1};
        auto changes = enumerate_standard_changes(spec);
        const ChangeOfVariables* identity = nullptr;
        for (const auto& cov : changes)
            if (cov.superset.chains.empty()) identity = &cov;
        REQUIRE(identity != nullptr);
        auto regions = dominance_regions(p, identity->block);
        auto slices = support_projection(p, identity->block);
        const auto& region = region_for_eta(regions, slices, {1, 1});
        CHECK(region.facet);
        auto dom = dominant_term(p, spec, *identity, region);
        CHECK(dom.p_dom == P("(x1^2 + x2^2)*x3^2", 3));
    }
    SUBCASE("single monomial block keeps everything") {
        auto p = P("x1^3*x2*x3", 3);
        ComponentSpec spec;
        spec.nvars = 3;
        spec.zeros = {0, 1};
        auto changes = enumerate_standard_changes(spec);
        const ChangeOfVariables* identity = nullptr;
        for (const auto& cov : changes)
            if (cov.superset.chains.empty()) identity = &cov;
        REQUIRE(identity != nullptr);
        auto regions = dominance_regions(p, identity->block);
        REQUIRE(regions.size() == 1);
        auto dom = dominant_term(p, spec, *identity, regions[0]);
        CHECK(dom.p_dom == p);
    }
}

TEST_CASE("representative exponent condition") {
    SUBCASE("kept zeros impose nothing") {
        auto p = P("x1^2 + x2^2", 2);
        ComponentSpec spec;
        spec.nvars = 2;
        spec.zeros = {0, 1};
        auto changes = enumerate_standard_changes(spec);
        for (const auto& cov : changes) {
            if (!cov.superset.chains.empty()) continue;
            for (const auto& r : dominance_regions(p, cov.block))
                CHECK(satisfies_exp_cond(r, cov));
        }
    }
    SUBCASE("merged zeros compare representative against members") {
        ComponentSpec spec;
        spec.nvars = 3;
        spec.zeros = {0, 1};
        auto changes = enumerate_standard_changes(spec);
        const ChangeOfVariables* merged = nullptr;
        for (const auto& cov : changes)
            if (!cov.superset.chains.empty() && cov.reps[0] == 0) merged = &cov;
        REQUIRE(merged != nullptr);

        DominanceRegion good;
        good.block = merged->block;
        good.lambdas = {{1, 2}};
        good.generators = {{1, 2}};
        CHECK(satisfies_exp_cond(good, *merged));

        DominanceRegion bad;
        bad.block = merged->block;
        bad.lambdas = {{2, 1}};
        bad.generators = {{2, 1}};
        CHECK_FALSE(satisfies_exp_cond(bad, *merged));
    }
}

TEST_CASE("widened cone membership by exact power comparison") {
    DominanceRegion region;
    region.block = {0, 1};
    // |x1|^2 <= |x2|^3 and |x2|^4 <= |x1|^2.
    region.widened = {{2, -3}, {-2, 4}};

    CHECK(slice_membership({Rational(1, 8), Rational(1, 4)}, region));
    CHECK_FALSE(slice_membership({Rational(1, 1024), Rational(1, 2)}, region));

    SUBCASE("zero coordinates follow the limiting rule") {
        // |x1|^2 = 0 satisfies the first row; the second row needs |x2|^4 <= 0.
        CHECK_FALSE(slice_membership({Rational(0), Rational(1, 2)}, region));
        DominanceRegion upper;
        upper.block = {0, 1};
        upper.widened = {{2, -3}};
        CHECK(slice_membership({Rational(0), Rational(1, 2)}, upper));
    }
}

TEST_CASE("scaling along a generator stays inside the region") {
    auto p = P("x2^8*x3^12 + x1^2*x2^2*x3^16 + x1^8*x3^12 + x1^6*x2^14 + x1^10*x2^6*x3^4", 3);
    auto regions = dominance_regions(p, {0, 1});
    for (const auto& r : regions) {
        if (!r.facet) continue;
        const auto& g = r.generators[0];
        for (const Rational& t : {Rational(1, 2), Rational(1, 3), Rational(9, 10)}) {
            Point x;
            for (long e : g) x.push_back(pow_rational(t, static_cast<unsigned long>(e)));
            CHECK(slice_membership(x, r));
        }
    }
}

TEST_CASE("pruning") {
    auto p = P("x1^2*x2^2 + (x2 - x3)^4 + (x3 - x4)^2*x5^2", 5);
    auto spec = zero_one_chain();
    auto setup = figure6_setup(p, spec);
    const auto& region = region_for_eta(setup.regions, setup.slices, {1, 1, 1});
    auto d = figure6_dag();

    SUBCASE("the running example drops the middle summand") {
        auto pruned = prune(d, spec, setup.change, region, {1, 1, 1});
        REQUIRE(validate(pruned).ok());
        CHECK(extract_polynomial(pruned) == P("x1^2*x2^2 + (x3 - x4)^2*x5^2", 5));

        // Rounding indices survive unrenumbered: delta 12 stays on the final add
        // while deltas 4..7 disappear with the deleted summand.
        std::set<int> deltas;
        for (const auto& nd : pruned.nodes)
            if (nd.delta > 0) deltas.insert(nd.delta);
        CHECK(deltas == std::set<int>{1, 2, 3, 8, 9, 10, 11, 12});
    }

    SUBCASE("prune commutes with extraction") {
        auto pruned = prune(d, spec, setup.change, region, {1, 1, 1});
        auto dom = dominant_term(p, spec, setup.change, region);
        CHECK(extract_polynomial(pruned) == dom.p_dom);
    }

    SUBCASE("the delta support can only shrink") {
        auto pruned = prune(d, spec, setup.change, region, {1, 1, 1});
        int m = d.max_delta();
        auto before = delta_support(d, m);
        auto after = delta_support(pruned, m);
        CHECK(std::includes(before.begin(), before.end(), after.begin(), after.end()));
    }

    SUBCASE("a weight vector outside the region is rejected") {
        CHECK_THROWS_AS(prune(d, spec, setup.change, region, {5, 1, 1}), Error);
    }
}

TEST_CASE("pruning a balanced sum of squares changes nothing") {
    DagBuilder b(2, "sos");
    int s1 = b.source(0), s2 = b.source(1);
    int q1 = b.mul(ref(s1), ref(s1));
    int q2 = b.mul(ref(s2), ref(s2));
    int o = b.add(ref(q1), ref(q2));
    b.set_output(ref(o));
    auto d = b.take();

    ComponentSpec spec;
    spec.nvars = 2;
    spec.zeros = {0, 1};
    auto changes = enumerate_standard_changes(spec);
    const ChangeOfVariables* identity = nullptr;
    for (const auto& cov : changes)
        if (cov.superset.chains.empty()) identity = &cov;
    REQUIRE(identity != nullptr);

    auto p = P("x1^2 + x2^2", 2);
    auto regions = dominance_regions(p, identity->block);
    auto slices = support_projection(p, identity->block);
    const auto& region = region_for_eta(regions, slices, {1, 1});
    auto pruned = prune(d, spec, *identity, region, {1, 1});
    CHECK(pruned.nodes.size() == d.nodes.size());
    CHECK(extract_polynomial(pruned) == p);
}

TEST_CASE("pruning deletes the dominated input of an addition") {
    DagBuilder b(2, "skew");
    int s1 = b.source(0), s2 = b.source(1);
    int a = b.add(ref(s1), ref(s2));
    int o = b.mul(ref(a), ref(s2));
    b.set_output(ref(o));
    auto d = b.take();

    ComponentSpec spec;
    spec.nvars = 2;
    spec.zeros = {0};
    auto changes = enumerate_standard_changes(spec);
    REQUIRE(changes.size() == 1);
    const auto& cov = changes[0];

    auto p = P("(x1 + x2)*x2", 2);
    auto regions = dominance_regions(changed_polynomial(p, cov), cov.block);
    auto slices = support_projection(changed_polynomial(p, cov), cov.block);
    const auto& region = region_for_eta(regions, slices, {1});
    auto pruned = prune(d, spec, cov, region, {1});
    REQUIRE(validate(pruned).ok());
    CHECK(extract_polynomial(pruned) == P("x2^2", 2));
    // The multiplication keeps its original rounding index.
    for (const auto& nd : pruned.nodes)
        if (nd.kind == NodeKind::mul) CHECK(nd.delta == 2);
}

TEST_CASE("low-order parts match the weight pairing") {
    // The lowest t-degree of p(t^eta . x) is the common weight of the region's
    // exponents, attained exactly by the dominant term.
    auto p = P("x1^2*x2^2 + (x2 - x3)^4 + (x3 - x4)^2*x5^2", 5);
    auto spec = zero_one_chain();
    auto setup = figure6_setup(p, spec);
    const auto& region = region_for_eta(setup.regions, setup.slices, {1, 1, 1});
    auto dom = dominant_term(p, spec, setup.change, region);

    auto tilde = changed_polynomial(p, setup.change);
    auto tilde_dom = changed_polynomial(dom.p_dom, setup.change);

    // Map into six variables, x1..x5 plus t, scaling each block variable by t.
    auto lift = [&](const Polynomial& q) {
        std::vector<Polynomial> images;
        for (int i = 0; i < 5; ++i) {
            auto img = Polynomial::variable(6, i);
            if (std::find(setup.change.block.begin(), setup.change.block.end(), i) !=
                setup.change.block.end())
                img = img * Polynomial::variable(6, 5);
            images.push_back(img);
        }
        return substitute_linear(q, images);
    };
    auto scaled = lift(tilde);
    auto scaled_dom = lift(tilde_dom);

    auto lowest = [](const Polynomial& q) {
        std::uint32_t low = UINT32_MAX;
        for (const auto& [m, c] : q.terms()) low = std::min(low, m.e[5]);
        return low;
    };
    CHECK(lowest(scaled) == 2);
    CHECK(lowest(scaled_dom) == 2);
    auto rest = scaled - scaled_dom;
    REQUIRE_FALSE(rest.is_zero());
    CHECK(lowest(rest) > 2);
}
