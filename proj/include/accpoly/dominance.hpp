#pragma once

#include "accpoly/dag.hpp"
#include "accpoly/polynomial.hpp"

#include <vector>

namespace accpoly {

// One class of sign-identified variables: the constraint chain
// signs[0]*x_{vars[0]} = signs[1]*x_{vars[1]} = ... All indices 0-based.
struct Chain {
    std::vector<int> vars;
    std::vector<int> signs;  // entries +1 or -1, aligned with vars
};

// A component of a variety arrangement: some variables pinned to zero plus
// disjoint sign chains. The remaining variables are free.
struct ComponentSpec {
    int nvars = 0;
    std::vector<int> zeros;
    std::vector<Chain> chains;
};

// Throws Error when groups overlap, indices are out of range, a chain is shorter
// than two variables, or a sign is not +1/-1.
void validate_component(const ComponentSpec& spec);

using IntMatrix = std::vector<std::vector<long>>;

// A standard change of variables for a component: new coordinates x~ = C x in which
// the component becomes {x~_b = 0 : b in block}. Built from an allowable superset of
// the component: the original chains with a chosen representative, plus optionally
// some zero variables merged into new sign chains.
struct ChangeOfVariables {
    int nvars = 0;
    ComponentSpec superset;  // chains listed representative-first with sign +1
    std::vector<int> reps;   // representative of each superset chain
    IntMatrix C;             // unimodular; row i gives x~_i in terms of x
    std::vector<int> block;  // sorted; coordinates vanishing on the component
};

// Every standard change for the component: all ways of partitioning the zero group
// into kept zeros and new sign chains (each with a representative and relative signs),
// combined with every representative choice for the existing chains. Deduplicated by
// the resulting matrix.
std::vector<ChangeOfVariables> enumerate_standard_changes(const ComponentSpec& spec);

// p expressed in the new coordinates: returns p~ with p~(C x) = p(x).
Polynomial changed_polynomial(const Polynomial& p, const ChangeOfVariables& cov);

// A face of the Newton polytope of p over the block variables whose minimizing
// weight vectors meet the nonnegative orthant. For weights eta in the region,
// eta.lambda is constant on `lambdas` and strictly smaller than on the rest of
// the support.
struct DominanceRegion {
    std::vector<int> block;
    std::vector<std::vector<std::uint32_t>> lambdas;
    // Facet regions store the primitive ray spanning the region; others one
    // interior witness. Every stored vector satisfies the strict minimality above.
    std::vector<std::vector<long>> generators;
    bool facet = false;  // the region is a one-dimensional ray
    // Rows a of the widened cone: a point x on the block satisfies row a when
    // prod_{a_i>0} |x_i|^{a_i} <= prod_{a_i<0} |x_i|^{-a_i}.
    std::vector<std::vector<long>> widened;
};

// All dominance regions of p relative to the block, sorted by their exponent sets.
// Brute-force enumeration; throws BudgetError beyond |support| = 24 or |block| = 6.
std::vector<DominanceRegion> dominance_regions(const Polynomial& p,
                                               const std::vector<int>& block);

struct DominantTerm {
    Polynomial p_dom;  // in the original variables
    ComponentSpec spec;
    ChangeOfVariables change;
    std::vector<std::vector<std::uint32_t>> lambdas;
};

// The slice of p (transformed through cov) with block exponents in the region,
// mapped back to the original variables.
DominantTerm dominant_term(const Polynomial& p, const ComponentSpec& spec,
                           const ChangeOfVariables& cov, const DominanceRegion& region);

// Whether the region's weights give the representative of every zero-merged chain an
// exponent no larger than its members'. The property holds for all of a region's
// weight vectors or none; mixed stored generators throw.
bool satisfies_exp_cond(const DominanceRegion& region, const ChangeOfVariables& cov);

// Membership of a point (given in block coordinates) in the widened cone, via exact
// power comparisons. A zero coordinate follows the limiting value of its side.
bool slice_membership(const Point& x_block, const DominanceRegion& region);

// Rewrites a classical DAG so that it computes the region's dominant term: inputs are
// formally scaled by powers of t prescribed by eta, then additions and subtractions
// whose inputs have unequal lowest t-degrees drop the higher-degree input, and source
// edges are redirected to chain representatives. Unreachable nodes are removed; the
// surviving nodes keep their ids and rounding-error indices.
Dag prune(const Dag& d, const ComponentSpec& spec, const ChangeOfVariables& cov,
          const DominanceRegion& region, const std::vector<long>& eta);

}  // namespace accpoly
