#pragma once

#include "accpoly/dag.hpp"
#include "accpoly/dominance.hpp"
#include "accpoly/polynomial.hpp"

#include <variant>
#include <vector>

namespace accpoly {

// Plain evaluator for a homogeneous integer polynomial: monomials by repeated
// multiplication, coefficients by repeated addition (negative ones enter the sum
// on a dotted edge), and a balanced final summation tree.
struct MonomialSumResult {
    Dag dag;
    // Every term of the computed value carries at most this many (1+delta) factors
    // (multiplications accumulate one per factor, additions one per tree level),
    // which gives the standard worst-case relative error bound on inputs bounded
    // away from zeros.
    int f = 0;
};
MonomialSumResult gen_monomial_sum(const Polynomial& p);

// Eight-way branching evaluator for j*x3^6 + x1^2*x2^2*(j*x1^2 + j*x2^2 - k*x3^2),
// defined for k = 3j. Guards compare magnitudes through exact squared forms; the leaf
// for the matching-signs case is the literal bracketed expansion in u = x1 - x3 and
// v = x2 - x3, and the other seven leaves are its images under input sign flips.
BranchProgram gen_motzkin(long j, long k);

// Registers the black boxes the compensated cascade needs: "sumshift<m>" computes
// P(x) - (y_1 + ... + y_m) as a single rounded primitive for m = 0..k-1, where P is
// the total of the summands, and "sumacc<k>" is the exact final accumulation.
void register_compensated_ops(const std::vector<Polynomial>& summands, int k,
                              BlackBoxRegistry& reg);

// The k-stage cascade y_j = rnd(P - y_1 - ... - y_{j-1}) followed by the exact sum
// of the y_j. The output expands to (1 - (-1)^k * delta_1*...*delta_k) * P, so the
// relative error is at most eps^k.
Dag gen_compensated_sum(const std::vector<Polynomial>& summands, int k,
                        const BlackBoxRegistry& reg);

// One certified evaluator for a neighbourhood of a variety component. Points are
// routed to the leaf when, in the changed coordinates, the vanishing block passes
// every widened-cone inequality of the region and is epsilon-close to the remaining
// coordinates with epsilon = 1/closeness.
struct EvalPlan {
    ChangeOfVariables change;
    DominanceRegion region;
    std::variant<Dag, BranchProgram> leaf;
    long closeness = 8;  // epsilon is the reciprocal of this integer
};

// Assembles the guard tree for a homogeneous polynomial: each plan contributes its
// membership guards in order, all failures share the fallthrough to the next plan,
// and the default leaf is the plain monomial-sum evaluator. Two plans for the same
// region with different closeness values are rejected.
BranchProgram branching_evaluator(const Polynomial& p, const std::vector<EvalPlan>& plans);

}  // namespace accpoly
