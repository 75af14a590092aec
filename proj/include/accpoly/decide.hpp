#pragma once

#include "accpoly/dag.hpp"
#include "accpoly/polynomial.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace accpoly {

// Thrown when a combinatorial enumeration would exceed its hard cap.
class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& what) : Error(what) {}
};

// One coordinate hyperplane x_i = 0, sum x_i + x_j = 0, or difference x_i - x_j = 0.
// The linear forms an algorithm without constants can produce and test against zero.
struct AllowableForm {
    enum class Kind { Zi, Sij, Dij };
    Kind kind = Kind::Zi;
    int i = -1;  // 0-based
    int j = -1;  // 0-based, unused for Zi; i < j for the pair kinds

    Polynomial as_polynomial(int nvars) const;
    std::string to_string() const;  // reads like "x1", "x1+x2", "x1-x2"
    bool operator==(const AllowableForm&) const = default;
};

// All n + n(n-1) forms: every x_i, then for each i < j the sum before the difference.
std::vector<AllowableForm> allowable_forms(int n);

struct AllowableFactorization {
    Rational c = 0;
    std::vector<Polynomial> factors;  // with multiplicity, in listed-form order
    Polynomial remainder;             // primitive with positive leading coefficient, or 1

    // True when the remainder is the constant 1, i.e. p = c * product(factors).
    bool complete() const { return remainder.is_constant(); }
};

// Pulls every listed form out of p as often as it divides exactly. The forms are
// pairwise non-associate irreducibles, so the result does not depend on their order.
AllowableFactorization factor_allowable(const Polynomial& p,
                                        const std::vector<Polynomial>& forms);

enum class Status { Evaluable, NotEvaluable, Unknown };
std::string to_string(Status s);

struct Verdict {
    Status status = Status::Unknown;
    Rational c = 0;
    std::vector<Polynomial> factors;
    std::optional<Polynomial> remainder;    // nonconstant certificate when factoring fails
    std::optional<Point> witness;           // real-case certificate point
    std::optional<Polynomial> restriction;  // nonzero restriction of p at the witness
    std::string reason;
};

// Exact decision over the complex field for classical arithmetic: evaluable exactly
// when p is a constant times a product of allowable forms. Requires integer
// coefficients and a zero constant term; throws otherwise. Inhomogeneous input is
// never evaluable and is reported as such.
Verdict decide_complex(const Polynomial& p);

// Builds a DAG for c * product(factors): balanced multiplication tree, the integer
// constant by repeated doubling additions, a dotted output edge for negative c.
// Factors must be allowable forms, or match a registered black-box operation with
// arguments drawn from {0, x_j, -x_j}. Non-integer c requires a registered
// constant-multiplication op (arity 1, polynomial c*x1).
Dag compile_product(const Rational& c, const std::vector<Polynomial>& factors,
                    const BlackBoxRegistry& reg = {});

// The intersection of all allowable hyperplanes through a point, as both the list of
// vanishing forms and an exact parametrization: images[i] is the i-th coordinate as a
// polynomial in dim fresh parameters.
struct Subspace {
    std::vector<AllowableForm> vanishing;
    std::vector<Polynomial> images;
    int dim = 0;
};

Subspace allow_subspace(const Point& x);

struct GeneralPosition {
    bool general = false;
    Polynomial restriction;  // p composed with the subspace parametrization
};

// A variety point is in general position when p does not vanish on the whole
// intersection of allowable hyperplanes through it. Throws unless p(x) = 0.
GeneralPosition is_general_position(const Polynomial& p, const Point& x);

struct RealWitness {
    Point x;
    Polynomial restriction;
};

// First candidate that lies on the variety of p in general position. Such a point
// certifies that no algorithm evaluates p with uniformly small relative error on any
// real domain containing it.
std::optional<RealWitness> real_nonevaluability_witness(const Polynomial& p,
                                                        const std::vector<Point>& candidates);

// A restriction of a black-box operation's inputs: zero some arguments (K_Z), identify
// pairs (K_D: equal, K_S: opposite), negate some survivors (K_N), then expand in the
// T-variables. All indices 0-based over the op's arity. Identified pairs keep the
// first variable and eliminate the second.
struct DerivedVarietySpec {
    std::vector<int> T;
    std::vector<int> K_Z;
    std::vector<std::pair<int, int>> K_D;
    std::vector<std::pair<int, int>> K_S;
    std::vector<int> K_N;
};

// The generator set of the derived variety: the coefficient polynomials of the
// restricted operation expanded in the T-variables. Throws on a malformed spec.
std::vector<Polynomial> derived_variety_polynomial(const BlackBoxOp& q,
                                                   const DerivedVarietySpec& I);

// Decision with affine black-box primitives: p is factored over the allowable forms
// together with every affine form the ops can produce on arguments from {0, x_j, -x_j}.
// A constant remainder means Evaluable (non-integer constants need an op of the shape
// c*x1); a nonconstant remainder is a NotEvaluable certificate. A non-affine op
// downgrades the procedure to a pure sufficiency check that can only answer
// Evaluable or Unknown.
Verdict decide_blackbox_affine(const Polynomial& p, const std::vector<BlackBoxOp>& ops);

}  // namespace accpoly
