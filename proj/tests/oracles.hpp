#pragma once

// Independent reference implementations used to freeze expected test values.
// Everything here is deliberately written by the most direct route available
// (combinatorial enumeration, brute-force search, plain recursion) so that a
// bug in the library proper cannot hide behind shared code.

#include "accpoly/dag.hpp"
#include "accpoly/polynomial.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace accpoly::oracle {

// Schur polynomial by direct enumeration of semistandard Young tableaux of
// shape lambda (weakly decreasing) with entries in 1..n. Exponential; meant
// for |lambda| <= 8 or so.
Polynomial schur_by_tableaux(const std::vector<int>& lambda, int n);

// Indices into `lambdas` minimizing eta . lambda.
std::vector<int> argmin_weight(const std::vector<std::vector<std::uint32_t>>& lambdas,
                               const std::vector<long>& eta);

// Truncated expansion of a DAG's computed value in powers of delta, carried
// node by node as a map from delta exponent vectors to coefficient
// polynomials in x. Independent of symbolic_rounded, which works in one big
// polynomial ring over x and delta jointly.
std::map<std::vector<std::uint32_t>, Polynomial> delta_expansion(
    const Dag& d, int order, const BlackBoxRegistry& reg = {});

// Plain recursive cofactor determinant, no memoization, no pivoting.
Polynomial det_cofactor(const std::vector<std::vector<Polynomial>>& m);

// The product formula det V = prod_{i<j} (x_j - x_i) for the n-point
// Vandermonde matrix in ambient nvars variables.
Polynomial vandermonde_product(int n, int nvars);

// Deterministic rational test-point generator. Not a quality RNG; just a
// reproducible stream of small-denominator rationals.
class TestRng {
public:
    explicit TestRng(std::uint64_t seed) : eng_(seed) {}

    // Uniform integer in [lo, hi].
    long integer(long lo, long hi);
    // num/den with num in [-bound, bound] and den in [1, bound].
    Rational rational(long bound = 20);
    // Nonzero rational.
    Rational nonzero_rational(long bound = 20);
    Point point(int n, long bound = 20);

private:
    std::mt19937_64 eng_;
};

}  // namespace accpoly::oracle
