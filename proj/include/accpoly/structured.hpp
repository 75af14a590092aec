#pragma once

#include "accpoly/decide.hpp"
#include "accpoly/polynomial.hpp"

#include <string>
#include <vector>

namespace accpoly {

// Weakly decreasing nonnegative integers.
using Partition = std::vector<int>;

// Symbolic determinant of the generic n x n Toeplitz matrix T(i,j) = x_{j-i}. The
// 2n-1 diagonals are reindexed to variables 0..2n-2: the main diagonal is variable
// n-1 and entry (i,j) reads variable j-i+n-1. Supported for 2 <= n <= 6.
Polynomial toeplitz_det(int n);

struct ToeplitzCertificate {
    bool ok = false;
    std::string detail;  // first failed check, empty when ok
};

// Fingerprint of the Toeplitz determinant: the main diagonal power enters with
// coefficient exactly 1, each corner monomial x_{j+n-1}^(n-j) * x_{j-1}^j appears
// with coefficient +-1, and the top-right diagonal variable 2n-2 is at most linear.
ToeplitzCertificate toeplitz_certificate(const Polynomial& det, int n);

// Schur polynomial s_lambda(x_1..x_n), computed as the exact ratio of the
// generalized Vandermonde determinant by the plain one. Supported for
// len(lambda) <= n <= 6 and |lambda| <= 8.
Polynomial schur_function(const Partition& lambda, int n);

struct IdentityCheck {
    bool ok = false;
    Polynomial residual;
};

// Exact check that det(GV) = s_lambda * prod_{i<j}(x_j - x_i), with the plain
// Vandermonde determinant oriented as prod_{i<j}(x_j - x_i). A false result carries
// the nonzero residual.
IdentityCheck generalized_vandermonde_check(const Partition& lambda, int n);

struct MinorCheck {
    bool ok = false;
    Rational E;
    Rational F;
    Polynomial residual;
};

// Polynomial Vandermonde minor identity. Column j of the upper-triangular C holds the
// coefficients of a degree-j basis polynomial; the matrix entry (r, j) is that basis
// polynomial at x_r. Deleting row i (1-based) and the degree-(n-2) column leaves an
// (n-1) x (n-1) minor whose determinant must equal
//   prod_{j<k, j,k != i} (x_k - x_j) * (E + F * sum_{r != i} x_r)
// with E and F read off C. Supported for 3 <= n <= 5; throws on a zero diagonal.
MinorCheck poly_vandermonde_minor_check(const std::vector<std::vector<Rational>>& C, int n,
                                        int i);

// Accuracy verdict for the minor's determinant, viewed as a polynomial in the n-1
// surviving variables. For n >= 4 and F != 0 the affine bracket E + F*sum(x) vanishes
// at points in general position, which certifies NotEvaluable; smaller n or F = 0
// yield Unknown.
Verdict minor_evaluability_verdict(int n, const Rational& E, const Rational& F);

}  // namespace accpoly
