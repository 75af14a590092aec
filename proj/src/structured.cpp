#include "accpoly/structured.hpp"

#include <algorithm>
#include <numeric>

namespace accpoly {

namespace {

// Cofactor expansion along the first row. Sizes stay at 6 or below here, where this
// beats setting up fraction-free elimination over polynomial entries.
Polynomial det_poly(const std::vector<std::vector<Polynomial>>& m) {
    std::size_t n = m.size();
    if (n == 1) return m[0][0];
    int nvars = m[0][0].nvars();
    Polynomial acc(nvars);
    for (std::size_t c = 0; c < n; ++c) {
        if (m[0][c].is_zero()) continue;
        std::vector<std::vector<Polynomial>> sub;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Polynomial> row;
            for (std::size_t q = 0; q < n; ++q)
                if (q != c) row.push_back(m[r][q]);
            sub.push_back(std::move(row));
        }
        Polynomial term = m[0][c] * det_poly(sub);
        if (c % 2 == 0)
            acc += term;
        else
            acc -= term;
    }
    return acc;
}

Polynomial var_power(int nvars, int v, int e) {
    Monomial m(static_cast<std::size_t>(nvars));
    m.e[static_cast<std::size_t>(v)] = static_cast<std::uint32_t>(e);
    Polynomial p(nvars);
    p.add_term(m, Rational(1));
    return p;
}

void require_partition(const Partition& lambda, int n) {
    if (n < 1 || n > 6) throw Error("schur: n must be between 1 and 6");
    if (static_cast<int>(lambda.size()) > n)
        throw Error("schur: partition longer than the variable count");
    long weight = 0;
    for (std::size_t i = 0; i < lambda.size(); ++i) {
        if (lambda[i] < 0) throw Error("schur: partition entries must be nonnegative");
        if (i > 0 && lambda[i] > lambda[i - 1])
            throw Error("schur: partition must be weakly decreasing");
        weight += lambda[i];
    }
    if (weight > 8) throw Error("schur: partition weight above 8");
}

// Column exponents of the generalized Vandermonde matrix: j + shift_j with the
// shifts weakly increasing (the partition reversed and zero-padded).
std::vector<int> gv_exponents(const Partition& lambda, int n) {
    std::vector<int> shift(static_cast<std::size_t>(n), 0);
    for (std::size_t i = 0; i < lambda.size(); ++i)
        shift[static_cast<std::size_t>(n) - 1 - i] = lambda[i];
    std::vector<int> expo;
    for (int j = 0; j < n; ++j) expo.push_back(j + shift[static_cast<std::size_t>(j)]);
    return expo;
}

Polynomial exponent_det(const std::vector<int>& expo, int n) {
    std::vector<std::vector<Polynomial>> m;
    for (int r = 0; r < n; ++r) {
        std::vector<Polynomial> row;
        for (int j = 0; j < n; ++j) row.push_back(var_power(n, r, expo[static_cast<std::size_t>(j)]));
        m.push_back(std::move(row));
    }
    return det_poly(m);
}

Polynomial vandermonde_factor(int nvars, const std::vector<int>& vars) {
    Polynomial prod = Polynomial::constant(nvars, Rational(1));
    for (std::size_t a = 0; a < vars.size(); ++a)
        for (std::size_t b = a + 1; b < vars.size(); ++b)
            prod = prod * (Polynomial::variable(nvars, vars[b]) - Polynomial::variable(nvars, vars[a]));
    return prod;
}

}  // namespace

Polynomial toeplitz_det(int n) {
    if (n < 2 || n > 6) throw Error("toeplitz_det: n must be between 2 and 6");
    int nvars = 2 * n - 1;
    std::vector<std::vector<Polynomial>> m;
    for (int r = 0; r < n; ++r) {
        std::vector<Polynomial> row;
        for (int c = 0; c < n; ++c) row.push_back(Polynomial::variable(nvars, c - r + n - 1));
        m.push_back(std::move(row));
    }
    return det_poly(m);
}

ToeplitzCertificate toeplitz_certificate(const Polynomial& det, int n) {
    if (n < 2 || n > 6) throw Error("toeplitz_certificate: n must be between 2 and 6");
    int nvars = 2 * n - 1;
    ToeplitzCertificate cert;
    if (det.nvars() != nvars) {
        cert.detail = "variable count is not 2n-1";
        return cert;
    }
    auto coeff_of = [&](const Monomial& m) {
        auto it = det.terms().find(m);
        return it == det.terms().end() ? Rational(0) : it->second;
    };
    Monomial main_power(static_cast<std::size_t>(nvars));
    main_power.e[static_cast<std::size_t>(n - 1)] = static_cast<std::uint32_t>(n);
    if (coeff_of(main_power) != 1) {
        cert.detail = "main diagonal power is missing or scaled";
        return cert;
    }
    for (int j = 1; j < n; ++j) {
        Monomial corner(static_cast<std::size_t>(nvars));
        corner.e[static_cast<std::size_t>(j + n - 1)] = static_cast<std::uint32_t>(n - j);
        corner.e[static_cast<std::size_t>(j - 1)] = static_cast<std::uint32_t>(j);
        Rational c = coeff_of(corner);
        if (c != 1 && c != -1) {
            cert.detail = "corner monomial for offset " + std::to_string(j) + " is not unimodular";
            return cert;
        }
    }
    if (det.degree_in(nvars - 1) != 1) {
        cert.detail = "determinant is not affine in the top-right diagonal";
        return cert;
    }
    cert.ok = true;
    return cert;
}

Polynomial schur_function(const Partition& lambda, int n) {
    require_partition(lambda, n);
    Polynomial gv = exponent_det(gv_exponents(lambda, n), n);
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    Polynomial vdm = vandermonde_factor(n, all);
    auto q = try_divide_exact(gv, vdm);
    if (!q) throw Error("schur: alternant is not divisible by the Vandermonde product");
    return *q;
}

IdentityCheck generalized_vandermonde_check(const Partition& lambda, int n) {
    require_partition(lambda, n);
    Polynomial gv = exponent_det(gv_exponents(lambda, n), n);
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    IdentityCheck chk;
    chk.residual = gv - schur_function(lambda, n) * vandermonde_factor(n, all);
    chk.ok = chk.residual.is_zero();
    return chk;
}

MinorCheck poly_vandermonde_minor_check(const std::vector<std::vector<Rational>>& C, int n,
                                        int i) {
    if (n < 3 || n > 5) throw Error("minor check: n must be between 3 and 5");
    if (i < 1 || i > n) throw Error("minor check: row index out of range");
    if (static_cast<int>(C.size()) != n) throw Error("minor check: C must be n x n");
    for (const auto& row : C)
        if (static_cast<int>(row.size()) != n) throw Error("minor check: C must be n x n");
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < r; ++c)
            if (C[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] != 0)
                throw Error("minor check: C must be upper triangular");
    for (int d = 0; d < n; ++d)
        if (C[static_cast<std::size_t>(d)][static_cast<std::size_t>(d)] == 0)
            throw Error("minor check: zero diagonal makes the basis singular");

    // Basis polynomial j at x_r, both 0-based.
    auto entry = [&](int r, int j) {
        Polynomial p(n);
        for (int l = 0; l <= j; ++l) {
            const Rational& c = C[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
            if (c != 0) p += var_power(n, r, l) * c;
        }
        return p;
    };
    std::vector<int> rows;
    for (int r = 0; r < n; ++r)
        if (r != i - 1) rows.push_back(r);
    std::vector<std::vector<Polynomial>> m;
    for (int r : rows) {
        std::vector<Polynomial> row;
        for (int j = 0; j < n; ++j)
            if (j != n - 2) row.push_back(entry(r, j));
        m.push_back(std::move(row));
    }
    Polynomial det = det_poly(m);

    MinorCheck chk;
    Rational lead(1);
    for (int l = 0; l <= n - 3; ++l)
        lead *= C[static_cast<std::size_t>(l)][static_cast<std::size_t>(l)];
    chk.E = C[static_cast<std::size_t>(n - 2)][static_cast<std::size_t>(n - 1)] * lead;
    chk.F = C[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(n - 1)] * lead;
    Polynomial bracket = Polynomial::constant(n, chk.E);
    for (int r : rows) bracket += Polynomial::variable(n, r) * chk.F;
    chk.residual = det - vandermonde_factor(n, rows) * bracket;
    chk.ok = chk.residual.is_zero();
    return chk;
}

Verdict minor_evaluability_verdict(int n, const Rational& E, const Rational& F) {
    Verdict v;
    if (n < 4) {
        v.status = Status::Unknown;
        v.reason = "the bracket obstruction is certified only for n >= 4";
        return v;
    }
    if (F == 0) {
        v.status = Status::Unknown;
        v.reason = "bracket is constant; the minor factors into difference forms";
        return v;
    }
    int m = n - 1;
    std::vector<int> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), 0);
    Polynomial bracket = Polynomial::constant(m, E);
    for (int r = 0; r < m; ++r) bracket += Polynomial::variable(m, r) * F;
    Polynomial p = vandermonde_factor(m, all) * bracket;

    // Zeros of the bracket with pairwise distinct coordinates; bump the last fixed
    // coordinate until every allowable form through the point misses the rest of p.
    for (long bump = 0; bump < 1000; ++bump) {
        Point x;
        Rational sum(0);
        for (int q = 0; q < m - 1; ++q) {
            Rational coord(q + 1 + (q == m - 2 ? bump : 0));
            x.push_back(coord);
            sum += coord;
        }
        x.push_back(-E / F - sum);
        if (!is_general_position(p, x).general) continue;
        auto w = real_nonevaluability_witness(p, {x});
        if (!w) continue;
        v.status = Status::NotEvaluable;
        v.witness = w->x;
        v.restriction = w->restriction;
        v.reason = "the bracket vanishes at a general-position point of the minor variety";
        return v;
    }
    throw Error("minor verdict: no general-position bracket zero found");
}

}  // namespace accpoly
