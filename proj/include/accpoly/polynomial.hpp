#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace accpoly {

using Rational = mpq_class;

// Exact rational point; length must match the polynomial's variable count.
using Point = std::vector<Rational>;

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"), position(position) {}
    std::size_t position;
};

Rational pow_rational(const Rational& base, unsigned long exp);

// Dense exponent vector. Length is fixed by the owning polynomial's variable count.
struct Monomial {
    std::vector<std::uint32_t> e;

    Monomial() = default;
    explicit Monomial(std::size_t nvars) : e(nvars, 0) {}
    explicit Monomial(std::vector<std::uint32_t> exps) : e(std::move(exps)) {}

    std::uint64_t degree() const {
        std::uint64_t d = 0;
        for (auto v : e) d += v;
        return d;
    }

    bool operator==(const Monomial& o) const { return e == o.e; }

    bool divides(const Monomial& o) const {
        if (e.size() != o.e.size()) return false;
        for (std::size_t i = 0; i < e.size(); ++i)
            if (e[i] > o.e[i]) return false;
        return true;
    }

    Monomial operator*(const Monomial& o) const {
        Monomial r(*this);
        for (std::size_t i = 0; i < e.size(); ++i) r.e[i] += o.e[i];
        return r;
    }

    // Caller must ensure o.divides(*this).
    Monomial operator/(const Monomial& o) const {
        Monomial r(*this);
        for (std::size_t i = 0; i < e.size(); ++i) r.e[i] -= o.e[i];
        return r;
    }
};

// Canonical term order: graded lexicographic, leading (highest) term first.
// Using it as the map comparator makes iteration order the serialization order.
struct GrlexDescending {
    bool operator()(const Monomial& a, const Monomial& b) const {
        std::uint64_t da = a.degree(), db = b.degree();
        if (da != db) return da > db;
        return a.e > b.e;  // lexicographically larger exponent vector first
    }
};

class Polynomial {
public:
    using TermMap = std::map<Monomial, Rational, GrlexDescending>;

    Polynomial() : nvars_(0) {}
    explicit Polynomial(int nvars) : nvars_(nvars) {
        if (nvars < 0) throw Error("negative variable count");
    }

    static Polynomial constant(int nvars, const Rational& c);
    static Polynomial variable(int nvars, int index);  // 0-based index

    int nvars() const { return nvars_; }
    const TermMap& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    // Value of a constant polynomial (0 for the zero polynomial). Error if nonconstant.
    Rational constant_value() const;

    std::size_t term_count() const { return terms_.size(); }

    // Adds c * x^m, dropping the term if the sum cancels to zero.
    void add_term(const Monomial& m, const Rational& c);

    Polynomial operator+(const Polynomial& o) const;
    Polynomial operator-(const Polynomial& o) const;
    Polynomial operator-() const;
    Polynomial operator*(const Polynomial& o) const;
    Polynomial operator*(const Rational& c) const;
    Polynomial& operator+=(const Polynomial& o);
    Polynomial& operator-=(const Polynomial& o);
    bool operator==(const Polynomial& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

    Rational evaluate(const Point& x) const;

    std::uint64_t total_degree() const;               // 0 for the zero polynomial
    std::uint32_t degree_in(int var) const;           // max exponent of one variable
    std::optional<std::uint64_t> homogeneous_degree() const;  // empty if mixed; error if zero
    bool has_integer_coefficients() const;

    // Pulls out the rational content: *this == content * primitive part, where the
    // primitive part has integer coefficients with gcd 1 and positive leading coefficient.
    // Error on the zero polynomial.
    Rational extract_content();

    std::string to_string(int t_index = -1) const;

private:
    int nvars_;
    TermMap terms_;
};

// Grammar: variables x1..xN (and `t` when t_index >= 0, mapped to that 0-based slot),
// nonnegative integer and a/b rational literals, operators + - * ^ (exponents are
// nonnegative integer literals), parentheses, unary minus. The result is fully
// expanded and collected.
Polynomial parse_polynomial(const std::string& text, int nvars, int t_index = -1);

// Quotient r with p == q * r exactly, or empty when q does not divide p.
// Iterated leading-term elimination under the canonical order.
std::optional<Polynomial> try_divide_exact(const Polynomial& p, const Polynomial& q);

// Replaces x_i by images[i] (all images over one common variable space) and expands.
Polynomial substitute_linear(const Polynomial& p, const std::vector<Polynomial>& images);

// One slice of the expansion of p grouped by the exponents of a variable block:
// p == sum over slices of  x_block^lambda * coeff.  The coefficient polynomial lives in
// the ambient variable space but uses only variables outside the block.
struct SupportSlice {
    std::vector<std::uint32_t> lambda;  // exponents on the block variables, in block order
    Polynomial coeff;
};

// block: sorted 0-based variable indices, nonempty. Slices are returned with lambda in
// graded-lex descending order.
std::vector<SupportSlice> support_projection(const Polynomial& p, const std::vector<int>& block);

// Widens a polynomial to a larger variable space; existing variables keep their indices.
Polynomial extend_vars(const Polynomial& p, int new_nvars);

}  // namespace accpoly
