#include "accpoly/polynomial.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace accpoly {

Rational pow_rational(const Rational& base, unsigned long exp) {
    Rational result(1);
    Rational b = base;
    while (exp > 0) {
        if (exp & 1u) result *= b;
        b *= b;
        exp >>= 1u;
    }
    result.canonicalize();
    return result;
}

Polynomial Polynomial::constant(int nvars, const Rational& c) {
    Polynomial p(nvars);
    if (c != 0) p.terms_.emplace(Monomial(static_cast<std::size_t>(nvars)), c);
    return p;
}

Polynomial Polynomial::variable(int nvars, int index) {
    if (index < 0 || index >= nvars) throw Error("variable index out of range");
    Polynomial p(nvars);
    Monomial m(static_cast<std::size_t>(nvars));
    m.e[static_cast<std::size_t>(index)] = 1;
    p.terms_.emplace(std::move(m), Rational(1));
    return p;
}

bool Polynomial::is_constant() const {
    if (terms_.empty()) return true;
    return terms_.size() == 1 && terms_.begin()->first.degree() == 0;
}

Rational Polynomial::constant_value() const {
    if (terms_.empty()) return Rational(0);
    if (!is_constant()) throw Error("constant_value on a nonconstant polynomial");
    return terms_.begin()->second;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    if (m.e.size() != static_cast<std::size_t>(nvars_)) throw Error("monomial arity mismatch");
    auto it = terms_.find(m);
    if (it == terms_.end()) {
        terms_.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
    Polynomial r(*this);
    r += o;
    return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
    if (nvars_ != o.nvars_) throw Error("polynomial arity mismatch in +");
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Polynomial Polynomial::operator-(const Polynomial& o) const {
    Polynomial r(*this);
    r -= o;
    return r;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
    if (nvars_ != o.nvars_) throw Error("polynomial arity mismatch in -");
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Polynomial Polynomial::operator-() const {
    Polynomial r(nvars_);
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
}

Polynomial Polynomial::operator*(const Polynomial& o) const {
    if (nvars_ != o.nvars_) throw Error("polynomial arity mismatch in *");
    Polynomial r(nvars_);
    for (const auto& [ma, ca] : terms_)
        for (const auto& [mb, cb] : o.terms_) r.add_term(ma * mb, ca * cb);
    return r;
}

Polynomial Polynomial::operator*(const Rational& c) const {
    Polynomial r(nvars_);
    if (c == 0) return r;
    for (const auto& [m, coeff] : terms_) r.terms_.emplace(m, coeff * c);
    return r;
}

Rational Polynomial::evaluate(const Point& x) const {
    if (x.size() != static_cast<std::size_t>(nvars_)) throw Error("point dimension mismatch");
    Rational total(0);
    for (const auto& [m, c] : terms_) {
        Rational v = c;
        for (std::size_t i = 0; i < m.e.size(); ++i)
            if (m.e[i] != 0) v *= pow_rational(x[i], m.e[i]);
        total += v;
    }
    return total;
}

std::uint64_t Polynomial::total_degree() const {
    std::uint64_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
}

std::uint32_t Polynomial::degree_in(int var) const {
    if (var < 0 || var >= nvars_) throw Error("variable index out of range");
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.e[static_cast<std::size_t>(var)]);
    return d;
}

std::optional<std::uint64_t> Polynomial::homogeneous_degree() const {
    if (terms_.empty()) throw Error("homogeneous degree of the zero polynomial is undefined");
    std::uint64_t d = terms_.begin()->first.degree();
    for (const auto& [m, c] : terms_)
        if (m.degree() != d) return std::nullopt;
    return d;
}

bool Polynomial::has_integer_coefficients() const {
    for (const auto& [m, c] : terms_)
        if (c.get_den() != 1) return false;
    return true;
}

Rational Polynomial::extract_content() {
    if (terms_.empty()) throw Error("content of the zero polynomial is undefined");
    mpz_class num_gcd(0), den_lcm(1);
    for (const auto& [m, c] : terms_) {
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
    }
    Rational content(num_gcd, den_lcm);
    content.canonicalize();
    // Leading coefficient (canonical order) fixes the sign.
    if (terms_.begin()->second < 0) content = -content;
    for (auto& [m, c] : terms_) c /= content;
    return content;
}

std::string Polynomial::to_string(int t_index) const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        if (!first) out << " + ";
        first = false;
        out << c.get_str();
        for (std::size_t i = 0; i < m.e.size(); ++i) {
            if (m.e[i] == 0) continue;
            if (static_cast<int>(i) == t_index)
                out << "*t";
            else
                out << "*x" << (i + 1);
            if (m.e[i] > 1) out << "^" << m.e[i];
        }
    }
    return out.str();
}

namespace {

// Recursive-descent parser for the polynomial grammar.
class Parser {
public:
    Parser(const std::string& text, int nvars, int t_index)
        : text_(text), nvars_(nvars), t_index_(t_index) {}

    Polynomial parse() {
        Polynomial p = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return p;
    }

private:
    const std::string& text_;
    int nvars_;
    int t_index_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < text_.size() ? text_[pos_] : '\0';
    }

    Polynomial parse_expr() {
        bool negate = false;
        if (eat('-'))
            negate = true;
        else
            eat('+');
        Polynomial acc = parse_term();
        if (negate) acc = -acc;
        for (;;) {
            if (eat('+'))
                acc += parse_term();
            else if (eat('-'))
                acc -= parse_term();
            else
                break;
        }
        return acc;
    }

    Polynomial parse_term() {
        Polynomial acc = parse_factor();
        while (eat('*')) acc = acc * parse_factor();
        return acc;
    }

    Polynomial parse_factor() {
        Polynomial base = parse_atom();
        if (eat('^')) {
            skip_ws();
            std::size_t at = pos_;
            if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
                throw ParseError("exponent must be a nonnegative integer literal", at);
            unsigned long exp = parse_uint();
            Polynomial r = Polynomial::constant(base.nvars(), 1);
            // Exponent by repeated squaring on the expanded polynomial.
            while (exp > 0) {
                if (exp & 1ul) r = r * base;
                if ((exp >>= 1ul) != 0) base = base * base;
            }
            return r;
        }
        return base;
    }

    unsigned long parse_uint() {
        std::size_t at = pos_;
        unsigned long v = 0;
        bool any = false;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            any = true;
            v = v * 10 + static_cast<unsigned long>(text_[pos_] - '0');
            if (v > 1000000ul) throw ParseError("integer literal too large for an exponent", at);
            ++pos_;
        }
        if (!any) throw ParseError("expected an integer", at);
        return v;
    }

    mpz_class parse_integer_literal() {
        std::size_t at = pos_;
        std::string digits;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            digits.push_back(text_[pos_]);
            ++pos_;
        }
        if (digits.empty()) throw ParseError("expected an integer", at);
        return mpz_class(digits);
    }

    Polynomial parse_atom() {
        skip_ws();
        std::size_t at = pos_;
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", at);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Polynomial inner = parse_expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return inner;
        }
        if (c == '-') {
            ++pos_;
            return -parse_atom();
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mpz_class num = parse_integer_literal();
            if (peek() == '/') {
                ++pos_;
                skip_ws();
                std::size_t dat = pos_;
                mpz_class den = parse_integer_literal();
                if (den == 0) throw ParseError("zero denominator", dat);
                Rational q(num, den);
                q.canonicalize();
                return Polynomial::constant(nvars_, q);
            }
            return Polynomial::constant(nvars_, Rational(num));
        }
        if (c == 'x') {
            ++pos_;
            std::size_t iat = pos_;
            unsigned long idx = parse_uint();
            if (idx < 1 || static_cast<long>(idx) > nvars_)
                throw ParseError("variable index out of range", iat);
            return Polynomial::variable(nvars_, static_cast<int>(idx) - 1);
        }
        if (c == 't') {
            ++pos_;
            if (t_index_ < 0) throw ParseError("variable t is not allowed here", at);
            return Polynomial::variable(nvars_, t_index_);
        }
        throw ParseError(std::string("unexpected character '") + c + "'", at);
    }
};

}  // namespace

Polynomial parse_polynomial(const std::string& text, int nvars, int t_index) {
    if (nvars < 0) throw Error("negative variable count");
    if (t_index >= nvars) throw Error("t index outside the variable space");
    return Parser(text, nvars, t_index).parse();
}

std::optional<Polynomial> try_divide_exact(const Polynomial& p, const Polynomial& q) {
    if (q.is_zero()) throw Error("division by the zero polynomial");
    if (p.nvars() != q.nvars()) throw Error("polynomial arity mismatch in division");
    Polynomial r = p;
    Polynomial quotient(p.nvars());
    const auto& [qm, qc] = *q.terms().begin();
    // The canonical order is multiplicative, so exact divisibility means the divisor's
    // leading term eliminates the remainder's leading term at every step.
    while (!r.is_zero()) {
        const auto& [rm, rc] = *r.terms().begin();
        if (!qm.divides(rm)) return std::nullopt;
        Monomial step_m = rm / qm;
        Rational step_c = rc / qc;
        Polynomial step(p.nvars());
        step.add_term(step_m, step_c);
        quotient += step;
        r -= step * q;
    }
    return quotient;
}

Polynomial substitute_linear(const Polynomial& p, const std::vector<Polynomial>& images) {
    if (images.size() != static_cast<std::size_t>(p.nvars()))
        throw Error("substitution needs one image per variable");
    int target_nvars = images.empty() ? 0 : images[0].nvars();
    for (const auto& im : images)
        if (im.nvars() != target_nvars) throw Error("substitution images disagree on arity");
    if (p.nvars() == 0) {
        Polynomial r(target_nvars);
        for (const auto& [m, c] : p.terms()) r.add_term(Monomial(static_cast<std::size_t>(target_nvars)), c);
        return r;
    }

    // Cache image powers up to the maximum exponent each variable actually uses.
    std::vector<std::vector<Polynomial>> powers(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
        std::uint32_t maxe = p.degree_in(static_cast<int>(i));
        powers[i].reserve(maxe + 1);
        powers[i].push_back(Polynomial::constant(target_nvars, 1));
        for (std::uint32_t k = 1; k <= maxe; ++k) powers[i].push_back(powers[i].back() * images[i]);
    }

    Polynomial result(target_nvars);
    for (const auto& [m, c] : p.terms()) {
        Polynomial term = Polynomial::constant(target_nvars, c);
        for (std::size_t i = 0; i < m.e.size(); ++i)
            if (m.e[i] != 0) term = term * powers[i][m.e[i]];
        result += term;
    }
    return result;
}

std::vector<SupportSlice> support_projection(const Polynomial& p, const std::vector<int>& block) {
    if (block.empty()) throw Error("support projection needs a nonempty block");
    for (std::size_t i = 0; i < block.size(); ++i) {
        if (block[i] < 0 || block[i] >= p.nvars()) throw Error("block index out of range");
        if (i > 0 && block[i] <= block[i - 1]) throw Error("block indices must be strictly increasing");
    }

    std::map<Monomial, Polynomial, GrlexDescending> slices;
    for (const auto& [m, c] : p.terms()) {
        Monomial lambda(block.size());
        Monomial rest = m;
        for (std::size_t i = 0; i < block.size(); ++i) {
            auto v = static_cast<std::size_t>(block[i]);
            lambda.e[i] = m.e[v];
            rest.e[v] = 0;
        }
        auto [it, inserted] = slices.try_emplace(lambda, Polynomial(p.nvars()));
        it->second.add_term(rest, c);
    }

    std::vector<SupportSlice> result;
    result.reserve(slices.size());
    for (auto& [lambda, coeff] : slices) result.push_back(SupportSlice{lambda.e, std::move(coeff)});
    return result;
}

Polynomial extend_vars(const Polynomial& p, int new_nvars) {
    if (new_nvars < p.nvars()) throw Error("extend_vars cannot shrink the variable space");
    if (new_nvars == p.nvars()) return p;
    Polynomial r(new_nvars);
    for (const auto& [m, c] : p.terms()) {
        Monomial wide(static_cast<std::size_t>(new_nvars));
        std::copy(m.e.begin(), m.e.end(), wide.e.begin());
        r.add_term(wide, c);
    }
    return r;
}

}  // namespace accpoly
