#include "accpoly/decide.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

namespace accpoly {

namespace {

// Union-find over variables carrying the sign of each member relative to its root,
// plus a per-class "pinned to zero" flag. Drives both Allow(x) and derived varieties.
struct SignedClasses {
    std::vector<int> parent;
    std::vector<int> sign;  // +1 or -1, relative to parent
    std::vector<bool> zero;

    explicit SignedClasses(int n) : parent(n), sign(n, 1), zero(n, false) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }

    // Returns (root, s) with x_v = s * x_root.
    std::pair<int, int> find(int v) {
        if (parent[v] == v) return {v, 1};
        auto [r, s] = find(parent[v]);
        parent[v] = r;
        sign[v] *= s;
        return {r, sign[v]};
    }

    // Imposes x_a = rel * x_b. The first argument's root absorbs the second's, so
    // chains of (i, j) pairs keep the earliest variable as representative. A
    // conflicting sign forces the whole class to zero.
    void unite(int a, int b, int rel) {
        auto [ra, sa] = find(a);
        auto [rb, sb] = find(b);
        if (ra == rb) {
            if (sa != rel * sb) zero[ra] = true;
            return;
        }
        parent[rb] = ra;
        sign[rb] = sa * rel * sb;
        zero[ra] = zero[ra] || zero[rb];
    }

    void pin_zero(int v) { zero[find(v).first] = true; }
    bool is_zero(int v) { return zero[find(v).first]; }
};

bool is_integer(const Rational& c) { return c.get_den() == 1; }

// An operation of the shape c * x1 acts as multiplication by the constant c.
bool is_constant_multiplication(const BlackBoxOp& op) {
    if (op.arity != 1 || op.poly.term_count() != 1) return false;
    const auto& [mono, coeff] = *op.poly.terms().begin();
    (void)coeff;
    return mono.degree() == 1;
}

// All substitutions arg -> {0, x_1..x_n, -x_1..-x_n} for one op, applied to its
// defining polynomial. Digit encoding: 0 is zero, 1..n positive, n+1..2n negated.
constexpr long kImageBudget = 2'000'000;

Polynomial image_for_digit(int digit, int n) {
    if (digit == 0) return Polynomial(n);
    if (digit <= n) return Polynomial::variable(n, digit - 1);
    return -Polynomial::variable(n, digit - n - 1);
}

long image_count(int arity, int n) {
    long total = 1;
    for (int a = 0; a < arity; ++a) {
        total *= 2 * n + 1;
        if (total > kImageBudget) throw BudgetError("black-box argument enumeration exceeds budget");
    }
    return total;
}

// Calls fn(image polynomial, digit codes) for every substitution of the op's arguments.
void for_each_op_image(const BlackBoxOp& op, int n,
                       const std::function<void(const Polynomial&, const std::vector<int>&)>& fn) {
    long total = image_count(op.arity, n);
    std::vector<int> digits(static_cast<std::size_t>(op.arity), 0);
    std::vector<Polynomial> images(static_cast<std::size_t>(op.arity));
    for (long code = 0; code < total; ++code) {
        long rest = code;
        for (int a = 0; a < op.arity; ++a) {
            digits[static_cast<std::size_t>(a)] = static_cast<int>(rest % (2 * n + 1));
            rest /= 2 * n + 1;
            images[static_cast<std::size_t>(a)] =
                image_for_digit(digits[static_cast<std::size_t>(a)], n);
        }
        fn(substitute_linear(op.poly, images), digits);
    }
}

Polynomial primitive_copy(Polynomial p) {
    p.extract_content();
    return p;
}

std::vector<Polynomial> allowable_polynomials(int n) {
    std::vector<Polynomial> out;
    for (const auto& f : allowable_forms(n)) out.push_back(f.as_polynomial(n));
    return out;
}

void require_valid_ops(const std::vector<BlackBoxOp>& ops) {
    for (const auto& op : ops) {
        if (op.arity < 1 || op.poly.nvars() != op.arity)
            throw Error("black-box op '" + op.name + "': polynomial arity mismatch");
        if (op.arity > 8)
            throw Error("black-box op '" + op.name + "': arity above 8 is not supported");
    }
}

Verdict verdict_for_factorization(const AllowableFactorization& fac, bool const_mult_available,
                                  bool sufficiency_only) {
    Verdict v;
    v.c = fac.c;
    v.factors = fac.factors;
    if (fac.complete()) {
        if (is_integer(fac.c) || const_mult_available) {
            v.status = Status::Evaluable;
            return v;
        }
        v.status = Status::Unknown;
        v.reason = "non-integer constant and no constant-multiplication operation";
        return v;
    }
    if (sufficiency_only) {
        v.status = Status::Unknown;
        v.remainder = fac.remainder;
        v.reason = "non-affine operation present; only the sufficiency check applies";
        return v;
    }
    v.status = Status::NotEvaluable;
    v.remainder = fac.remainder;
    v.reason = "variety is not a union of the producible hyperplanes";
    return v;
}

}  // namespace

Polynomial AllowableForm::as_polynomial(int nvars) const {
    if (i < 0 || i >= nvars || (kind != Kind::Zi && (j < 0 || j >= nvars)))
        throw Error("allowable form references a variable out of range");
    Polynomial p = Polynomial::variable(nvars, i);
    if (kind == Kind::Sij) p += Polynomial::variable(nvars, j);
    if (kind == Kind::Dij) p -= Polynomial::variable(nvars, j);
    return p;
}

std::string AllowableForm::to_string() const {
    std::string s = "x" + std::to_string(i + 1);
    if (kind == Kind::Sij) s += "+x" + std::to_string(j + 1);
    if (kind == Kind::Dij) s += "-x" + std::to_string(j + 1);
    return s;
}

std::vector<AllowableForm> allowable_forms(int n) {
    if (n < 1) throw Error("allowable_forms: need at least one variable");
    std::vector<AllowableForm> out;
    for (int i = 0; i < n; ++i) out.push_back({AllowableForm::Kind::Zi, i, -1});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            out.push_back({AllowableForm::Kind::Sij, i, j});
            out.push_back({AllowableForm::Kind::Dij, i, j});
        }
    return out;
}

AllowableFactorization factor_allowable(const Polynomial& p,
                                        const std::vector<Polynomial>& forms) {
    if (p.is_zero()) throw Error("factor_allowable: zero polynomial");
    AllowableFactorization out;
    Polynomial r = p;
    for (const auto& f : forms) {
        while (auto q = try_divide_exact(r, f)) {
            out.factors.push_back(f);
            r = std::move(*q);
        }
    }
    if (r.is_constant()) {
        out.c = r.constant_value();
        out.remainder = Polynomial::constant(p.nvars(), 1);
    } else {
        out.c = r.extract_content();
        out.remainder = std::move(r);
    }
    return out;
}

std::string to_string(Status s) {
    switch (s) {
        case Status::Evaluable: return "Evaluable";
        case Status::NotEvaluable: return "NotEvaluable";
        case Status::Unknown: return "Unknown";
    }
    return "Unknown";
}

Verdict decide_complex(const Polynomial& p) {
    if (!p.has_integer_coefficients())
        throw Error("decide_complex: hypothesis violated, coefficients are not all integers");
    if (p.terms().count(Monomial(static_cast<std::size_t>(p.nvars()))))
        throw Error("decide_complex: hypothesis violated, constant term is nonzero");
    Verdict v;
    if (p.is_zero()) {
        v.status = Status::Evaluable;
        v.c = 0;
        v.reason = "zero polynomial";
        return v;
    }
    if (!p.homogeneous_degree()) {
        v.status = Status::NotEvaluable;
        v.reason = "inhomogeneous polynomial";
        return v;
    }
    auto fac = factor_allowable(p, allowable_polynomials(p.nvars()));
    v.c = fac.c;
    v.factors = fac.factors;
    if (fac.complete()) {
        v.status = Status::Evaluable;
    } else {
        v.status = Status::NotEvaluable;
        v.remainder = fac.remainder;
        v.reason = "remainder has no allowable factor";
    }
    return v;
}

Dag compile_product(const Rational& c, const std::vector<Polynomial>& factors,
                    const BlackBoxRegistry& reg) {
    if (factors.empty()) throw Error("compile_product: no factors");
    if (c == 0) throw Error("compile_product: zero constant");
    int n = factors.front().nvars();
    for (const auto& f : factors)
        if (f.nvars() != n) throw Error("compile_product: mixed variable counts");

    DagBuilder b(n, "product");
    int zero_node = -1;
    auto zero_input = [&]() {
        // An exact zero as x1 - x1; its rounding factor multiplies zero.
        if (zero_node < 0) zero_node = b.sub(ref(b.source(0)), ref(b.source(0)));
        return ref(zero_node);
    };

    std::map<std::string, int> leaf_ids;
    auto leaf_for = [&](const Polynomial& f) -> int {
        std::string key = f.to_string();
        if (auto it = leaf_ids.find(key); it != leaf_ids.end()) return it->second;
        int id = -1;
        for (const auto& form : allowable_forms(n)) {
            if (form.as_polynomial(n) == f) {
                int si = b.source(form.i);
                if (form.kind == AllowableForm::Kind::Zi)
                    id = si;
                else if (form.kind == AllowableForm::Kind::Sij)
                    id = b.add(ref(si), ref(b.source(form.j)));
                else
                    id = b.sub(ref(si), ref(b.source(form.j)));
                break;
            }
        }
        if (id < 0) {
            for (const auto& [name, op] : reg.all()) {
                std::optional<std::vector<int>> match;
                for_each_op_image(op, n, [&](const Polynomial& img, const std::vector<int>& digits) {
                    if (!match && img == f) match = digits;
                });
                if (match) {
                    std::vector<Edge> inputs;
                    for (int d : *match) {
                        if (d == 0)
                            inputs.push_back(zero_input());
                        else if (d <= n)
                            inputs.push_back(ref(b.source(d - 1)));
                        else
                            inputs.push_back(neg(b.source(d - n - 1)));
                    }
                    id = b.blackbox(name, inputs, op.exact);
                    break;
                }
            }
        }
        if (id < 0)
            throw Error("compile_product: factor " + f.to_string() +
                        " is neither allowable nor a registered operation image");
        leaf_ids[key] = id;
        return id;
    };

    std::vector<int> layer;
    for (const auto& f : factors) layer.push_back(leaf_for(f));
    while (layer.size() > 1) {
        std::vector<int> next;
        for (std::size_t i = 0; i + 1 < layer.size(); i += 2)
            next.push_back(b.mul(ref(layer[i]), ref(layer[i + 1])));
        if (layer.size() % 2) next.push_back(layer.back());
        layer = std::move(next);
    }
    int root = layer.front();

    Rational scale = c < 0 ? Rational(-c) : c;
    if (!is_integer(scale)) {
        // No constants in classical arithmetic; a registered c*x1 op fills the gap.
        bool applied = false;
        for (const auto& [name, op] : reg.all()) {
            if (!is_constant_multiplication(op)) continue;
            if (op.poly == Polynomial::variable(1, 0) * scale) {
                root = b.blackbox(name, {ref(root)}, op.exact);
                applied = true;
                break;
            }
        }
        if (!applied)
            throw Error("compile_product: non-integer constant needs a constant-multiplication op");
    } else if (scale != 1) {
        // scale * root by binary doubling: chain of x+x nodes plus adds per set bit.
        mpz_class k = scale.get_num();
        std::size_t bits = mpz_sizeinbase(k.get_mpz_t(), 2);
        int acc = -1;
        int power = root;
        for (std::size_t t = 0; t < bits; ++t) {
            if (t > 0) power = b.add(ref(power), ref(power));
            if (mpz_tstbit(k.get_mpz_t(), t))
                acc = acc < 0 ? power : b.add(ref(acc), ref(power));
        }
        root = acc;
    }

    b.set_output(c < 0 ? neg(root) : ref(root));
    Dag d = b.take();
    require_valid(d, reg);
    return d;
}

Subspace allow_subspace(const Point& x) {
    int n = static_cast<int>(x.size());
    if (n < 1) throw Error("allow_subspace: empty point");
    Subspace out;
    SignedClasses cls(n);
    for (const auto& form : allowable_forms(n)) {
        bool vanishes = false;
        switch (form.kind) {
            case AllowableForm::Kind::Zi:
                vanishes = x[static_cast<std::size_t>(form.i)] == 0;
                if (vanishes) cls.pin_zero(form.i);
                break;
            case AllowableForm::Kind::Sij:
                vanishes = x[static_cast<std::size_t>(form.i)] + x[static_cast<std::size_t>(form.j)] == 0;
                if (vanishes) cls.unite(form.i, form.j, -1);
                break;
            case AllowableForm::Kind::Dij:
                vanishes = x[static_cast<std::size_t>(form.i)] - x[static_cast<std::size_t>(form.j)] == 0;
                if (vanishes) cls.unite(form.i, form.j, 1);
                break;
        }
        if (vanishes) out.vanishing.push_back(form);
    }
    std::map<int, int> param_of_root;
    for (int i = 0; i < n; ++i) {
        if (cls.is_zero(i)) continue;
        int r = cls.find(i).first;
        if (!param_of_root.count(r)) {
            int next = static_cast<int>(param_of_root.size());
            param_of_root[r] = next;
        }
    }
    out.dim = static_cast<int>(param_of_root.size());
    for (int i = 0; i < n; ++i) {
        if (cls.is_zero(i)) {
            out.images.push_back(Polynomial(out.dim));
            continue;
        }
        auto [r, s] = cls.find(i);
        Polynomial t = Polynomial::variable(out.dim, param_of_root.at(r));
        out.images.push_back(s > 0 ? t : -t);
    }
    return out;
}

GeneralPosition is_general_position(const Polynomial& p, const Point& x) {
    if (p.evaluate(x) != 0)
        throw Error("is_general_position: point does not lie on the variety");
    Subspace sub = allow_subspace(x);
    GeneralPosition out;
    out.restriction = substitute_linear(p, sub.images);
    out.general = !out.restriction.is_zero();
    return out;
}

std::optional<RealWitness> real_nonevaluability_witness(const Polynomial& p,
                                                        const std::vector<Point>& candidates) {
    for (const auto& x : candidates) {
        if (p.evaluate(x) != 0) continue;
        GeneralPosition gp = is_general_position(p, x);
        if (gp.general) return RealWitness{x, gp.restriction};
    }
    return std::nullopt;
}

std::vector<Polynomial> derived_variety_polynomial(const BlackBoxOp& q,
                                                   const DerivedVarietySpec& I) {
    int k = q.arity;
    if (q.poly.nvars() != k) throw Error("derived variety: op polynomial arity mismatch");
    auto check = [&](int v) {
        if (v < 0 || v >= k) throw Error("derived variety: variable index out of range");
    };
    SignedClasses cls(k);
    for (const auto& [a, bidx] : I.K_D) {
        check(a);
        check(bidx);
        if (a == bidx) throw Error("derived variety: identification needs distinct variables");
        cls.unite(a, bidx, 1);
    }
    for (const auto& [a, bidx] : I.K_S) {
        check(a);
        check(bidx);
        if (a == bidx) throw Error("derived variety: identification needs distinct variables");
        cls.unite(a, bidx, -1);
    }
    for (int z : I.K_Z) {
        check(z);
        cls.pin_zero(z);
    }
    for (int w : I.K_N) check(w);

    std::vector<Polynomial> images;
    for (int w = 0; w < k; ++w) {
        if (cls.is_zero(w)) {
            images.push_back(Polynomial(k));
            continue;
        }
        auto [r, s] = cls.find(w);
        if (std::count(I.K_N.begin(), I.K_N.end(), w)) s = -s;
        Polynomial img = Polynomial::variable(k, r);
        images.push_back(s > 0 ? img : -img);
    }
    Polynomial restricted = substitute_linear(q.poly, images);
    if (restricted.is_zero()) return {};

    std::vector<int> T = I.T;
    std::sort(T.begin(), T.end());
    if (std::adjacent_find(T.begin(), T.end()) != T.end())
        throw Error("derived variety: repeated T variable");
    for (int t : T) {
        check(t);
        if (cls.is_zero(t) || cls.find(t).first != t)
            throw Error("derived variety: T must consist of surviving representatives");
    }
    if (T.empty()) return {restricted};
    std::vector<Polynomial> out;
    for (auto& slice : support_projection(restricted, T)) out.push_back(std::move(slice.coeff));
    return out;
}

Verdict decide_blackbox_affine(const Polynomial& p, const std::vector<BlackBoxOp>& ops) {
    require_valid_ops(ops);
    int n = p.nvars();
    bool const_mult = std::any_of(ops.begin(), ops.end(), is_constant_multiplication);

    if (p.is_zero()) {
        Verdict v;
        v.status = Status::Evaluable;
        v.c = 0;
        v.reason = "zero polynomial";
        return v;
    }

    bool all_affine = std::all_of(ops.begin(), ops.end(),
                                  [](const BlackBoxOp& op) { return op.poly.total_degree() <= 1; });
    if (!all_affine) {
        // Sufficiency only: the ops applied verbatim to the first arity variables.
        std::vector<Polynomial> forms = allowable_polynomials(n);
        for (const auto& op : ops)
            if (op.arity <= n && !op.poly.is_constant())
                forms.push_back(primitive_copy(extend_vars(op.poly, n)));
        return verdict_for_factorization(factor_allowable(p, forms), const_mult, true);
    }

    std::vector<Polynomial> candidates = allowable_polynomials(n);
    std::set<std::string> seen;
    for (const auto& cand : candidates) seen.insert(cand.to_string());
    for (const auto& op : ops) {
        for_each_op_image(op, n, [&](const Polynomial& img, const std::vector<int>&) {
            if (img.is_constant()) return;
            Polynomial norm = primitive_copy(img);
            if (seen.insert(norm.to_string()).second) candidates.push_back(std::move(norm));
        });
    }
    return verdict_for_factorization(factor_allowable(p, candidates), const_mult, false);
}

}  // namespace accpoly
