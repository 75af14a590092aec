#include "accpoly/dominance.hpp"

#include "accpoly/decide.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

namespace accpoly {

namespace {

using RatMatrix = std::vector<std::vector<Rational>>;

// In-place reduced row echelon form; returns the rank.
int rref(RatMatrix& m) {
    if (m.empty()) return 0;
    std::size_t cols = m[0].size();
    int rank = 0;
    for (std::size_t c = 0; c < cols && rank < static_cast<int>(m.size()); ++c) {
        std::size_t piv = m.size();
        for (std::size_t r = static_cast<std::size_t>(rank); r < m.size(); ++r)
            if (m[r][c] != 0) {
                piv = r;
                break;
            }
        if (piv == m.size()) continue;
        std::swap(m[static_cast<std::size_t>(rank)], m[piv]);
        Rational lead = m[static_cast<std::size_t>(rank)][c];
        for (auto& v : m[static_cast<std::size_t>(rank)]) v /= lead;
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == static_cast<std::size_t>(rank) || m[r][c] == 0) continue;
            Rational f = m[r][c];
            for (std::size_t j = c; j < cols; ++j) m[r][j] -= f * m[static_cast<std::size_t>(rank)][j];
        }
        ++rank;
    }
    return rank;
}

int rank_of(RatMatrix m) { return rref(m); }

// Basis of the right nullspace of the row system.
std::vector<std::vector<Rational>> nullspace(RatMatrix m, std::size_t cols) {
    int rank = rref(m);
    std::vector<int> pivot_col(static_cast<std::size_t>(rank), -1);
    std::vector<bool> is_pivot(cols, false);
    int r = 0;
    for (std::size_t c = 0; c < cols && r < rank; ++c) {
        if (m[static_cast<std::size_t>(r)][c] != 0) {
            pivot_col[static_cast<std::size_t>(r)] = static_cast<int>(c);
            is_pivot[c] = true;
            ++r;
        }
    }
    std::vector<std::vector<Rational>> basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_pivot[f]) continue;
        std::vector<Rational> g(cols, Rational(0));
        g[f] = 1;
        for (int row = 0; row < rank; ++row)
            g[static_cast<std::size_t>(pivot_col[static_cast<std::size_t>(row)])] =
                -m[static_cast<std::size_t>(row)][f];
        basis.push_back(std::move(g));
    }
    return basis;
}

// Scales a rational vector by the positive factor that makes it primitive integer.
std::vector<long> scale_primitive(const std::vector<Rational>& v) {
    mpz_class den(1);
    for (const auto& c : v) den = lcm(den, c.get_den());
    std::vector<mpz_class> ints;
    mpz_class g(0);
    for (const auto& c : v) {
        mpz_class z = c.get_num() * (den / c.get_den());
        g = gcd(g, z);
        ints.push_back(z);
    }
    std::vector<long> out;
    for (const auto& z : ints) {
        mpz_class q = g == 0 ? z : mpz_class(z / g);
        if (!q.fits_slong_p()) throw Error("cone arithmetic overflow");
        out.push_back(q.get_si());
    }
    return out;
}

// Primitive integer generator of the ray through v inside the nonnegative orthant,
// or nothing when the line leaves the orthant.
std::optional<std::vector<long>> primitive_ray(const std::vector<Rational>& v) {
    std::vector<long> w = scale_primitive(v);
    bool pos = false, negv = false;
    for (long c : w) {
        pos = pos || c > 0;
        negv = negv || c < 0;
    }
    if (pos == negv) return std::nullopt;  // zero vector or mixed signs
    if (negv)
        for (auto& c : w) c = -c;
    return w;
}

long long dot(const std::vector<long>& eta, const std::vector<std::uint32_t>& lambda) {
    long long s = 0;
    for (std::size_t i = 0; i < eta.size(); ++i) s += static_cast<long long>(eta[i]) * lambda[i];
    return s;
}

std::vector<std::vector<std::uint32_t>> argmin_set(
    const std::vector<std::vector<std::uint32_t>>& lambdas, const std::vector<long>& eta) {
    long long best = 0;
    bool first = true;
    for (const auto& l : lambdas) {
        long long v = dot(eta, l);
        if (first || v < best) {
            best = v;
            first = false;
        }
    }
    std::vector<std::vector<std::uint32_t>> out;
    for (const auto& l : lambdas)
        if (dot(eta, l) == best) out.push_back(l);
    return out;
}

RatMatrix difference_rows(const std::vector<std::vector<std::uint32_t>>& pts) {
    RatMatrix rows;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        std::vector<Rational> row;
        for (std::size_t c = 0; c < pts[0].size(); ++c)
            row.push_back(Rational(static_cast<long>(pts[i][c])) -
                          Rational(static_cast<long>(pts[0][c])));
        rows.push_back(std::move(row));
    }
    return rows;
}

RatMatrix invert(const IntMatrix& C) {
    std::size_t n = C.size();
    RatMatrix aug(n, std::vector<Rational>(2 * n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = C[i][j];
        aug[i][n + i] = 1;
    }
    if (rref(aug) != static_cast<int>(n)) throw Error("change of variables is singular");
    RatMatrix inv(n, std::vector<Rational>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
    return inv;
}

int position_in(const std::vector<int>& sorted, int v) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), v);
    if (it == sorted.end() || *it != v) return -1;
    return static_cast<int>(it - sorted.begin());
}

}  // namespace

void validate_component(const ComponentSpec& spec) {
    if (spec.nvars < 1) throw Error("component: needs at least one variable");
    std::vector<bool> used(static_cast<std::size_t>(spec.nvars), false);
    auto claim = [&](int v) {
        if (v < 0 || v >= spec.nvars) throw Error("component: variable index out of range");
        if (used[static_cast<std::size_t>(v)]) throw Error("component: variable appears twice");
        used[static_cast<std::size_t>(v)] = true;
    };
    for (int z : spec.zeros) claim(z);
    for (const auto& ch : spec.chains) {
        if (ch.vars.size() < 2) throw Error("component: chain shorter than two variables");
        if (ch.vars.size() != ch.signs.size()) throw Error("component: chain sign count mismatch");
        for (int s : ch.signs)
            if (s != 1 && s != -1) throw Error("component: chain sign must be +1 or -1");
        for (int v : ch.vars) claim(v);
    }
}

std::vector<ChangeOfVariables> enumerate_standard_changes(const ComponentSpec& spec) {
    validate_component(spec);
    std::vector<int> zeros = spec.zeros;
    std::sort(zeros.begin(), zeros.end());
    if (zeros.size() > 8) throw BudgetError("zero group too large to enumerate");

    // Every way of turning the zero group into kept zeros plus new sign chains:
    // set partitions, then per multi-element part a representative and relative signs.
    struct ZeroOption {
        std::vector<int> kept;
        std::vector<Chain> chains;
    };
    std::vector<ZeroOption> zero_options;
    std::vector<int> rgs(zeros.size(), 0);
    std::function<void(std::size_t, int)> partitions = [&](std::size_t i, int maxv) {
        if (i == zeros.size()) {
            std::vector<std::vector<int>> parts(static_cast<std::size_t>(maxv + 1));
            for (std::size_t j = 0; j < zeros.size(); ++j)
                parts[static_cast<std::size_t>(rgs[j])].push_back(zeros[j]);
            // Options per multi-element part: representative x sign pattern.
            std::vector<std::vector<Chain>> per_part;
            std::vector<int> kept;
            for (const auto& part : parts) {
                if (part.size() == 1) {
                    kept.push_back(part[0]);
                    continue;
                }
                std::vector<Chain> opts;
                for (std::size_t rpos = 0; rpos < part.size(); ++rpos) {
                    std::vector<int> others;
                    for (std::size_t q = 0; q < part.size(); ++q)
                        if (q != rpos) others.push_back(part[q]);
                    for (unsigned bits = 0; bits < (1u << others.size()); ++bits) {
                        Chain ch;
                        ch.vars.push_back(part[rpos]);
                        ch.signs.push_back(1);
                        for (std::size_t q = 0; q < others.size(); ++q) {
                            ch.vars.push_back(others[q]);
                            ch.signs.push_back((bits >> q) & 1u ? -1 : 1);
                        }
                        opts.push_back(std::move(ch));
                    }
                }
                per_part.push_back(std::move(opts));
            }
            std::vector<std::size_t> pick(per_part.size(), 0);
            while (true) {
                ZeroOption opt;
                opt.kept = kept;
                for (std::size_t q = 0; q < per_part.size(); ++q)
                    opt.chains.push_back(per_part[q][pick[q]]);
                zero_options.push_back(std::move(opt));
                std::size_t q = 0;
                for (; q < pick.size(); ++q) {
                    if (++pick[q] < per_part[q].size()) break;
                    pick[q] = 0;
                }
                if (q == pick.size()) break;
            }
            return;
        }
        for (int v = 0; v <= maxv + 1; ++v) {
            rgs[i] = v;
            partitions(i + 1, std::max(maxv, v));
        }
    };
    partitions(0, -1);

    // Representative choices for each existing chain, reordered representative-first
    // with the leading sign normalized to +1.
    std::vector<std::vector<Chain>> chain_options;
    for (const auto& ch : spec.chains) {
        std::vector<Chain> opts;
        for (std::size_t rpos = 0; rpos < ch.vars.size(); ++rpos) {
            Chain c;
            c.vars.push_back(ch.vars[rpos]);
            c.signs.push_back(ch.signs[rpos]);
            for (std::size_t q = 0; q < ch.vars.size(); ++q) {
                if (q == rpos) continue;
                c.vars.push_back(ch.vars[q]);
                c.signs.push_back(ch.signs[q]);
            }
            if (c.signs[0] < 0)
                for (auto& s : c.signs) s = -s;
            opts.push_back(std::move(c));
        }
        chain_options.push_back(std::move(opts));
    }

    std::vector<ChangeOfVariables> out;
    std::set<IntMatrix> seen;
    std::vector<std::size_t> pick(chain_options.size(), 0);
    for (const auto& zopt : zero_options) {
        std::fill(pick.begin(), pick.end(), 0);
        while (true) {
            ChangeOfVariables cov;
            cov.nvars = spec.nvars;
            cov.superset.nvars = spec.nvars;
            cov.superset.zeros = zopt.kept;
            for (const auto& ch : zopt.chains) cov.superset.chains.push_back(ch);
            for (std::size_t q = 0; q < chain_options.size(); ++q)
                cov.superset.chains.push_back(chain_options[q][pick[q]]);

            std::size_t nz = static_cast<std::size_t>(spec.nvars);
            cov.C.assign(nz, std::vector<long>(nz, 0));
            for (std::size_t i = 0; i < nz; ++i) cov.C[i][i] = 1;
            for (const auto& ch : cov.superset.chains) {
                int rep = ch.vars[0];
                cov.reps.push_back(rep);
                for (std::size_t q = 1; q < ch.vars.size(); ++q) {
                    long rho = ch.signs[0] * ch.signs[q];
                    cov.C[static_cast<std::size_t>(ch.vars[q])][static_cast<std::size_t>(rep)] = -rho;
                }
            }
            cov.block = zopt.kept;
            for (const auto& ch : zopt.chains)
                for (int v : ch.vars) cov.block.push_back(v);
            for (std::size_t q = 0; q < chain_options.size(); ++q) {
                const Chain& ch = chain_options[q][pick[q]];
                for (std::size_t w = 1; w < ch.vars.size(); ++w) cov.block.push_back(ch.vars[w]);
            }
            std::sort(cov.block.begin(), cov.block.end());

            if (seen.insert(cov.C).second) out.push_back(std::move(cov));

            std::size_t q = 0;
            for (; q < pick.size(); ++q) {
                if (++pick[q] < chain_options[q].size()) break;
                pick[q] = 0;
            }
            if (q == pick.size()) break;
        }
    }
    return out;
}

Polynomial changed_polynomial(const Polynomial& p, const ChangeOfVariables& cov) {
    if (p.nvars() != cov.nvars) throw Error("changed_polynomial: variable count mismatch");
    RatMatrix inv = invert(cov.C);
    std::vector<Polynomial> images;
    for (int i = 0; i < cov.nvars; ++i) {
        Polynomial img(cov.nvars);
        for (int j = 0; j < cov.nvars; ++j)
            img += Polynomial::variable(cov.nvars, j) * inv[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        images.push_back(std::move(img));
    }
    return substitute_linear(p, images);
}

std::vector<DominanceRegion> dominance_regions(const Polynomial& p,
                                               const std::vector<int>& block) {
    if (block.empty()) throw Error("dominance_regions: empty block");
    if (p.is_zero()) throw Error("dominance_regions: zero polynomial");
    std::vector<int> blk = block;
    std::sort(blk.begin(), blk.end());
    if (std::adjacent_find(blk.begin(), blk.end()) != blk.end())
        throw Error("dominance_regions: repeated block variable");
    if (blk.front() < 0 || blk.back() >= p.nvars())
        throw Error("dominance_regions: block variable out of range");
    std::size_t k = blk.size();
    if (k > 6) throw BudgetError("dominance_regions: block dimension above 6");

    auto slices = support_projection(p, blk);
    if (slices.size() > 24) throw BudgetError("dominance_regions: support larger than 24");
    std::vector<std::vector<std::uint32_t>> lambdas;
    for (const auto& s : slices) lambdas.push_back(s.lambda);

    // Candidate rays: coordinate axes plus, for every affinely independent subset of
    // the support and every coordinate-zero set cutting the system to corank one, the
    // nonnegative primitive nullspace generator.
    std::set<std::vector<long>> rays;
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<long> e(k, 0);
        e[i] = 1;
        rays.insert(std::move(e));
    }
    std::size_t L = lambdas.size();
    auto harvest = [&](const RatMatrix& rows) {
        for (unsigned dmask = 0; dmask < (1u << k); ++dmask) {
            RatMatrix sys = rows;
            for (std::size_t c = 0; c < k; ++c) {
                if (!((dmask >> c) & 1u)) continue;
                std::vector<Rational> e(k, Rational(0));
                e[c] = 1;
                sys.push_back(std::move(e));
            }
            auto basis = nullspace(std::move(sys), k);
            if (basis.size() != 1) continue;
            if (auto g = primitive_ray(basis[0])) rays.insert(std::move(*g));
        }
    };
    for (std::size_t base = 0; base < L; ++base) {
        RatMatrix rows;
        std::function<void(std::size_t)> grow = [&](std::size_t from) {
            for (std::size_t j = from; j < L; ++j) {
                std::vector<Rational> row;
                for (std::size_t c = 0; c < k; ++c)
                    row.push_back(Rational(static_cast<long>(lambdas[j][c])) -
                                  Rational(static_cast<long>(lambdas[base][c])));
                rows.push_back(std::move(row));
                if (rank_of(rows) == static_cast<int>(rows.size())) {
                    harvest(rows);
                    if (rows.size() < k) grow(j + 1);
                }
                rows.pop_back();
            }
        };
        grow(base + 1);
    }

    std::vector<std::vector<long>> ray_list(rays.begin(), rays.end());
    if (ray_list.size() > 18) throw BudgetError("dominance_regions: too many candidate rays");

    // Every region is the argmin set of some sum of candidate rays, since the rays
    // contain all extreme rays of every region's closure. Keep the first witnessing
    // sum for each argmin pattern: it lies in the region by construction.
    std::map<std::vector<std::vector<std::uint32_t>>, std::vector<long>> found;
    for (unsigned mask = 1; mask < (1u << ray_list.size()); ++mask) {
        std::vector<long> eta(k, 0);
        for (std::size_t r = 0; r < ray_list.size(); ++r)
            if ((mask >> r) & 1u)
                for (std::size_t c = 0; c < k; ++c) eta[c] += ray_list[r][c];
        found.try_emplace(argmin_set(lambdas, eta), std::move(eta));
    }

    std::vector<DominanceRegion> regions;
    for (auto& [lam, witness] : found) {
        DominanceRegion reg;
        reg.block = blk;
        reg.lambdas = lam;
        reg.facet = rank_of(difference_rows(lam)) == static_cast<int>(k) - 1;
        if (reg.facet) {
            auto basis = nullspace(difference_rows(lam), k);
            if (basis.size() != 1) throw Error("dominance_regions: internal ray extraction failure");
            auto g = primitive_ray(basis[0]);
            if (!g || argmin_set(lambdas, *g) != lam)
                throw Error("dominance_regions: internal facet ray inconsistency");
            reg.generators.push_back(std::move(*g));
        } else {
            reg.generators.push_back(std::move(witness));
        }
        regions.push_back(std::move(reg));
    }
    std::sort(regions.begin(), regions.end(),
              [](const DominanceRegion& a, const DominanceRegion& b) { return a.lambdas < b.lambdas; });

    // Widened cones: the orthant rows everywhere; facet regions additionally get the
    // perpendicular bisector against every other facet ray, so the cone contains its
    // own ray strictly inside and excludes the neighbours.
    std::vector<std::vector<long>> facet_rays;
    for (const auto& reg : regions)
        if (reg.facet) facet_rays.push_back(reg.generators[0]);
    auto l1_normalized = [&](const std::vector<long>& v) {
        long s = 0;
        for (long c : v) s += c;
        std::vector<Rational> out;
        for (long c : v) out.push_back(Rational(c) / Rational(s));
        return out;
    };
    for (auto& reg : regions) {
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<long> e(k, 0);
            e[i] = 1;
            reg.widened.push_back(std::move(e));
        }
        if (!reg.facet) continue;
        auto g = l1_normalized(reg.generators[0]);
        Rational g2(0);
        for (const auto& c : g) g2 += c * c;
        for (const auto& other : facet_rays) {
            if (other == reg.generators[0]) continue;
            auto r = l1_normalized(other);
            Rational r2(0);
            for (const auto& c : r) r2 += c * c;
            std::vector<Rational> row;
            for (std::size_t c = 0; c < k; ++c) row.push_back((g[c] - r[c]) * 2 - (g2 - r2));
            reg.widened.push_back(scale_primitive(row));
        }
    }
    return regions;
}

DominantTerm dominant_term(const Polynomial& p, const ComponentSpec& spec,
                           const ChangeOfVariables& cov, const DominanceRegion& region) {
    if (region.block != cov.block) throw Error("dominant_term: region and change disagree on the block");
    Polynomial tilde = changed_polynomial(p, cov);
    auto slices = support_projection(tilde, cov.block);
    Polynomial dom(tilde.nvars());
    for (const auto& lam : region.lambdas) {
        bool hit = false;
        for (const auto& s : slices) {
            if (s.lambda != lam) continue;
            Monomial m(static_cast<std::size_t>(tilde.nvars()));
            for (std::size_t c = 0; c < cov.block.size(); ++c)
                m.e[static_cast<std::size_t>(cov.block[c])] = lam[c];
            Polynomial mono(tilde.nvars());
            mono.add_term(m, Rational(1));
            dom += s.coeff * mono;
            hit = true;
            break;
        }
        if (!hit) throw Error("dominant_term: region does not belong to this polynomial");
    }
    std::vector<Polynomial> images;
    for (int i = 0; i < cov.nvars; ++i) {
        Polynomial img(cov.nvars);
        for (int j = 0; j < cov.nvars; ++j)
            if (cov.C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0)
                img += Polynomial::variable(cov.nvars, j) *
                       Rational(cov.C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        images.push_back(std::move(img));
    }
    DominantTerm out;
    out.p_dom = substitute_linear(dom, images);
    out.spec = spec;
    out.change = cov;
    out.lambdas = region.lambdas;
    return out;
}

bool satisfies_exp_cond(const DominanceRegion& region, const ChangeOfVariables& cov) {
    if (region.block != cov.block) throw Error("exp_cond: region and change disagree on the block");
    if (region.generators.empty()) throw Error("exp_cond: region has no stored generators");
    std::vector<bool> flags;
    for (const auto& eta : region.generators) {
        bool ok = true;
        for (const auto& ch : cov.superset.chains) {
            int rpos = position_in(cov.block, ch.vars[0]);
            if (rpos < 0) continue;  // original chain: representative keeps no weight
            long n_rep = eta[static_cast<std::size_t>(rpos)];
            for (std::size_t q = 1; q < ch.vars.size(); ++q) {
                int lpos = position_in(cov.block, ch.vars[q]);
                if (lpos < 0) throw Error("exp_cond: chain member missing from block");
                ok = ok && n_rep <= eta[static_cast<std::size_t>(lpos)];
            }
        }
        flags.push_back(ok);
    }
    for (bool f : flags)
        if (f != flags[0])
            throw Error("exp_cond: stored generators disagree; region is not sign-uniform");
    return flags[0];
}

bool slice_membership(const Point& x_block, const DominanceRegion& region) {
    if (x_block.size() != region.block.size())
        throw Error("slice_membership: point size does not match the block");
    for (const auto& row : region.widened) {
        Rational lhs(1), rhs(1);
        for (std::size_t c = 0; c < row.size(); ++c) {
            Rational a = x_block[c] < 0 ? Rational(-x_block[c]) : x_block[c];
            if (row[c] > 0)
                lhs *= pow_rational(a, static_cast<unsigned long>(row[c]));
            else if (row[c] < 0)
                rhs *= pow_rational(a, static_cast<unsigned long>(-row[c]));
        }
        if (!(lhs <= rhs)) return false;
    }
    return true;
}

namespace {

std::optional<std::uint32_t> lowest_t_degree(const Polynomial& p, int t) {
    std::optional<std::uint32_t> best;
    for (const auto& [m, c] : p.terms()) {
        (void)c;
        std::uint32_t d = m.e[static_cast<std::size_t>(t)];
        if (!best || d < *best) best = d;
    }
    return best;
}

Polynomial lowest_t_part(const Polynomial& p, int t) {
    auto d = lowest_t_degree(p, t);
    Polynomial out(p.nvars());
    if (!d) return out;
    for (const auto& [m, c] : p.terms())
        if (m.e[static_cast<std::size_t>(t)] == *d) out.add_term(m, c);
    return out;
}

std::optional<std::uint32_t> second_t_degree(const Polynomial& p, int t) {
    auto low = lowest_t_degree(p, t);
    if (!low) return std::nullopt;
    std::optional<std::uint32_t> second;
    for (const auto& [m, c] : p.terms()) {
        (void)c;
        std::uint32_t d = m.e[static_cast<std::size_t>(t)];
        if (d == *low) continue;
        if (!second || d < *second) second = d;
    }
    return second;
}

}  // namespace

Dag prune(const Dag& d, const ComponentSpec& spec, const ChangeOfVariables& cov,
          const DominanceRegion& region, const std::vector<long>& eta) {
    validate_component(spec);
    auto topo = require_valid(d);
    for (const auto& nd : d.nodes)
        if (nd.kind == NodeKind::blackbox)
            throw Error("prune: only classical operations can be pruned");
    if (d.nvars != cov.nvars || d.nvars != spec.nvars)
        throw Error("prune: variable count mismatch");
    if (region.block != cov.block) throw Error("prune: region and change disagree on the block");
    if (eta.size() != cov.block.size()) throw Error("prune: eta size does not match the block");
    for (long e : eta)
        if (e < 0 || e > 1'000'000) throw Error("prune: eta entries must be small nonnegative integers");
    if (!satisfies_exp_cond(region, cov))
        throw Error("prune: representative weights violate the exponent condition");

    // eta must select exactly this region on the DAG's polynomial.
    Polynomial p = extract_polynomial(d);
    Polynomial tilde = changed_polynomial(p, cov);
    auto slices = support_projection(tilde, cov.block);
    std::vector<std::vector<std::uint32_t>> lambdas;
    for (const auto& s : slices) lambdas.push_back(s.lambda);
    {
        long long best = 0;
        bool first = true;
        for (const auto& l : lambdas) {
            long long v = 0;
            for (std::size_t c = 0; c < eta.size(); ++c)
                v += eta[c] * static_cast<long long>(l[c]);
            if (first || v < best) {
                best = v;
                first = false;
            }
        }
        std::vector<std::vector<std::uint32_t>> am;
        for (const auto& l : lambdas) {
            long long v = 0;
            for (std::size_t c = 0; c < eta.size(); ++c)
                v += eta[c] * static_cast<long long>(l[c]);
            if (v == best) am.push_back(l);
        }
        if (am != region.lambdas) throw Error("prune: eta does not select the given region");
    }

    int n = d.nvars;
    int t = n;  // index of the formal parameter in the extended variable space

    // Per-variable classification and substitution images.
    std::vector<int> rep_of(static_cast<std::size_t>(n), -1);
    std::vector<int> rho_of(static_cast<std::size_t>(n), 1);
    std::vector<long> weight(static_cast<std::size_t>(n), 0);
    for (std::size_t c = 0; c < cov.block.size(); ++c)
        weight[static_cast<std::size_t>(cov.block[c])] = eta[c];
    std::vector<bool> pinned(static_cast<std::size_t>(n), false);
    for (int z : cov.superset.zeros) pinned[static_cast<std::size_t>(z)] = true;

    auto t_power = [&](long e, int var) {
        Monomial m(static_cast<std::size_t>(n + 1));
        m.e[static_cast<std::size_t>(t)] = static_cast<std::uint32_t>(e);
        m.e[static_cast<std::size_t>(var)] = 1;
        Polynomial out(n + 1);
        out.add_term(m, Rational(1));
        return out;
    };

    std::vector<Polynomial> images;
    for (int v = 0; v < n; ++v) images.push_back(t_power(0, v));
    for (int v = 0; v < n; ++v)
        if (pinned[static_cast<std::size_t>(v)]) images[static_cast<std::size_t>(v)] = t_power(weight[static_cast<std::size_t>(v)], v);
    for (const auto& ch : cov.superset.chains) {
        int rep = ch.vars[0];
        bool from_zeros = position_in(cov.block, rep) >= 0;
        if (from_zeros)
            images[static_cast<std::size_t>(rep)] = t_power(weight[static_cast<std::size_t>(rep)], rep);
        for (std::size_t q = 1; q < ch.vars.size(); ++q) {
            int l = ch.vars[q];
            int rho = ch.signs[0] * ch.signs[q];
            rep_of[static_cast<std::size_t>(l)] = rep;
            rho_of[static_cast<std::size_t>(l)] = rho;
            Polynomial img = t_power(weight[static_cast<std::size_t>(l)], l);
            Polynomial reppart = t_power(from_zeros ? weight[static_cast<std::size_t>(rep)] : 0, rep);
            images[static_cast<std::size_t>(l)] = rho > 0 ? img + reppart : img - reppart;
        }
    }

    // Working copy. Deleted nodes get a forwarding edge; all ids stay stable.
    std::vector<Node> work = d.nodes;
    std::map<int, std::size_t> index_of;
    for (std::size_t i = 0; i < work.size(); ++i) index_of[work[i].id] = i;
    std::vector<bool> live(work.size(), true);
    std::map<int, Polynomial> value_of;
    std::map<int, Edge> forward;
    int next_id = 0;
    for (const auto& nd : work) next_id = std::max(next_id, nd.id);
    ++next_id;

    std::map<int, int> source_for_var;
    for (const auto& nd : work)
        if (nd.kind == NodeKind::source && !source_for_var.count(nd.var)) source_for_var[nd.var] = nd.id;
    auto source_id = [&](int var) {
        if (auto it = source_for_var.find(var); it != source_for_var.end()) return it->second;
        Node s;
        s.id = next_id++;
        s.kind = NodeKind::source;
        s.var = var;
        work.push_back(s);
        index_of[s.id] = work.size() - 1;
        live.push_back(true);
        value_of[s.id] = images[static_cast<std::size_t>(var)];
        source_for_var[var] = s.id;
        return s.id;
    };

    auto resolve = [&](Edge e) {
        while (true) {
            auto it = forward.find(e.node);
            if (it == forward.end()) return e;
            e = Edge{it->second.node, e.negated != it->second.negated};
        }
    };
    auto value = [&](const Edge& e) {
        Polynomial v = value_of.at(e.node);
        return e.negated ? -v : v;
    };
    auto redirect = [&](Edge& e) {
        const Node& src = work[index_of.at(e.node)];
        if (src.kind != NodeKind::source) return;
        int rep = rep_of[static_cast<std::size_t>(src.var)];
        if (rep < 0) return;
        bool flip = rho_of[static_cast<std::size_t>(src.var)] < 0;
        e = Edge{source_id(rep), e.negated != flip};
    };

    for (int idx : topo) {
        Node& nd = work[static_cast<std::size_t>(idx)];
        if (nd.kind == NodeKind::source) {
            value_of[nd.id] = images[static_cast<std::size_t>(nd.var)];
            continue;
        }
        for (auto& e : nd.inputs) e = resolve(e);
        if (nd.kind == NodeKind::mul) {
            for (auto& e : nd.inputs)
                if (work[index_of.at(e.node)].kind == NodeKind::source) redirect(e);
            value_of[nd.id] = value(nd.inputs[0]) * value(nd.inputs[1]);
            continue;
        }
        // add or sub
        bool is_sub = nd.kind == NodeKind::sub;
        Polynomial v0 = value(nd.inputs[0]);
        Polynomial v1 = value(nd.inputs[1]);
        auto d0 = lowest_t_degree(v0, t);
        auto d1 = lowest_t_degree(v1, t);
        bool unequal = (d0.has_value() != d1.has_value()) || (d0 && d1 && *d0 != *d1);
        if (unequal) {
            // Deletion: the higher-degree input vanishes faster; the node forwards
            // the other input. An absent degree counts as infinite.
            std::size_t high = !d0 ? 0 : (!d1 ? 1 : (*d0 > *d1 ? 0 : 1));
            std::size_t keep = 1 - high;
            const Edge& es = nd.inputs[keep];
            forward[nd.id] = Edge{es.node, es.negated != (is_sub && keep == 1)};
            live[static_cast<std::size_t>(idx)] = false;
            continue;
        }
        bool src0 = work[index_of.at(nd.inputs[0].node)].kind == NodeKind::source;
        bool src1 = work[index_of.at(nd.inputs[1].node)].kind == NodeKind::source;
        if (src0 && src1) {
            Polynomial combined = is_sub ? lowest_t_part(v0, t) - lowest_t_part(v1, t)
                                         : lowest_t_part(v0, t) + lowest_t_part(v1, t);
            if (combined.is_zero()) {
                // Lowest terms cancel: compare second-lowest degrees; redirect only
                // the strictly later source, and only when both seconds exist.
                auto s0 = second_t_degree(v0, t);
                auto s1 = second_t_degree(v1, t);
                if (s0 && s1 && *s0 != *s1) redirect(nd.inputs[*s0 > *s1 ? 0 : 1]);
            } else {
                redirect(nd.inputs[0]);
                redirect(nd.inputs[1]);
            }
        } else if (src0) {
            redirect(nd.inputs[0]);
        } else if (src1) {
            redirect(nd.inputs[1]);
        }
        Polynomial a = value(nd.inputs[0]);
        Polynomial b = value(nd.inputs[1]);
        value_of[nd.id] = is_sub ? a - b : a + b;
    }

    Edge out_edge = resolve(d.output);

    // Keep only nodes still on a path to the output.
    std::set<int> reachable;
    std::vector<int> stack{out_edge.node};
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        if (!reachable.insert(id).second) continue;
        const Node& nd = work[index_of.at(id)];
        for (const auto& e : nd.inputs) stack.push_back(e.node);
    }

    Dag result;
    result.name = d.name;
    result.nvars = d.nvars;
    result.output = out_edge;
    for (std::size_t i = 0; i < work.size(); ++i)
        if (live[i] && reachable.count(work[i].id)) result.nodes.push_back(work[i]);
    require_valid(result);
    return result;
}

}  // namespace accpoly
