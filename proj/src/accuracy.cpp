#include "accpoly/accuracy.hpp"

#include <algorithm>
#include <random>
#include <thread>

namespace accpoly {

namespace {

Rational abs_rational(const Rational& v) { return v < 0 ? Rational(-v) : v; }

ExtValue rel_err_unchecked(const Dag& d, const Polynomial& p, const Point& x,
                           const DeltaAssignment& delta, const BlackBoxRegistry& reg) {
    Rational exact = p.evaluate(x);
    Rational computed = eval_rounded(d, x, delta, reg);
    if (exact == 0) return computed == 0 ? ExtValue::finite(0) : ExtValue::inf();
    return ExtValue::finite(abs_rational(computed - exact) / abs_rational(exact));
}

void require_matching(const Dag& d, const Polynomial& p, const BlackBoxRegistry& reg) {
    if (!(extract_polynomial(d, reg) == p))
        throw Error("DAG does not evaluate the supplied polynomial at delta = 0");
}

void require_matching(const BranchProgram& bp, const Polynomial& p, const BlackBoxRegistry& reg) {
    for_each_leaf(bp, [&](const Dag& leaf) { require_matching(leaf, p, reg); });
}

// Lexicographic witness order used to break ties between equal errors, so that
// parallel and sequential runs agree: first the point, then the deltas.
bool witness_less(const Point& xa, const DeltaAssignment& da, const Point& xb,
                  const DeltaAssignment& db) {
    if (xa != xb)
        return std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end());
    auto ia = da.values.begin(), ib = db.values.begin();
    for (; ia != da.values.end() && ib != db.values.end(); ++ia, ++ib) {
        if (ia->first != ib->first) return ia->first < ib->first;
        if (ia->second != ib->second) return ia->second < ib->second;
    }
    return da.values.size() < db.values.size();
}

struct Best {
    bool seen = false;
    ExtValue err;
    Point x;
    DeltaAssignment delta;

    void offer(const ExtValue& e, const Point& px, const DeltaAssignment& pd) {
        if (!seen || err < e || (err == e && witness_less(px, pd, x, delta))) {
            seen = true;
            err = e;
            x = px;
            delta = pd;
        }
    }
    void merge(const Best& o) {
        if (o.seen) offer(o.err, o.x, o.delta);
    }
};

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Rational grid_rational(std::mt19937_64& eng, long denom = 1024) {
    std::uniform_int_distribution<long> dist(-denom, denom);
    return Rational(dist(eng)) / Rational(denom);
}

DeltaAssignment signs_pattern(int m, const Rational& eps, std::uint64_t bits) {
    DeltaAssignment a;
    a.eps = eps;
    for (int i = 1; i <= m; ++i)
        a.values[i] = ((bits >> (i - 1)) & 1u) ? eps : Rational(-eps);
    return a;
}

// The handful of delta patterns probed per point: both uniform sign choices
// plus two pseudo-random ones. All at the extreme magnitude, where the worst
// case of a multilinear-in-delta error always sits.
std::vector<DeltaAssignment> probe_patterns(int m, const Rational& eps, std::mt19937_64& eng) {
    std::vector<DeltaAssignment> out;
    out.push_back(signs_pattern(m, eps, ~0ULL));
    out.push_back(signs_pattern(m, eps, 0));
    out.push_back(signs_pattern(m, eps, eng()));
    out.push_back(signs_pattern(m, eps, eng()));
    return out;
}

// One pass of per-coordinate delta sign flips starting from `start`, greedily
// keeping improvements. Costs m evaluations.
void climb_deltas(const Dag& d, const Polynomial& p, const Point& x, DeltaAssignment start,
                  int m, const Rational& eps, const BlackBoxRegistry& reg, Best& best,
                  long& evals) {
    ExtValue cur = rel_err_unchecked(d, p, x, start, reg);
    best.offer(cur, x, start);
    for (int i = 1; i <= m; ++i) {
        DeltaAssignment flipped = start;
        flipped.values[i] = -flipped.values[i];
        ExtValue e = rel_err_unchecked(d, p, x, flipped, reg);
        ++evals;
        best.offer(e, x, flipped);
        if (cur < e) {
            cur = e;
            start = std::move(flipped);
        }
    }
}

// Univariate restriction h -> p(x + h e_i), exact.
Polynomial coordinate_restriction(const Polynomial& p, const Point& x, int i) {
    std::vector<Polynomial> images;
    images.reserve(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        Polynomial img = Polynomial::constant(1, x[j]);
        if (static_cast<int>(j) == i) img += Polynomial::variable(1, 0);
        images.push_back(std::move(img));
    }
    return substitute_linear(p, images);
}

Rational eval_univariate(const Polynomial& g, const Rational& h) { return g.evaluate({h}); }

}  // namespace

std::string ExtValue::to_string() const {
    if (infinite) return "inf";
    return value.get_str();
}

ExtValue relative_error(const Dag& d, const Polynomial& p, const Point& x,
                        const DeltaAssignment& delta, const BlackBoxRegistry& reg) {
    require_matching(d, p, reg);
    return rel_err_unchecked(d, p, x, delta, reg);
}

ExtValue relative_error(const BranchProgram& bp, const Polynomial& p, const Point& x,
                        const DeltaAssignment& delta, const BlackBoxRegistry& reg) {
    require_matching(bp, p, reg);
    return rel_err_unchecked(route(bp, x), p, x, delta, reg);
}

AccuracyReport adversarial_search(const Dag& d, const Polynomial& p, const Point& center,
                                  const Rational& radius, const Rational& eps, long budget,
                                  std::uint64_t seed, const BlackBoxRegistry& reg) {
    if (budget < 1) throw Error("adversarial_search: budget must be >= 1");
    require_matching(d, p, reg);
    int m = d.max_delta();
    std::mt19937_64 eng(splitmix64(seed));
    Best best;
    long evals = 0;

    auto probe = [&](const Point& x) {
        for (const auto& pat : probe_patterns(m, eps, eng)) {
            if (evals >= budget) return;
            ExtValue e = rel_err_unchecked(d, p, x, pat, reg);
            ++evals;
            best.offer(e, x, pat);
        }
    };

    probe(center);

    // Random box probing around the center.
    long random_budget = budget / 3;
    while (evals < random_budget) {
        Point x = center;
        for (auto& c : x) c += radius * grid_rational(eng);
        probe(x);
    }

    // Coordinate refinement: steer the best point found so far toward a zero
    // of p, where any algorithm that is not exactly zero there fails hard.
    // Linear restrictions are solved exactly; otherwise bisection on a sign
    // change. Each accepted move is re-probed.
    Point x = best.seen ? best.x : center;
    int n = static_cast<int>(center.size());
    bool moved = true;
    while (moved && evals < (budget * 9) / 10) {
        moved = false;
        for (int i = 0; i < n && evals < (budget * 9) / 10; ++i) {
            Polynomial g = coordinate_restriction(p, x, i);
            if (g.is_zero()) continue;
            std::optional<Rational> root;
            if (g.total_degree() == 1) {
                // c1 h + c0 = 0
                Rational c1, c0;
                for (const auto& [mono, coeff] : g.terms())
                    (mono.degree() == 1 ? c1 : c0) = coeff;
                if (c1 != 0) {
                    Rational h = -c0 / c1;
                    if (abs_rational(h) <= radius) root = h;
                }
            }
            if (!root) {
                // Scan for a sign change across [-radius, radius], then bisect.
                const int kGrid = 8;
                Rational prev_h = -radius;
                Rational prev_v = eval_univariate(g, prev_h);
                for (int k = 1; k <= kGrid && !root; ++k) {
                    Rational h = -radius + (radius * 2 * k) / kGrid;
                    Rational v = eval_univariate(g, h);
                    if (v == 0) {
                        root = h;
                        break;
                    }
                    if ((prev_v < 0) != (v < 0) && prev_v != 0) {
                        Rational lo = prev_h, hi = h, vlo = prev_v;
                        for (int step = 0; step < 64; ++step) {
                            Rational mid = (lo + hi) / 2;
                            Rational vm = eval_univariate(g, mid);
                            if (vm == 0) {
                                lo = hi = mid;
                                break;
                            }
                            if ((vm < 0) == (vlo < 0)) {
                                lo = mid;
                                vlo = vm;
                            } else {
                                hi = mid;
                            }
                        }
                        root = (lo + hi) / 2;
                    }
                    prev_h = h;
                    prev_v = v;
                }
            }
            if (root) {
                Point cand = x;
                cand[static_cast<std::size_t>(i)] += *root;
                ExtValue before = best.err;
                probe(cand);
                if (best.seen && before < best.err) {
                    x = cand;
                    moved = true;
                }
            }
        }
    }

    // Final delta polishing at the best point.
    if (best.seen && evals < budget)
        climb_deltas(d, p, best.x, best.delta, m, eps, reg, best, evals);

    AccuracyReport r;
    r.samples = evals;
    r.eps = eps;
    r.worst_rel_err = best.err;
    r.worst_x = best.x;
    r.worst_delta = best.delta;
    return r;
}

namespace {

Point sample_point(const SamplerSpec& s, int nvars, std::mt19937_64& eng, long index) {
    switch (s.kind) {
        case SamplerSpec::Kind::Cube: {
            Point x;
            for (int i = 0; i < nvars; ++i) x.push_back(grid_rational(eng));
            return x;
        }
        case SamplerSpec::Kind::UnitSphere: {
            if (nvars == 1) return {Rational(eng() & 1 ? 1 : -1)};
            // Stereographic image of a rational grid point: exactly unit norm.
            Point v;
            Rational norm2(0);
            for (int i = 0; i + 1 < nvars; ++i) {
                Rational c = grid_rational(eng, 64);
                norm2 += c * c;
                v.push_back(c);
            }
            Rational denom = norm2 + 1;
            Point x;
            for (const auto& c : v) x.push_back(c * 2 / denom);
            x.push_back((Rational(1) - norm2) / denom);
            // Random signed permutation spreads samples over all charts.
            std::vector<int> perm(static_cast<std::size_t>(nvars));
            for (int i = 0; i < nvars; ++i) perm[static_cast<std::size_t>(i)] = i;
            std::shuffle(perm.begin(), perm.end(), eng);
            Point y(static_cast<std::size_t>(nvars));
            for (int i = 0; i < nvars; ++i) {
                y[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
                    (eng() & 1) ? x[static_cast<std::size_t>(i)] : -x[static_cast<std::size_t>(i)];
            }
            return y;
        }
        case SamplerSpec::Kind::NearVariety: {
            // Exact point of the component subspace, then a small push off it.
            Point x(static_cast<std::size_t>(nvars));
            std::vector<bool> constrained(static_cast<std::size_t>(nvars), false);
            for (int i = 0; i < nvars; ++i) x[static_cast<std::size_t>(i)] = grid_rational(eng);
            for (const auto& [vars, signs] : s.chains) {
                Rational rep;
                while (rep == 0) rep = grid_rational(eng);
                for (std::size_t k = 0; k < vars.size(); ++k) {
                    // signs[0] v0 = signs[k] vk  =>  vk = signs[0] signs[k] rep
                    Rational val = rep * signs[0] * signs[k];
                    x[static_cast<std::size_t>(vars[k])] = val;
                    if (k > 0) constrained[static_cast<std::size_t>(vars[k])] = true;
                }
            }
            for (int z : s.zero_vars) {
                x[static_cast<std::size_t>(z)] = 0;
                constrained[static_cast<std::size_t>(z)] = true;
            }
            // Perturbation ladder 10^-1 .. 10^-12, cycling with the sample index.
            Rational scale = Rational(1, 10);
            for (long k = 0; k < index % 12; ++k) scale /= 10;
            for (int i = 0; i < nvars; ++i)
                if (constrained[static_cast<std::size_t>(i)])
                    x[static_cast<std::size_t>(i)] += scale * grid_rational(eng, 64);
            return x;
        }
    }
    throw Error("unknown sampler");
}

template <typename Program>
AccuracyReport sample_report_impl(const Program& prog, const Polynomial& p,
                                  const SamplerSpec& sampler, const Rational& eps,
                                  const Rational& eta, long n_samples, std::uint64_t seed,
                                  int threads, const BlackBoxRegistry& reg) {
    if (n_samples < 1) throw Error("sample_accuracy_report: need at least one sample");
    require_matching(prog, p, reg);

    auto run_range = [&](long lo, long hi, Best& best) {
        for (long idx = lo; idx < hi; ++idx) {
            std::mt19937_64 eng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(idx))));
            Point x = sample_point(sampler, p.nvars(), eng, idx);
            const Dag* leaf;
            if constexpr (std::is_same_v<Program, BranchProgram>)
                leaf = &route(prog, x);
            else
                leaf = &prog;
            int m = leaf->max_delta();
            DeltaAssignment best_pat;
            ExtValue best_err;
            bool first = true;
            for (const auto& pat : probe_patterns(m, eps, eng)) {
                ExtValue e = rel_err_unchecked(*leaf, p, x, pat, reg);
                best.offer(e, x, pat);
                if (first || best_err < e) {
                    best_err = e;
                    best_pat = pat;
                    first = false;
                }
            }
            // One greedy sign-climbing pass from the best pattern.
            long dummy = 0;
            climb_deltas(*leaf, p, x, best_pat, m, eps, reg, best, dummy);
        }
    };

    Best best;
    if (threads <= 1 || n_samples < 64) {
        run_range(0, n_samples, best);
    } else {
        int t = std::min<long>(threads, 64);
        std::vector<Best> partial(static_cast<std::size_t>(t));
        std::vector<std::thread> pool;
        long chunk = (n_samples + t - 1) / t;
        for (int w = 0; w < t; ++w) {
            long lo = w * chunk, hi = std::min<long>(n_samples, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&, lo, hi, w] { run_range(lo, hi, partial[static_cast<std::size_t>(w)]); });
        }
        for (auto& th : pool) th.join();
        for (const auto& b : partial) best.merge(b);
    }

    AccuracyReport r;
    r.samples = n_samples;
    r.eps = eps;
    r.worst_rel_err = best.err;
    r.worst_x = best.x;
    r.worst_delta = best.delta;
    r.target_eta = eta;
    r.pass = best.err <= ExtValue::finite(eta);
    return r;
}

}  // namespace

AccuracyReport sample_accuracy_report(const Dag& d, const Polynomial& p, const SamplerSpec& sampler,
                                      const Rational& eps, const Rational& eta, long n_samples,
                                      std::uint64_t seed, int threads, const BlackBoxRegistry& reg) {
    return sample_report_impl(d, p, sampler, eps, eta, n_samples, seed, threads, reg);
}

AccuracyReport sample_accuracy_report(const BranchProgram& bp, const Polynomial& p,
                                      const SamplerSpec& sampler, const Rational& eps,
                                      const Rational& eta, long n_samples, std::uint64_t seed,
                                      int threads, const BlackBoxRegistry& reg) {
    return sample_report_impl(bp, p, sampler, eps, eta, n_samples, seed, threads, reg);
}

std::string report_lines(const AccuracyReport& r) {
    std::string out;
    out += "samples=" + std::to_string(r.samples) + "\n";
    out += "eps=" + r.eps.get_str() + "\n";
    out += "worst_rel_err=" + r.worst_rel_err.to_string() + "\n";
    std::string xs;
    for (std::size_t i = 0; i < r.worst_x.size(); ++i) {
        if (i) xs += ",";
        xs += r.worst_x[i].get_str();
    }
    out += "worst_x=" + xs + "\n";
    if (r.target_eta) {
        out += "eta=" + r.target_eta->get_str() + "\n";
        out += std::string("pass=") + (r.pass ? "true" : "false") + "\n";
    }
    return out;
}

}  // namespace accpoly
