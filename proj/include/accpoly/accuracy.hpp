#pragma once

#include "accpoly/dag.hpp"
#include "accpoly/polynomial.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace accpoly {

// Nonnegative rational extended with infinity. Infinity compares greater than
// every finite value; it records the case p(x) = 0 with a nonzero computed value.
struct ExtValue {
    bool infinite = false;
    Rational value = Rational(0);

    static ExtValue inf() { return ExtValue{true, Rational(0)}; }
    static ExtValue finite(Rational v) { return ExtValue{false, std::move(v)}; }

    bool operator==(const ExtValue& o) const {
        return infinite == o.infinite && (infinite || value == o.value);
    }
    bool operator<(const ExtValue& o) const {
        if (infinite) return false;
        if (o.infinite) return true;
        return value < o.value;
    }
    bool operator<=(const ExtValue& o) const { return *this < o || *this == o; }
    std::string to_string() const;
};

struct AccuracyReport {
    long samples = 0;
    Rational eps = Rational(0);
    ExtValue worst_rel_err;
    Point worst_x;
    DeltaAssignment worst_delta;
    std::optional<Rational> target_eta;  // set when a pass/fail target was given
    bool pass = true;                    // worst_rel_err <= target_eta when a target is set
};

// |p_comp(x, delta) - p(x)| / |p(x)|, exactly. Zero when both vanish, infinite
// when only p does. The DAG (or, for a program, the leaf routed to by x) must
// extract to p; a mismatch is an error.
ExtValue relative_error(const Dag& d, const Polynomial& p, const Point& x,
                        const DeltaAssignment& delta, const BlackBoxRegistry& reg = {});
ExtValue relative_error(const BranchProgram& bp, const Polynomial& p, const Point& x,
                        const DeltaAssignment& delta, const BlackBoxRegistry& reg = {});

// Randomized worst-case search over inputs in the box of the given radius
// around `center` and rounding errors bounded by eps. Random probing is
// followed by per-coordinate refinement toward zeros of p (where relative
// error blows up for inexact algorithms) and by delta sign climbing. The
// budget counts DAG evaluations. Deterministic for a fixed seed.
AccuracyReport adversarial_search(const Dag& d, const Polynomial& p, const Point& center,
                                  const Rational& radius, const Rational& eps, long budget,
                                  std::uint64_t seed = 1, const BlackBoxRegistry& reg = {});

struct SamplerSpec {
    enum class Kind { UnitSphere, Cube, NearVariety };
    Kind kind = Kind::Cube;
    // NearVariety: the component whose subspace is sampled, then perturbed by
    // offsets 10^-1 .. 10^-12 cycling per sample.
    std::vector<int> zero_vars;                          // 0-based indices forced to 0
    std::vector<std::pair<std::vector<int>, std::vector<int>>> chains;  // (vars, signs)
};

// N-sample accuracy report. Each sample draws a point from the sampler and a
// handful of delta patterns at the ends of [-eps, eps]; the worst relative
// error over all of them is kept, tie-broken toward the lexicographically
// smallest witness. Exact arithmetic throughout; identical seeds give
// identical reports. `threads` > 1 splits the sample range.
AccuracyReport sample_accuracy_report(const Dag& d, const Polynomial& p, const SamplerSpec& sampler,
                                      const Rational& eps, const Rational& eta, long n_samples,
                                      std::uint64_t seed = 1, int threads = 1,
                                      const BlackBoxRegistry& reg = {});
AccuracyReport sample_accuracy_report(const BranchProgram& bp, const Polynomial& p,
                                      const SamplerSpec& sampler, const Rational& eps,
                                      const Rational& eta, long n_samples, std::uint64_t seed = 1,
                                      int threads = 1, const BlackBoxRegistry& reg = {});

// Report serialization used by the CLI: stable key=value lines.
std::string report_lines(const AccuracyReport& r);

}  // namespace accpoly
