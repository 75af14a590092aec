#pragma once

#include "accpoly/polynomial.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace accpoly {

// Edge into a node. `negated` encodes an exact negation (a dotted edge): the referenced
// value is sign-flipped with no rounding error attached.
struct Edge {
    int node = -1;
    bool negated = false;
};

inline Edge ref(int node) { return Edge{node, false}; }
inline Edge neg(int node) { return Edge{node, true}; }

enum class NodeKind { source, add, sub, mul, blackbox };

struct Node {
    int id = -1;
    NodeKind kind = NodeKind::source;
    int var = -1;             // source: 0-based variable index
    std::string op;           // blackbox: registered operation name
    std::vector<Edge> inputs; // empty for source, 2 for add/sub/mul, arity for blackbox
    // 1-based rounding-error index; every computational node owns a fresh delta.
    // -1 for sources and for black boxes registered as exact.
    int delta = -1;
};

struct Dag {
    std::string name;
    int nvars = 0;
    std::vector<Node> nodes;
    Edge output;

    const Node* find(int id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
    int max_delta() const {
        int m = 0;
        for (const auto& n : nodes) m = std::max(m, n.delta);
        return m;
    }
};

// A black-box operation: a fixed polynomial in its arguments provided as one rounded
// primitive (a single (1+delta) on the whole output). Ops registered as exact carry no
// rounding error; the only use is the exact final combine of compensated summation.
struct BlackBoxOp {
    std::string name;
    int arity = 0;
    Polynomial poly;  // nvars == arity
    bool exact = false;
};

class BlackBoxRegistry {
public:
    void add(BlackBoxOp op);
    const BlackBoxOp* find(const std::string& name) const;
    const BlackBoxOp& get(const std::string& name) const;  // throws on unknown name
    bool contains(const std::string& name) const { return find(name) != nullptr; }
    const std::map<std::string, BlackBoxOp>& all() const { return ops_; }

private:
    std::map<std::string, BlackBoxOp> ops_;
};

struct DeltaAssignment {
    std::map<int, Rational> values;  // delta index -> value
    Rational eps = Rational(0);

    static DeltaAssignment zeros(const Dag& d, const Rational& eps = Rational(0));
    const Rational& get(int delta_index) const;  // throws on a missing entry
    // |delta_i| <= eps for all entries
    bool within_bound() const;
};

struct Diagnostics {
    std::vector<std::string> problems;
    // Node indices (positions in Dag::nodes) in a topological order; valid only when ok().
    std::vector<int> topo_order;
    bool ok() const { return problems.empty(); }
};

// Structural checks: unique ids, acyclicity, arity per kind, known black-box names,
// resolvable references, single in-range output. Never throws; problems are listed.
Diagnostics validate(const Dag& d, const BlackBoxRegistry& reg = {});

// Throws Error when validate() finds problems; returns the topological order otherwise.
std::vector<int> require_valid(const Dag& d, const BlackBoxRegistry& reg = {});

// Bottom-up exact evaluation under the rounding model: each computational node's exact
// operation result is multiplied by (1 + delta_i); negated edges flip signs exactly.
Rational eval_rounded(const Dag& d, const Point& x, const DeltaAssignment& delta,
                      const BlackBoxRegistry& reg = {});

// Symbolic value at delta == 0, fully expanded.
Polynomial extract_polynomial(const Dag& d, const BlackBoxRegistry& reg = {});

// The computed value as an exact polynomial in x and the deltas: variables are laid out
// as [x_1..x_n, delta_1..delta_m] with m = max delta index of the DAG.
struct SymbolicValue {
    Polynomial value;
    int nx = 0;  // number of x variables
    int m = 0;   // number of delta slots
};
SymbolicValue symbolic_rounded(const Dag& d, const BlackBoxRegistry& reg = {});

// p_comp grouped by delta powers: alpha -> p_alpha(x), truncated to |alpha| <= order.
// The alpha = 0 entry is the exact polynomial the DAG computes.
struct ErrorExpansion {
    int order = 0;
    int m = 0;  // delta slot count
    std::map<std::vector<std::uint32_t>, Polynomial> coeffs;
};
ErrorExpansion error_expansion(const Dag& d, int order, const BlackBoxRegistry& reg = {});

// The set of delta multi-indices with nonzero coefficient in the full (untruncated)
// expansion, each index widened/truncated to `m_pad` slots.
std::vector<std::vector<std::uint32_t>> delta_support(const Dag& d, int m_pad,
                                                      const BlackBoxRegistry& reg = {});

// Decides whether the DAG is a homogeneous algorithm: the output has a well-defined
// x-degree d, every node's output is homogeneous in x (with the deltas symbolic), and no
// node exceeds degree d. Classical operations only.
struct HomogeneityCheck {
    bool ok = false;
    std::optional<std::uint64_t> degree;
    std::string reason;
};
HomogeneityCheck check_homogeneous_algorithm(const Dag& d);

// Guarded piecewise programs: a tree of exact polynomial comparisons with DAG leaves.
enum class Cmp { Less, LessEq, Eq };

struct Guard {
    Polynomial lhs;
    Cmp cmp = Cmp::LessEq;
    Polynomial rhs;
};

bool guard_holds(const Guard& g, const Point& x);

struct BranchNode {
    // Inner node: guard + both branches set. Leaf: dag set.
    std::optional<Guard> guard;
    std::shared_ptr<const BranchNode> then_branch;
    std::shared_ptr<const BranchNode> else_branch;
    std::optional<Dag> leaf;
};

struct BranchProgram {
    std::string name;
    int nvars = 0;
    std::shared_ptr<const BranchNode> root;
};

std::shared_ptr<const BranchNode> branch_leaf(Dag d);
std::shared_ptr<const BranchNode> branch_if(Guard g, std::shared_ptr<const BranchNode> then_branch,
                                            std::shared_ptr<const BranchNode> else_branch);

// Walks the guard tree with exact comparisons; returns the unique leaf for x.
const Dag& route(const BranchProgram& bp, const Point& x);

void for_each_leaf(const BranchProgram& bp, const std::function<void(const Dag&)>& fn);

// Convenience construction API used by the generators.
class DagBuilder {
public:
    explicit DagBuilder(int nvars, std::string name = "dag") {
        dag_.nvars = nvars;
        dag_.name = std::move(name);
    }

    // Source nodes are shared per variable.
    int source(int var);
    int add(Edge a, Edge b) { return binary(NodeKind::add, a, b); }
    int sub(Edge a, Edge b) { return binary(NodeKind::sub, a, b); }
    int mul(Edge a, Edge b) { return binary(NodeKind::mul, a, b); }
    int blackbox(const std::string& op, std::vector<Edge> inputs, bool exact = false);
    void set_output(Edge e) { dag_.output = e; }
    Dag take() { return std::move(dag_); }
    const Dag& peek() const { return dag_; }

private:
    int binary(NodeKind kind, Edge a, Edge b);
    Dag dag_;
    std::map<int, int> source_ids_;
    int next_id_ = 1;
    int next_delta_ = 1;
};

// Exact conversion of a binary64 value (doubles are rationals).
Rational rational_from_double(double v);

}  // namespace accpoly
