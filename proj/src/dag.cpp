#include "accpoly/dag.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace accpoly {

void BlackBoxRegistry::add(BlackBoxOp op) {
    if (op.name.empty()) throw Error("black-box operation needs a name");
    if (op.poly.nvars() != op.arity) throw Error("black-box polynomial arity mismatch: " + op.name);
    ops_[op.name] = std::move(op);
}

const BlackBoxOp* BlackBoxRegistry::find(const std::string& name) const {
    auto it = ops_.find(name);
    return it == ops_.end() ? nullptr : &it->second;
}

const BlackBoxOp& BlackBoxRegistry::get(const std::string& name) const {
    const BlackBoxOp* op = find(name);
    if (!op) throw Error("unknown black-box operation: " + name);
    return *op;
}

DeltaAssignment DeltaAssignment::zeros(const Dag& d, const Rational& eps) {
    DeltaAssignment a;
    a.eps = eps;
    for (const auto& n : d.nodes)
        if (n.delta > 0) a.values[n.delta] = Rational(0);
    return a;
}

const Rational& DeltaAssignment::get(int delta_index) const {
    auto it = values.find(delta_index);
    if (it == values.end())
        throw Error("missing delta entry for index " + std::to_string(delta_index));
    return it->second;
}

bool DeltaAssignment::within_bound() const {
    for (const auto& [i, v] : values)
        if (abs(v) > eps) return false;
    return true;
}

Diagnostics validate(const Dag& d, const BlackBoxRegistry& reg) {
    Diagnostics diag;
    auto problem = [&](const std::string& msg) { diag.problems.push_back(msg); };

    if (d.nvars < 0) problem("negative variable count");

    std::unordered_map<int, int> index_of;
    for (std::size_t i = 0; i < d.nodes.size(); ++i) {
        const Node& n = d.nodes[i];
        if (index_of.count(n.id)) problem("duplicate node id " + std::to_string(n.id));
        index_of[n.id] = static_cast<int>(i);
    }

    std::unordered_set<int> deltas_seen;
    for (const Node& n : d.nodes) {
        std::string where = "node " + std::to_string(n.id) + ": ";
        switch (n.kind) {
            case NodeKind::source:
                if (n.var < 0 || n.var >= d.nvars) problem(where + "source variable out of range");
                if (!n.inputs.empty()) problem(where + "source with inputs");
                if (n.delta > 0) problem(where + "source carries a rounding error");
                break;
            case NodeKind::add:
            case NodeKind::sub:
            case NodeKind::mul:
                if (n.inputs.size() != 2) problem(where + "binary operation needs exactly 2 inputs");
                if (n.delta <= 0) problem(where + "computational node without a delta index");
                break;
            case NodeKind::blackbox: {
                const BlackBoxOp* op = reg.find(n.op);
                if (!op) {
                    problem(where + "unknown black-box operation '" + n.op + "'");
                } else {
                    if (static_cast<int>(n.inputs.size()) != op->arity)
                        problem(where + "black box '" + n.op + "' expects " +
                                std::to_string(op->arity) + " inputs, got " +
                                std::to_string(n.inputs.size()));
                    if (op->exact && n.delta > 0)
                        problem(where + "exact black box carries a rounding error");
                    if (!op->exact && n.delta <= 0)
                        problem(where + "rounded black box without a delta index");
                }
                break;
            }
        }
        if (n.delta > 0 && !deltas_seen.insert(n.delta).second)
            problem(where + "delta index " + std::to_string(n.delta) + " reused");
        for (const Edge& in : n.inputs)
            if (!index_of.count(in.node)) problem(where + "input references unknown node " +
                                                  std::to_string(in.node));
    }

    if (!index_of.count(d.output.node)) problem("output references unknown node");

    // Kahn's algorithm both detects cycles and yields the evaluation order.
    if (diag.problems.empty()) {
        std::vector<int> indeg(d.nodes.size(), 0);
        std::vector<std::vector<int>> consumers(d.nodes.size());
        for (std::size_t i = 0; i < d.nodes.size(); ++i)
            for (const Edge& in : d.nodes[i].inputs) {
                int j = index_of[in.node];
                consumers[static_cast<std::size_t>(j)].push_back(static_cast<int>(i));
                ++indeg[i];
            }
        std::vector<int> queue;
        for (std::size_t i = 0; i < d.nodes.size(); ++i)
            if (indeg[i] == 0) queue.push_back(static_cast<int>(i));
        for (std::size_t head = 0; head < queue.size(); ++head) {
            int i = queue[head];
            diag.topo_order.push_back(i);
            for (int j : consumers[static_cast<std::size_t>(i)])
                if (--indeg[static_cast<std::size_t>(j)] == 0) queue.push_back(j);
        }
        if (diag.topo_order.size() != d.nodes.size()) {
            diag.topo_order.clear();
            problem("cycle detected");
        }
    }
    return diag;
}

std::vector<int> require_valid(const Dag& d, const BlackBoxRegistry& reg) {
    Diagnostics diag = validate(d, reg);
    if (!diag.ok()) {
        std::ostringstream msg;
        msg << "invalid DAG '" << d.name << "':";
        for (const auto& p : diag.problems) msg << "\n  " << p;
        throw Error(msg.str());
    }
    return diag.topo_order;
}

namespace {

// Shared bottom-up evaluation skeleton over an arbitrary value semiring.
// Ops: make_source(var), combine(node, input_values), apply_negation via negate().
template <typename V, typename SourceFn, typename NegFn, typename AddFn, typename SubFn,
          typename MulFn, typename BoxFn>
V evaluate_dag(const Dag& d, const BlackBoxRegistry& reg, SourceFn make_source, NegFn negate,
               AddFn add, SubFn sub, MulFn mul, BoxFn box) {
    std::vector<int> order = require_valid(d, reg);
    std::unordered_map<int, V> value;
    value.reserve(d.nodes.size());
    auto input_value = [&](const Edge& e) {
        V v = value.at(e.node);
        return e.negated ? negate(std::move(v)) : v;
    };
    for (int idx : order) {
        const Node& n = d.nodes[static_cast<std::size_t>(idx)];
        switch (n.kind) {
            case NodeKind::source:
                value[n.id] = make_source(n.var);
                break;
            case NodeKind::add:
                value[n.id] = add(n, input_value(n.inputs[0]), input_value(n.inputs[1]));
                break;
            case NodeKind::sub:
                value[n.id] = sub(n, input_value(n.inputs[0]), input_value(n.inputs[1]));
                break;
            case NodeKind::mul:
                value[n.id] = mul(n, input_value(n.inputs[0]), input_value(n.inputs[1]));
                break;
            case NodeKind::blackbox: {
                std::vector<V> args;
                args.reserve(n.inputs.size());
                for (const Edge& e : n.inputs) args.push_back(input_value(e));
                value[n.id] = box(n, reg.get(n.op), std::move(args));
                break;
            }
        }
    }
    V out = value.at(d.output.node);
    return d.output.negated ? negate(std::move(out)) : out;
}

}  // namespace

Rational eval_rounded(const Dag& d, const Point& x, const DeltaAssignment& delta,
                      const BlackBoxRegistry& reg) {
    if (x.size() != static_cast<std::size_t>(d.nvars)) throw Error("point dimension mismatch");
    auto rounded = [&](const Node& n, Rational v) {
        if (n.delta > 0) v *= Rational(1) + delta.get(n.delta);
        return v;
    };
    return evaluate_dag<Rational>(
        d, reg, [&](int var) { return x[static_cast<std::size_t>(var)]; },
        [](Rational v) { return -v; },
        [&](const Node& n, Rational a, Rational b) { return rounded(n, a + b); },
        [&](const Node& n, Rational a, Rational b) { return rounded(n, a - b); },
        [&](const Node& n, Rational a, Rational b) { return rounded(n, a * b); },
        [&](const Node& n, const BlackBoxOp& op, std::vector<Rational> args) {
            return rounded(n, op.poly.evaluate(args));
        });
}

Polynomial extract_polynomial(const Dag& d, const BlackBoxRegistry& reg) {
    return evaluate_dag<Polynomial>(
        d, reg, [&](int var) { return Polynomial::variable(d.nvars, var); },
        [](Polynomial v) { return -v; },
        [](const Node&, Polynomial a, const Polynomial& b) { return a + b; },
        [](const Node&, Polynomial a, const Polynomial& b) { return a - b; },
        [](const Node&, const Polynomial& a, const Polynomial& b) { return a * b; },
        [](const Node&, const BlackBoxOp& op, std::vector<Polynomial> args) {
            return substitute_linear(op.poly, args);
        });
}

SymbolicValue symbolic_rounded(const Dag& d, const BlackBoxRegistry& reg) {
    SymbolicValue result;
    result.nx = d.nvars;
    result.m = d.max_delta();
    int total = result.nx + result.m;
    auto one_plus_delta = [&](int delta_index) {
        Polynomial p = Polynomial::constant(total, 1);
        return p + Polynomial::variable(total, result.nx + delta_index - 1);
    };
    auto rounded = [&](const Node& n, Polynomial v) {
        if (n.delta > 0) v = v * one_plus_delta(n.delta);
        return v;
    };
    result.value = evaluate_dag<Polynomial>(
        d, reg, [&](int var) { return Polynomial::variable(total, var); },
        [](Polynomial v) { return -v; },
        [&](const Node& n, Polynomial a, const Polynomial& b) { return rounded(n, a + b); },
        [&](const Node& n, Polynomial a, const Polynomial& b) { return rounded(n, a - b); },
        [&](const Node& n, const Polynomial& a, const Polynomial& b) { return rounded(n, a * b); },
        [&](const Node& n, const BlackBoxOp& op, std::vector<Polynomial> args) {
            return rounded(n, substitute_linear(extend_vars(op.poly, static_cast<int>(args.size())), args));
        });
    return result;
}

namespace {

// Splits a monomial over [x, delta] into its delta part and its x part.
void split_monomial(const Monomial& m, int nx, std::vector<std::uint32_t>& alpha, Monomial& xpart) {
    alpha.assign(m.e.begin() + nx, m.e.end());
    xpart.e.assign(m.e.begin(), m.e.begin() + nx);
}

}  // namespace

ErrorExpansion error_expansion(const Dag& d, int order, const BlackBoxRegistry& reg) {
    if (order < 1) throw Error("error expansion order must be at least 1");
    SymbolicValue sv = symbolic_rounded(d, reg);
    ErrorExpansion ex;
    ex.order = order;
    ex.m = sv.m;
    std::vector<std::uint32_t> alpha;
    Monomial xpart;
    for (const auto& [m, c] : sv.value.terms()) {
        split_monomial(m, sv.nx, alpha, xpart);
        std::uint64_t total = 0;
        for (auto v : alpha) total += v;
        if (total > static_cast<std::uint64_t>(order)) continue;
        auto [it, inserted] = ex.coeffs.try_emplace(alpha, Polynomial(sv.nx));
        it->second.add_term(Monomial(xpart.e), c);
    }
    // The delta-free coefficient is present even for an identically zero value.
    ex.coeffs.try_emplace(std::vector<std::uint32_t>(static_cast<std::size_t>(sv.m), 0),
                          Polynomial(sv.nx));
    return ex;
}

std::vector<std::vector<std::uint32_t>> delta_support(const Dag& d, int m_pad,
                                                      const BlackBoxRegistry& reg) {
    SymbolicValue sv = symbolic_rounded(d, reg);
    std::vector<std::vector<std::uint32_t>> result;
    std::vector<std::uint32_t> alpha;
    Monomial xpart;
    for (const auto& [m, c] : sv.value.terms()) {
        split_monomial(m, sv.nx, alpha, xpart);
        alpha.resize(static_cast<std::size_t>(m_pad), 0);
        result.push_back(alpha);
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

namespace {

enum class HState { zero, homogeneous, mixed };

struct NodeDegree {
    HState state = HState::zero;
    std::uint64_t degree = 0;  // meaningful for homogeneous only
};

}  // namespace

HomogeneityCheck check_homogeneous_algorithm(const Dag& d) {
    std::vector<int> order = require_valid(d);
    std::unordered_map<int, const Node*> node_of;
    for (const auto& n : d.nodes) node_of[n.id] = &n;
    for (const auto& n : d.nodes)
        if (n.kind == NodeKind::blackbox)
            throw Error("homogeneity check handles classical operations only");

    // Per node, the output tracked as: exactly zero, homogeneous in x of known degree, or
    // mixed-degree. For a +/- of two distinct nodes no x-coefficient can cancel to zero
    // identically (the top rounding factor of one operand never occurs in the other), so
    // degree bookkeeping is exact without symbolic expansion. The only true cancellations
    // are a node combined with itself and two sources of the same variable.
    std::unordered_map<int, NodeDegree> deg;
    auto combine_signs = [](NodeKind kind, const Edge& a, const Edge& b) {
        int sa = a.negated ? -1 : 1;
        int sb = b.negated ? -1 : 1;
        if (kind == NodeKind::sub) sb = -sb;
        return std::pair<int, int>(sa, sb);
    };

    for (int idx : order) {
        const Node& n = d.nodes[static_cast<std::size_t>(idx)];
        NodeDegree nd;
        switch (n.kind) {
            case NodeKind::source:
                nd = {HState::homogeneous, 1};
                break;
            case NodeKind::mul: {
                const NodeDegree& a = deg.at(n.inputs[0].node);
                const NodeDegree& b = deg.at(n.inputs[1].node);
                if (a.state == HState::zero || b.state == HState::zero)
                    nd = {HState::zero, 0};
                else if (a.state == HState::mixed || b.state == HState::mixed)
                    nd = {HState::mixed, 0};
                else
                    nd = {HState::homogeneous, a.degree + b.degree};
                break;
            }
            case NodeKind::add:
            case NodeKind::sub: {
                const Edge& ea = n.inputs[0];
                const Edge& eb = n.inputs[1];
                const NodeDegree& a = deg.at(ea.node);
                const NodeDegree& b = deg.at(eb.node);
                auto [sa, sb] = combine_signs(n.kind, ea, eb);
                const Node* na = node_of.at(ea.node);
                const Node* nb = node_of.at(eb.node);
                bool same_value = (ea.node == eb.node) ||
                                  (na->kind == NodeKind::source && nb->kind == NodeKind::source &&
                                   na->var == nb->var);
                if (same_value) {
                    nd = (sa + sb == 0) ? NodeDegree{HState::zero, 0} : a;
                } else if (a.state == HState::zero) {
                    nd = b;
                } else if (b.state == HState::zero) {
                    nd = a;
                } else if (a.state == HState::mixed || b.state == HState::mixed) {
                    nd = {HState::mixed, 0};
                } else if (a.degree == b.degree) {
                    nd = {HState::homogeneous, a.degree};
                } else {
                    nd = {HState::mixed, 0};
                }
                break;
            }
            case NodeKind::blackbox:
                break;  // rejected above
        }
        deg[n.id] = nd;
    }

    HomogeneityCheck check;
    const NodeDegree& out = deg.at(d.output.node);
    if (out.state == HState::mixed) {
        check.reason = "output mixes x-degrees";
        return check;
    }
    if (out.state == HState::zero) {
        check.reason = "output is identically zero";
        return check;
    }
    for (const auto& n : d.nodes) {
        const NodeDegree& nd = deg.at(n.id);
        if (nd.state == HState::mixed) {
            check.reason = "node " + std::to_string(n.id) + " mixes x-degrees";
            return check;
        }
        if (nd.state == HState::homogeneous && nd.degree > out.degree) {
            check.reason = "node " + std::to_string(n.id) + " exceeds the output degree";
            return check;
        }
    }
    check.ok = true;
    check.degree = out.degree;
    return check;
}

bool guard_holds(const Guard& g, const Point& x) {
    Rational l = g.lhs.evaluate(x);
    Rational r = g.rhs.evaluate(x);
    switch (g.cmp) {
        case Cmp::Less: return l < r;
        case Cmp::LessEq: return l <= r;
        case Cmp::Eq: return l == r;
    }
    throw Error("unreachable comparator");
}

std::shared_ptr<const BranchNode> branch_leaf(Dag d) {
    auto node = std::make_shared<BranchNode>();
    node->leaf = std::move(d);
    return node;
}

std::shared_ptr<const BranchNode> branch_if(Guard g, std::shared_ptr<const BranchNode> then_branch,
                                            std::shared_ptr<const BranchNode> else_branch) {
    if (!then_branch || !else_branch) throw Error("branch with a missing arm");
    auto node = std::make_shared<BranchNode>();
    node->guard = std::move(g);
    node->then_branch = std::move(then_branch);
    node->else_branch = std::move(else_branch);
    return node;
}

const Dag& route(const BranchProgram& bp, const Point& x) {
    if (!bp.root) throw Error("empty branch program");
    const BranchNode* node = bp.root.get();
    while (!node->leaf) {
        if (!node->guard) throw Error("malformed branch node");
        node = guard_holds(*node->guard, x) ? node->then_branch.get() : node->else_branch.get();
        if (!node) throw Error("branch arm missing");
    }
    return *node->leaf;
}

void for_each_leaf(const BranchProgram& bp, const std::function<void(const Dag&)>& fn) {
    if (!bp.root) return;
    std::vector<const BranchNode*> stack{bp.root.get()};
    while (!stack.empty()) {
        const BranchNode* node = stack.back();
        stack.pop_back();
        if (node->leaf) {
            fn(*node->leaf);
            continue;
        }
        if (node->else_branch) stack.push_back(node->else_branch.get());
        if (node->then_branch) stack.push_back(node->then_branch.get());
    }
}

int DagBuilder::source(int var) {
    auto it = source_ids_.find(var);
    if (it != source_ids_.end()) return it->second;
    Node n;
    n.id = next_id_++;
    n.kind = NodeKind::source;
    n.var = var;
    dag_.nodes.push_back(n);
    source_ids_[var] = n.id;
    return n.id;
}

int DagBuilder::binary(NodeKind kind, Edge a, Edge b) {
    Node n;
    n.id = next_id_++;
    n.kind = kind;
    n.inputs = {a, b};
    n.delta = next_delta_++;
    dag_.nodes.push_back(n);
    return n.id;
}

int DagBuilder::blackbox(const std::string& op, std::vector<Edge> inputs, bool exact) {
    Node n;
    n.id = next_id_++;
    n.kind = NodeKind::blackbox;
    n.op = op;
    n.inputs = std::move(inputs);
    n.delta = exact ? -1 : next_delta_++;
    dag_.nodes.push_back(n);
    return n.id;
}

Rational rational_from_double(double v) {
    if (!std::isfinite(v)) throw Error("nonfinite value has no rational form");
    Rational r;
    mpq_set_d(r.get_mpq_t(), v);
    return r;
}

}  // namespace accpoly
