#include "accpoly/io.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace accpoly {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> tokens_of(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// Meaningful lines of a text: trimmed, with blanks and '#' comments dropped.
std::vector<std::string> content_lines(const std::string& text) {
    std::vector<std::string> out;
    for (const auto& raw : split(text, '\n')) {
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        out.push_back(line);
    }
    return out;
}

long parse_long(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used != s.size()) throw Error("");
        return v;
    } catch (...) {
        throw Error("expected an integer for " + what + ", got '" + s + "'");
    }
}

// "key=<int>" with a fixed key.
long keyed_int(const std::string& tok, const std::string& key) {
    std::string prefix = key + "=";
    if (tok.rfind(prefix, 0) != 0) throw Error("expected " + prefix + "<int>, got '" + tok + "'");
    return parse_long(tok.substr(prefix.size()), key);
}

// "x<i>" with 1-based i, returned 0-based.
int parse_var_token(const std::string& tok, int nvars) {
    if (tok.size() < 2 || tok[0] != 'x') throw Error("expected a variable like x1, got '" + tok + "'");
    long idx = parse_long(tok.substr(1), "variable index");
    if (idx < 1 || idx > nvars) throw Error("variable index out of range: " + tok);
    return static_cast<int>(idx) - 1;
}

Edge parse_ref(const std::string& tok) {
    if (tok.empty()) throw Error("empty node reference");
    if (tok[0] == '-') return neg(static_cast<int>(parse_long(tok.substr(1), "node reference")));
    return ref(static_cast<int>(parse_long(tok, "node reference")));
}

std::string ref_to_string(const Edge& e) {
    return (e.negated ? "-" : "") + std::to_string(e.node);
}

std::string cmp_to_string(Cmp c) {
    switch (c) {
        case Cmp::Less: return "<";
        case Cmp::LessEq: return "<=";
        case Cmp::Eq: return "==";
    }
    throw Error("unknown comparison");
}

// Serializes one DAG; the caller supplies the indentation for program nesting.
void append_dag(std::ostringstream& out, const Dag& d, const std::string& indent) {
    out << indent << "dag " << (d.name.empty() ? "dag" : d.name) << " nvars=" << d.nvars << "\n";
    int next_delta = 1;
    for (const auto& nd : d.nodes) {
        out << indent << "node " << nd.id << " ";
        switch (nd.kind) {
            case NodeKind::source:
                out << "source x" << (nd.var + 1);
                break;
            case NodeKind::add:
            case NodeKind::sub:
            case NodeKind::mul:
                out << (nd.kind == NodeKind::add ? "add" : nd.kind == NodeKind::sub ? "sub" : "mul");
                for (const auto& e : nd.inputs) out << " " << ref_to_string(e);
                break;
            case NodeKind::blackbox:
                out << "bbox " << nd.op;
                for (const auto& e : nd.inputs) out << " " << ref_to_string(e);
                break;
        }
        if (nd.kind != NodeKind::source) {
            int expected = next_delta++;
            if (nd.delta != expected) out << " delta=" << nd.delta;
        }
        out << "\n";
    }
    out << indent << "out " << ref_to_string(d.output) << "\n";
}

// Parses one DAG from lines[pos...], leaving pos just past the `out` line.
Dag parse_dag_block(const std::vector<std::string>& lines, std::size_t& pos) {
    if (pos >= lines.size()) throw Error("expected a dag block");
    auto header = tokens_of(lines[pos]);
    if (header.size() != 3 || header[0] != "dag")
        throw Error("expected 'dag <name> nvars=<n>', got '" + lines[pos] + "'");
    Dag d;
    d.name = header[1];
    d.nvars = static_cast<int>(keyed_int(header[2], "nvars"));
    if (d.nvars < 1) throw Error("dag needs at least one variable");
    ++pos;
    int next_delta = 1;
    bool have_out = false;
    while (pos < lines.size()) {
        auto toks = tokens_of(lines[pos]);
        if (toks[0] == "out") {
            if (toks.size() != 2) throw Error("expected 'out <ref>'");
            d.output = parse_ref(toks[1]);
            ++pos;
            have_out = true;
            break;
        }
        if (toks[0] != "node") throw Error("expected a node or out line, got '" + lines[pos] + "'");
        if (toks.size() < 3) throw Error("truncated node line: '" + lines[pos] + "'");
        Node nd;
        nd.id = static_cast<int>(parse_long(toks[1], "node id"));
        std::size_t end = toks.size();
        std::optional<int> forced_delta;
        if (toks.back().rfind("delta=", 0) == 0) {
            forced_delta = static_cast<int>(keyed_int(toks.back(), "delta"));
            --end;
        }
        const std::string& kind = toks[2];
        if (kind == "source") {
            if (end != 4) throw Error("expected 'node <id> source x<i>'");
            nd.kind = NodeKind::source;
            nd.var = parse_var_token(toks[3], d.nvars);
            if (forced_delta) throw Error("source nodes carry no rounding error");
        } else if (kind == "add" || kind == "sub" || kind == "mul") {
            if (end != 5) throw Error("expected two references on '" + lines[pos] + "'");
            nd.kind = kind == "add" ? NodeKind::add : kind == "sub" ? NodeKind::sub : NodeKind::mul;
            nd.inputs = {parse_ref(toks[3]), parse_ref(toks[4])};
            nd.delta = forced_delta ? *forced_delta : next_delta;
            ++next_delta;
        } else if (kind == "bbox") {
            if (end < 4) throw Error("expected 'node <id> bbox <op> <ref>...'");
            nd.kind = NodeKind::blackbox;
            nd.op = toks[3];
            for (std::size_t q = 4; q < end; ++q) nd.inputs.push_back(parse_ref(toks[q]));
            nd.delta = forced_delta ? *forced_delta : next_delta;
            ++next_delta;
        } else {
            throw Error("unknown node kind '" + kind + "'");
        }
        d.nodes.push_back(std::move(nd));
        ++pos;
    }
    if (!have_out) throw Error("dag block is missing its out line");
    return d;
}

std::shared_ptr<const BranchNode> parse_block(const std::vector<std::string>& lines,
                                              std::size_t& pos, int nvars);

std::shared_ptr<const BranchNode> parse_if_block(const std::vector<std::string>& lines,
                                                 std::size_t& pos, int nvars) {
    const std::string& line = lines[pos];
    if (line.size() < 8 || line.rfind("if ", 0) != 0 ||
        line.substr(line.size() - 5) != " then")
        throw Error("expected 'if <poly> <cmp> <poly> then', got '" + line + "'");
    std::string body = line.substr(3, line.size() - 8);
    Cmp cmp;
    std::size_t at;
    std::size_t skip;
    if ((at = body.find(" <= ")) != std::string::npos) {
        cmp = Cmp::LessEq;
        skip = 4;
    } else if ((at = body.find(" == ")) != std::string::npos) {
        cmp = Cmp::Eq;
        skip = 4;
    } else if ((at = body.find(" < ")) != std::string::npos) {
        cmp = Cmp::Less;
        skip = 3;
    } else {
        throw Error("guard needs a comparison: '" + line + "'");
    }
    Guard g;
    g.lhs = parse_polynomial(body.substr(0, at), nvars);
    g.cmp = cmp;
    g.rhs = parse_polynomial(body.substr(at + skip), nvars);
    ++pos;
    auto then_branch = parse_block(lines, pos, nvars);
    if (pos >= lines.size() || lines[pos] != "else") throw Error("expected 'else'");
    ++pos;
    auto else_branch = parse_block(lines, pos, nvars);
    if (pos >= lines.size() || lines[pos] != "end") throw Error("expected 'end'");
    ++pos;
    return branch_if(std::move(g), std::move(then_branch), std::move(else_branch));
}

std::shared_ptr<const BranchNode> parse_block(const std::vector<std::string>& lines,
                                              std::size_t& pos, int nvars) {
    if (pos >= lines.size()) throw Error("unexpected end of program text");
    if (lines[pos].rfind("if ", 0) == 0) return parse_if_block(lines, pos, nvars);
    Dag leaf = parse_dag_block(lines, pos);
    if (leaf.nvars != nvars) throw Error("leaf variable count disagrees with the program");
    return branch_leaf(std::move(leaf));
}

void append_block(std::ostringstream& out, const BranchNode& node, int depth) {
    std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    if (node.leaf) {
        append_dag(out, *node.leaf, indent);
        return;
    }
    if (!node.guard || !node.then_branch || !node.else_branch)
        throw Error("malformed branch node");
    out << indent << "if " << node.guard->lhs.to_string() << " "
        << cmp_to_string(node.guard->cmp) << " " << node.guard->rhs.to_string() << " then\n";
    append_block(out, *node.then_branch, depth + 1);
    out << indent << "else\n";
    append_block(out, *node.else_branch, depth + 1);
    out << indent << "end\n";
}

}  // namespace

std::string dag_to_text(const Dag& d) {
    std::ostringstream out;
    append_dag(out, d, "");
    return out.str();
}

Dag parse_dag(const std::string& text) {
    auto lines = content_lines(text);
    std::size_t pos = 0;
    Dag d = parse_dag_block(lines, pos);
    if (pos != lines.size()) throw Error("unexpected trailing content after the dag");
    return d;
}

std::string program_to_text(const BranchProgram& bp) {
    if (!bp.root) throw Error("program has no root");
    std::ostringstream out;
    out << "program " << (bp.name.empty() ? "program" : bp.name) << " nvars=" << bp.nvars << "\n";
    append_block(out, *bp.root, 0);
    return out.str();
}

BranchProgram parse_program(const std::string& text) {
    auto lines = content_lines(text);
    if (lines.empty()) throw Error("empty program text");
    auto header = tokens_of(lines[0]);
    if (header.size() != 3 || header[0] != "program")
        throw Error("expected 'program <name> nvars=<n>'");
    BranchProgram bp;
    bp.name = header[1];
    bp.nvars = static_cast<int>(keyed_int(header[2], "nvars"));
    std::size_t pos = 1;
    bp.root = parse_block(lines, pos, bp.nvars);
    if (pos != lines.size()) throw Error("unexpected trailing content after the program");
    return bp;
}

std::string ops_to_text(const BlackBoxRegistry& reg) {
    std::ostringstream out;
    for (const auto& [name, op] : reg.all()) {
        out << "op " << name << " arity=" << op.arity;
        if (op.exact) out << " exact";
        out << " poly=" << op.poly.to_string() << "\n";
    }
    return out.str();
}

BlackBoxRegistry parse_ops(const std::string& text) {
    BlackBoxRegistry reg;
    for (const auto& line : content_lines(text)) {
        std::size_t at = line.find(" poly=");
        if (at == std::string::npos) throw Error("op line is missing poly=: '" + line + "'");
        auto toks = tokens_of(line.substr(0, at));
        if (toks.size() < 3 || toks[0] != "op")
            throw Error("expected 'op <name> arity=<k> [exact] poly=...', got '" + line + "'");
        BlackBoxOp op;
        op.name = toks[1];
        op.arity = static_cast<int>(keyed_int(toks[2], "arity"));
        if (toks.size() == 4 && toks[3] == "exact")
            op.exact = true;
        else if (toks.size() != 3)
            throw Error("unexpected token on op line: '" + line + "'");
        op.poly = parse_polynomial(line.substr(at + 6), op.arity);
        reg.add(std::move(op));
    }
    return reg;
}

std::string component_to_string(const ComponentSpec& spec) {
    std::vector<std::string> parts;
    if (!spec.zeros.empty()) {
        std::string s = "zero: ";
        for (std::size_t i = 0; i < spec.zeros.size(); ++i) {
            if (i) s += ",";
            s += "x" + std::to_string(spec.zeros[i] + 1);
        }
        parts.push_back(std::move(s));
    }
    for (const auto& ch : spec.chains) {
        std::string s = "chain: ";
        for (std::size_t i = 0; i < ch.vars.size(); ++i) {
            if (i) s += "=";
            if (ch.signs[i] < 0) s += "-";
            s += "x" + std::to_string(ch.vars[i] + 1);
        }
        parts.push_back(std::move(s));
    }
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += "; ";
        out += parts[i];
    }
    return out;
}

ComponentSpec parse_component(const std::string& text, int nvars) {
    ComponentSpec spec;
    spec.nvars = nvars;
    for (const auto& raw : split(text, ';')) {
        std::string seg = trim(raw);
        if (seg.empty()) continue;
        std::size_t colon = seg.find(':');
        if (colon == std::string::npos)
            throw Error("component group needs 'zero:' or 'chain:', got '" + seg + "'");
        std::string key = trim(seg.substr(0, colon));
        std::string value = trim(seg.substr(colon + 1));
        if (key == "zero") {
            if (value.empty()) continue;
            for (const auto& item : split(value, ','))
                spec.zeros.push_back(parse_var_token(trim(item), nvars));
        } else if (key == "chain") {
            Chain ch;
            for (const auto& item : split(value, '=')) {
                std::string tok = trim(item);
                int sign = 1;
                if (!tok.empty() && tok[0] == '-') {
                    sign = -1;
                    tok = trim(tok.substr(1));
                }
                ch.vars.push_back(parse_var_token(tok, nvars));
                ch.signs.push_back(sign);
            }
            spec.chains.push_back(std::move(ch));
        } else {
            throw Error("unknown component group '" + key + "'");
        }
    }
    validate_component(spec);
    return spec;
}

Rational parse_rational(const std::string& text) {
    std::string s = trim(text);
    if (s.empty()) throw Error("empty numeric literal");
    std::size_t pos = 0;
    bool negv = false;
    if (s[pos] == '+' || s[pos] == '-') {
        negv = s[pos] == '-';
        ++pos;
    }
    auto digits = [&]() {
        std::string d;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) d += s[pos++];
        return d;
    };
    std::string ipart = digits();
    std::string fpart;
    mpz_class den(1);
    if (pos < s.size() && s[pos] == '/') {
        ++pos;
        std::string dpart = digits();
        if (ipart.empty() || dpart.empty() || pos != s.size())
            throw Error("malformed fraction '" + text + "'");
        mpz_class d(dpart);
        if (d == 0) throw Error("zero denominator in '" + text + "'");
        Rational q = Rational(mpz_class(ipart)) / Rational(d);
        return negv ? Rational(-q) : q;
    }
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        fpart = digits();
    }
    if (ipart.empty() && fpart.empty()) throw Error("malformed number '" + text + "'");
    long exp10 = 0;
    if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        ++pos;
        bool eneg = false;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
            eneg = s[pos] == '-';
            ++pos;
        }
        std::string epart = digits();
        if (epart.empty()) throw Error("malformed exponent in '" + text + "'");
        exp10 = parse_long(epart, "exponent");
        if (eneg) exp10 = -exp10;
    }
    if (pos != s.size()) throw Error("trailing characters in number '" + text + "'");
    mpz_class num(ipart.empty() ? "0" : ipart);
    for (char c : fpart) {
        num = num * 10 + (c - '0');
        den *= 10;
    }
    mpz_class scale(1);
    for (long i = 0; i < (exp10 < 0 ? -exp10 : exp10); ++i) scale *= 10;
    Rational q = exp10 < 0 ? Rational(num) / Rational(den * scale)
                           : Rational(num * scale) / Rational(den);
    return negv ? Rational(-q) : q;
}

Point parse_point(const std::string& text) {
    Point x;
    for (const auto& item : split(text, ',')) x.push_back(parse_rational(item));
    return x;
}

std::string point_to_string(const Point& x) {
    std::string out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) out += ",";
        out += x[i].get_str();
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out) throw Error("write failed for " + path);
}

}  // namespace accpoly
