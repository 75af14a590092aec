#pragma once

#include "accpoly/dag.hpp"
#include "accpoly/dominance.hpp"
#include "accpoly/polynomial.hpp"

#include <string>

namespace accpoly {

// Line-based DAG text:
//   dag <name> nvars=<n>
//   node <id> source x<i>
//   node <id> add|sub|mul <ref> <ref>
//   node <id> bbox <opname> <ref>...
//   out <ref>
// A <ref> is a node id, prefixed with '-' for an exact negation edge. Rounding-error
// indices are implicit (each non-source node takes the next index in file order); a
// trailing delta=<k> token overrides that for DAGs with reindexed or exact nodes.
// Blank lines and lines starting with '#' are ignored.
std::string dag_to_text(const Dag& d);
Dag parse_dag(const std::string& text);

// Branch-program text: a `program <name> nvars=<n>` header followed by one block,
// where a block is either a DAG (terminated by its `out` line) or
//   if <poly> <cmp> <poly> then
//     <block>
//   else
//     <block>
//   end
// with <cmp> one of <, <=, ==.
std::string program_to_text(const BranchProgram& bp);
BranchProgram parse_program(const std::string& text);

// Black-box op files, one op per line:
//   op <name> arity=<k> [exact] poly=<polynomial in x1..xk>
std::string ops_to_text(const BlackBoxRegistry& reg);
BlackBoxRegistry parse_ops(const std::string& text);

// Component text, e.g. "zero: x1,x2; chain: x3=-x4=x5". Signs ride on the chain
// elements; omitted groups are empty.
std::string component_to_string(const ComponentSpec& spec);
ComponentSpec parse_component(const std::string& text, int nvars);

// Exact numeric literals: integers, a/b fractions, and decimal/scientific forms
// (1.5, 1e-8) read as exact powers of ten.
Rational parse_rational(const std::string& text);

// Comma-separated coordinates, e.g. "1,1,-2".
Point parse_point(const std::string& text);
std::string point_to_string(const Point& x);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace accpoly
