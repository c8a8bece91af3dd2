#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semparse/errors.hpp"

namespace semparse {

// Variable-free logical forms:
//   lf := entity
//       | relation "(" lf ")"
//       | "count(" lf ")"
//       | "argmax(" lf "," relation ")" | "argmin(" lf "," relation ")"
//       | "filter_" cmp "(" lf "," relation "," value ")"
//       | "and(" lf "," lf ")" | "or(" lf "," lf ")"
//   cmp := eq | neq | gt | lt | ge | le

enum class Comparator { Eq, Neq, Gt, Lt, Ge, Le };

const char* comparator_name(Comparator c);          // "eq", "neq", ...
Comparator comparator_from_name(const std::string& name);

struct LogicalForm;
using LfPtr = std::shared_ptr<const LogicalForm>;

struct LogicalForm {
  enum class Kind { Entity, Apply, Count, ArgMax, ArgMin, Filter, And, Or };

  Kind kind;
  std::string symbol;   // Entity: entity id; Apply/ArgMax/ArgMin/Filter: relation
  std::string value;    // Filter only: numeric literal, verbatim spelling
  Comparator cmp = Comparator::Eq;  // Filter only
  std::vector<LfPtr> children;
};

LfPtr make_entity(std::string id);
LfPtr make_apply(std::string relation, LfPtr arg);
LfPtr make_count(LfPtr arg);
LfPtr make_argmax(LfPtr arg, std::string relation);
LfPtr make_argmin(LfPtr arg, std::string relation);
LfPtr make_filter(Comparator cmp, LfPtr arg, std::string relation,
                  std::string value);
LfPtr make_and(LfPtr lhs, LfPtr rhs);
LfPtr make_or(LfPtr lhs, LfPtr rhs);

// Recursive-descent parser. Identifiers are [A-Za-z0-9_.-]+ (operator names
// are reserved only in head position). Whitespace is allowed around
// punctuation. Throws SyntaxError / ArityError.
LfPtr parse_funql(const std::string& text);

// Canonical printer: no spaces, one pair of parens per operator, arguments
// joined by ",". parse_funql(print_funql(lf)) reproduces lf exactly.
std::string print_funql(const LfPtr& lf);

bool equal(const LfPtr& a, const LfPtr& b);

// Well-formedness beyond the grammar: count produces a non-unary result and
// is therefore legal only at the root; every operator argument slot other
// than the root must be unary-typed. Reports the first violation in
// pre-order as TypeError(path, expected, found).
void type_check(const LfPtr& lf);

// Operator/terminal inventory shared with the transition systems.
// Tags are the grammar's head symbols plus the two terminal categories.
enum class SymbolTag {
  Count,
  ArgMax,
  ArgMin,
  FilterEq,
  FilterNeq,
  FilterGt,
  FilterLt,
  FilterGe,
  FilterLe,
  And,
  Or,
  Relation,
  Entity,
};

const char* symbol_tag_name(SymbolTag tag);  // "count", ..., "relation", "entity"
SymbolTag symbol_tag_from_name(const std::string& name);

// Number of argument slots consumed by each construct. Relation means a
// unary relation used as lf head (one lf argument); Entity means a leaf.
int arity(SymbolTag tag);

}  // namespace semparse
