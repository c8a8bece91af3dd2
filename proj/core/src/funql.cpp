#include "semparse/funql.hpp"

#include <array>
#include <cctype>
#include <sstream>

namespace semparse {

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t position, std::vector<std::string> expected,
                         const std::string& found)
    : Error("syntax error at byte " + std::to_string(position) + ": expected " +
            join(expected, " or ") + ", found " + found),
      position_(position),
      expected_(std::move(expected)) {}

ArityError::ArityError(const std::string& op, int expected, int found)
    : Error("operator " + op + " takes " + std::to_string(expected) +
            " argument(s), found " + std::to_string(found)) {}

TypeError::TypeError(std::string path, std::string expected, std::string found)
    : Error("type error at " + (path.empty() ? std::string("root") : path) +
            ": expected " + expected + ", found " + found),
      path_(std::move(path)) {}

ParseError::ParseError(const std::string& file, std::size_t line,
                       const std::string& msg)
    : Error(file + ":" + std::to_string(line) + ": " + msg), line_(line) {}

IntegrityError::IntegrityError(const std::string& file, std::size_t line,
                               const std::string& msg)
    : Error(file + ":" + std::to_string(line) + ": " + msg), line_(line) {}

UnknownSymbolError::UnknownSymbolError(const std::string& symbol)
    : Error("unknown symbol: " + symbol) {}

const char* comparator_name(Comparator c) {
  switch (c) {
    case Comparator::Eq: return "eq";
    case Comparator::Neq: return "neq";
    case Comparator::Gt: return "gt";
    case Comparator::Lt: return "lt";
    case Comparator::Ge: return "ge";
    case Comparator::Le: return "le";
  }
  return "?";
}

Comparator comparator_from_name(const std::string& name) {
  if (name == "eq") return Comparator::Eq;
  if (name == "neq") return Comparator::Neq;
  if (name == "gt") return Comparator::Gt;
  if (name == "lt") return Comparator::Lt;
  if (name == "ge") return Comparator::Ge;
  if (name == "le") return Comparator::Le;
  throw Error("unknown comparator: " + name);
}

LfPtr make_entity(std::string id) {
  auto n = std::make_shared<LogicalForm>();
  n->kind = LogicalForm::Kind::Entity;
  n->symbol = std::move(id);
  return n;
}

LfPtr make_apply(std::string relation, LfPtr arg) {
  auto n = std::make_shared<LogicalForm>();
  n->kind = LogicalForm::Kind::Apply;
  n->symbol = std::move(relation);
  n->children = {std::move(arg)};
  return n;
}

LfPtr make_count(LfPtr arg) {
  auto n = std::make_shared<LogicalForm>();
  n->kind = LogicalForm::Kind::Count;
  n->children = {std::move(arg)};
  return n;
}

static LfPtr make_arg_extremum(LogicalForm::Kind kind, LfPtr arg,
                               std::string relation) {
  auto n = std::make_shared<LogicalForm>();
  n->kind = kind;
  n->symbol = std::move(relation);
  n->children = {std::move(arg)};
  return n;
}

LfPtr make_argmax(LfPtr arg, std::string relation) {
  return make_arg_extremum(LogicalForm::Kind::ArgMax, std::move(arg),
                           std::move(relation));
}

LfPtr make_argmin(LfPtr arg, std::string relation) {
  return make_arg_extremum(LogicalForm::Kind::ArgMin, std::move(arg),
                           std::move(relation));
}

LfPtr make_filter(Comparator cmp, LfPtr arg, std::string relation,
                  std::string value) {
  auto n = std::make_shared<LogicalForm>();
  n->kind = LogicalForm::Kind::Filter;
  n->symbol = std::move(relation);
  n->value = std::move(value);
  n->cmp = cmp;
  n->children = {std::move(arg)};
  return n;
}

static LfPtr make_pair(LogicalForm::Kind kind, LfPtr lhs, LfPtr rhs) {
  auto n = std::make_shared<LogicalForm>();
  n->kind = kind;
  n->children = {std::move(lhs), std::move(rhs)};
  return n;
}

LfPtr make_and(LfPtr lhs, LfPtr rhs) {
  return make_pair(LogicalForm::Kind::And, std::move(lhs), std::move(rhs));
}

LfPtr make_or(LfPtr lhs, LfPtr rhs) {
  return make_pair(LogicalForm::Kind::Or, std::move(lhs), std::move(rhs));
}

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
         c == '-';
}

// Untyped call tree; operator shapes are validated afterwards so that wrong
// argument counts surface as ArityError rather than a bare syntax error.
struct GenTerm {
  std::string name;
  std::size_t pos = 0;
  bool call = false;
  std::vector<GenTerm> args;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  std::size_t pos() const { return pos_; }

  std::string found_here() const {
    if (pos_ >= text_.size()) return "end of input";
    return std::string("'") + text_[pos_] + "'";
  }

  bool try_consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  GenTerm term() {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    if (pos_ == start)
      throw SyntaxError(start, {"identifier"}, found_here());
    GenTerm t;
    t.name = text_.substr(start, pos_ - start);
    t.pos = start;
    if (try_consume('(')) {
      t.call = true;
      t.args.push_back(term());
      while (try_consume(',')) t.args.push_back(term());
      if (!try_consume(')'))
        throw SyntaxError(pos_, {"','", "')'"}, found_here());
    }
    return t;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
};

// A slot that must hold a bare identifier (relation name or literal value).
const std::string& bare(const GenTerm& t, const char* what) {
  if (t.call) throw SyntaxError(t.pos, {what}, "'" + t.name + "(...)'");
  return t.name;
}

LfPtr lower(const GenTerm& t) {
  // Operator names are reserved in head position only; a bare occurrence is
  // an ordinary entity identifier.
  if (!t.call) return make_entity(t.name);
  const int n = static_cast<int>(t.args.size());
  auto need = [&](int k) {
    if (n != k) throw ArityError(t.name, k, n);
  };
  if (t.name == "count") {
    need(1);
    return make_count(lower(t.args[0]));
  }
  if (t.name == "argmax" || t.name == "argmin") {
    need(2);
    LfPtr arg = lower(t.args[0]);
    const std::string& rel = bare(t.args[1], "relation");
    return t.name == "argmax" ? make_argmax(std::move(arg), rel)
                              : make_argmin(std::move(arg), rel);
  }
  if (t.name == "and" || t.name == "or") {
    need(2);
    LfPtr lhs = lower(t.args[0]);
    LfPtr rhs = lower(t.args[1]);
    return t.name == "and" ? make_and(std::move(lhs), std::move(rhs))
                           : make_or(std::move(lhs), std::move(rhs));
  }
  if (t.name.rfind("filter_", 0) == 0) {
    Comparator cmp;
    try {
      cmp = comparator_from_name(t.name.substr(7));
    } catch (const Error&) {
      throw SyntaxError(t.pos, {"comparator in {eq,neq,gt,lt,ge,le}"},
                        "'" + t.name + "'");
    }
    need(3);
    LfPtr arg = lower(t.args[0]);
    const std::string& rel = bare(t.args[1], "relation");
    const std::string& value = bare(t.args[2], "value");
    return make_filter(cmp, std::move(arg), rel, value);
  }
  // Any other head is a unary relation application.
  need(1);
  return make_apply(t.name, lower(t.args[0]));
}

}  // namespace

LfPtr parse_funql(const std::string& text) {
  Lexer lex(text);
  GenTerm t = lex.term();
  if (!lex.at_end())
    throw SyntaxError(lex.pos(), {"end of input"}, lex.found_here());
  return lower(t);
}

std::string print_funql(const LfPtr& lf) {
  using K = LogicalForm::Kind;
  switch (lf->kind) {
    case K::Entity:
      return lf->symbol;
    case K::Apply:
      return lf->symbol + "(" + print_funql(lf->children[0]) + ")";
    case K::Count:
      return "count(" + print_funql(lf->children[0]) + ")";
    case K::ArgMax:
      return "argmax(" + print_funql(lf->children[0]) + "," + lf->symbol + ")";
    case K::ArgMin:
      return "argmin(" + print_funql(lf->children[0]) + "," + lf->symbol + ")";
    case K::Filter:
      return std::string("filter_") + comparator_name(lf->cmp) + "(" +
             print_funql(lf->children[0]) + "," + lf->symbol + "," +
             lf->value + ")";
    case K::And:
      return "and(" + print_funql(lf->children[0]) + "," +
             print_funql(lf->children[1]) + ")";
    case K::Or:
      return "or(" + print_funql(lf->children[0]) + "," +
             print_funql(lf->children[1]) + ")";
  }
  throw Error("corrupt logical form");
}

bool equal(const LfPtr& a, const LfPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind || a->symbol != b->symbol || a->value != b->value ||
      a->cmp != b->cmp || a->children.size() != b->children.size())
    return false;
  for (std::size_t i = 0; i < a->children.size(); ++i)
    if (!equal(a->children[i], b->children[i])) return false;
  return true;
}

namespace {

bool numeric_literal(const std::string& s) {
  std::size_t i = 0;
  if (i < s.size() && s[i] == '-') ++i;
  std::size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++digits;
  }
  if (digits == 0) return false;
  if (i == s.size()) return true;
  if (s[i] != '.') return false;
  ++i;
  digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++digits;
  }
  return digits > 0 && i == s.size();
}

void check_node(const LfPtr& lf, const std::string& path, bool is_root) {
  if (lf->kind == LogicalForm::Kind::Count && !is_root)
    throw TypeError(path, "unary", "number");
  if (lf->kind == LogicalForm::Kind::Filter && !numeric_literal(lf->value))
    throw TypeError(path, "numeric value", "'" + lf->value + "'");
  for (std::size_t i = 0; i < lf->children.size(); ++i) {
    std::string child_path =
        path.empty() ? std::to_string(i) : path + "." + std::to_string(i);
    check_node(lf->children[i], child_path, false);
  }
}

}  // namespace

void type_check(const LfPtr& lf) { check_node(lf, "", true); }

const char* symbol_tag_name(SymbolTag tag) {
  switch (tag) {
    case SymbolTag::Count: return "count";
    case SymbolTag::ArgMax: return "argmax";
    case SymbolTag::ArgMin: return "argmin";
    case SymbolTag::FilterEq: return "filter_eq";
    case SymbolTag::FilterNeq: return "filter_neq";
    case SymbolTag::FilterGt: return "filter_gt";
    case SymbolTag::FilterLt: return "filter_lt";
    case SymbolTag::FilterGe: return "filter_ge";
    case SymbolTag::FilterLe: return "filter_le";
    case SymbolTag::And: return "and";
    case SymbolTag::Or: return "or";
    case SymbolTag::Relation: return "relation";
    case SymbolTag::Entity: return "entity";
  }
  return "?";
}

SymbolTag symbol_tag_from_name(const std::string& name) {
  static const std::array<SymbolTag, 13> all = {
      SymbolTag::Count,    SymbolTag::ArgMax,   SymbolTag::ArgMin,
      SymbolTag::FilterEq, SymbolTag::FilterNeq, SymbolTag::FilterGt,
      SymbolTag::FilterLt, SymbolTag::FilterGe, SymbolTag::FilterLe,
      SymbolTag::And,      SymbolTag::Or,       SymbolTag::Relation,
      SymbolTag::Entity};
  for (SymbolTag t : all)
    if (name == symbol_tag_name(t)) return t;
  throw Error("unknown symbol tag: " + name);
}

int arity(SymbolTag tag) {
  switch (tag) {
    case SymbolTag::Count: return 1;
    case SymbolTag::ArgMax: return 2;
    case SymbolTag::ArgMin: return 2;
    case SymbolTag::FilterEq:
    case SymbolTag::FilterNeq:
    case SymbolTag::FilterGt:
    case SymbolTag::FilterLt:
    case SymbolTag::FilterGe:
    case SymbolTag::FilterLe:
      return 3;
    case SymbolTag::And: return 2;
    case SymbolTag::Or: return 2;
    case SymbolTag::Relation: return 1;
    case SymbolTag::Entity: return 0;
  }
  return 0;
}

}  // namespace semparse
