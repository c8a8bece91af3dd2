#pragma once

#include <set>
#include <string>
#include <vector>

#include "semparse/funql.hpp"
#include "semparse/kb.hpp"

namespace semparse {

// Result of evaluating a logical form. Empty is the failure marker produced
// when a numeric comparison (argmax/argmin/filter) finds no element with a
// numeric relation value; it is absorbing under every operator and is
// distinct from an empty value set.
struct Denotation {
  enum class Kind { ValueSet, Empty };

  Kind kind = Kind::ValueSet;
  std::set<Value> values;

  static Denotation empty_marker() {
    Denotation d;
    d.kind = Kind::Empty;
    return d;
  }
  static Denotation of(std::set<Value> vs) {
    Denotation d;
    d.values = std::move(vs);
    return d;
  }

  bool failed() const { return kind == Kind::Empty; }
  bool operator==(const Denotation& o) const {
    return kind == o.kind && values == o.values;
  }
};

// Set semantics:
//   entity e            -> {e}
//   r(u)                -> {o : exists e in [[u]], (e, r, o) in kb}
//   count(u)            -> {|[[u]]|}
//   argmax/argmin(u, r) -> elements of [[u]] whose best numeric r-value is
//                          extremal; ties keep all extremizers; per-entity
//                          best is max (argmax) resp. min (argmin)
//   filter_cmp(u, r, v) -> entities of [[u]] with some numeric r-value
//                          satisfying the comparison against v
//   and / or            -> intersection / union
// Elements without a numeric r-value are skipped by comparisons; if nothing
// is left to compare the result is Denotation::Empty. Unknown entity or
// relation ids raise UnknownSymbolError.
Denotation execute(const LfPtr& lf, const KnowledgeBase& kb);

// Canonical rendering of a non-failed denotation, sorted.
std::vector<std::string> denotation_strings(const Denotation& d);

}  // namespace semparse
