#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "semparse/errors.hpp"

namespace semparse {

// A KB value: either an entity reference or a 64-bit float.
struct Value {
  enum class Kind { Entity, Number };

  Kind kind = Kind::Entity;
  std::string id;   // Kind::Entity
  double num = 0.0; // Kind::Number

  static Value entity(std::string id_) {
    Value v;
    v.kind = Kind::Entity;
    v.id = std::move(id_);
    return v;
  }
  static Value number(double n) {
    Value v;
    v.kind = Kind::Number;
    v.num = n;
    return v;
  }

  bool operator==(const Value& o) const {
    return kind == o.kind && (kind == Kind::Entity ? id == o.id : num == o.num);
  }
  bool operator!=(const Value& o) const { return !(*this == o); }
  // Entities sort before numbers; gives deterministic denotation output.
  bool operator<(const Value& o) const {
    if (kind != o.kind) return kind == Kind::Entity;
    return kind == Kind::Entity ? id < o.id : num < o.num;
  }
};

// Shortest round-trippable decimal; integers print without a decimal point.
std::string format_number(double n);
std::string value_to_string(const Value& v);

// True for [-]digits[.digits].
bool is_number_literal(const std::string& s);

struct Triple {
  std::string subject;
  std::string relation;
  Value object;

  bool operator<(const Triple& o) const {
    if (subject != o.subject) return subject < o.subject;
    if (relation != o.relation) return relation < o.relation;
    return object < o.object;
  }
  bool operator==(const Triple& o) const {
    return subject == o.subject && relation == o.relation && object == o.object;
  }
};

// Immutable after construction; all queries are const and thread-safe.
class KnowledgeBase {
 public:
  void add_entity(const std::string& id);
  void add_relation(const std::string& id);
  // Registers the subject, the relation, and an entity-valued object.
  void add_triple(const std::string& subject, const std::string& relation,
                  const Value& object);

  bool has_entity(const std::string& id) const { return entities_.count(id); }
  bool has_relation(const std::string& id) const {
    return relations_.count(id);
  }
  const std::set<std::string>& entities() const { return entities_; }
  const std::set<std::string>& relations() const { return relations_; }
  const std::vector<Triple>& triples() const { return triples_; }

  // Objects o with (subject, relation, o) in the KB; empty if none.
  const std::vector<Value>& objects(const std::string& subject,
                                    const std::string& relation) const;

  bool operator==(const KnowledgeBase& o) const;

 private:
  std::set<std::string> entities_;
  std::set<std::string> relations_;
  std::vector<Triple> triples_;
  std::map<std::pair<std::string, std::string>, std::vector<Value>> index_;
};

// TSV loader. Triple lines are `subject<TAB>relation<TAB>object`; `#` starts
// a comment. Optional directive lines `@entity<TAB>id` / `@relation<TAB>id`
// pre-declare the vocabulary; if any directive is present the file is strict
// and undeclared ids in triples raise IntegrityError. Objects are classified
// as entities when declared or seen in subject position, as numbers when
// they look numeric, and as implicitly declared entities otherwise.
// Duplicate triples raise IntegrityError with the offending line.
KnowledgeBase load_kb(const std::string& path);
void save_kb(const KnowledgeBase& kb, const std::string& path);

}  // namespace semparse
