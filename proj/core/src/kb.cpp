#include "semparse/kb.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace semparse {

std::string format_number(double n) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", n);
  return buf;
}

std::string value_to_string(const Value& v) {
  return v.kind == Value::Kind::Entity ? v.id : format_number(v.num);
}

bool is_number_literal(const std::string& s) {
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

void KnowledgeBase::add_entity(const std::string& id) { entities_.insert(id); }

void KnowledgeBase::add_relation(const std::string& id) {
  relations_.insert(id);
}

void KnowledgeBase::add_triple(const std::string& subject,
                               const std::string& relation,
                               const Value& object) {
  entities_.insert(subject);
  relations_.insert(relation);
  if (object.kind == Value::Kind::Entity) entities_.insert(object.id);
  triples_.push_back({subject, relation, object});
  index_[{subject, relation}].push_back(object);
}

const std::vector<Value>& KnowledgeBase::objects(
    const std::string& subject, const std::string& relation) const {
  static const std::vector<Value> kNone;
  auto it = index_.find({subject, relation});
  return it == index_.end() ? kNone : it->second;
}

bool KnowledgeBase::operator==(const KnowledgeBase& o) const {
  if (entities_ != o.entities_ || relations_ != o.relations_) return false;
  std::vector<Triple> a = triples_, b = o.triples_;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

KnowledgeBase load_kb(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open KB file: " + path);

  struct Row {
    std::size_t line;
    std::string subject, relation, object;
  };
  std::vector<Row> rows;
  std::set<std::string> declared_entities, declared_relations;
  bool strict = false;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> f = split_tabs(line);
    if (f[0] == "@entity" || f[0] == "@relation") {
      if (f.size() != 2 || f[1].empty())
        throw ParseError(path, line_no, "directive needs exactly one id");
      strict = true;
      (f[0] == "@entity" ? declared_entities : declared_relations)
          .insert(f[1]);
      continue;
    }
    if (f.size() != 3)
      throw ParseError(path, line_no,
                       "expected 3 tab-separated fields, found " +
                           std::to_string(f.size()));
    if (f[0].empty() || f[1].empty() || f[2].empty())
      throw ParseError(path, line_no, "empty field");
    rows.push_back({line_no, f[0], f[1], f[2]});
  }

  // First pass: every subject is an entity.
  std::set<std::string> subjects;
  for (const Row& r : rows) subjects.insert(r.subject);

  auto entity_known = [&](const std::string& id) {
    return declared_entities.count(id) || (!strict && subjects.count(id));
  };

  KnowledgeBase kb;
  for (const std::string& e : declared_entities) kb.add_entity(e);
  for (const std::string& r : declared_relations) kb.add_relation(r);

  std::set<std::string> seen;
  for (const Row& r : rows) {
    if (strict) {
      if (!declared_entities.count(r.subject))
        throw IntegrityError(path, r.line, "undeclared entity: " + r.subject);
      if (!declared_relations.count(r.relation))
        throw IntegrityError(path, r.line,
                             "undeclared relation: " + r.relation);
    }
    Value object;
    if (entity_known(r.object)) {
      object = Value::entity(r.object);
    } else if (is_number_literal(r.object)) {
      object = Value::number(std::strtod(r.object.c_str(), nullptr));
    } else if (strict) {
      throw IntegrityError(path, r.line, "undeclared entity: " + r.object);
    } else {
      object = Value::entity(r.object);
    }
    std::string key = r.subject + "\t" + r.relation + "\t" +
                      value_to_string(object);
    if (!seen.insert(key).second)
      throw IntegrityError(path, r.line, "duplicate triple: " + key);
    kb.add_triple(r.subject, r.relation, object);
  }
  return kb;
}

void save_kb(const KnowledgeBase& kb, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write KB file: " + path);
  for (const std::string& e : kb.entities()) out << "@entity\t" << e << "\n";
  for (const std::string& r : kb.relations())
    out << "@relation\t" << r << "\n";
  std::vector<Triple> ts = kb.triples();
  std::sort(ts.begin(), ts.end());
  for (const Triple& t : ts)
    out << t.subject << "\t" << t.relation << "\t"
        << value_to_string(t.object) << "\n";
  if (!out.flush()) throw Error("failed writing KB file: " + path);
}

}  // namespace semparse
