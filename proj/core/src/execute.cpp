#include "semparse/execute.hpp"

#include <algorithm>
#include <cstdlib>

namespace semparse {

namespace {

struct ComparisonFailed {};

double literal_value(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

bool compare(double lhs, Comparator cmp, double rhs) {
  switch (cmp) {
    case Comparator::Eq: return lhs == rhs;
    case Comparator::Neq: return lhs != rhs;
    case Comparator::Gt: return lhs > rhs;
    case Comparator::Lt: return lhs < rhs;
    case Comparator::Ge: return lhs >= rhs;
    case Comparator::Le: return lhs <= rhs;
  }
  return false;
}

std::vector<double> numeric_objects(const KnowledgeBase& kb, const Value& v,
                                    const std::string& relation) {
  std::vector<double> out;
  if (v.kind != Value::Kind::Entity) return out;
  for (const Value& o : kb.objects(v.id, relation))
    if (o.kind == Value::Kind::Number) out.push_back(o.num);
  return out;
}

std::set<Value> eval(const LfPtr& lf, const KnowledgeBase& kb) {
  using K = LogicalForm::Kind;
  switch (lf->kind) {
    case K::Entity: {
      if (!kb.has_entity(lf->symbol)) throw UnknownSymbolError(lf->symbol);
      return {Value::entity(lf->symbol)};
    }
    case K::Apply: {
      if (!kb.has_relation(lf->symbol)) throw UnknownSymbolError(lf->symbol);
      std::set<Value> arg = eval(lf->children[0], kb);
      std::set<Value> out;
      for (const Value& v : arg) {
        if (v.kind != Value::Kind::Entity) continue;
        for (const Value& o : kb.objects(v.id, lf->symbol)) out.insert(o);
      }
      return out;
    }
    case K::Count: {
      std::set<Value> arg = eval(lf->children[0], kb);
      return {Value::number(static_cast<double>(arg.size()))};
    }
    case K::ArgMax:
    case K::ArgMin: {
      if (!kb.has_relation(lf->symbol)) throw UnknownSymbolError(lf->symbol);
      const bool is_max = lf->kind == K::ArgMax;
      std::set<Value> arg = eval(lf->children[0], kb);
      // Key each element by its best numeric r-value; elements without one
      // take no part in the comparison.
      std::vector<std::pair<Value, double>> keyed;
      for (const Value& v : arg) {
        std::vector<double> nums = numeric_objects(kb, v, lf->symbol);
        if (nums.empty()) continue;
        double best = nums[0];
        for (double n : nums) best = is_max ? std::max(best, n) : std::min(best, n);
        keyed.emplace_back(v, best);
      }
      if (keyed.empty()) throw ComparisonFailed{};
      double extreme = keyed[0].second;
      for (const auto& [v, k] : keyed)
        extreme = is_max ? std::max(extreme, k) : std::min(extreme, k);
      std::set<Value> out;
      for (const auto& [v, k] : keyed)
        if (k == extreme) out.insert(v);
      return out;
    }
    case K::Filter: {
      if (!kb.has_relation(lf->symbol)) throw UnknownSymbolError(lf->symbol);
      std::set<Value> arg = eval(lf->children[0], kb);
      double rhs = literal_value(lf->value);
      bool compared_any = false;
      std::set<Value> out;
      for (const Value& v : arg) {
        std::vector<double> nums = numeric_objects(kb, v, lf->symbol);
        if (nums.empty()) continue;
        compared_any = true;
        for (double n : nums) {
          if (compare(n, lf->cmp, rhs)) {
            out.insert(v);
            break;
          }
        }
      }
      if (!compared_any) throw ComparisonFailed{};
      return out;
    }
    case K::And:
    case K::Or: {
      std::set<Value> lhs = eval(lf->children[0], kb);
      std::set<Value> rhs = eval(lf->children[1], kb);
      std::set<Value> out;
      if (lf->kind == K::And) {
        for (const Value& v : lhs)
          if (rhs.count(v)) out.insert(v);
      } else {
        out = lhs;
        out.insert(rhs.begin(), rhs.end());
      }
      return out;
    }
  }
  throw Error("corrupt logical form");
}

}  // namespace

Denotation execute(const LfPtr& lf, const KnowledgeBase& kb) {
  try {
    return Denotation::of(eval(lf, kb));
  } catch (const ComparisonFailed&) {
    return Denotation::empty_marker();
  }
}

std::vector<std::string> denotation_strings(const Denotation& d) {
  std::vector<std::string> out;
  for (const Value& v : d.values) out.push_back(value_to_string(v));
  return out;
}

}  // namespace semparse
