#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "semparse/execute.hpp"
#include "semparse/funql.hpp"
#include "semparse/kb.hpp"
#include "semparse/tape.hpp"
#include "semparse/tensor.hpp"

namespace testutil {

using namespace semparse;

// Central-difference check of every coordinate of every parameter against
// the gradients the tape accumulates. `forward` must rebuild the graph from
// the live tensor values on each call.
inline void fd_check(const std::vector<Tensor*>& params,
                     const std::function<NodeId(Tape&)>& forward,
                     real eps = 1e-5, real tol = 1e-6) {
  for (Tensor* t : params) t->zero_grad();
  {
    Tape tape;
    NodeId loss = forward(tape);
    REQUIRE(tape.size(loss) == 1);
    tape.backward(loss);
  }
  for (Tensor* t : params) {
    for (std::size_t i = 0; i < t->value.size(); ++i) {
      const real saved = t->value[i];
      t->value[i] = saved + eps;
      real up;
      {
        Tape tape;
        up = tape.scalar(forward(tape));
      }
      t->value[i] = saved - eps;
      real down;
      {
        Tape tape;
        down = tape.scalar(forward(tape));
      }
      t->value[i] = saved;
      const real numeric = (up - down) / (2 * eps);
      const real analytic = t->grad[i];
      const real scale = std::max(real(1), std::abs(numeric));
      INFO(t->name << "[" << i << "] analytic=" << analytic
                   << " numeric=" << numeric);
      CHECK(std::abs(analytic - numeric) <= tol * scale);
    }
  }
}

inline Tensor random_tensor(const std::string& name, int rows, int cols,
                            std::mt19937_64& rng) {
  Tensor t(name, rows, cols);
  t.init_uniform(rng, -0.9, 0.9);
  return t;
}

// Brute-force reference executor, written as plain set algebra over the
// triple list. A nullopt result is the comparison-failure marker.
using MaybeSet = std::optional<std::set<Value>>;

inline std::set<Value> rel_image(const KnowledgeBase& kb,
                                 const std::string& rel,
                                 const std::set<Value>& arg) {
  std::set<Value> out;
  for (const Triple& t : kb.triples())
    if (t.relation == rel && arg.count(Value::entity(t.subject)))
      out.insert(t.object);
  return out;
}

inline std::vector<double> rel_numbers(const KnowledgeBase& kb,
                                       const std::string& rel,
                                       const Value& v) {
  std::vector<double> out;
  if (v.kind != Value::Kind::Entity) return out;
  for (const Triple& t : kb.triples())
    if (t.relation == rel && t.subject == v.id &&
        t.object.kind == Value::Kind::Number)
      out.push_back(t.object.num);
  return out;
}

inline MaybeSet oracle_eval(const LfPtr& lf, const KnowledgeBase& kb) {
  using K = LogicalForm::Kind;
  switch (lf->kind) {
    case K::Entity:
      return std::set<Value>{Value::entity(lf->symbol)};
    case K::Apply: {
      MaybeSet arg = oracle_eval(lf->children[0], kb);
      if (!arg) return std::nullopt;
      return rel_image(kb, lf->symbol, *arg);
    }
    case K::Count: {
      MaybeSet arg = oracle_eval(lf->children[0], kb);
      if (!arg) return std::nullopt;
      return std::set<Value>{Value::number(static_cast<double>(arg->size()))};
    }
    case K::ArgMax:
    case K::ArgMin: {
      MaybeSet arg = oracle_eval(lf->children[0], kb);
      if (!arg) return std::nullopt;
      const bool is_max = lf->kind == K::ArgMax;
      std::map<Value, double> key;
      for (const Value& v : *arg)
        for (double n : rel_numbers(kb, lf->symbol, v)) {
          auto it = key.find(v);
          if (it == key.end())
            key.emplace(v, n);
          else
            it->second = is_max ? std::max(it->second, n)
                                : std::min(it->second, n);
        }
      if (key.empty()) return std::nullopt;
      double extreme = key.begin()->second;
      for (const auto& [v, k] : key)
        extreme = is_max ? std::max(extreme, k) : std::min(extreme, k);
      std::set<Value> out;
      for (const auto& [v, k] : key)
        if (k == extreme) out.insert(v);
      return out;
    }
    case K::Filter: {
      MaybeSet arg = oracle_eval(lf->children[0], kb);
      if (!arg) return std::nullopt;
      double rhs = std::stod(lf->value);
      bool any = false;
      std::set<Value> out;
      for (const Value& v : *arg) {
        std::vector<double> nums = rel_numbers(kb, lf->symbol, v);
        any = any || !nums.empty();
        bool keep = false;
        for (double n : nums) {
          switch (lf->cmp) {
            case Comparator::Eq: keep = keep || n == rhs; break;
            case Comparator::Neq: keep = keep || n != rhs; break;
            case Comparator::Gt: keep = keep || n > rhs; break;
            case Comparator::Lt: keep = keep || n < rhs; break;
            case Comparator::Ge: keep = keep || n >= rhs; break;
            case Comparator::Le: keep = keep || n <= rhs; break;
          }
        }
        if (keep) out.insert(v);
      }
      if (!any) return std::nullopt;
      return out;
    }
    case K::And:
    case K::Or: {
      MaybeSet lhs = oracle_eval(lf->children[0], kb);
      MaybeSet rhs = oracle_eval(lf->children[1], kb);
      if (!lhs || !rhs) return std::nullopt;
      std::set<Value> out;
      if (lf->kind == K::And)
        std::set_intersection(lhs->begin(), lhs->end(), rhs->begin(),
                              rhs->end(), std::inserter(out, out.end()));
      else
        std::set_union(lhs->begin(), lhs->end(), rhs->begin(), rhs->end(),
                       std::inserter(out, out.end()));
      return out;
    }
  }
  return std::nullopt;
}

inline bool oracle_matches(const MaybeSet& expect, const Denotation& got) {
  if (!expect) return got.failed();
  return !got.failed() && got.values == *expect;
}

// Random KB with <= 20 entities: entity-valued relations r0..r2 and
// numeric relations n0..n1.
inline KnowledgeBase random_kb(std::mt19937_64& rng) {
  KnowledgeBase kb;
  int n_ents = 2 + static_cast<int>(rng() % 19);
  std::vector<std::string> ents;
  for (int i = 0; i < n_ents; ++i) ents.push_back("e" + std::to_string(i));
  for (const std::string& e : ents) kb.add_entity(e);
  std::vector<std::string> rels = {"r0", "r1", "r2"};
  std::vector<std::string> nums = {"n0", "n1"};
  for (const std::string& r : rels) kb.add_relation(r);
  for (const std::string& r : nums) kb.add_relation(r);

  std::set<std::string> seen;
  int n_triples = static_cast<int>(rng() % 60);
  for (int i = 0; i < n_triples; ++i) {
    const std::string& s = ents[rng() % ents.size()];
    if (rng() % 3) {
      const std::string& r = rels[rng() % rels.size()];
      const std::string& o = ents[rng() % ents.size()];
      if (seen.insert(s + "\t" + r + "\t" + o).second)
        kb.add_triple(s, r, Value::entity(o));
    } else {
      const std::string& r = nums[rng() % nums.size()];
      double v = static_cast<double>(rng() % 50);
      if (seen.insert(s + "\t" + r + "\t" + format_number(v)).second)
        kb.add_triple(s, r, Value::number(v));
    }
  }
  return kb;
}

// Random logical form drawing symbols from the given inventories. Depth 0
// forces an entity leaf; count appears only at the root.
inline LfPtr random_lf(std::mt19937_64& rng,
                       const std::vector<std::string>& entities,
                       const std::vector<std::string>& relations,
                       const std::vector<std::string>& literals,
                       int max_depth, bool root = true) {
  const std::string& ent = entities[rng() % entities.size()];
  if (max_depth <= 0 || rng() % 4 == 0) return make_entity(ent);
  const std::string& rel = relations[rng() % relations.size()];
  int n_ops = root ? 7 : 6;
  switch (rng() % n_ops) {
    case 0:
    case 1:
      return make_apply(rel,
                        random_lf(rng, entities, relations, literals,
                                  max_depth - 1, false));
    case 2:
      return (rng() % 2 ? make_argmax : make_argmin)(
          random_lf(rng, entities, relations, literals, max_depth - 1, false),
          rel);
    case 3: {
      Comparator cmp = static_cast<Comparator>(rng() % 6);
      const std::string& lit = literals[rng() % literals.size()];
      return make_filter(cmp,
                         random_lf(rng, entities, relations, literals,
                                   max_depth - 1, false),
                         rel, lit);
    }
    case 4:
    case 5:
      return (rng() % 2 ? make_and : make_or)(
          random_lf(rng, entities, relations, literals, max_depth - 1, false),
          random_lf(rng, entities, relations, literals, max_depth - 1, false));
    default:
      return make_count(
          random_lf(rng, entities, relations, literals, max_depth - 1, false));
  }
}

inline std::vector<std::string> kb_entity_list(const KnowledgeBase& kb) {
  return {kb.entities().begin(), kb.entities().end()};
}

inline std::vector<std::string> kb_relation_list(const KnowledgeBase& kb) {
  return {kb.relations().begin(), kb.relations().end()};
}

}  // namespace testutil
