#include "semparse/transitions.hpp"

#include <json.hpp>

#include "semparse/kb.hpp"

namespace semparse {

const char* mode_name(Mode m) { return m == Mode::TopDown ? "td" : "bu"; }

Mode mode_from_name(const std::string& name) {
  if (name == "td") return Mode::TopDown;
  if (name == "bu") return Mode::BottomUp;
  throw Error("unknown mode: " + name);
}

bool op_emits_token(const TransitionOp& op) {
  switch (op.kind) {
    case TransitionOp::Kind::TER:
      return true;
    case TransitionOp::Kind::NT:
    case TransitionOp::Kind::NTRED:
      return op.tag == SymbolTag::Relation;
    default:
      return false;
  }
}

std::string op_to_string(const TransitionOp& op) {
  switch (op.kind) {
    case TransitionOp::Kind::NT:
      return std::string("NT(") + symbol_tag_name(op.tag) + ")";
    case TransitionOp::Kind::TER:
      return std::string("TER(") + symbol_tag_name(op.tag) + ")";
    case TransitionOp::Kind::RED:
      return "RED";
    case TransitionOp::Kind::NTRED:
      return std::string("NTRED(") + symbol_tag_name(op.tag) + ")";
    case TransitionOp::Kind::STOP:
      return "STOP";
  }
  return "?";
}

namespace {

const std::vector<SymbolTag> kNonterminalTags = {
    SymbolTag::Count,    SymbolTag::ArgMax,   SymbolTag::ArgMin,
    SymbolTag::FilterEq, SymbolTag::FilterNeq, SymbolTag::FilterGt,
    SymbolTag::FilterLt, SymbolTag::FilterGe, SymbolTag::FilterLe,
    SymbolTag::And,      SymbolTag::Or,       SymbolTag::Relation};

bool is_filter_tag(SymbolTag t) {
  switch (t) {
    case SymbolTag::FilterEq:
    case SymbolTag::FilterNeq:
    case SymbolTag::FilterGt:
    case SymbolTag::FilterLt:
    case SymbolTag::FilterGe:
    case SymbolTag::FilterLe:
      return true;
    default:
      return false;
  }
}

Comparator filter_comparator(SymbolTag t) {
  switch (t) {
    case SymbolTag::FilterEq: return Comparator::Eq;
    case SymbolTag::FilterNeq: return Comparator::Neq;
    case SymbolTag::FilterGt: return Comparator::Gt;
    case SymbolTag::FilterLt: return Comparator::Lt;
    case SymbolTag::FilterGe: return Comparator::Ge;
    case SymbolTag::FilterLe: return Comparator::Le;
    default:
      throw Error("not a filter tag");
  }
}

enum class Slot { Lf, Rel, Value };

// Argument slots opened by each nonterminal, in fill order.
std::vector<Slot> slots_for(SymbolTag tag) {
  switch (tag) {
    case SymbolTag::Count:
    case SymbolTag::Relation:
      return {Slot::Lf};
    case SymbolTag::ArgMax:
    case SymbolTag::ArgMin:
      return {Slot::Lf, Slot::Rel};
    case SymbolTag::And:
    case SymbolTag::Or:
      return {Slot::Lf, Slot::Lf};
    default:
      if (is_filter_tag(tag)) return {Slot::Lf, Slot::Rel, Slot::Value};
      throw Error("entity tag has no slots");
  }
}

bool is_unary_tree(const StackItem& it) {
  return it.kind == StackItem::Kind::Tree &&
         it.tree->kind != LogicalForm::Kind::Count;
}

bool is_number_leaf(const StackItem& it) {
  return it.kind == StackItem::Kind::Tree &&
         it.tree->kind == LogicalForm::Kind::Entity &&
         is_number_literal(it.tree->symbol);
}

}  // namespace

const std::vector<TransitionOp>& action_inventory(Mode mode) {
  static const std::vector<TransitionOp> td = [] {
    std::vector<TransitionOp> v;
    for (SymbolTag t : kNonterminalTags) v.push_back(TransitionOp::nt(t));
    v.push_back(TransitionOp::ter(SymbolTag::Relation));
    v.push_back(TransitionOp::ter(SymbolTag::Entity));
    v.push_back(TransitionOp::red());
    return v;
  }();
  static const std::vector<TransitionOp> bu = [] {
    std::vector<TransitionOp> v;
    v.push_back(TransitionOp::ter(SymbolTag::Entity));
    v.push_back(TransitionOp::ter(SymbolTag::Relation));
    for (SymbolTag t : kNonterminalTags) v.push_back(TransitionOp::ntred(t));
    v.push_back(TransitionOp::stop());
    return v;
  }();
  return mode == Mode::TopDown ? td : bu;
}

int action_index(Mode mode, const TransitionOp& op) {
  const auto& inv = action_inventory(mode);
  for (std::size_t i = 0; i < inv.size(); ++i)
    if (inv[i] == op) return static_cast<int>(i);
  throw IllegalTransitionError("op " + op_to_string(op) + " not in " +
                               mode_name(mode) + " inventory");
}

Config::Config(Mode mode, Limits limits, TokenAvailability avail)
    : mode_(mode), limits_(limits), avail_(avail) {}

bool Config::complete() const {
  if (mode_ == Mode::BottomUp) return stopped_;
  return steps_ > 0 && open_.empty() && stack_.size() == 1 &&
         stack_[0].kind == StackItem::Kind::Tree;
}

std::vector<TransitionOp> Config::legal_transitions() const {
  std::vector<TransitionOp> out;
  for (const TransitionOp& op : action_inventory(mode_))
    if (is_legal(op)) out.push_back(op);
  return out;
}

TokenConstraint Config::token_constraint(const TransitionOp& op) const {
  if (!op_emits_token(op)) return TokenConstraint::None;
  if (op.tag == SymbolTag::Relation) return TokenConstraint::AnyRelation;
  // TER(entity): number-only in a filter value slot (top-down) or on top of
  // a pending relation token (bottom-up).
  if (mode_ == Mode::TopDown) {
    if (!open_.empty()) {
      int idx = open_.back();
      const StackItem& nt = stack_[idx];
      int filled = static_cast<int>(stack_.size()) - idx - 1;
      std::vector<Slot> slots = slots_for(nt.tag);
      if (filled < static_cast<int>(slots.size()) &&
          slots[filled] == Slot::Value)
        return TokenConstraint::NumberLiteral;
    }
    return TokenConstraint::AnyEntity;
  }
  if (!stack_.empty() && stack_.back().kind == StackItem::Kind::RelTok)
    return TokenConstraint::NumberLiteral;
  return TokenConstraint::AnyEntity;
}

namespace {

bool contains(const std::vector<TransitionOp>& ops, const TransitionOp& op) {
  for (const TransitionOp& o : ops)
    if (o == op) return true;
  return false;
}

}  // namespace

bool Config::is_legal(const TransitionOp& op) const {
  return contains(mode_ == Mode::TopDown ? legal_topdown() : legal_bottomup(),
                  op);
}

// Minimum terminals still needed to close every open slot; each unfilled
// slot eventually costs at least one terminal.
std::vector<TransitionOp> Config::legal_topdown() const {
  std::vector<TransitionOp> out;
  if (complete()) return out;

  auto unfilled_slots = [&]() -> int {
    if (stack_.empty()) return 1;  // virtual root slot
    int total = 0;
    for (std::size_t k = 0; k < open_.size(); ++k) {
      int idx = open_[k];
      int span_end = k + 1 < open_.size() ? open_[k + 1]
                                          : static_cast<int>(stack_.size());
      int closed = span_end - idx - 1;
      int pending = k + 1 < open_.size() ? 1 : 0;  // in-progress child
      total += arity(stack_[idx].tag) - closed - pending;
    }
    return total;
  };

  auto terminal_budget_ok = [&](int unfilled_after) {
    return limits_.max_terminals < 0 ||
           terminals_ + unfilled_after <= limits_.max_terminals;
  };

  auto nt_allowed = [&](SymbolTag tag) {
    if (total_nts_ + 1 > limits_.max_total_nts) return false;
    if (open_nts() + 1 > limits_.max_open_nts) return false;
    if (!avail_.entities) return false;  // every lf bottoms out in an entity
    if (tag == SymbolTag::Relation && !avail_.relations) return false;
    if ((tag == SymbolTag::ArgMax || tag == SymbolTag::ArgMin) &&
        !avail_.relations)
      return false;
    if (is_filter_tag(tag) && !(avail_.relations && avail_.numbers))
      return false;
    return terminal_budget_ok(unfilled_slots() - 1 + arity(tag));
  };

  if (stack_.empty()) {
    // First operation must introduce a nonterminal.
    for (SymbolTag t : kNonterminalTags)
      if (nt_allowed(t)) out.push_back(TransitionOp::nt(t));
    return out;
  }

  int idx = open_.back();
  const StackItem& nt = stack_[idx];
  int filled = static_cast<int>(stack_.size()) - idx - 1;
  std::vector<Slot> slots = slots_for(nt.tag);

  if (filled == static_cast<int>(slots.size())) {
    // Fully saturated nonterminal: the reduce is forced and deterministic.
    out.push_back(TransitionOp::red());
    return out;
  }

  switch (slots[filled]) {
    case Slot::Lf:
      for (SymbolTag t : kNonterminalTags)
        if (t != SymbolTag::Count && nt_allowed(t))
          out.push_back(TransitionOp::nt(t));
      if (avail_.entities &&
          consecutive_ters_ + 1 <= limits_.max_consecutive_ters &&
          terminal_budget_ok(unfilled_slots() - 1 + 1))
        out.push_back(TransitionOp::ter(SymbolTag::Entity));
      break;
    case Slot::Rel:
      // Forced terminal: consecutive-TER pruning applies only to optional
      // terminals, otherwise the derivation could never finish.
      out.push_back(TransitionOp::ter(SymbolTag::Relation));
      break;
    case Slot::Value:
      out.push_back(TransitionOp::ter(SymbolTag::Entity));
      break;
  }
  return out;
}

// Bottom-up legality. A pending relation token is always within the top two
// items (the mask forces its consumption), so the stack shape is one of:
// trees only, trees + top RelTok, or trees + RelTok + number leaf on top.
// The reduce budget must stay sufficient to collapse the stack to one tree:
// collapsing needs (height - 1) reduces, minus one when the top two items
// are already a filter's value/relation pair.
std::vector<TransitionOp> Config::legal_bottomup() const {
  std::vector<TransitionOp> out;
  if (stopped_) return out;

  const int h = static_cast<int>(stack_.size());
  const bool top_reltok =
      h >= 1 && stack_.back().kind == StackItem::Kind::RelTok;
  const bool filter_pair = h >= 2 && is_number_leaf(stack_[h - 1]) &&
                           stack_[h - 2].kind == StackItem::Kind::RelTok;

  if (filter_pair) {
    // Only the filter reduce can consume the pair.
    if (h >= 3 && is_unary_tree(stack_[h - 3]))
      for (SymbolTag t : kNonterminalTags)
        if (is_filter_tag(t)) out.push_back(TransitionOp::ntred(t));
    return out;
  }

  auto ter_budget_ok = [&]() {
    return (limits_.max_terminals < 0 ||
            terminals_ + 1 <= limits_.max_terminals) &&
           consecutive_ters_ + 1 <= limits_.max_consecutive_ters;
  };
  // Invariant kept by every op: total_nts + height - 1 <= max_total_nts
  // (height counted after the op, minus one for a top filter pair).
  auto reduce_budget_ok = [&](int nts_after, int needed_after) {
    return nts_after + needed_after <= limits_.max_total_nts;
  };

  if (top_reltok) {
    if (avail_.numbers && ter_budget_ok())
      out.push_back(TransitionOp::ter(SymbolTag::Entity));
    if (h >= 2 && is_unary_tree(stack_[h - 2])) {
      if (reduce_budget_ok(total_nts_ + 1, h - 2)) {
        out.push_back(TransitionOp::ntred(SymbolTag::ArgMax));
        out.push_back(TransitionOp::ntred(SymbolTag::ArgMin));
      }
    }
    return out;
  }

  // Stack is all trees (possibly empty). A completed count tree can never
  // be consumed, so nothing may be pushed on top of it.
  if (avail_.entities && ter_budget_ok() && reduce_budget_ok(total_nts_, h) &&
      (h == 0 || is_unary_tree(stack_.back())))
    out.push_back(TransitionOp::ter(SymbolTag::Entity));
  if (h >= 1 && is_unary_tree(stack_.back())) {
    if (avail_.relations && ter_budget_ok() &&
        reduce_budget_ok(total_nts_, h))
      out.push_back(TransitionOp::ter(SymbolTag::Relation));
    if (avail_.relations && reduce_budget_ok(total_nts_ + 1, h - 1))
      out.push_back(TransitionOp::ntred(SymbolTag::Relation));
    if (h == 1 && reduce_budget_ok(total_nts_ + 1, 0))
      out.push_back(TransitionOp::ntred(SymbolTag::Count));
  }
  if (h >= 2 && is_unary_tree(stack_[h - 1]) && is_unary_tree(stack_[h - 2])) {
    if (reduce_budget_ok(total_nts_ + 1, h - 2)) {
      out.push_back(TransitionOp::ntred(SymbolTag::And));
      out.push_back(TransitionOp::ntred(SymbolTag::Or));
    }
  }
  if (h == 1 && stack_[0].kind == StackItem::Kind::Tree)
    out.push_back(TransitionOp::stop());
  return out;
}

void Config::apply(const TransitionOp& op,
                   const std::optional<std::string>& token) {
  if (op_emits_token(op)) {
    if (!token)
      throw IllegalTransitionError("op " + op_to_string(op) +
                                   " requires a token");
    if (token->empty())
      throw IllegalTransitionError("empty token");
    if (token_constraint(op) == TokenConstraint::NumberLiteral &&
        !is_number_literal(*token))
      throw IllegalTransitionError("token '" + *token +
                                   "' is not a number literal");
  } else if (token) {
    throw IllegalTransitionError("op " + op_to_string(op) +
                                 " takes no token");
  }
  if (mode_ == Mode::TopDown)
    apply_topdown(op, token);
  else
    apply_bottomup(op, token);
  ++steps_;
}

void Config::apply_topdown(const TransitionOp& op,
                           const std::optional<std::string>& token) {
  if (!is_legal(op))
    throw IllegalTransitionError("illegal " + op_to_string(op) +
                                 " on stack [" + render_stack() + "]");
  switch (op.kind) {
    case TransitionOp::Kind::NT: {
      StackItem it;
      it.kind = StackItem::Kind::Open;
      it.tag = op.tag;
      if (op.tag == SymbolTag::Relation) it.symbol = *token;
      open_.push_back(static_cast<int>(stack_.size()));
      stack_.push_back(std::move(it));
      ++total_nts_;
      consecutive_ters_ = 0;
      return;
    }
    case TransitionOp::Kind::TER: {
      StackItem it;
      if (op.tag == SymbolTag::Relation) {
        it.kind = StackItem::Kind::RelTok;
        it.symbol = *token;
      } else {
        it.kind = StackItem::Kind::Tree;
        it.tree = make_entity(*token);
      }
      stack_.push_back(std::move(it));
      ++terminals_;
      ++consecutive_ters_;
      return;
    }
    case TransitionOp::Kind::RED: {
      int idx = open_.back();
      const StackItem& nt = stack_[idx];
      std::vector<StackItem> kids(stack_.begin() + idx + 1, stack_.end());
      LfPtr tree;
      switch (nt.tag) {
        case SymbolTag::Count:
          tree = make_count(kids[0].tree);
          break;
        case SymbolTag::Relation:
          tree = make_apply(nt.symbol, kids[0].tree);
          break;
        case SymbolTag::ArgMax:
          tree = make_argmax(kids[0].tree, kids[1].symbol);
          break;
        case SymbolTag::ArgMin:
          tree = make_argmin(kids[0].tree, kids[1].symbol);
          break;
        case SymbolTag::And:
          tree = make_and(kids[0].tree, kids[1].tree);
          break;
        case SymbolTag::Or:
          tree = make_or(kids[0].tree, kids[1].tree);
          break;
        default:
          tree = make_filter(filter_comparator(nt.tag), kids[0].tree,
                             kids[1].symbol, kids[2].tree->symbol);
          break;
      }
      stack_.resize(idx);
      StackItem it;
      it.kind = StackItem::Kind::Tree;
      it.tree = std::move(tree);
      stack_.push_back(std::move(it));
      open_.pop_back();
      consecutive_ters_ = 0;
      return;
    }
    default:
      throw IllegalTransitionError(op_to_string(op) +
                                   " is not a top-down operation");
  }
}

void Config::apply_bottomup(const TransitionOp& op,
                            const std::optional<std::string>& token) {
  auto underflow_check = [&](int needed) {
    if (static_cast<int>(stack_.size()) < needed)
      throw ArityUnderflowError(op_to_string(op) + " needs " +
                                std::to_string(needed) +
                                " stack items, have " +
                                std::to_string(stack_.size()));
  };
  if (op.kind == TransitionOp::Kind::NTRED)
    underflow_check(op.tag == SymbolTag::Count ||
                            op.tag == SymbolTag::Relation
                        ? 1
                        : is_filter_tag(op.tag) ? 3 : 2);
  if (!is_legal(op))
    throw IllegalTransitionError("illegal " + op_to_string(op) +
                                 " on stack [" + render_stack() + "]");
  auto pop = [&]() {
    StackItem it = std::move(stack_.back());
    stack_.pop_back();
    return it;
  };
  auto push_tree = [&](LfPtr tree) {
    StackItem it;
    it.kind = StackItem::Kind::Tree;
    it.tree = std::move(tree);
    stack_.push_back(std::move(it));
  };
  switch (op.kind) {
    case TransitionOp::Kind::TER: {
      StackItem it;
      if (op.tag == SymbolTag::Relation) {
        it.kind = StackItem::Kind::RelTok;
        it.symbol = *token;
      } else {
        it.kind = StackItem::Kind::Tree;
        it.tree = make_entity(*token);
      }
      stack_.push_back(std::move(it));
      ++terminals_;
      ++consecutive_ters_;
      return;
    }
    case TransitionOp::Kind::NTRED: {
      consecutive_ters_ = 0;
      ++total_nts_;
      switch (op.tag) {
        case SymbolTag::Count: {
          push_tree(make_count(pop().tree));
          return;
        }
        case SymbolTag::Relation: {
          push_tree(make_apply(*token, pop().tree));
          return;
        }
        case SymbolTag::ArgMax:
        case SymbolTag::ArgMin: {
          StackItem rel = pop();
          StackItem arg = pop();
          push_tree(op.tag == SymbolTag::ArgMax
                        ? make_argmax(arg.tree, rel.symbol)
                        : make_argmin(arg.tree, rel.symbol));
          return;
        }
        case SymbolTag::And:
        case SymbolTag::Or: {
          StackItem rhs = pop();
          StackItem lhs = pop();
          push_tree(op.tag == SymbolTag::And ? make_and(lhs.tree, rhs.tree)
                                             : make_or(lhs.tree, rhs.tree));
          return;
        }
        default: {
          StackItem value = pop();
          StackItem rel = pop();
          StackItem arg = pop();
          push_tree(make_filter(filter_comparator(op.tag), arg.tree,
                                rel.symbol, value.tree->symbol));
          return;
        }
      }
    }
    case TransitionOp::Kind::STOP:
      stopped_ = true;
      return;
    default:
      throw IllegalTransitionError(op_to_string(op) +
                                   " is not a bottom-up operation");
  }
}

LfPtr Config::result() const {
  if (!open_.empty() || stack_.size() != 1 ||
      stack_[0].kind != StackItem::Kind::Tree)
    throw IncompleteDerivationError("derivation left stack [" +
                                    render_stack() + "]");
  return stack_[0].tree;
}

std::string Config::render_stack() const {
  std::string out;
  for (std::size_t i = 0; i < stack_.size(); ++i) {
    if (i) out += " || ";
    const StackItem& it = stack_[i];
    switch (it.kind) {
      case StackItem::Kind::Open:
        out += (it.tag == SymbolTag::Relation ? it.symbol
                                              : symbol_tag_name(it.tag));
        out += "(";
        break;
      case StackItem::Kind::Tree:
        out += print_funql(it.tree);
        break;
      case StackItem::Kind::RelTok:
        out += it.symbol;
        break;
    }
  }
  return out;
}

namespace {

constexpr int kNoCap = 1 << 28;

Limits permissive_limits() { return Limits{kNoCap, kNoCap, kNoCap, -1}; }

void td_emit(const LfPtr& lf, std::vector<Step>& steps) {
  using K = LogicalForm::Kind;
  switch (lf->kind) {
    case K::Entity:
      steps.push_back({TransitionOp::ter(SymbolTag::Entity), lf->symbol});
      return;
    case K::Apply:
      steps.push_back({TransitionOp::nt(SymbolTag::Relation), lf->symbol});
      td_emit(lf->children[0], steps);
      break;
    case K::Count:
      steps.push_back({TransitionOp::nt(SymbolTag::Count), std::nullopt});
      td_emit(lf->children[0], steps);
      break;
    case K::ArgMax:
    case K::ArgMin:
      steps.push_back({TransitionOp::nt(lf->kind == K::ArgMax
                                            ? SymbolTag::ArgMax
                                            : SymbolTag::ArgMin),
                       std::nullopt});
      td_emit(lf->children[0], steps);
      steps.push_back({TransitionOp::ter(SymbolTag::Relation), lf->symbol});
      break;
    case K::Filter: {
      SymbolTag tag = symbol_tag_from_name(std::string("filter_") +
                                           comparator_name(lf->cmp));
      steps.push_back({TransitionOp::nt(tag), std::nullopt});
      td_emit(lf->children[0], steps);
      steps.push_back({TransitionOp::ter(SymbolTag::Relation), lf->symbol});
      steps.push_back({TransitionOp::ter(SymbolTag::Entity), lf->value});
      break;
    }
    case K::And:
    case K::Or:
      steps.push_back(
          {TransitionOp::nt(lf->kind == K::And ? SymbolTag::And
                                               : SymbolTag::Or),
           std::nullopt});
      td_emit(lf->children[0], steps);
      td_emit(lf->children[1], steps);
      break;
  }
  steps.push_back({TransitionOp::red(), std::nullopt});
}

void bu_emit(const LfPtr& lf, std::vector<Step>& steps) {
  using K = LogicalForm::Kind;
  switch (lf->kind) {
    case K::Entity:
      steps.push_back({TransitionOp::ter(SymbolTag::Entity), lf->symbol});
      return;
    case K::Apply:
      bu_emit(lf->children[0], steps);
      steps.push_back({TransitionOp::ntred(SymbolTag::Relation), lf->symbol});
      return;
    case K::Count:
      bu_emit(lf->children[0], steps);
      steps.push_back({TransitionOp::ntred(SymbolTag::Count), std::nullopt});
      return;
    case K::ArgMax:
    case K::ArgMin:
      bu_emit(lf->children[0], steps);
      steps.push_back({TransitionOp::ter(SymbolTag::Relation), lf->symbol});
      steps.push_back({TransitionOp::ntred(lf->kind == K::ArgMax
                                               ? SymbolTag::ArgMax
                                               : SymbolTag::ArgMin),
                       std::nullopt});
      return;
    case K::Filter: {
      bu_emit(lf->children[0], steps);
      steps.push_back({TransitionOp::ter(SymbolTag::Relation), lf->symbol});
      steps.push_back({TransitionOp::ter(SymbolTag::Entity), lf->value});
      SymbolTag tag = symbol_tag_from_name(std::string("filter_") +
                                           comparator_name(lf->cmp));
      steps.push_back({TransitionOp::ntred(tag), std::nullopt});
      return;
    }
    case K::And:
    case K::Or:
      bu_emit(lf->children[0], steps);
      bu_emit(lf->children[1], steps);
      steps.push_back(
          {TransitionOp::ntred(lf->kind == K::And ? SymbolTag::And
                                                  : SymbolTag::Or),
           std::nullopt});
      return;
  }
}

}  // namespace

Derivation td_oracle(const LfPtr& lf) {
  Derivation d;
  d.mode = Mode::TopDown;
  td_emit(lf, d.steps);
  return d;
}

Derivation bu_oracle(const LfPtr& lf) {
  Derivation d;
  d.mode = Mode::BottomUp;
  bu_emit(lf, d.steps);
  return d;
}

LfPtr reconstruct(const Derivation& d) {
  if (d.steps.empty())
    throw IncompleteDerivationError("empty derivation");
  // A lone entity terminal cannot start a top-down derivation under the
  // grammar mask but is still a valid logical form; handle it directly.
  if (d.mode == Mode::TopDown && d.steps.size() == 1 &&
      d.steps[0].op == TransitionOp::ter(SymbolTag::Entity)) {
    if (!d.steps[0].token)
      throw IllegalTransitionError("TER(entity) requires a token");
    return make_entity(*d.steps[0].token);
  }
  Config cfg(d.mode, permissive_limits());
  for (const Step& s : d.steps) cfg.apply(s.op, s.token);
  return cfg.result();
}

std::string derivation_to_json(const Derivation& d) {
  nlohmann::json steps = nlohmann::json::array();
  for (const Step& s : d.steps) {
    nlohmann::json step = nlohmann::json::array();
    switch (s.op.kind) {
      case TransitionOp::Kind::NT: step.push_back("NT"); break;
      case TransitionOp::Kind::TER: step.push_back("TER"); break;
      case TransitionOp::Kind::RED: step.push_back("RED"); break;
      case TransitionOp::Kind::NTRED: step.push_back("NTRED"); break;
      case TransitionOp::Kind::STOP: step.push_back("STOP"); break;
    }
    if (s.op.kind == TransitionOp::Kind::RED ||
        s.op.kind == TransitionOp::Kind::STOP)
      step.push_back(nullptr);
    else
      step.push_back(symbol_tag_name(s.op.tag));
    if (s.token)
      step.push_back(*s.token);
    else
      step.push_back(nullptr);
    steps.push_back(std::move(step));
  }
  nlohmann::json j;
  j["mode"] = mode_name(d.mode);
  j["steps"] = std::move(steps);
  return j.dump();
}

Derivation derivation_from_json(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  Derivation d;
  d.mode = mode_from_name(j.at("mode").get<std::string>());
  for (const nlohmann::json& step : j.at("steps")) {
    if (!step.is_array() || step.size() != 3)
      throw Error("derivation step must be [kind, tag, token]");
    std::string kind = step[0].get<std::string>();
    TransitionOp op;
    if (kind == "RED") {
      op = TransitionOp::red();
    } else if (kind == "STOP") {
      op = TransitionOp::stop();
    } else {
      SymbolTag tag = symbol_tag_from_name(step[1].get<std::string>());
      if (kind == "NT")
        op = TransitionOp::nt(tag);
      else if (kind == "TER")
        op = TransitionOp::ter(tag);
      else if (kind == "NTRED")
        op = TransitionOp::ntred(tag);
      else
        throw Error("unknown transition kind: " + kind);
    }
    std::optional<std::string> token;
    if (!step[2].is_null()) token = step[2].get<std::string>();
    d.steps.push_back({op, token});
  }
  return d;
}

}  // namespace semparse
