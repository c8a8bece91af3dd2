#pragma once

#include <optional>
#include <string>
#include <vector>

#include "semparse/funql.hpp"

namespace semparse {

enum class Mode { TopDown, BottomUp };

const char* mode_name(Mode m);  // "td" / "bu"
Mode mode_from_name(const std::string& name);

// Derivation operations. RED and STOP carry no tag; NT/RED are top-down
// only, NTRED/STOP bottom-up only.
struct TransitionOp {
  enum class Kind { NT, TER, RED, NTRED, STOP };

  Kind kind = Kind::RED;
  SymbolTag tag = SymbolTag::Entity;  // meaningful for NT / TER / NTRED

  static TransitionOp nt(SymbolTag t) { return {Kind::NT, t}; }
  static TransitionOp ter(SymbolTag t) { return {Kind::TER, t}; }
  static TransitionOp red() { return {Kind::RED, SymbolTag::Entity}; }
  static TransitionOp ntred(SymbolTag t) { return {Kind::NTRED, t}; }
  static TransitionOp stop() { return {Kind::STOP, SymbolTag::Entity}; }

  bool operator==(const TransitionOp& o) const {
    bool tagged = kind == Kind::NT || kind == Kind::TER || kind == Kind::NTRED;
    return kind == o.kind && (!tagged || tag == o.tag);
  }
  bool operator!=(const TransitionOp& o) const { return !(*this == o); }
};

// True when the op is accompanied by a token prediction: NT(relation),
// NTRED(relation) and both TERs name a symbol; everything else is purely
// structural.
bool op_emits_token(const TransitionOp& op);

std::string op_to_string(const TransitionOp& op);  // "NT(count)", "RED", ...

// Fixed per-mode action inventory; neural action ids index into this.
const std::vector<TransitionOp>& action_inventory(Mode mode);
int action_index(Mode mode, const TransitionOp& op);

// What the accompanying token may be.
enum class TokenConstraint { None, AnyEntity, NumberLiteral, AnyRelation };

struct Step {
  TransitionOp op;
  std::optional<std::string> token;
};

struct Derivation {
  Mode mode = Mode::TopDown;
  std::vector<Step> steps;
};

std::string derivation_to_json(const Derivation& d);
Derivation derivation_from_json(const std::string& line);

// Structural limits. max_terminals < 0 means unbounded; decoding sets it to
// the sentence length.
struct Limits {
  int max_open_nts = 10;
  int max_total_nts = 10;
  int max_consecutive_ters = 5;
  int max_terminals = -1;
};

// Which token categories the surrounding vocabulary can actually supply;
// operations whose tokens cannot be produced are masked out.
struct TokenAvailability {
  bool entities = true;
  bool numbers = true;
  bool relations = true;
};

struct StackItem {
  enum class Kind { Open, Tree, RelTok };

  Kind kind = Kind::Tree;
  SymbolTag tag = SymbolTag::Entity;  // Open
  std::string symbol;                 // Open relation head / RelTok name
  LfPtr tree;                         // Tree
};

// Parser configuration for either transition system. The stack holds open
// nonterminals (top-down only), closed fragments, and pending relation
// tokens (bottom-up only). Copyable for beam search.
class Config {
 public:
  Config(Mode mode, Limits limits, TokenAvailability avail = {});

  Mode mode() const { return mode_; }
  const Limits& limits() const { return limits_; }
  const std::vector<StackItem>& stack() const { return stack_; }
  int total_nts() const { return total_nts_; }
  int open_nts() const { return static_cast<int>(open_.size()); }
  int terminals() const { return terminals_; }
  int steps_taken() const { return steps_; }

  bool complete() const;

  // Ops legal under the structural and grammar constraints, including the
  // lookahead that keeps every reachable configuration completable.
  std::vector<TransitionOp> legal_transitions() const;
  bool is_legal(const TransitionOp& op) const;

  // Token category required if `op` were applied now.
  TokenConstraint token_constraint(const TransitionOp& op) const;

  // Applies a legal op. Token required exactly when op_emits_token(op).
  // Throws IllegalTransitionError / ArityUnderflowError.
  void apply(const TransitionOp& op,
             const std::optional<std::string>& token = std::nullopt);

  // The finished tree; throws IncompleteDerivationError if not complete.
  LfPtr result() const;

  // Human-readable stack, fragments joined by " || "; open nonterminals
  // render as "tag(" or "relationName(".
  std::string render_stack() const;

 private:
  std::vector<TransitionOp> legal_topdown() const;
  std::vector<TransitionOp> legal_bottomup() const;
  void apply_topdown(const TransitionOp& op,
                     const std::optional<std::string>& token);
  void apply_bottomup(const TransitionOp& op,
                      const std::optional<std::string>& token);

  Mode mode_;
  Limits limits_;
  TokenAvailability avail_;
  std::vector<StackItem> stack_;
  std::vector<int> open_;  // indices of open nonterminals, outermost first
  int total_nts_ = 0;
  int terminals_ = 0;
  int consecutive_ters_ = 0;
  int steps_ = 0;
  bool stopped_ = false;
};

// Oracle derivations. Top-down visits the tree pre-order; bottom-up
// post-order. Neither emits STOP; decoding and training handle the halt
// step explicitly for the bottom-up system.
Derivation td_oracle(const LfPtr& lf);
Derivation bu_oracle(const LfPtr& lf);

// Replays a derivation and returns the logical form it builds. Limits are
// permissive: reconstruction accepts any structurally valid derivation.
LfPtr reconstruct(const Derivation& d);

}  // namespace semparse
