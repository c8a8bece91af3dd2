#include "semparse/decode.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include "semparse/encoder.hpp"
#include "semparse/errors.hpp"
#include "semparse/text.hpp"

namespace semparse {
namespace {

constexpr int kMaxDecodeRounds = 200;

int last_open_index(const std::vector<StackItem>& stack) {
  for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i)
    if (stack[i].kind == StackItem::Kind::Open) return i;
  return -1;
}

int ntred_pop_count(SymbolTag tag) {
  switch (tag) {
    case SymbolTag::Relation:
    case SymbolTag::Count:
      return 1;
    case SymbolTag::ArgMax:
    case SymbolTag::ArgMin:
    case SymbolTag::And:
    case SymbolTag::Or:
      return 2;
    default:
      return 3;  // filter comparators
  }
}

// Advances the stack encoding to mirror one transition; `before` is the
// configuration the op is about to be applied to.
StackEncoderV::Snapshot stack_after(const StackEncoderV& enc,
                                    const StackEncoderV::Snapshot& s,
                                    const Model& model, const Config& before,
                                    const TransitionOp& op,
                                    const std::optional<std::string>& token) {
  switch (op.kind) {
    case TransitionOp::Kind::NT: {
      int row = op.tag == SymbolTag::Relation
                    ? model.tokens.lookup(*token)
                    : model.tokens.lookup(symbol_tag_name(op.tag));
      return enc.push(s, token_embedding_values(model, row));
    }
    case TransitionOp::Kind::TER:
      return enc.push(s, token_embedding_values(model, model.tokens.lookup(*token)));
    case TransitionOp::Kind::RED: {
      int open = last_open_index(before.stack());
      int n = static_cast<int>(before.stack().size()) - open - 1;
      return enc.reduce(s, n, {}, true);
    }
    case TransitionOp::Kind::NTRED: {
      int row = op.tag == SymbolTag::Relation
                    ? model.tokens.lookup(*token)
                    : model.tokens.lookup(symbol_tag_name(op.tag));
      return enc.reduce(s, ntred_pop_count(op.tag),
                        token_embedding_values(model, row), false);
    }
    case TransitionOp::Kind::STOP:
      return s;
  }
  return s;
}

// Token-prediction context for the configured attention variant; fills the
// trace weights when asked.
std::vector<real> token_context_values(const Model& model,
                                       const std::vector<real>& scores,
                                       const std::vector<std::vector<real>>& buffer,
                                       std::vector<real>* trace_weights) {
  switch (model.cfg.attention) {
    case AttentionKind::Soft: {
      std::vector<real> w;
      std::vector<real> ctx = soft_attend_values(scores, buffer, &w);
      if (trace_weights) *trace_weights = std::move(w);
      return ctx;
    }
    case AttentionKind::Structured: {
      std::vector<real> m = crf_marginals_values(model, scores);
      std::vector<real> ctx = structured_attend_values(m, buffer);
      if (trace_weights) *trace_weights = std::move(m);
      return ctx;
    }
    case AttentionKind::Hard: {
      int idx = hard_attend_values(scores);
      if (trace_weights) {
        trace_weights->assign(scores.size(), real(0));
        (*trace_weights)[idx] = 1;
      }
      return buffer[idx];
    }
    case AttentionKind::Binomial: {
      std::vector<unsigned char> sel;
      std::vector<real> ctx = binomial_attend_values(scores, buffer, &sel);
      if (trace_weights) {
        trace_weights->assign(sel.begin(), sel.end());
        if (std::find(sel.begin(), sel.end(), 1) == sel.end())
          (*trace_weights)[hard_attend_values(scores)] = 1;
      }
      return ctx;
    }
  }
  return soft_attend_values(scores, buffer, trace_weights);
}

struct Hyp {
  Config config;
  StackEncoderV::Snapshot stack;
  real lp = 0;
  std::vector<Step> steps;
};

struct Expansion {
  int parent = 0;
  TransitionOp op;
  std::optional<std::string> token;
  real lp = 0;
};

bool expansion_before(const Expansion& a, const Expansion& b) {
  if (a.lp != b.lp) return a.lp > b.lp;
  if (a.parent != b.parent) return a.parent < b.parent;
  if (a.op.kind != b.op.kind) return static_cast<int>(a.op.kind) < static_cast<int>(b.op.kind);
  if (a.op.tag != b.op.tag) return static_cast<int>(a.op.tag) < static_cast<int>(b.op.tag);
  const std::string& at = a.token ? *a.token : std::string();
  const std::string& bt = b.token ? *b.token : std::string();
  return at < bt;
}

}  // namespace

const std::vector<TokenCandidate>& TokenPools::for_constraint(
    TokenConstraint c) const {
  static const std::vector<TokenCandidate> kNone;
  switch (c) {
    case TokenConstraint::AnyEntity: return entities;
    case TokenConstraint::NumberLiteral: return numbers;
    case TokenConstraint::AnyRelation: return relations;
    case TokenConstraint::None: return kNone;
  }
  return kNone;
}

TokenPools build_token_pools(const Model& model, const KnowledgeBase& kb,
                             const std::vector<std::string>& utterance_tokens,
                             const std::vector<std::string>& entity_candidates) {
  TokenPools pools;
  std::vector<std::string> ents;
  for (const std::string& e : entity_candidates)
    if (kb.has_entity(e) &&
        std::find(ents.begin(), ents.end(), e) == ents.end())
      ents.push_back(e);
  if (ents.empty()) ents.assign(kb.entities().begin(), kb.entities().end());
  for (const std::string& e : ents)
    pools.entities.push_back({e, model.tokens.lookup(e)});

  std::vector<std::string> nums;
  for (const std::string& t : utterance_tokens) {
    if (!is_number_literal(t)) continue;
    if (std::find(nums.begin(), nums.end(), t) == nums.end()) nums.push_back(t);
  }
  for (const std::string& v : nums)
    pools.numbers.push_back({v, model.tokens.lookup(v)});

  for (const std::string& r : kb.relations())
    pools.relations.push_back({r, model.tokens.lookup(r)});
  return pools;
}

std::vector<Candidate> beam_decode(const Model& model, const KnowledgeBase& kb,
                                   const std::vector<std::string>& tokens,
                                   int width,
                                   const std::vector<std::string>&
                                       entity_candidates) {
  if (width < 1) throw EmptyCandidatesError("beam width must be positive");
  EncodedUtteranceV enc = encode_utterance_values(
      model, [&] {
        std::vector<int> ids(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i)
          ids[i] = model.words.lookup(lowercase(tokens[i]));
        return ids;
      }());
  TokenPools pools = build_token_pools(model, kb, tokens, entity_candidates);
  StackEncoderV stack_enc(model);

  Limits limits = model.cfg.limits;
  limits.max_terminals = static_cast<int>(tokens.size());
  Config initial(model.cfg.mode, limits, pools.availability());

  std::vector<Hyp> live;
  live.push_back({initial, stack_enc.initial(), 0, {}});

  // Finished hypotheses, deduplicated on the printed form.
  std::map<std::string, Candidate> finished;

  const int n_actions = model.n_actions();
  for (int round = 0; round < kMaxDecodeRounds && !live.empty(); ++round) {
    std::vector<Expansion> expansions;
    for (int h = 0; h < static_cast<int>(live.size()); ++h) {
      const Hyp& hyp = live[h];
      const std::vector<real>& s = stack_enc.state(hyp.stack);
      std::vector<real> scores = attention_scores_values(model, enc, s);
      std::vector<real> soft_ctx = soft_attend_values(scores, enc.buffer);
      std::vector<real> feats_a = prediction_features_values(model, soft_ctx, s);

      std::vector<TransitionOp> legal = hyp.config.legal_transitions();
      if (legal.empty())
        throw IllegalTransitionError("decode stall: no legal transition");
      std::vector<unsigned char> amask(n_actions, 0);
      for (const TransitionOp& op : legal)
        amask[action_index(model.cfg.mode, op)] = 1;
      std::vector<real> alp = action_log_probs_values(model, feats_a, amask);

      std::vector<real> feats_y;
      std::map<int, std::vector<real>> tlp_cache;
      for (const TransitionOp& op : legal) {
        real base = hyp.lp + alp[action_index(model.cfg.mode, op)];
        if (!op_emits_token(op)) {
          expansions.push_back({h, op, std::nullopt, base});
          continue;
        }
        if (feats_y.empty()) {
          std::vector<real> ctx_y =
              model.cfg.attention == AttentionKind::Soft
                  ? soft_ctx
                  : token_context_values(model, scores, enc.buffer, nullptr);
          feats_y = prediction_features_values(model, ctx_y, s);
        }
        TokenConstraint constraint = hyp.config.token_constraint(op);
        const std::vector<TokenCandidate>& pool = pools.for_constraint(constraint);
        auto [it, fresh] = tlp_cache.try_emplace(static_cast<int>(constraint));
        if (fresh) {
          std::vector<unsigned char> tmask(model.tokens.size(), 0);
          for (const TokenCandidate& c : pool) tmask[c.row] = 1;
          it->second = token_log_probs_values(model, feats_y, tmask);
        }
        for (const TokenCandidate& c : pool)
          expansions.push_back({h, op, c.text, base + it->second[c.row]});
      }
    }

    if (static_cast<int>(expansions.size()) > width) {
      std::partial_sort(expansions.begin(), expansions.begin() + width,
                        expansions.end(), expansion_before);
      expansions.resize(width);
    } else {
      std::sort(expansions.begin(), expansions.end(), expansion_before);
    }

    std::vector<Hyp> next;
    for (const Expansion& e : expansions) {
      Hyp h = live[e.parent];
      h.stack = stack_after(stack_enc, h.stack, model, h.config, e.op, e.token);
      h.config.apply(e.op, e.token);
      h.lp = e.lp;
      h.steps.push_back({e.op, e.token});
      if (h.config.complete()) {
        LfPtr lf = h.config.result();
        std::string text = print_funql(lf);
        auto it = finished.find(text);
        if (it == finished.end() || h.lp > it->second.log_prob) {
          Candidate c;
          c.lf = lf;
          c.lf_text = text;
          c.derivation = {model.cfg.mode, h.steps};
          c.log_prob = h.lp;
          finished[text] = std::move(c);
        }
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }

  std::vector<Candidate> out;
  out.reserve(finished.size());
  for (auto& [text, cand] : finished) {
    cand.denotation = execute(cand.lf, kb);
    out.push_back(std::move(cand));
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.lf_text < b.lf_text;
  });
  if (static_cast<int>(out.size()) > width) out.resize(width);
  return out;
}

Derivation greedy_decode(const Model& model, const KnowledgeBase& kb,
                         const std::vector<std::string>& tokens,
                         const std::vector<std::string>& entity_candidates) {
  std::vector<Candidate> c = beam_decode(model, kb, tokens, 1, entity_candidates);
  if (c.empty()) throw IllegalTransitionError("decode stall: no candidate");
  return c.front().derivation;
}

std::vector<AttentionTrace> trace_derivation(
    const Model& model, const KnowledgeBase& kb,
    const std::vector<std::string>& tokens, const Derivation& derivation,
    const std::vector<std::string>& entity_candidates) {
  EncodedUtteranceV enc = encode_utterance_values(
      model, [&] {
        std::vector<int> ids(tokens.size());
        for (std::size_t i = 0; i < tokens.size(); ++i)
          ids[i] = model.words.lookup(lowercase(tokens[i]));
        return ids;
      }());
  TokenPools pools = build_token_pools(model, kb, tokens, entity_candidates);
  StackEncoderV stack_enc(model);

  Limits limits = model.cfg.limits;
  limits.max_terminals = static_cast<int>(tokens.size());
  Config config(derivation.mode, limits, pools.availability());
  StackEncoderV::Snapshot snap = stack_enc.initial();

  std::vector<AttentionTrace> traces;
  int step = 0;
  for (const Step& st : derivation.steps) {
    const std::vector<real>& s = stack_enc.state(snap);
    std::vector<real> scores = attention_scores_values(model, enc, s);
    AttentionTrace t;
    t.step = step++;
    if (op_emits_token(st.op)) {
      t.kind = attention_name(model.cfg.attention);
      token_context_values(model, scores, enc.buffer, &t.weights);
    } else {
      t.kind = "soft";
      soft_attend_values(scores, enc.buffer, &t.weights);
    }
    traces.push_back(std::move(t));
    snap = stack_after(stack_enc, snap, model, config, st.op, st.token);
    config.apply(st.op, st.token);
  }
  return traces;
}

}  // namespace semparse
