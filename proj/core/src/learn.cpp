#include "semparse/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "semparse/attention.hpp"
#include "semparse/encoder.hpp"
#include "semparse/errors.hpp"
#include "semparse/text.hpp"

namespace semparse {
namespace {

std::vector<std::string> utterance_field(const nlohmann::json& j) {
  const auto& u = j.at("utterance");
  if (u.is_array()) {
    std::vector<std::string> tokens;
    for (const auto& t : u) tokens.push_back(t.get<std::string>());
    return tokens;
  }
  return tokenize(u.get<std::string>());
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

int last_open_index(const std::vector<StackItem>& stack) {
  for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i)
    if (stack[i].kind == StackItem::Kind::Open) return i;
  return -1;
}

// Mirrors one transition on the differentiable stack encoder; `before` is
// the configuration the step applies to.
void apply_stack_tape(Tape& tape, Model& model, StackEncoder& enc,
                      const Config& before, const Step& step) {
  switch (step.op.kind) {
    case TransitionOp::Kind::NT: {
      int row = step.op.tag == SymbolTag::Relation
                    ? model.tokens.lookup(*step.token)
                    : model.tokens.lookup(symbol_tag_name(step.op.tag));
      enc.push(token_embedding(tape, model, row));
      return;
    }
    case TransitionOp::Kind::TER:
      enc.push(token_embedding(tape, model,
                               model.tokens.lookup(*step.token)));
      return;
    case TransitionOp::Kind::RED: {
      int open = last_open_index(before.stack());
      int n = static_cast<int>(before.stack().size()) - open - 1;
      enc.reduce(n, -1, true);
      return;
    }
    case TransitionOp::Kind::NTRED: {
      int row = step.op.tag == SymbolTag::Relation
                    ? model.tokens.lookup(*step.token)
                    : model.tokens.lookup(symbol_tag_name(step.op.tag));
      enc.reduce(ntred_pop_count(step.op.tag),
                 token_embedding(tape, model, row), false);
      return;
    }
    case TransitionOp::Kind::STOP:
      return;
  }
}

struct TrainMasks {
  std::vector<unsigned char> entity, number, relation;

  const std::vector<unsigned char>& for_constraint(TokenConstraint c) const {
    static const std::vector<unsigned char> kNone;
    switch (c) {
      case TokenConstraint::AnyEntity: return entity;
      case TokenConstraint::NumberLiteral: return number;
      case TokenConstraint::AnyRelation: return relation;
      case TokenConstraint::None: return kNone;
    }
    return kNone;
  }
};

// Teacher-forcing masks: whole vocabulary sections plus the utterance's
// digit tokens; gold rows are always included so the oracle stays legal.
TrainMasks build_train_masks(const Model& model,
                             const std::vector<std::string>& utterance,
                             const Derivation& derivation) {
  const int n = model.tokens.size();
  TrainMasks m;
  m.entity.assign(n, 0);
  m.number.assign(n, 0);
  m.relation.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    switch (model.tokens.entries[i].type) {
      case TokenType::Entity: m.entity[i] = 1; break;
      case TokenType::Relation: m.relation[i] = 1; break;
      default: break;
    }
  }
  for (const std::string& t : utterance)
    if (is_number_literal(t)) m.number[model.tokens.lookup(t)] = 1;
  for (const Step& step : derivation.steps) {
    if (!step.token) continue;
    int row = model.tokens.lookup(*step.token);
    if (step.op.kind == TransitionOp::Kind::TER &&
        step.op.tag == SymbolTag::Entity) {
      if (is_number_literal(*step.token)) m.number[row] = 1;
      else m.entity[row] = 1;
    } else {
      m.relation[row] = 1;
    }
  }
  return m;
}

bool mask_nonempty(const std::vector<unsigned char>& m) {
  return std::find(m.begin(), m.end(), 1) != m.end();
}

}  // namespace

std::vector<SupervisedExample> load_supervised(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open dataset");
  std::vector<SupervisedExample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      SupervisedExample ex;
      ex.tokens = utterance_field(j);
      if (ex.tokens.empty()) throw ParseError(path, lineno, "empty utterance");
      ex.lf = parse_funql(j.at("lf").get<std::string>());
      type_check(ex.lf);
      out.push_back(std::move(ex));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return out;
}

std::vector<WeakExample> load_weak(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open dataset");
  std::vector<WeakExample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      WeakExample ex;
      ex.tokens = utterance_field(j);
      if (ex.tokens.empty()) throw ParseError(path, lineno, "empty utterance");
      for (const auto& v : j.at("denotation")) {
        std::string s = v.is_string() ? v.get<std::string>()
                                      : nlohmann::to_string(v);
        ex.denotation.push_back(is_number_literal(s)
                                    ? Value::number(std::stod(s))
                                    : Value::entity(s));
      }
      if (ex.denotation.empty())
        throw ParseError(path, lineno, "empty denotation");
      ex.exactly_one = j.value("exactly_one", false);
      out.push_back(std::move(ex));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return out;
}

void save_weak(const std::vector<WeakExample>& examples,
               const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open output file");
  for (const WeakExample& ex : examples) {
    nlohmann::json j;
    j["utterance"] = ex.tokens;
    nlohmann::json d = nlohmann::json::array();
    for (const Value& v : ex.denotation) d.push_back(value_to_string(v));
    j["denotation"] = std::move(d);
    j["exactly_one"] = ex.exactly_one;
    out << j.dump() << "\n";
  }
}

std::vector<DistantSentence> load_distant_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open corpus");
  std::vector<DistantSentence> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      DistantSentence s;
      for (const auto& t : j.at("tokens"))
        s.tokens.push_back(t.get<std::string>());
      for (const auto& m : j.at("mentions")) {
        Mention mention;
        mention.begin = m.at("span").at(0).get<int>();
        mention.end = m.at("span").at(1).get<int>();
        mention.entity = m.at("entity").get<std::string>();
        if (mention.begin < 0 || mention.end <= mention.begin ||
            mention.end > static_cast<int>(s.tokens.size()))
          throw ParseError(path, lineno, "mention span out of range");
        s.mentions.push_back(std::move(mention));
      }
      out.push_back(std::move(s));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(path, lineno, e.what());
    }
  }
  return out;
}

std::vector<WeakExample> synth_distant(
    const std::vector<DistantSentence>& corpus, const KnowledgeBase& kb,
    int* skipped) {
  (void)kb;
  std::vector<WeakExample> out;
  int skip = 0;
  for (const DistantSentence& s : corpus) {
    if (s.mentions.size() < 2) {
      ++skip;
      continue;
    }
    std::vector<Mention> mentions = s.mentions;
    std::sort(mentions.begin(), mentions.end(),
              [](const Mention& a, const Mention& b) {
                return a.begin < b.begin;
              });
    for (std::size_t i = 1; i < mentions.size(); ++i)
      if (mentions[i].begin < mentions[i - 1].end)
        throw IntegrityError("corpus", 0, "overlapping entity mentions");

    for (std::size_t masked = 0; masked < mentions.size(); ++masked) {
      WeakExample ex;
      int pos = 0;
      for (std::size_t k = 0; k < mentions.size(); ++k) {
        for (; pos < mentions[k].begin; ++pos)
          ex.tokens.push_back(s.tokens[pos]);
        ex.tokens.push_back(k == masked ? "_blank_" : mentions[k].entity);
        pos = mentions[k].end;
      }
      for (; pos < static_cast<int>(s.tokens.size()); ++pos)
        ex.tokens.push_back(s.tokens[pos]);
      ex.denotation.push_back(Value::entity(mentions[masked].entity));
      ex.exactly_one = mentions[masked].begin > 0 &&
                       lowercase(s.tokens[mentions[masked].begin - 1]) == "the";
      out.push_back(std::move(ex));
    }
  }
  if (skipped) *skipped = skip;
  return out;
}

Derivation gold_derivation(Mode mode, const LfPtr& lf) {
  Derivation d = mode == Mode::TopDown ? td_oracle(lf) : bu_oracle(lf);
  if (mode == Mode::BottomUp) d.steps.push_back({TransitionOp::stop(), std::nullopt});
  return d;
}

NodeId derivation_loss(Tape& tape, Model& model,
                       const std::vector<std::string>& utterance_tokens,
                       const Derivation& derivation, ReplayOptions options,
                       std::vector<ReinforceStepInfo>* info) {
  std::vector<int> word_ids(utterance_tokens.size());
  for (std::size_t i = 0; i < utterance_tokens.size(); ++i)
    word_ids[i] = model.words.lookup(lowercase(utterance_tokens[i]));
  EncodedUtterance enc = encode_utterance(tape, model, word_ids);

  TrainMasks masks = build_train_masks(model, utterance_tokens, derivation);
  TokenAvailability avail{mask_nonempty(masks.entity),
                          mask_nonempty(masks.number),
                          mask_nonempty(masks.relation)};
  Limits limits = model.cfg.limits;
  limits.max_terminals = -1;
  Config config(derivation.mode, limits, avail);
  StackEncoder stack_enc(tape, model);

  const bool reinforce = model.cfg.attention == AttentionKind::Hard ||
                         model.cfg.attention == AttentionKind::Binomial;
  const int n_actions = model.n_actions();
  std::vector<NodeId> terms;
  int token_step = 0;

  for (const Step& step : derivation.steps) {
    NodeId s = stack_enc.state();
    std::vector<NodeId> scores = attention_scores(tape, model, enc, s);
    SoftAttention soft = soft_attend(tape, scores, enc.buffer);
    NodeId feats_a = prediction_features(tape, model, soft.context, s,
                                         options.training, options.rng);

    std::vector<TransitionOp> legal = config.legal_transitions();
    std::vector<unsigned char> amask(n_actions, 0);
    for (const TransitionOp& op : legal)
      amask[action_index(derivation.mode, op)] = 1;
    NodeId alp = action_log_probs(tape, model, feats_a, amask);
    terms.push_back(tape.scale(
        tape.pick(alp, action_index(derivation.mode, step.op)), -1));

    if (op_emits_token(step.op)) {
      TokenConstraint constraint = config.token_constraint(step.op);
      int gold_row = model.tokens.lookup(*step.token);
      std::vector<unsigned char> tmask = masks.for_constraint(constraint);
      tmask[gold_row] = 1;

      NodeId ctx_y = -1;
      NodeId sel_logp = -1;
      ReinforceStepInfo step_info;
      switch (model.cfg.attention) {
        case AttentionKind::Soft:
          ctx_y = soft.context;
          break;
        case AttentionKind::Structured:
          ctx_y = structured_attend(tape, crf_marginals(tape, model, scores),
                                    enc.buffer);
          break;
        case AttentionKind::Hard: {
          const int* force = options.forced_hard
                                 ? &(*options.forced_hard)[token_step]
                                 : nullptr;
          HardAttention hard =
              hard_attend(tape, scores, enc.buffer, options.training,
                          options.rng, force);
          ctx_y = hard.context;
          sel_logp = hard.log_prob;
          step_info.hard_index = hard.index;
          break;
        }
        case AttentionKind::Binomial: {
          const std::vector<unsigned char>* force =
              options.forced_binomial ? &(*options.forced_binomial)[token_step]
                                      : nullptr;
          BinomialAttention bin =
              binomial_attend(tape, scores, enc.buffer, options.training,
                              options.rng, force);
          ctx_y = bin.context;
          sel_logp = bin.log_prob;
          step_info.selection = bin.selected;
          break;
        }
      }

      NodeId feats_y = prediction_features(tape, model, ctx_y, s,
                                           options.training, options.rng);
      NodeId tlp = token_log_probs(tape, model, feats_y, tmask);
      NodeId gold_lp = tape.pick(tlp, gold_row);
      terms.push_back(tape.scale(gold_lp, -1));

      if (reinforce && sel_logp >= 0) {
        const real reward = tape.scalar(gold_lp);
        real baseline = 0;
        if (options.use_baseline) {
          std::vector<real> feats_b = prediction_features_values(
              model, tape.value(soft.context), tape.value(s));
          baseline =
              token_log_probs_values(model, feats_b, tmask)[gold_row];
        }
        terms.push_back(tape.scale(sel_logp, -(reward - baseline)));
        if (info) {
          step_info.token_log_prob = reward;
          step_info.baseline = baseline;
          step_info.selection_log_prob = tape.scalar(sel_logp);
          info->push_back(std::move(step_info));
        }
      }
      ++token_step;
    }

    apply_stack_tape(tape, model, stack_enc, config, step);
    config.apply(step.op, step.token);
  }

  NodeId loss = tape.sum(terms);
  if (options.loss_scale != 1) loss = tape.scale(loss, options.loss_scale);
  return loss;
}

real loss_supervised(Model& model, const SupervisedExample& example,
                     std::mt19937_64& rng) {
  Tape tape;
  ReplayOptions options;
  options.training = true;
  options.rng = &rng;
  NodeId loss = derivation_loss(
      tape, model, example.tokens,
      gold_derivation(model.cfg.mode, example.lf), options);
  tape.backward(loss);
  return tape.scalar(loss);
}

void reinforce_grads(Model& model, const SupervisedExample& example, int K,
                     std::mt19937_64& rng) {
  for (int k = 0; k < K; ++k) {
    Tape tape;
    ReplayOptions options;
    options.training = true;
    options.rng = &rng;
    options.loss_scale = real(1) / static_cast<real>(K);
    NodeId loss = derivation_loss(
        tape, model, example.tokens,
        gold_derivation(model.cfg.mode, example.lf), options);
    tape.backward(loss);
  }
}

namespace {

std::vector<std::vector<real>> snapshot_params(Model& model) {
  std::vector<std::vector<real>> out;
  for (Tensor* t : model.parameters()) out.push_back(t->value);
  return out;
}

void restore_params(Model& model, const std::vector<std::vector<real>>& snap) {
  std::vector<Tensor*> params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = snap[i];
}

real exact_match_rate(const Model& model, const KnowledgeBase& kb,
                      const std::vector<SupervisedExample>& data) {
  if (data.empty()) return 0;
  int hits = 0;
  for (const SupervisedExample& ex : data) {
    std::vector<Candidate> c = beam_decode(model, kb, ex.tokens, 1);
    if (!c.empty() && c.front().lf_text == print_funql(ex.lf)) ++hits;
  }
  return static_cast<real>(hits) / static_cast<real>(data.size());
}

// Collects words and digit literals that seed the vocabularies.
void collect_literals(const LfPtr& lf, std::vector<std::string>* out) {
  if (lf->kind == LogicalForm::Kind::Filter) out->push_back(lf->value);
  for (const LfPtr& c : lf->children) collect_literals(c, out);
}

}  // namespace

Model train_supervised(const std::vector<SupervisedExample>& train,
                       const std::vector<SupervisedExample>& dev,
                       const KnowledgeBase& kb, const RunConfig& cfg,
                       TrainReport* report) {
  if (train.empty()) throw EmptyCandidatesError("empty training set");
  std::vector<std::string> words, literals;
  for (const auto* split : {&train, &dev})
    for (const SupervisedExample& ex : *split) {
      for (const std::string& t : ex.tokens) {
        words.push_back(lowercase(t));
        if (is_number_literal(t)) literals.push_back(t);
      }
      collect_literals(ex.lf, &literals);
    }

  Model model = build_model(cfg, kb, words, literals);
  std::mt19937_64 rng(cfg.seed);
  model.init_params(rng);
  if (!cfg.word_vectors.empty()) load_word_vectors(model, cfg.word_vectors);

  MomentumSGD optimizer(cfg.learning_rate, cfg.momentum);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  real best_metric = -std::numeric_limits<real>::infinity();
  std::vector<std::vector<real>> best_snapshot;
  real best_loss = std::numeric_limits<real>::infinity();
  int stall = 0;
  TrainReport local;
  TrainReport& rep = report ? *report : local;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    real loss_sum = 0;
    for (std::size_t idx : order) {
      loss_sum += loss_supervised(model, train[idx], rng);
      optimizer.step(model.parameters());
    }
    const real epoch_loss = loss_sum / static_cast<real>(train.size());
    rep.epoch_losses.push_back(epoch_loss);
    rep.epochs_run = epoch + 1;

    if (epoch_loss < best_loss - real(1e-9)) {
      best_loss = epoch_loss;
      stall = 0;
    } else if (++stall >= cfg.lr_patience) {
      optimizer.halve_learning_rate();
      stall = 0;
    }

    if (!dev.empty()) {
      real dev_em = exact_match_rate(model, kb, dev);
      if (dev_em > best_metric) {
        best_metric = dev_em;
        best_snapshot = snapshot_params(model);
      }
    }
    if (cfg.early_stop_em > 0) {
      real train_em = exact_match_rate(model, kb, train);
      rep.exact_match = train_em;
      if (train_em >= cfg.early_stop_em) break;
    }
  }

  if (!dev.empty() && !best_snapshot.empty()) restore_params(model, best_snapshot);
  if (cfg.early_stop_em <= 0) rep.exact_match = exact_match_rate(model, kb, train);
  return model;
}

WeakTrainResult train_weak(const std::vector<WeakExample>& train,
                           const KnowledgeBase& kb, const RunConfig& cfg,
                           const RankerResources& resources,
                           const LinkerDictionary* linker) {
  if (train.empty()) throw EmptyCandidatesError("empty training set");
  std::vector<std::string> words, literals;
  for (const WeakExample& ex : train)
    for (const std::string& t : ex.tokens) {
      words.push_back(lowercase(t));
      if (is_number_literal(t)) literals.push_back(t);
    }

  Model model = build_model(cfg, kb, words, literals);
  std::mt19937_64 rng(cfg.seed);
  model.init_params(rng);
  if (!cfg.word_vectors.empty()) load_word_vectors(model, cfg.word_vectors);

  MomentumSGD optimizer(cfg.learning_rate, cfg.momentum);
  RankerModel ranker;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  real best_loss = std::numeric_limits<real>::infinity();
  int stall = 0;
  TrainReport rep;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    real loss_sum = 0;
    for (std::size_t idx : order) {
      const WeakExample& ex = train[idx];
      std::vector<std::string> candidates_ents =
          linker ? entity_mask(ex.tokens, *linker) : std::vector<std::string>{};
      std::vector<Candidate> cands =
          beam_decode(model, kb, ex.tokens, cfg.train_beam, candidates_ents);

      Denotation gold = Denotation::of(
          std::set<Value>(ex.denotation.begin(), ex.denotation.end()));
      std::vector<unsigned char> consistent(cands.size(), 0);
      bool any = false;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        bool ok = cands[i].denotation == gold &&
                  (!ex.exactly_one || cands[i].denotation.values.size() == 1);
        consistent[i] = ok ? 1 : 0;
        any = any || ok;
      }
      if (!any) continue;  // no parameter may change

      for (std::size_t i = 0; i < cands.size(); ++i) {
        if (!consistent[i]) continue;
        Tape tape;
        ReplayOptions options;
        options.training = true;
        options.rng = &rng;
        NodeId loss = derivation_loss(tape, model, ex.tokens,
                                      cands[i].derivation, options);
        tape.backward(loss);
        loss_sum += tape.scalar(loss);
      }
      optimizer.step(model.parameters());

      std::vector<std::vector<real>> features;
      features.reserve(cands.size());
      for (const Candidate& c : cands)
        features.push_back(
            ranker_features(model, ex.tokens, c.lf, c.denotation, resources));
      ranker_update(ranker, features, consistent, cfg.ranker_learning_rate);
    }
    rep.epoch_losses.push_back(loss_sum);
    rep.epochs_run = epoch + 1;
    if (loss_sum < best_loss - real(1e-9)) {
      best_loss = loss_sum;
      stall = 0;
    } else if (++stall >= cfg.lr_patience) {
      optimizer.halve_learning_rate();
      stall = 0;
    }
  }

  EvalReport eval = evaluate(model, ranker, eval_examples_from_weak(train), kb,
                             cfg.test_beam, resources, linker);
  rep.exact_match = eval.correct;
  return {std::move(model), std::move(ranker), std::move(rep)};
}

std::vector<EvalExample> eval_examples_from_supervised(
    const std::vector<SupervisedExample>& data, const KnowledgeBase& kb) {
  std::vector<EvalExample> out;
  for (const SupervisedExample& ex : data) {
    EvalExample e;
    e.tokens = ex.tokens;
    e.gold_lf = ex.lf;
    Denotation d = execute(ex.lf, kb);
    if (!d.failed())
      e.gold_denotation.assign(d.values.begin(), d.values.end());
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<EvalExample> eval_examples_from_weak(
    const std::vector<WeakExample>& data) {
  std::vector<EvalExample> out;
  for (const WeakExample& ex : data) {
    EvalExample e;
    e.tokens = ex.tokens;
    e.gold_denotation = ex.denotation;
    e.exactly_one = ex.exactly_one;
    out.push_back(std::move(e));
  }
  return out;
}

EvalReport evaluate(const Model& model, const RankerModel& ranker,
                    const std::vector<EvalExample>& data,
                    const KnowledgeBase& kb, int beam,
                    const RankerResources& resources,
                    const LinkerDictionary* linker) {
  EvalReport rep;
  rep.examples = static_cast<int>(data.size());
  if (data.empty()) return rep;

  real em = 0, f1 = 0, answerable = 0, correct = 0;
  for (const EvalExample& ex : data) {
    std::vector<std::string> ents =
        linker ? entity_mask(ex.tokens, *linker) : std::vector<std::string>{};
    std::vector<Candidate> cands = beam_decode(model, kb, ex.tokens, beam, ents);
    if (cands.empty()) continue;

    Denotation gold = Denotation::of(std::set<Value>(
        ex.gold_denotation.begin(), ex.gold_denotation.end()));
    bool any_consistent = false;
    for (const Candidate& c : cands)
      if (c.denotation == gold &&
          (!ex.exactly_one || c.denotation.values.size() == 1)) {
        any_consistent = true;
        break;
      }
    if (any_consistent) answerable += 1;

    std::vector<std::vector<real>> features;
    features.reserve(cands.size());
    for (const Candidate& c : cands)
      features.push_back(
          ranker_features(model, ex.tokens, c.lf, c.denotation, resources));
    const Candidate& best = rank(cands, ranker, features);

    if (ex.gold_lf && best.lf_text == print_funql(ex.gold_lf)) em += 1;
    if (best.denotation == gold) correct += 1;

    if (!best.denotation.failed()) {
      std::size_t inter = 0;
      for (const Value& v : best.denotation.values)
        if (gold.values.count(v)) ++inter;
      if (inter > 0) {
        real p = static_cast<real>(inter) /
                 static_cast<real>(best.denotation.values.size());
        real r = static_cast<real>(inter) /
                 static_cast<real>(gold.values.size());
        f1 += 2 * p * r / (p + r);
      }
    }
  }
  const real n = static_cast<real>(data.size());
  rep.exact_match = em / n;
  rep.average_f1 = f1 / n;
  rep.answerable = answerable / n;
  rep.correct = correct / n;
  return rep;
}

}  // namespace semparse
