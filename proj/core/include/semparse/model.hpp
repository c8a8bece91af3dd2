#pragma once

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "semparse/kb.hpp"
#include "semparse/nn.hpp"
#include "semparse/tensor.hpp"
#include "semparse/transitions.hpp"

namespace semparse {

enum class AttentionKind { Soft, Structured, Hard, Binomial };

const char* attention_name(AttentionKind k);
AttentionKind attention_from_name(const std::string& name);

// Experiment settings. Serialized alongside every checkpoint; the text form
// is flat "key = value" lines with '#' comments.
struct RunConfig {
  Mode mode = Mode::TopDown;
  AttentionKind attention = AttentionKind::Soft;
  int word_dim = 50;
  int token_dim = 50;
  int hidden_dim = 150;
  int att_dim = 150;
  int feat_dim = 150;
  real dropout = 0.5;
  real learning_rate = 0.1;
  real momentum = 0.9;
  int lr_patience = 3;  // epochs without improvement before halving
  int epochs = 30;
  int train_beam = 500;
  int test_beam = 300;
  Limits limits;
  std::uint64_t seed = 1;
  real early_stop_em = 1.0;        // stop once training exact match reaches this
  real ranker_learning_rate = 0.01;
  std::string word_vectors;        // optional pretrained embedding file

  std::string to_text() const;
  void set(const std::string& key, const std::string& value);
};

RunConfig load_run_config(const std::string& path);

// Utterance-side vocabulary; id 0 is the unknown word.
struct WordVocab {
  std::vector<std::string> words{"<unk>"};
  std::unordered_map<std::string, int> index;

  int add(const std::string& w);
  int lookup(const std::string& w) const;  // unknown -> 0
  int size() const { return static_cast<int>(words.size()); }
};

// Logical-token vocabulary: operators, relations, entities and number
// literals share one id space (ids index the output projection rows and the
// token embedding table). Id 0 is a generic unknown, id 1 the fallback row
// for number literals never seen in training.
enum class TokenType { Special, Operator, Relation, Entity, Literal };

struct TokenEntry {
  TokenType type = TokenType::Special;
  std::string text;
};

struct TokenVocab {
  std::vector<TokenEntry> entries;
  std::unordered_map<std::string, int> index;

  TokenVocab();
  int add(TokenType type, const std::string& text);
  int lookup(const std::string& text) const;  // unseen literals -> <num>, else <unk>
  int size() const { return static_cast<int>(entries.size()); }
  int unk_id() const { return 0; }
  int num_id() const { return 1; }
};

// All trainable state plus the vocabularies needed to use it.
struct Model {
  RunConfig cfg;
  WordVocab words;
  TokenVocab tokens;

  Tensor word_emb;    // [|words|, word_dim]
  Tensor token_emb;   // [|tokens|, token_dim]
  LstmCell fwd;       // utterance left-to-right
  LstmCell bwd;       // utterance right-to-left
  LstmCell stack;     // derivation stack encoder
  Tensor compose_W;   // subtree composition [token_dim, 2*token_dim]
  Tensor att_V;       // scorer [att_dim]
  Tensor att_Wb;      // scorer [att_dim, 2*hidden]
  Tensor att_Ws;      // scorer [att_dim, hidden]
  Tensor crf_w;       // structured-attention feature weights [3]
  Tensor feat_W;      // prediction features [feat_dim, 2*hidden + hidden]
  Tensor act_W;       // action logits [|actions|, feat_dim]
  Tensor tok_W;       // token logits [|tokens|, feat_dim]

  explicit Model(const RunConfig& config, int n_words, int n_tokens);

  std::vector<Tensor*> parameters();  // fixed registry order
  void init_params(std::mt19937_64& rng);  // uniform(-0.08, 0.08)
  const std::vector<TransitionOp>& actions() const {
    return action_inventory(cfg.mode);
  }
  int n_actions() const { return static_cast<int>(actions().size()); }
};

// Assembles vocabularies from the KB plus the training-side word and
// literal inventories, then allocates parameters (uninitialized).
Model build_model(const RunConfig& cfg, const KnowledgeBase& kb,
                  const std::vector<std::string>& corpus_words,
                  const std::vector<std::string>& corpus_literals);

// Overwrites embedding rows for vocabulary words present in a
// whitespace-separated "word v1 .. vD" file; other rows keep their values.
void load_word_vectors(Model& model, const std::string& path);

void save_checkpoint(const Model& model, const std::string& path,
                     const std::vector<real>& ranker_weights = {});
Model load_checkpoint(const std::string& path,
                      std::vector<real>* ranker_weights = nullptr);

}  // namespace semparse
