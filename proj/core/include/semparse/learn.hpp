#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "semparse/decode.hpp"
#include "semparse/execute.hpp"
#include "semparse/kb.hpp"
#include "semparse/linker.hpp"
#include "semparse/model.hpp"
#include "semparse/ranker.hpp"
#include "semparse/tape.hpp"
#include "semparse/transitions.hpp"

namespace semparse {

struct SupervisedExample {
  std::vector<std::string> tokens;
  LfPtr lf;
};

struct WeakExample {
  std::vector<std::string> tokens;
  std::vector<Value> denotation;
  bool exactly_one = false;
};

// JSON-lines loaders; data errors cite file and line.
// Supervised: {"utterance": "...", "lf": "..."}
// Weak:       {"utterance": "...", "denotation": [...], "exactly_one": false}
std::vector<SupervisedExample> load_supervised(const std::string& path);
std::vector<WeakExample> load_weak(const std::string& path);
void save_weak(const std::vector<WeakExample>& examples,
               const std::string& path);

// Entity-annotated declarative corpus for distant supervision:
// {"tokens": [...], "mentions": [{"span": [i, j], "entity": "id"}]}
// with half-open token spans.
struct Mention {
  int begin = 0;
  int end = 0;
  std::string entity;
};

struct DistantSentence {
  std::vector<std::string> tokens;
  std::vector<Mention> mentions;
};

std::vector<DistantSentence> load_distant_corpus(const std::string& path);

// One weak example per entity mention: the mention is replaced by a blank
// token, other mentions canonicalize to their entity ids, and the masked
// entity becomes the denotation. A mention preceded by "the" marks the
// example as requiring a singleton answer. Sentences with fewer than two
// mentions are skipped.
std::vector<WeakExample> synth_distant(
    const std::vector<DistantSentence>& corpus, const KnowledgeBase& kb,
    int* skipped = nullptr);

// Per-token-step numbers exposed for estimator verification.
struct ReinforceStepInfo {
  real token_log_prob = 0;      // reward
  real baseline = 0;            // soft-predictor log-likelihood
  real selection_log_prob = 0;  // log p of the attention choice
  int hard_index = -1;
  std::vector<unsigned char> selection;
};

struct ReplayOptions {
  bool training = true;
  std::mt19937_64* rng = nullptr;
  // Estimator tests force the latent attention choices, one entry per
  // token-emitting step in derivation order.
  const std::vector<int>* forced_hard = nullptr;
  const std::vector<std::vector<unsigned char>>* forced_binomial = nullptr;
  bool use_baseline = true;
  real loss_scale = 1;
};

// Teacher-forced negative log-likelihood of a derivation (actions plus
// tokens), including the score-function surrogate for hard and binomial
// attention. The returned node is ready for backward().
NodeId derivation_loss(Tape& tape, Model& model,
                       const std::vector<std::string>& utterance_tokens,
                       const Derivation& derivation, ReplayOptions options,
                       std::vector<ReinforceStepInfo>* info = nullptr);

// Loss plus gradient accumulation for one example; the gold derivation is
// the transition oracle for the configured mode (with the halt step
// appended bottom-up).
real loss_supervised(Model& model, const SupervisedExample& example,
                     std::mt19937_64& rng);

// K-sample Monte Carlo REINFORCE gradient estimate, averaged, accumulated
// into the parameter gradients.
void reinforce_grads(Model& model, const SupervisedExample& example, int K,
                     std::mt19937_64& rng);

Derivation gold_derivation(Mode mode, const LfPtr& lf);

struct TrainReport {
  std::vector<real> epoch_losses;
  real exact_match = 0;
  int epochs_run = 0;
};

// Shuffled single-example momentum SGD; the learning rate halves after
// `lr_patience` epochs without loss improvement. The checkpoint with the
// best dev exact match is retained (the last epoch when dev is empty);
// training stops early once training exact match reaches early_stop_em.
Model train_supervised(const std::vector<SupervisedExample>& train,
                       const std::vector<SupervisedExample>& dev,
                       const KnowledgeBase& kb, const RunConfig& cfg,
                       TrainReport* report = nullptr);

struct WeakTrainResult {
  Model model;
  RankerModel ranker;
  TrainReport report;
};

// Beam search per example, denotation-consistency marking, then a parser
// step on the summed log-likelihood of consistent forms and a ranker step
// on their marginal softmax probability. Examples with no consistent form
// update nothing.
WeakTrainResult train_weak(const std::vector<WeakExample>& train,
                           const KnowledgeBase& kb, const RunConfig& cfg,
                           const RankerResources& resources,
                           const LinkerDictionary* linker = nullptr);

struct EvalExample {
  std::vector<std::string> tokens;
  LfPtr gold_lf;                       // may be null for weak data
  std::vector<Value> gold_denotation;  // executed gold when lf present
  bool exactly_one = false;
};

struct EvalReport {
  int examples = 0;
  real exact_match = 0;  // canonical printed forms
  real average_f1 = 0;   // denotation set overlap
  real answerable = 0;   // beam holds at least one consistent form
  real correct = 0;      // ranked choice executes to the gold denotation
};

EvalReport evaluate(const Model& model, const RankerModel& ranker,
                    const std::vector<EvalExample>& data,
                    const KnowledgeBase& kb, int beam,
                    const RankerResources& resources,
                    const LinkerDictionary* linker = nullptr);

std::vector<EvalExample> eval_examples_from_supervised(
    const std::vector<SupervisedExample>& data, const KnowledgeBase& kb);
std::vector<EvalExample> eval_examples_from_weak(
    const std::vector<WeakExample>& data);

}  // namespace semparse
