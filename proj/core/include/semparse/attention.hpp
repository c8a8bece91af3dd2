#pragma once

#include <random>
#include <string>
#include <vector>

#include "semparse/encoder.hpp"
#include "semparse/model.hpp"
#include "semparse/tape.hpp"

namespace semparse {

// Shared additive scorer: u_i = att_V . tanh(att_Wb b_i + att_Ws s).
// The att_Wb b_i products are cached per utterance in EncodedUtterance.
std::vector<NodeId> attention_scores(Tape& tape, Model& model,
                                     const EncodedUtterance& enc, NodeId s);
std::vector<real> attention_scores_values(const Model& model,
                                          const EncodedUtteranceV& enc,
                                          const std::vector<real>& s);

// Soft attention: convex combination of buffer vectors under
// softmax(scores).
struct SoftAttention {
  NodeId weights;  // softmax over positions
  NodeId context;  // attended buffer summary
};
SoftAttention soft_attend(Tape& tape, const std::vector<NodeId>& scores,
                          const std::vector<NodeId>& buffer);
std::vector<real> soft_attend_values(const std::vector<real>& scores,
                                     const std::vector<std::vector<real>>& buffer,
                                     std::vector<real>* weights = nullptr);

// Structured attention: binary linear-chain CRF over attention indicators
// with three features per edge (state, transition, joint); marginals come
// from a log-space forward-backward sweep and are normalized by the global
// partition function only, never across positions.
std::vector<NodeId> crf_marginals(Tape& tape, Model& model,
                                  const std::vector<NodeId>& scores);
std::vector<real> crf_marginals_values(const Model& model,
                                       const std::vector<real>& scores,
                                       std::size_t* edge_ops = nullptr);
NodeId structured_attend(Tape& tape, const std::vector<NodeId>& marginals,
                         const std::vector<NodeId>& buffer);
std::vector<real> structured_attend_values(
    const std::vector<real>& marginals,
    const std::vector<std::vector<real>>& buffer);

// Hard attention: a single position drawn from softmax(scores) during
// training (argmax at inference), trained with a score-function estimator.
struct HardAttention {
  int index = 0;
  NodeId log_prob = -1;  // log p(index | scores)
  NodeId context = -1;   // buffer[index]
};
HardAttention hard_attend(Tape& tape, const std::vector<NodeId>& scores,
                          const std::vector<NodeId>& buffer, bool sample,
                          std::mt19937_64* rng, const int* force = nullptr);
int hard_attend_values(const std::vector<real>& scores);  // argmax position

// Binomial hard attention: independent Bernoulli(logistic(u_i)) indicators;
// the context is the mean of selected buffer vectors. Inference keeps
// positions with probability strictly above one half and falls back to the
// argmax position when nothing is selected.
struct BinomialAttention {
  std::vector<unsigned char> selected;
  NodeId log_prob = -1;  // log p(selection | scores)
  NodeId context = -1;
  bool fallback = false;
};
BinomialAttention binomial_attend(Tape& tape,
                                  const std::vector<NodeId>& scores,
                                  const std::vector<NodeId>& buffer,
                                  bool sample, std::mt19937_64* rng,
                                  const std::vector<unsigned char>* force =
                                      nullptr);
std::vector<real> binomial_attend_values(
    const std::vector<real>& scores,
    const std::vector<std::vector<real>>& buffer,
    std::vector<unsigned char>* selected = nullptr);

// Prediction heads: feats = tanh(feat_W [context; s]), optionally dropped
// out during training, then masked log-softmax over action or token rows.
NodeId prediction_features(Tape& tape, Model& model, NodeId context, NodeId s,
                           bool training, std::mt19937_64* rng);
NodeId action_log_probs(Tape& tape, Model& model, NodeId feats,
                        const std::vector<unsigned char>& legal);
NodeId token_log_probs(Tape& tape, Model& model, NodeId feats,
                       const std::vector<unsigned char>& legal);

std::vector<real> prediction_features_values(const Model& model,
                                             const std::vector<real>& context,
                                             const std::vector<real>& s);
std::vector<real> action_log_probs_values(const Model& model,
                                          const std::vector<real>& feats,
                                          const std::vector<unsigned char>& legal);
std::vector<real> token_log_probs_values(const Model& model,
                                         const std::vector<real>& feats,
                                         const std::vector<unsigned char>& legal);

// One decoding step's attention distribution, for JSON-lines trace output:
// {"step":3,"kind":"soft","weights":[...]}.
struct AttentionTrace {
  int step = 0;
  std::string kind;
  std::vector<real> weights;
};
std::string attention_trace_to_json(const AttentionTrace& t);

}  // namespace semparse
