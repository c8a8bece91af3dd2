#pragma once

#include <set>
#include <string>
#include <vector>

#include "semparse/decode.hpp"
#include "semparse/execute.hpp"
#include "semparse/funql.hpp"
#include "semparse/model.hpp"
#include "semparse/text.hpp"

namespace semparse {

// Log-linear candidate ranker over hand-built features:
//   0 cosine(mean utterance embedding, mean logical-form embedding)
//   1 the same cosine over lemmatized tokens
//   2 token overlap count between utterance and logical form
//   3 lemmatized token overlap count
//   4 cosine(question-word embedding, logical-form embedding)
//   5 cosine(question-word embedding, head-relation embedding)
//   6 cosine(question-word embedding, answer-type embedding), the answer
//     type being the last dot-separated segment of the head relation
//   7 denotation size
// Stop words are removed before the cosine features.
constexpr int kRankerFeatureCount = 8;

struct RankerResources {
  std::set<std::string> stopwords;
  std::vector<LemmaRule> lemma_rules;
};

struct RankerModel {
  std::vector<real> weights = std::vector<real>(kRankerFeatureCount, real(0));
};

std::vector<real> ranker_features(const Model& model,
                                  const std::vector<std::string>& utterance,
                                  const LfPtr& lf, const Denotation& denotation,
                                  const RankerResources& resources);

// Highest-scoring candidate; ties break on parser log-prob, then on the
// printed form. Throws EmptyCandidatesError on an empty list.
const Candidate& rank(const std::vector<Candidate>& candidates,
                      const RankerModel& ranker,
                      const std::vector<std::vector<real>>& features);

// One gradient-ascent step on log sum of consistent candidates' softmax
// probabilities; a no-op when no candidate is consistent.
void ranker_update(RankerModel& ranker,
                   const std::vector<std::vector<real>>& features,
                   const std::vector<unsigned char>& consistent,
                   real learning_rate);

}  // namespace semparse
