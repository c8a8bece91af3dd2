#pragma once

#include <string>
#include <vector>

#include "semparse/attention.hpp"
#include "semparse/execute.hpp"
#include "semparse/kb.hpp"
#include "semparse/model.hpp"
#include "semparse/transitions.hpp"

namespace semparse {

// Token candidates a decoding step may emit, one pool per grammar category.
// Rows index the token embedding and output projection; unseen number
// literals share the reserved fallback row.
struct TokenCandidate {
  std::string text;
  int row = 0;
};

struct TokenPools {
  std::vector<TokenCandidate> entities;
  std::vector<TokenCandidate> numbers;
  std::vector<TokenCandidate> relations;

  TokenAvailability availability() const {
    return {!entities.empty(), !numbers.empty(), !relations.empty()};
  }
  const std::vector<TokenCandidate>& for_constraint(TokenConstraint c) const;
};

// Entities come from the candidate list when nonempty (unknown ids are
// dropped), otherwise the whole KB; numbers are the utterance's digit
// tokens; relations are the whole KB inventory.
TokenPools build_token_pools(const Model& model, const KnowledgeBase& kb,
                             const std::vector<std::string>& utterance_tokens,
                             const std::vector<std::string>& entity_candidates);

struct Candidate {
  LfPtr lf;
  std::string lf_text;
  Derivation derivation;
  real log_prob = 0;
  Denotation denotation;
};

// Fixed-width beam over joint action+token expansions. Every returned
// logical form type-checks and was executed against the KB; duplicates that
// reach the same form through different derivations keep the best score.
// Results are sorted by log-prob descending (ties by text).
std::vector<Candidate> beam_decode(const Model& model, const KnowledgeBase& kb,
                                   const std::vector<std::string>& tokens,
                                   int width,
                                   const std::vector<std::string>&
                                       entity_candidates = {});

// Greedy = width-1 beam; returns the single surviving derivation.
Derivation greedy_decode(const Model& model, const KnowledgeBase& kb,
                         const std::vector<std::string>& tokens,
                         const std::vector<std::string>& entity_candidates = {});

// Replays a derivation in inference mode and records the token-prediction
// attention at each step (the action side's soft weights when the step
// emits no token).
std::vector<AttentionTrace> trace_derivation(
    const Model& model, const KnowledgeBase& kb,
    const std::vector<std::string>& tokens, const Derivation& derivation,
    const std::vector<std::string>& entity_candidates = {});

}  // namespace semparse
