#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace semparse {

// Surface-phrase dictionary for entity candidate generation. Phrases are
// lowercased space-joined token sequences; each maps to a ranked entity
// list. Loaded from TSV lines "phrase<TAB>entity[<TAB>entity...]"; repeated
// phrases append in file order.
struct LinkerDictionary {
  std::unordered_map<std::string, std::vector<std::string>> phrases;
  int max_phrase_tokens = 0;

  bool empty() const { return phrases.empty(); }
};

LinkerDictionary load_linker(const std::string& path);

// Longest-match scan over the utterance; overlapping spans resolve to the
// longest (leftmost-first) span. At most ten candidates are kept per
// matched span; the returned list is deduplicated in match order. An empty
// result means the decoder falls back to the full entity vocabulary.
std::vector<std::string> entity_mask(const std::vector<std::string>& tokens,
                                     const LinkerDictionary& dict);

}  // namespace semparse
