#pragma once

#include <set>
#include <string>
#include <vector>

namespace semparse {

// Lowercases and splits on whitespace and punctuation. Runs of
// [a-z0-9_] form tokens; a digit run may carry one interior decimal
// point ("3.5" stays whole). Other characters separate tokens.
std::vector<std::string> tokenize(const std::string& text);

std::string lowercase(const std::string& s);

// One stop word per line; blank lines and `#` comments ignored.
std::set<std::string> load_stopwords(const std::string& path);

// Suffix-stripping rules: `suffix<TAB>replacement` per line (replacement
// may be empty and the tab omitted). Longest matching suffix is applied
// once; the stem must keep at least two characters.
struct LemmaRule {
  std::string suffix;
  std::string replacement;
};
std::vector<LemmaRule> load_lemma_rules(const std::string& path);
std::string lemmatize(const std::string& token,
                      const std::vector<LemmaRule>& rules);

}  // namespace semparse
