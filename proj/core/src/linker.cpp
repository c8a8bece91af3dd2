#include "semparse/linker.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "semparse/errors.hpp"
#include "semparse/text.hpp"

namespace semparse {
namespace {
constexpr int kMaxCandidatesPerSpan = 10;

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return out;
}
}  // namespace

LinkerDictionary load_linker(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open linker dictionary");
  LinkerDictionary dict;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() < 2)
      throw ParseError(path, lineno, "expected 'phrase<TAB>entity...'");
    std::vector<std::string> words = tokenize(fields[0]);
    if (words.empty())
      throw ParseError(path, lineno, "empty phrase");
    std::string key = words[0];
    for (std::size_t i = 1; i < words.size(); ++i) key += " " + words[i];
    auto& targets = dict.phrases[key];
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty())
        throw ParseError(path, lineno, "empty entity id");
      targets.push_back(fields[i]);
    }
    dict.max_phrase_tokens =
        std::max(dict.max_phrase_tokens, static_cast<int>(words.size()));
  }
  return dict;
}

std::vector<std::string> entity_mask(const std::vector<std::string>& tokens,
                                     const LinkerDictionary& dict) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  const int n = static_cast<int>(tokens.size());
  int i = 0;
  while (i < n) {
    int matched = 0;
    for (int len = std::min(dict.max_phrase_tokens, n - i); len >= 1; --len) {
      std::string key = lowercase(tokens[i]);
      for (int k = 1; k < len; ++k) key += " " + lowercase(tokens[i + k]);
      auto it = dict.phrases.find(key);
      if (it == dict.phrases.end()) continue;
      int kept = 0;
      for (const std::string& ent : it->second) {
        if (kept == kMaxCandidatesPerSpan) break;
        ++kept;
        if (seen.insert(ent).second) out.push_back(ent);
      }
      matched = len;
      break;
    }
    i += matched > 0 ? matched : 1;
  }
  return out;
}

}  // namespace semparse
