#include "semparse/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "semparse/errors.hpp"

namespace semparse {

std::string lowercase(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

namespace {

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::string low = lowercase(text);
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::size_t n = low.size();
  while (i < n) {
    if (!word_char(low[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    bool seen_dot = false;
    while (i < n) {
      if (word_char(low[i])) {
        ++i;
      } else if (low[i] == '.' && !seen_dot && i > start && digit(low[i - 1]) &&
                 i + 1 < n && digit(low[i + 1])) {
        seen_dot = true;
        ++i;
      } else {
        break;
      }
    }
    out.push_back(low.substr(start, i - start));
  }
  return out;
}

std::set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open stop-word file: " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.insert(lowercase(line));
  }
  return out;
}

std::vector<LemmaRule> load_lemma_rules(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lemma rule file: " + path);
  std::vector<LemmaRule> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::size_t tab = line.find('\t');
    LemmaRule rule;
    if (tab == std::string::npos) {
      rule.suffix = lowercase(line);
    } else {
      rule.suffix = lowercase(line.substr(0, tab));
      rule.replacement = lowercase(line.substr(tab + 1));
    }
    out.push_back(std::move(rule));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const LemmaRule& a, const LemmaRule& b) {
                     return a.suffix.size() > b.suffix.size();
                   });
  return out;
}

std::string lemmatize(const std::string& token,
                      const std::vector<LemmaRule>& rules) {
  for (const LemmaRule& r : rules) {
    if (token.size() <= r.suffix.size()) continue;
    if (token.compare(token.size() - r.suffix.size(), r.suffix.size(),
                      r.suffix) != 0)
      continue;
    std::string stem =
        token.substr(0, token.size() - r.suffix.size()) + r.replacement;
    if (stem.size() >= 2) return stem;
  }
  return token;
}

}  // namespace semparse
