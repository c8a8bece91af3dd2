#include "semparse/ranker.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "semparse/errors.hpp"
#include "semparse/kernels.hpp"

namespace semparse {
namespace {

// Splits a symbol like "Barack_Obama" or "people.person.age" into lowercase
// alphanumeric pieces.
std::vector<std::string> symbol_pieces(const std::string& symbol) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : symbol) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      cur.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(ch))));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

void collect_lf_pieces(const LfPtr& lf, std::vector<std::string>* out) {
  switch (lf->kind) {
    case LogicalForm::Kind::Entity: {
      std::vector<std::string> p = symbol_pieces(lf->symbol);
      out->insert(out->end(), p.begin(), p.end());
      return;
    }
    case LogicalForm::Kind::Apply: {
      std::vector<std::string> p = symbol_pieces(lf->symbol);
      out->insert(out->end(), p.begin(), p.end());
      break;
    }
    case LogicalForm::Kind::ArgMax:
    case LogicalForm::Kind::ArgMin:
    case LogicalForm::Kind::Filter: {
      std::vector<std::string> p = symbol_pieces(lf->symbol);
      out->insert(out->end(), p.begin(), p.end());
      if (lf->kind == LogicalForm::Kind::Filter) out->push_back(lf->value);
      break;
    }
    default:
      break;
  }
  for (const LfPtr& c : lf->children) collect_lf_pieces(c, out);
}

// The relation heading the logical form: the outermost Apply / argmax /
// filter relation encountered on a pre-order walk.
std::string head_relation(const LfPtr& lf) {
  if (lf->kind == LogicalForm::Kind::Apply ||
      lf->kind == LogicalForm::Kind::ArgMax ||
      lf->kind == LogicalForm::Kind::ArgMin ||
      lf->kind == LogicalForm::Kind::Filter)
    if (!lf->symbol.empty()) return lf->symbol;
  for (const LfPtr& c : lf->children) {
    std::string r = head_relation(c);
    if (!r.empty()) return r;
  }
  return "";
}

std::vector<real> mean_embedding(const Model& model,
                                 const std::vector<std::string>& words) {
  std::vector<real> out(model.cfg.word_dim, real(0));
  if (words.empty()) return out;
  for (const std::string& w : words) {
    const real* row = model.word_emb.value.data() +
                      static_cast<std::size_t>(model.words.lookup(w)) *
                          model.cfg.word_dim;
    for (int k = 0; k < model.cfg.word_dim; ++k) out[k] += row[k];
  }
  const real inv = real(1) / static_cast<real>(words.size());
  for (real& v : out) v *= inv;
  return out;
}

real cosine(const std::vector<real>& a, const std::vector<real>& b) {
  real num = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return num / (std::sqrt(na) * std::sqrt(nb));
}

real overlap_count(const std::vector<std::string>& a,
                   const std::vector<std::string>& b) {
  std::map<std::string, int> counts;
  for (const std::string& w : a) ++counts[w];
  int overlap = 0;
  std::map<std::string, int> used;
  for (const std::string& w : b) {
    auto it = counts.find(w);
    if (it != counts.end() && used[w] < it->second) {
      ++used[w];
      ++overlap;
    }
  }
  return static_cast<real>(overlap);
}

const char* const kQuestionWords[] = {"what", "who",   "where", "whose",
                                      "date", "which", "count"};

std::vector<std::string> question_words(const std::vector<std::string>& u) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::string w = lowercase(u[i]);
    if (w == "how" && i + 1 < u.size() && lowercase(u[i + 1]) == "many")
      return {"how", "many"};
    for (const char* q : kQuestionWords)
      if (w == q) return {w};
  }
  return {};
}

std::vector<std::string> lemmatized(const std::vector<std::string>& words,
                                    const std::vector<LemmaRule>& rules) {
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const std::string& w : words) out.push_back(lemmatize(w, rules));
  return out;
}

}  // namespace

std::vector<real> ranker_features(const Model& model,
                                  const std::vector<std::string>& utterance,
                                  const LfPtr& lf, const Denotation& denotation,
                                  const RankerResources& resources) {
  std::vector<std::string> uwords;
  for (const std::string& t : utterance) {
    std::string w = lowercase(t);
    if (!resources.stopwords.count(w)) uwords.push_back(w);
  }
  std::vector<std::string> lwords;
  collect_lf_pieces(lf, &lwords);

  std::vector<std::string> ulem = lemmatized(uwords, resources.lemma_rules);
  std::vector<std::string> llem = lemmatized(lwords, resources.lemma_rules);

  std::vector<real> u_emb = mean_embedding(model, uwords);
  std::vector<real> l_emb = mean_embedding(model, lwords);
  std::vector<real> ul_emb = mean_embedding(model, ulem);
  std::vector<real> ll_emb = mean_embedding(model, llem);

  std::vector<std::string> qwords = question_words(utterance);
  std::vector<real> q_emb = mean_embedding(model, qwords);

  std::string head = head_relation(lf);
  std::vector<std::string> head_pieces = symbol_pieces(head);
  std::vector<real> head_emb = mean_embedding(model, head_pieces);

  std::string answer_type;
  if (!head.empty()) {
    std::size_t dot = head.rfind('.');
    answer_type = dot == std::string::npos ? head : head.substr(dot + 1);
  }
  std::vector<std::string> type_pieces = symbol_pieces(answer_type);
  std::vector<real> type_emb = mean_embedding(model, type_pieces);

  std::vector<real> f(kRankerFeatureCount, real(0));
  f[0] = cosine(u_emb, l_emb);
  f[1] = cosine(ul_emb, ll_emb);
  f[2] = overlap_count(uwords, lwords);
  f[3] = overlap_count(ulem, llem);
  f[4] = qwords.empty() ? real(0) : cosine(q_emb, l_emb);
  f[5] = qwords.empty() ? real(0) : cosine(q_emb, head_emb);
  f[6] = qwords.empty() ? real(0) : cosine(q_emb, type_emb);
  f[7] = denotation.failed()
             ? real(0)
             : static_cast<real>(denotation.values.size());
  return f;
}

const Candidate& rank(const std::vector<Candidate>& candidates,
                      const RankerModel& ranker,
                      const std::vector<std::vector<real>>& features) {
  if (candidates.empty()) throw EmptyCandidatesError("no candidates to rank");
  int best = 0;
  real best_score = kernels::dot(ranker.weights.data(), features[0].data(),
                                 kRankerFeatureCount);
  for (int i = 1; i < static_cast<int>(candidates.size()); ++i) {
    real score = kernels::dot(ranker.weights.data(), features[i].data(),
                              kRankerFeatureCount);
    if (score > best_score) {
      best = i;
      best_score = score;
      continue;
    }
    if (score == best_score) {
      const Candidate& a = candidates[i];
      const Candidate& b = candidates[best];
      if (a.log_prob > b.log_prob ||
          (a.log_prob == b.log_prob && a.lf_text < b.lf_text))
        best = i;
    }
  }
  return candidates[best];
}

void ranker_update(RankerModel& ranker,
                   const std::vector<std::vector<real>>& features,
                   const std::vector<unsigned char>& consistent,
                   real learning_rate) {
  const int n = static_cast<int>(features.size());
  bool any = false;
  for (unsigned char c : consistent)
    if (c) any = true;
  if (!any || n == 0) return;

  std::vector<real> scores(n);
  for (int i = 0; i < n; ++i)
    scores[i] = kernels::dot(ranker.weights.data(), features[i].data(),
                             kRankerFeatureCount);
  real mx = *std::max_element(scores.begin(), scores.end());
  std::vector<real> p(n);
  real z = 0;
  for (int i = 0; i < n; ++i) {
    p[i] = std::exp(scores[i] - mx);
    z += p[i];
  }
  real zc = 0;
  for (int i = 0; i < n; ++i) {
    p[i] /= z;
    if (consistent[i]) zc += p[i];
  }

  // d/dtheta log sum_{consistent} p_i = E_q[phi | consistent] - E_p[phi].
  for (int k = 0; k < kRankerFeatureCount; ++k) {
    real grad = 0;
    for (int i = 0; i < n; ++i) {
      if (consistent[i]) grad += (p[i] / zc) * features[i][k];
      grad -= p[i] * features[i][k];
    }
    ranker.weights[k] += learning_rate * grad;
  }
}

}  // namespace semparse
