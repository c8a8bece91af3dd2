#include "semparse/model.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "semparse/errors.hpp"

namespace semparse {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

const char* token_type_code(TokenType t) {
  switch (t) {
    case TokenType::Special: return "S";
    case TokenType::Operator: return "O";
    case TokenType::Relation: return "R";
    case TokenType::Entity: return "E";
    case TokenType::Literal: return "L";
  }
  return "S";
}

TokenType token_type_from_code(const std::string& c) {
  if (c == "S") return TokenType::Special;
  if (c == "O") return TokenType::Operator;
  if (c == "R") return TokenType::Relation;
  if (c == "E") return TokenType::Entity;
  if (c == "L") return TokenType::Literal;
  throw ParseError("checkpoint", 0, "unknown token type code '" + c + "'");
}

}  // namespace

const char* attention_name(AttentionKind k) {
  switch (k) {
    case AttentionKind::Soft: return "soft";
    case AttentionKind::Structured: return "structured";
    case AttentionKind::Hard: return "hard";
    case AttentionKind::Binomial: return "binomial";
  }
  return "soft";
}

AttentionKind attention_from_name(const std::string& name) {
  if (name == "soft") return AttentionKind::Soft;
  if (name == "structured") return AttentionKind::Structured;
  if (name == "hard") return AttentionKind::Hard;
  if (name == "binomial") return AttentionKind::Binomial;
  throw ParseError("config", 0, "unknown attention kind '" + name + "'");
}

std::string RunConfig::to_text() const {
  std::ostringstream out;
  out << "mode = " << mode_name(mode) << "\n";
  out << "attention = " << attention_name(attention) << "\n";
  out << "word_dim = " << word_dim << "\n";
  out << "token_dim = " << token_dim << "\n";
  out << "hidden_dim = " << hidden_dim << "\n";
  out << "att_dim = " << att_dim << "\n";
  out << "feat_dim = " << feat_dim << "\n";
  out << "dropout = " << dropout << "\n";
  out << "learning_rate = " << learning_rate << "\n";
  out << "momentum = " << momentum << "\n";
  out << "lr_patience = " << lr_patience << "\n";
  out << "epochs = " << epochs << "\n";
  out << "train_beam = " << train_beam << "\n";
  out << "test_beam = " << test_beam << "\n";
  out << "max_open_nts = " << limits.max_open_nts << "\n";
  out << "max_total_nts = " << limits.max_total_nts << "\n";
  out << "max_consecutive_ters = " << limits.max_consecutive_ters << "\n";
  out << "seed = " << seed << "\n";
  out << "early_stop_em = " << early_stop_em << "\n";
  out << "ranker_learning_rate = " << ranker_learning_rate << "\n";
  if (!word_vectors.empty()) out << "word_vectors = " << word_vectors << "\n";
  return out.str();
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "mode") mode = mode_from_name(value);
  else if (key == "attention") attention = attention_from_name(value);
  else if (key == "word_dim") word_dim = std::stoi(value);
  else if (key == "token_dim") token_dim = std::stoi(value);
  else if (key == "hidden_dim") hidden_dim = std::stoi(value);
  else if (key == "att_dim") att_dim = std::stoi(value);
  else if (key == "feat_dim") feat_dim = std::stoi(value);
  else if (key == "dropout") dropout = static_cast<real>(std::stod(value));
  else if (key == "learning_rate") learning_rate = static_cast<real>(std::stod(value));
  else if (key == "momentum") momentum = static_cast<real>(std::stod(value));
  else if (key == "lr_patience") lr_patience = std::stoi(value);
  else if (key == "epochs") epochs = std::stoi(value);
  else if (key == "train_beam") train_beam = std::stoi(value);
  else if (key == "test_beam") test_beam = std::stoi(value);
  else if (key == "max_open_nts") limits.max_open_nts = std::stoi(value);
  else if (key == "max_total_nts") limits.max_total_nts = std::stoi(value);
  else if (key == "max_consecutive_ters") limits.max_consecutive_ters = std::stoi(value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "early_stop_em") early_stop_em = static_cast<real>(std::stod(value));
  else if (key == "ranker_learning_rate") ranker_learning_rate = static_cast<real>(std::stod(value));
  else if (key == "word_vectors") word_vectors = value;
  else throw ParseError("config", 0, "unknown config key '" + key + "'");
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open config file");
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(path, lineno, "expected 'key = value'");
    try {
      cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError(path, lineno, e.what());
    } catch (const std::exception&) {
      throw ParseError(path, lineno, "bad value in '" + line + "'");
    }
  }
  return cfg;
}

int WordVocab::add(const std::string& w) {
  auto it = index.find(w);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(words.size());
  words.push_back(w);
  index.emplace(w, id);
  return id;
}

int WordVocab::lookup(const std::string& w) const {
  auto it = index.find(w);
  return it == index.end() ? 0 : it->second;
}

TokenVocab::TokenVocab() {
  entries.push_back({TokenType::Special, "<unk>"});
  entries.push_back({TokenType::Special, "<num>"});
  index.emplace("<unk>", 0);
  index.emplace("<num>", 1);
}

int TokenVocab::add(TokenType type, const std::string& text) {
  auto it = index.find(text);
  if (it != index.end()) return it->second;
  int id = static_cast<int>(entries.size());
  entries.push_back({type, text});
  index.emplace(text, id);
  return id;
}

int TokenVocab::lookup(const std::string& text) const {
  auto it = index.find(text);
  if (it != index.end()) return it->second;
  return is_number_literal(text) ? num_id() : unk_id();
}

Model::Model(const RunConfig& config, int n_words, int n_tokens)
    : cfg(config),
      word_emb("word_emb", n_words, config.word_dim),
      token_emb("token_emb", n_tokens, config.token_dim),
      fwd("fwd", config.word_dim, config.hidden_dim),
      bwd("bwd", config.word_dim, config.hidden_dim),
      stack("stack", config.token_dim, config.hidden_dim),
      compose_W("compose_W", config.token_dim, 2 * config.token_dim),
      att_V("att_V", config.att_dim),
      att_Wb("att_Wb", config.att_dim, 2 * config.hidden_dim),
      att_Ws("att_Ws", config.att_dim, config.hidden_dim),
      crf_w("crf_w", 3),
      feat_W("feat_W", config.feat_dim, 3 * config.hidden_dim),
      act_W("act_W", static_cast<int>(action_inventory(config.mode).size()),
            config.feat_dim),
      tok_W("tok_W", n_tokens, config.feat_dim) {}

std::vector<Tensor*> Model::parameters() {
  std::vector<Tensor*> out = {&word_emb, &token_emb};
  for (LstmCell* cell : {&fwd, &bwd, &stack}) {
    out.push_back(&cell->W);
    out.push_back(&cell->b);
    out.push_back(&cell->h0);
    out.push_back(&cell->c0);
  }
  out.push_back(&compose_W);
  out.push_back(&att_V);
  out.push_back(&att_Wb);
  out.push_back(&att_Ws);
  out.push_back(&crf_w);
  out.push_back(&feat_W);
  out.push_back(&act_W);
  out.push_back(&tok_W);
  return out;
}

void Model::init_params(std::mt19937_64& rng) {
  for (Tensor* t : parameters()) t->init_uniform(rng, real(-0.08), real(0.08));
}

Model build_model(const RunConfig& cfg, const KnowledgeBase& kb,
                  const std::vector<std::string>& corpus_words,
                  const std::vector<std::string>& corpus_literals) {
  TokenVocab tokens;
  for (SymbolTag tag :
       {SymbolTag::Count, SymbolTag::ArgMax, SymbolTag::ArgMin,
        SymbolTag::FilterEq, SymbolTag::FilterNeq, SymbolTag::FilterGt,
        SymbolTag::FilterLt, SymbolTag::FilterGe, SymbolTag::FilterLe,
        SymbolTag::And, SymbolTag::Or})
    tokens.add(TokenType::Operator, symbol_tag_name(tag));
  for (const std::string& r : kb.relations()) tokens.add(TokenType::Relation, r);
  for (const std::string& e : kb.entities()) tokens.add(TokenType::Entity, e);
  std::set<std::string> lits(corpus_literals.begin(), corpus_literals.end());
  for (const std::string& l : lits)
    if (is_number_literal(l)) tokens.add(TokenType::Literal, l);

  WordVocab words;
  std::set<std::string> uniq(corpus_words.begin(), corpus_words.end());
  for (const std::string& w : uniq) words.add(w);

  Model m(cfg, words.size(), tokens.size());
  m.words = std::move(words);
  m.tokens = std::move(tokens);
  return m;
}

void load_word_vectors(Model& model, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open word-vector file");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<real> vec;
    double v;
    while (ss >> v) vec.push_back(static_cast<real>(v));
    if (static_cast<int>(vec.size()) != model.cfg.word_dim)
      throw ParseError(path, lineno,
                       "expected " + std::to_string(model.cfg.word_dim) +
                           " components, found " + std::to_string(vec.size()));
    auto it = model.words.index.find(word);
    if (it == model.words.index.end()) continue;
    real* row = model.word_emb.row_ptr(it->second);
    for (int k = 0; k < model.cfg.word_dim; ++k) row[k] = vec[k];
  }
}

namespace {
constexpr char kMagic[8] = {'S', 'P', 'A', 'R', 'S', 'E', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const Model& model, const std::string& path,
                     const std::vector<real>& ranker_weights) {
  nlohmann::json header;
  header["config"] = model.cfg.to_text();
  header["words"] = model.words.words;
  nlohmann::json toks = nlohmann::json::array();
  for (const TokenEntry& e : model.tokens.entries)
    toks.push_back({token_type_code(e.type), e.text});
  header["tokens"] = std::move(toks);
  nlohmann::json manifest = nlohmann::json::array();
  Model& m = const_cast<Model&>(model);
  for (Tensor* t : m.parameters())
    manifest.push_back({{"name", t->name}, {"rows", t->rows}, {"cols", t->cols}});
  header["params"] = std::move(manifest);
  header["ranker"] = ranker_weights;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, 0, "cannot open checkpoint for writing");
  const std::string json = header.dump();
  out.write(kMagic, sizeof(kMagic));
  std::uint32_t version = kVersion;
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  std::uint64_t len = json.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(json.data(), static_cast<std::streamsize>(json.size()));
  for (Tensor* t : m.parameters()) {
    std::vector<double> buf(t->value.begin(), t->value.end());
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
  }
  if (!out) throw ParseError(path, 0, "checkpoint write failed");
}

Model load_checkpoint(const std::string& path,
                      std::vector<real>* ranker_weights) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open checkpoint");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw ParseError(path, 0, "not a checkpoint file");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (version != kVersion)
    throw ParseError(path, 0,
                     "unsupported checkpoint version " + std::to_string(version));
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string json(len, '\0');
  in.read(json.data(), static_cast<std::streamsize>(len));
  if (!in) throw ParseError(path, 0, "truncated checkpoint header");
  nlohmann::json header = nlohmann::json::parse(json);

  RunConfig cfg;
  std::istringstream cfg_in(header.at("config").get<std::string>());
  std::string line;
  while (std::getline(cfg_in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  WordVocab words;
  words.words.clear();
  words.index.clear();
  for (const auto& w : header.at("words")) words.add(w.get<std::string>());

  TokenVocab tokens;
  tokens.entries.clear();
  tokens.index.clear();
  for (const auto& t : header.at("tokens")) {
    TokenType type = token_type_from_code(t.at(0).get<std::string>());
    const std::string text = t.at(1).get<std::string>();
    int id = static_cast<int>(tokens.entries.size());
    tokens.entries.push_back({type, text});
    tokens.index.emplace(text, id);
  }

  Model m(cfg, words.size(), tokens.size());
  m.words = std::move(words);
  m.tokens = std::move(tokens);

  const auto& manifest = header.at("params");
  std::vector<Tensor*> params = m.parameters();
  if (manifest.size() != params.size())
    throw ParseError(path, 0, "checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor* t = params[i];
    const auto& entry = manifest[i];
    if (entry.at("name").get<std::string>() != t->name ||
        entry.at("rows").get<int>() != t->rows ||
        entry.at("cols").get<int>() != t->cols)
      throw ParseError(path, 0, "checkpoint shape mismatch at " + t->name);
    std::vector<double> buf(t->size());
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!in) throw ParseError(path, 0, "truncated checkpoint at " + t->name);
    for (std::size_t k = 0; k < buf.size(); ++k)
      t->value[k] = static_cast<real>(buf[k]);
  }
  if (ranker_weights) {
    ranker_weights->clear();
    for (const auto& v : header.at("ranker"))
      ranker_weights->push_back(static_cast<real>(v.get<double>()));
  }
  return m;
}

}  // namespace semparse
