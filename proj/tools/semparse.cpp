#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semparse/decode.hpp"
#include "semparse/errors.hpp"
#include "semparse/execute.hpp"
#include "semparse/kb.hpp"
#include "semparse/learn.hpp"
#include "semparse/linker.hpp"
#include "semparse/model.hpp"
#include "semparse/ranker.hpp"
#include "semparse/text.hpp"

namespace {

using namespace semparse;

struct CommonFiles {
  std::string kb_path;
  std::string linker_path;
  std::string stopwords_path;
  std::string lemmas_path;
};

RunConfig make_config(const std::string& config_path,
                      const std::vector<std::string>& overrides) {
  RunConfig cfg;
  std::string path = config_path;
  if (path.empty()) {
    const char* env = std::getenv("SEMPARSE_CONFIG");
    if (env && *env) path = env;
  }
  if (!path.empty()) cfg = load_run_config(path);
  for (const std::string& kv : overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ParseError("--set", 0, "expected key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

RankerResources make_resources(const CommonFiles& files) {
  RankerResources res;
  if (!files.stopwords_path.empty())
    res.stopwords = load_stopwords(files.stopwords_path);
  if (!files.lemmas_path.empty())
    res.lemma_rules = load_lemma_rules(files.lemmas_path);
  return res;
}

std::optional<LinkerDictionary> make_linker(const CommonFiles& files) {
  if (files.linker_path.empty()) return std::nullopt;
  return load_linker(files.linker_path);
}

nlohmann::json denotation_json(const Denotation& d) {
  nlohmann::json out = nlohmann::json::array();
  if (d.failed()) return out;
  for (const std::string& s : denotation_strings(d)) out.push_back(s);
  return out;
}

RankerModel ranker_from_weights(const std::vector<real>& weights) {
  RankerModel ranker;
  if (static_cast<int>(weights.size()) == kRankerFeatureCount)
    ranker.weights = weights;
  return ranker;
}

int cmd_kb_validate(const std::string& path) {
  KnowledgeBase kb = load_kb(path);
  std::cout << "ok: " << kb.entities().size() << " entities, "
            << kb.relations().size() << " relations, " << kb.triples().size()
            << " triples\n";
  return 0;
}

int cmd_train(const std::string& regime, const std::string& config_path,
              const std::vector<std::string>& overrides,
              const std::string& data_path, const std::string& dev_path,
              const std::string& out_path, const CommonFiles& files) {
  RunConfig cfg = make_config(config_path, overrides);
  KnowledgeBase kb = load_kb(files.kb_path);
  if (regime == "full") {
    std::vector<SupervisedExample> train = load_supervised(data_path);
    std::vector<SupervisedExample> dev;
    if (!dev_path.empty()) dev = load_supervised(dev_path);
    TrainReport report;
    Model model = train_supervised(train, dev, kb, cfg, &report);
    save_checkpoint(model, out_path);
    std::cout << "trained " << report.epochs_run << " epochs, train em "
              << report.exact_match << ", checkpoint " << out_path << "\n";
    return 0;
  }
  std::vector<WeakExample> train = load_weak(data_path);
  auto linker = make_linker(files);
  WeakTrainResult result = train_weak(train, kb, cfg, make_resources(files),
                                      linker ? &*linker : nullptr);
  save_checkpoint(result.model, out_path, result.ranker.weights);
  std::cout << "trained " << result.report.epochs_run
            << " epochs, correctly answered " << result.report.exact_match
            << ", checkpoint " << out_path << "\n";
  return 0;
}

int cmd_synth_distant(const std::string& corpus_path,
                      const std::string& kb_path, const std::string& out_path) {
  KnowledgeBase kb = load_kb(kb_path);
  std::vector<DistantSentence> corpus = load_distant_corpus(corpus_path);
  int skipped = 0;
  std::vector<WeakExample> examples = synth_distant(corpus, kb, &skipped);
  save_weak(examples, out_path);
  std::cout << "wrote " << examples.size() << " examples ("
            << skipped << " sentences skipped)\n";
  return 0;
}

int cmd_parse(const std::string& ckpt_path, const CommonFiles& files, int beam,
              bool trace) {
  std::vector<real> ranker_weights;
  Model model = load_checkpoint(ckpt_path, &ranker_weights);
  KnowledgeBase kb = load_kb(files.kb_path);
  auto linker = make_linker(files);

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> tokens = tokenize(line);
    std::vector<std::string> ents =
        linker ? entity_mask(tokens, *linker) : std::vector<std::string>{};
    std::vector<Candidate> cands = beam_decode(model, kb, tokens, beam, ents);
    nlohmann::json j;
    j["utterance"] = line;
    nlohmann::json arr = nlohmann::json::array();
    for (const Candidate& c : cands) {
      nlohmann::json cj;
      cj["lf"] = c.lf_text;
      cj["logprob"] = c.log_prob;
      cj["denotation"] = denotation_json(c.denotation);
      arr.push_back(std::move(cj));
    }
    j["candidates"] = std::move(arr);
    std::cout << j.dump() << "\n";
    if (trace && !cands.empty())
      for (const AttentionTrace& t :
           trace_derivation(model, kb, tokens, cands.front().derivation, ents))
        std::cout << attention_trace_to_json(t) << "\n";
  }
  return 0;
}

int answer_line(const Model& model, const KnowledgeBase& kb,
                const RankerModel& ranker, const RankerResources& resources,
                const LinkerDictionary* linker, const std::string& line,
                bool verbose) {
  std::vector<std::string> tokens = tokenize(line);
  if (tokens.empty()) return 1;
  std::vector<std::string> ents =
      linker ? entity_mask(tokens, *linker) : std::vector<std::string>{};
  std::vector<Candidate> cands =
      beam_decode(model, kb, tokens, model.cfg.test_beam, ents);
  if (cands.empty()) {
    if (verbose) {
      std::cout << "no parse\n";
    } else {
      nlohmann::json j;
      j["utterance"] = line;
      j["lf"] = nullptr;
      j["denotation"] = nlohmann::json::array();
      std::cout << j.dump() << "\n";
    }
    return 0;
  }
  std::vector<std::vector<real>> features;
  features.reserve(cands.size());
  for (const Candidate& c : cands)
    features.push_back(ranker_features(model, tokens, c.lf, c.denotation,
                                       resources));
  const Candidate& best = rank(cands, ranker, features);
  if (verbose) {
    std::cout << "lf: " << best.lf_text << "\n";
    std::cout << "denotation: " << denotation_json(best.denotation).dump()
              << "\n";
  } else {
    nlohmann::json j;
    j["utterance"] = line;
    j["lf"] = best.lf_text;
    j["denotation"] = denotation_json(best.denotation);
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int cmd_answer(const std::string& ckpt_path, const CommonFiles& files) {
  std::vector<real> ranker_weights;
  Model model = load_checkpoint(ckpt_path, &ranker_weights);
  KnowledgeBase kb = load_kb(files.kb_path);
  auto linker = make_linker(files);
  RankerResources resources = make_resources(files);
  RankerModel ranker = ranker_from_weights(ranker_weights);

  std::string line;
  while (std::getline(std::cin, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    answer_line(model, kb, ranker, resources, linker ? &*linker : nullptr,
                line, false);
  }
  return 0;
}

int cmd_repl(const std::string& ckpt_path, const CommonFiles& files) {
  std::vector<real> ranker_weights;
  Model model = load_checkpoint(ckpt_path, &ranker_weights);
  KnowledgeBase kb = load_kb(files.kb_path);
  auto linker = make_linker(files);
  RankerResources resources = make_resources(files);
  RankerModel ranker = ranker_from_weights(ranker_weights);

  std::string line;
  std::cout << "> " << std::flush;
  while (std::getline(std::cin, line)) {
    if (line == "exit" || line == "quit") break;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      try {
        answer_line(model, kb, ranker, resources,
                    linker ? &*linker : nullptr, line, true);
      } catch (const Error& e) {
        std::cout << "error: " << e.what() << "\n";
      }
    }
    std::cout << "> " << std::flush;
  }
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const CommonFiles& files,
             const std::string& data_path, const std::string& metric,
             int beam, const std::string& sweep) {
  std::vector<real> ranker_weights;
  Model model = load_checkpoint(ckpt_path, &ranker_weights);
  KnowledgeBase kb = load_kb(files.kb_path);
  auto linker = make_linker(files);
  RankerResources resources = make_resources(files);
  RankerModel ranker = ranker_from_weights(ranker_weights);

  std::vector<EvalExample> data;
  // Dataset kind is detected from the first record.
  {
    std::ifstream probe(data_path);
    if (!probe) throw ParseError(data_path, 0, "cannot open dataset");
    std::string first;
    while (std::getline(probe, first) &&
           first.find_first_not_of(" \t\r") == std::string::npos) {
    }
    bool supervised = first.find("\"lf\"") != std::string::npos;
    if (supervised)
      data = eval_examples_from_supervised(load_supervised(data_path), kb);
    else
      data = eval_examples_from_weak(load_weak(data_path));
  }

  const LinkerDictionary* dict = linker ? &*linker : nullptr;
  if (!sweep.empty()) {
    std::cout << "beam\tanswerable\tcorrect\n";
    std::istringstream ss(sweep);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      int width = std::stoi(tok);
      EvalReport r = evaluate(model, ranker, data, kb, width, resources, dict);
      std::cout << width << "\t" << r.answerable << "\t" << r.correct << "\n";
    }
    return 0;
  }

  int width = beam > 0 ? beam : model.cfg.test_beam;
  EvalReport r = evaluate(model, ranker, data, kb, width, resources, dict);
  std::cout << "examples: " << r.examples << "\n";
  std::cout << "exact_match: " << r.exact_match << "\n";
  std::cout << "average_f1: " << r.average_f1 << "\n";
  std::cout << "answerable: " << r.answerable << "\n";
  std::cout << "correct: " << r.correct << "\n";
  std::cout << "metric " << metric << ": "
            << (metric == "em" ? r.exact_match : r.average_f1) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transition-based neural semantic parser over a knowledge base"};
  app.require_subcommand(1);

  CommonFiles files;
  std::string config_path, data_path, dev_path, out_path, regime = "full";
  std::string ckpt_path, corpus_path, metric = "em", sweep, kb_positional;
  std::vector<std::string> overrides;
  int beam = 0;
  bool trace = false;

  CLI::App* kb_cmd = app.add_subcommand("kb", "Knowledge base utilities");
  kb_cmd->require_subcommand(1);
  CLI::App* kb_validate = kb_cmd->add_subcommand("validate", "Check a KB file");
  kb_validate->add_option("kb", kb_positional, "KB TSV file")->required();

  CLI::App* train = app.add_subcommand("train", "Train a parser");
  train->add_option("--regime", regime, "full or weak")
      ->check(CLI::IsMember({"full", "weak"}));
  train->add_option("--config", config_path, "config file (key = value)");
  train->add_option("--set", overrides, "config override key=value");
  train->add_option("--data", data_path, "training JSON-lines")->required();
  train->add_option("--dev", dev_path, "development JSON-lines");
  train->add_option("--kb", files.kb_path, "KB TSV")->required();
  train->add_option("--out", out_path, "checkpoint path")->required();
  train->add_option("--linker", files.linker_path, "entity linker TSV");
  train->add_option("--stopwords", files.stopwords_path, "stop-word list");
  train->add_option("--lemmas", files.lemmas_path, "lemma suffix table");

  CLI::App* synth = app.add_subcommand("synth-distant",
                                       "Convert an entity-annotated corpus "
                                       "into weak training examples");
  synth->add_option("--corpus", corpus_path, "corpus JSON-lines")->required();
  synth->add_option("--kb", files.kb_path, "KB TSV")->required();
  synth->add_option("--out", out_path, "output JSON-lines")->required();

  CLI::App* parse = app.add_subcommand("parse",
                                       "Parse utterances from stdin into "
                                       "candidate logical forms");
  parse->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  parse->add_option("--kb", files.kb_path, "KB TSV")->required();
  parse->add_option("--beam", beam, "beam width")->default_val(300);
  parse->add_option("--linker", files.linker_path, "entity linker TSV");
  parse->add_flag("--trace", trace, "emit attention traces for the best parse");

  CLI::App* answer = app.add_subcommand("answer",
                                        "Answer utterances from stdin");
  answer->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  answer->add_option("--kb", files.kb_path, "KB TSV")->required();
  answer->add_option("--linker", files.linker_path, "entity linker TSV");
  answer->add_option("--stopwords", files.stopwords_path, "stop-word list");
  answer->add_option("--lemmas", files.lemmas_path, "lemma suffix table");

  CLI::App* eval = app.add_subcommand("eval", "Score a dataset");
  eval->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  eval->add_option("--kb", files.kb_path, "KB TSV")->required();
  eval->add_option("--data", data_path, "JSON-lines dataset")->required();
  eval->add_option("--metric", metric, "em or f1")
      ->check(CLI::IsMember({"em", "f1"}));
  eval->add_option("--beam", beam, "beam width (default from checkpoint)");
  eval->add_option("--beam-sweep", sweep,
                   "comma-separated widths; prints answerable/correct per width");
  eval->add_option("--linker", files.linker_path, "entity linker TSV");
  eval->add_option("--stopwords", files.stopwords_path, "stop-word list");
  eval->add_option("--lemmas", files.lemmas_path, "lemma suffix table");

  CLI::App* repl = app.add_subcommand("repl", "Interactive question loop");
  repl->add_option("--ckpt", ckpt_path, "checkpoint")->required();
  repl->add_option("--kb", files.kb_path, "KB TSV")->required();
  repl->add_option("--linker", files.linker_path, "entity linker TSV");
  repl->add_option("--stopwords", files.stopwords_path, "stop-word list");
  repl->add_option("--lemmas", files.lemmas_path, "lemma suffix table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (kb_validate->parsed()) return cmd_kb_validate(kb_positional);
    if (train->parsed())
      return cmd_train(regime, config_path, overrides, data_path, dev_path,
                       out_path, files);
    if (synth->parsed()) return cmd_synth_distant(corpus_path, files.kb_path,
                                                  out_path);
    if (parse->parsed()) return cmd_parse(ckpt_path, files, beam, trace);
    if (answer->parsed()) return cmd_answer(ckpt_path, files);
    if (eval->parsed())
      return cmd_eval(ckpt_path, files, data_path, metric, beam, sweep);
    if (repl->parsed()) return cmd_repl(ckpt_path, files);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
