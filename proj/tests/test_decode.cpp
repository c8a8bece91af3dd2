#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "semparse/decode.hpp"
#include "semparse/execute.hpp"
#include "semparse/learn.hpp"
#include "semparse/model.hpp"

#include "helpers.hpp"

using namespace semparse;

namespace {

KnowledgeBase mini_kb() {
  KnowledgeBase kb;
  for (const char* e :
       {"Texas", "Austin", "Dallas", "Georgia", "Atlanta", "Rio_Grande"})
    kb.add_entity(e);
  kb.add_triple("Texas", "capital", Value::entity("Austin"));
  kb.add_triple("Georgia", "capital", Value::entity("Atlanta"));
  kb.add_triple("Texas", "city", Value::entity("Austin"));
  kb.add_triple("Texas", "city", Value::entity("Dallas"));
  kb.add_triple("Austin", "population", Value::number(950000));
  kb.add_triple("Dallas", "population", Value::number(1300000));
  kb.add_triple("Atlanta", "population", Value::number(500000));
  kb.add_triple("Texas", "river", Value::entity("Rio_Grande"));
  return kb;
}

Model decode_model(const KnowledgeBase& kb, Mode mode,
                   AttentionKind att = AttentionKind::Soft,
                   unsigned seed = 1) {
  RunConfig cfg;
  cfg.mode = mode;
  cfg.attention = att;
  cfg.word_dim = 6;
  cfg.token_dim = 6;
  cfg.hidden_dim = 8;
  cfg.att_dim = 6;
  cfg.feat_dim = 8;
  cfg.dropout = 0;
  Model m = build_model(cfg, kb, {"what", "is", "the", "capital", "of", "texas"},
                        {"950000"});
  std::mt19937_64 rng(seed);
  m.init_params(rng);
  return m;
}

void collect_symbols(const LfPtr& lf, std::set<std::string>* entities,
                     std::set<std::string>* numbers) {
  if (lf->kind == LogicalForm::Kind::Entity) {
    entities->insert(lf->symbol);
    return;
  }
  if (lf->kind == LogicalForm::Kind::Filter) numbers->insert(lf->value);
  for (const LfPtr& c : lf->children) collect_symbols(c, entities, numbers);
}

}  // namespace

TEST_CASE("token pools prefer linker candidates and mine utterance numbers") {
  KnowledgeBase kb = mini_kb();
  Model m = decode_model(kb, Mode::TopDown);

  SUBCASE("explicit entity candidates, unknown ids dropped") {
    TokenPools pools = build_token_pools(
        m, kb, {"what", "is", "texas"}, {"Texas", "Atlantis", "Austin"});
    REQUIRE(pools.entities.size() == 2);
    CHECK(pools.entities[0].text == "Texas");
    CHECK(pools.entities[1].text == "Austin");
    for (const TokenCandidate& c : pools.entities)
      CHECK(m.tokens.entries[c.row].text == c.text);
  }

  SUBCASE("no candidates falls back to every kb entity") {
    TokenPools pools = build_token_pools(m, kb, {"what"}, {});
    CHECK(pools.entities.size() == kb.entities().size());
  }

  SUBCASE("numbers come only from digit tokens of the utterance") {
    TokenPools pools =
        build_token_pools(m, kb, {"over", "950000", "people"}, {});
    REQUIRE(pools.numbers.size() == 1);
    CHECK(pools.numbers[0].text == "950000");
    // Seen in training, so it has its own row rather than the fallback.
    CHECK(pools.numbers[0].row == m.tokens.lookup("950000"));
    CHECK(pools.numbers[0].row != m.tokens.num_id());

    TokenPools unseen = build_token_pools(m, kb, {"over", "777", "people"}, {});
    REQUIRE(unseen.numbers.size() == 1);
    CHECK(unseen.numbers[0].text == "777");
    CHECK(unseen.numbers[0].row == m.tokens.num_id());

    TokenPools none = build_token_pools(m, kb, {"no", "digits", "here"}, {});
    CHECK(none.numbers.empty());
    CHECK_FALSE(none.availability().numbers);
  }

  SUBCASE("relations are the whole kb inventory") {
    TokenPools pools = build_token_pools(m, kb, {"what"}, {});
    std::set<std::string> rels;
    for (const TokenCandidate& c : pools.relations) rels.insert(c.text);
    CHECK(rels == std::set<std::string>{"capital", "city", "population",
                                        "river"});
  }
}

TEST_CASE("beam candidates are well formed under arbitrary weights") {
  KnowledgeBase kb = mini_kb();
  std::vector<std::string> tokens = {"what", "is", "the", "capital",
                                     "of", "texas"};

  for (Mode mode : {Mode::TopDown, Mode::BottomUp}) {
    for (unsigned seed : {1u, 2u, 3u}) {
      Model m = decode_model(kb, mode, AttentionKind::Soft, seed);
      std::vector<Candidate> cands = beam_decode(m, kb, tokens, 40);
      REQUIRE(!cands.empty());
      CHECK(cands.size() <= 40);

      std::set<std::string> seen;
      for (std::size_t i = 0; i < cands.size(); ++i) {
        const Candidate& c = cands[i];
        INFO(mode_name(mode) << " seed " << seed << ": " << c.lf_text);

        CHECK_NOTHROW(type_check(c.lf));
        CHECK(print_funql(c.lf) == c.lf_text);
        CHECK(seen.insert(c.lf_text).second);  // no duplicates
        CHECK(c.log_prob <= 1e-12);
        CHECK(std::isfinite(c.log_prob));

        // The derivation replays to the same form.
        CHECK(print_funql(reconstruct(c.derivation)) == c.lf_text);
        CHECK(c.derivation.mode == mode);

        // The stored denotation is the form's execution.
        Denotation d = execute(c.lf, kb);
        CHECK(c.denotation == d);

        if (i > 0) CHECK(cands[i - 1].log_prob >= c.log_prob);
      }
    }
  }
}

TEST_CASE("beam decoding is deterministic") {
  KnowledgeBase kb = mini_kb();
  Model m = decode_model(kb, Mode::TopDown);
  std::vector<std::string> tokens = {"capital", "of", "texas"};

  std::vector<Candidate> a = beam_decode(m, kb, tokens, 25);
  std::vector<Candidate> b = beam_decode(m, kb, tokens, 25);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lf_text == b[i].lf_text);
    CHECK(a[i].log_prob == b[i].log_prob);
  }
}

TEST_CASE("greedy decoding equals a width-one beam") {
  KnowledgeBase kb = mini_kb();
  std::vector<std::string> tokens = {"what", "cities", "in", "texas"};

  for (Mode mode : {Mode::TopDown, Mode::BottomUp}) {
    Model m = decode_model(kb, mode, AttentionKind::Soft, 5);
    Derivation g = greedy_decode(m, kb, tokens);
    std::vector<Candidate> beam = beam_decode(m, kb, tokens, 1);
    REQUIRE(beam.size() == 1);
    REQUIRE(g.steps.size() == beam[0].derivation.steps.size());
    for (std::size_t i = 0; i < g.steps.size(); ++i) {
      CHECK(g.steps[i].op == beam[0].derivation.steps[i].op);
      CHECK(g.steps[i].token == beam[0].derivation.steps[i].token);
    }
  }
}

TEST_CASE("entity candidates restrict which entities can be emitted") {
  KnowledgeBase kb = mini_kb();
  Model m = decode_model(kb, Mode::TopDown, AttentionKind::Soft, 7);
  std::vector<std::string> tokens = {"capital", "of", "texas"};

  std::vector<Candidate> cands = beam_decode(m, kb, tokens, 50, {"Texas"});
  REQUIRE(!cands.empty());
  for (const Candidate& c : cands) {
    std::set<std::string> ents, nums;
    collect_symbols(c.lf, &ents, &nums);
    for (const std::string& e : ents) CHECK(e == "Texas");
    // No digit tokens in the utterance, so no filter literal can appear.
    CHECK(nums.empty());
  }
}

TEST_CASE("candidate log probabilities match a teacher-forced replay") {
  // Decoding caps terminals at the sentence length while teacher forcing
  // lifts the cap (a gold tree may need more terminals than the utterance
  // has words), so the two distributions only coincide where no structural
  // budget binds. A small tree cap against a long utterance guarantees that.
  KnowledgeBase kb = mini_kb();
  std::vector<std::string> tokens = {"population", "of", "the", "city",
                                     "with", "over", "950000", "people"};

  for (AttentionKind att : {AttentionKind::Soft, AttentionKind::Structured}) {
    for (Mode mode : {Mode::TopDown, Mode::BottomUp}) {
      Model m = decode_model(kb, mode, att, 11);
      m.cfg.limits.max_total_nts = 3;
      std::vector<Candidate> cands = beam_decode(m, kb, tokens, 10);
      REQUIRE(!cands.empty());
      for (const Candidate& c : cands) {
        Tape tape;
        ReplayOptions opt;
        opt.training = false;
        NodeId loss = derivation_loss(tape, m, tokens, c.derivation, opt);
        INFO(std::string(attention_name(att)) << " " << mode_name(mode) << " "
                                              << c.lf_text);
        CHECK(std::abs(-tape.scalar(loss) - c.log_prob) < 1e-9);
      }
    }
  }
}

TEST_CASE("beam search recovers the highest-likelihood short forms") {
  // With width large enough to exhaust the tiny grammar slice, scores must
  // be monotone: widening the beam never drops a better-scoring form.
  KnowledgeBase kb = mini_kb();
  Model m = decode_model(kb, Mode::TopDown, AttentionKind::Soft, 13);
  std::vector<std::string> tokens = {"capital", "texas"};

  std::vector<Candidate> narrow = beam_decode(m, kb, tokens, 5);
  std::vector<Candidate> wide = beam_decode(m, kb, tokens, 60);
  REQUIRE(narrow.size() == 5);
  REQUIRE(wide.size() >= narrow.size());
  // The wide beam's top form scores at least as well as the narrow one's.
  CHECK(wide[0].log_prob >= narrow[0].log_prob - 1e-12);
}

TEST_CASE("derivation traces record one attention row per step") {
  KnowledgeBase kb = mini_kb();
  std::vector<std::string> tokens = {"capital", "of", "texas"};

  for (AttentionKind att :
       {AttentionKind::Soft, AttentionKind::Structured, AttentionKind::Hard,
        AttentionKind::Binomial}) {
    Model m = decode_model(kb, Mode::TopDown, att, 17);
    std::vector<Candidate> cands = beam_decode(m, kb, tokens, 5);
    REQUIRE(!cands.empty());
    const Candidate& c = cands[0];

    std::vector<AttentionTrace> traces = trace_derivation(m, kb, tokens, c.derivation);
    REQUIRE(traces.size() == c.derivation.steps.size());
    for (std::size_t i = 0; i < traces.size(); ++i) {
      CHECK(traces[i].step == static_cast<int>(i));
      REQUIRE(traces[i].weights.size() == tokens.size());
      if (op_emits_token(c.derivation.steps[i].op))
        CHECK(traces[i].kind == attention_name(att));
      else
        CHECK(traces[i].kind == "soft");
      if (traces[i].kind == "soft") {
        real z = 0;
        for (real w : traces[i].weights) z += w;
        CHECK(z == doctest::Approx(1.0).epsilon(1e-9));
      }
    }
  }
}
