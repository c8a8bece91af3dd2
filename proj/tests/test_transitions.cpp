#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "semparse/transitions.hpp"

#include "helpers.hpp"

using namespace semparse;

namespace {

const char* kWorkedExample =
    "count(and(daughterOf(Barack_Obama),InfluentialTeensByYear(2014)))";

// Replays a derivation, checking legality of every step, and returns the
// per-step stack renderings. Default limits hold for the small worked
// examples; random deep trees need the budget caps lifted.
std::vector<std::string> replay(const Derivation& d, bool permissive = false) {
  Limits limits;
  limits.max_terminals = -1;
  if (permissive) {
    limits.max_open_nts = 1000;
    limits.max_total_nts = 1000;
    limits.max_consecutive_ters = 1000;
  }
  Config config(d.mode, limits);
  std::vector<std::string> stacks;
  for (const Step& step : d.steps) {
    REQUIRE(config.is_legal(step.op));
    config.apply(step.op, step.token);
    stacks.push_back(config.render_stack());
  }
  return stacks;
}

}  // namespace

TEST_CASE("top-down derivation of the worked example") {
  LfPtr lf = parse_funql(kWorkedExample);
  Derivation d = td_oracle(lf);

  std::vector<std::string> ops;
  std::vector<std::string> tokens;
  for (const Step& s : d.steps) {
    ops.push_back(op_to_string(s.op));
    tokens.push_back(s.token.value_or(""));
  }
  CHECK(ops == std::vector<std::string>{
                   "NT(count)", "NT(and)", "NT(relation)", "TER(entity)",
                   "RED", "NT(relation)", "TER(entity)", "RED", "RED", "RED"});
  CHECK(tokens == std::vector<std::string>{"", "", "daughterOf",
                                           "Barack_Obama", "", "InfluentialTeensByYear",
                                           "2014", "", "", ""});

  CHECK(replay(d) == std::vector<std::string>{
            "count(",
            "count( || and(",
            "count( || and( || daughterOf(",
            "count( || and( || daughterOf( || Barack_Obama",
            "count( || and( || daughterOf(Barack_Obama)",
            "count( || and( || daughterOf(Barack_Obama) || InfluentialTeensByYear(",
            "count( || and( || daughterOf(Barack_Obama) || InfluentialTeensByYear( || 2014",
            "count( || and( || daughterOf(Barack_Obama) || InfluentialTeensByYear(2014)",
            "count( || and(daughterOf(Barack_Obama),InfluentialTeensByYear(2014))",
            "count(and(daughterOf(Barack_Obama),InfluentialTeensByYear(2014)))"});

  CHECK(print_funql(reconstruct(d)) == kWorkedExample);
}

TEST_CASE("bottom-up derivation of the worked example") {
  LfPtr lf = parse_funql(kWorkedExample);
  Derivation d = bu_oracle(lf);

  std::vector<std::string> ops;
  std::vector<std::string> tokens;
  for (const Step& s : d.steps) {
    ops.push_back(op_to_string(s.op));
    tokens.push_back(s.token.value_or(""));
  }
  CHECK(ops == std::vector<std::string>{
                   "TER(entity)", "NTRED(relation)", "TER(entity)",
                   "NTRED(relation)", "NTRED(and)", "NTRED(count)"});
  CHECK(tokens == std::vector<std::string>{"Barack_Obama", "daughterOf",
                                           "2014", "InfluentialTeensByYear",
                                           "", ""});

  CHECK(replay(d) == std::vector<std::string>{
            "Barack_Obama",
            "daughterOf(Barack_Obama)",
            "daughterOf(Barack_Obama) || 2014",
            "daughterOf(Barack_Obama) || InfluentialTeensByYear(2014)",
            "and(daughterOf(Barack_Obama),InfluentialTeensByYear(2014))",
            "count(and(daughterOf(Barack_Obama),InfluentialTeensByYear(2014)))"});

  CHECK(print_funql(reconstruct(d)) == kWorkedExample);
}

TEST_CASE("bottom-up completion requires an explicit halt") {
  LfPtr lf = parse_funql("daughterOf(Barack_Obama)");
  Derivation d = bu_oracle(lf);
  Limits limits;
  limits.max_terminals = -1;
  Config config(Mode::BottomUp, limits);
  for (const Step& s : d.steps) config.apply(s.op, s.token);
  CHECK(!config.complete());
  CHECK(config.is_legal(TransitionOp::stop()));
  config.apply(TransitionOp::stop());
  CHECK(config.complete());
  CHECK(print_funql(config.result()) == "daughterOf(Barack_Obama)");
}

TEST_CASE("oracles round trip over random forms in both systems") {
  std::mt19937_64 rng(3);
  std::vector<std::string> ents = {"e0", "e1", "e2"};
  std::vector<std::string> rels = {"r0", "r1"};
  std::vector<std::string> lits = {"1", "2.5"};
  for (int i = 0; i < 5000; ++i) {
    LfPtr lf = testutil::random_lf(rng, ents, rels, lits, 6);
    CHECK(equal(reconstruct(td_oracle(lf)), lf));
    CHECK(equal(reconstruct(bu_oracle(lf)), lf));
  }
}

TEST_CASE("every oracle step is grammatically legal") {
  std::mt19937_64 rng(17);
  std::vector<std::string> ents = {"e0", "e1"};
  std::vector<std::string> rels = {"r0", "r1"};
  std::vector<std::string> lits = {"4"};
  for (int i = 0; i < 300; ++i) {
    LfPtr lf = testutil::random_lf(rng, ents, rels, lits, 4);
    // A bare entity has no legal top-down derivation; reconstruct handles
    // that single-step form specially.
    if (lf->kind != LogicalForm::Kind::Entity) replay(td_oracle(lf), true);
    Derivation bu = bu_oracle(lf);
    bu.steps.push_back({TransitionOp::stop(), std::nullopt});
    replay(bu, true);
  }
}

TEST_CASE("a bare entity derives bottom-up but not top-down") {
  LfPtr lf = parse_funql("Barack_Obama");
  Derivation bu = bu_oracle(lf);
  bu.steps.push_back({TransitionOp::stop(), std::nullopt});
  replay(bu);
  CHECK(equal(reconstruct(bu_oracle(lf)), lf));
  CHECK(equal(reconstruct(td_oracle(lf)), lf));  // special-cased
  Limits limits;
  limits.max_terminals = -1;
  Config td(Mode::TopDown, limits);
  CHECK(!td.is_legal(TransitionOp::ter(SymbolTag::Entity)));
}

TEST_CASE("random legal walks always finish") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 2000; ++trial) {
    Mode mode = trial % 2 ? Mode::TopDown : Mode::BottomUp;
    Limits limits;
    limits.max_terminals = 2 + static_cast<int>(rng() % 8);
    Config config(mode, limits);
    int guard = 0;
    while (!config.complete()) {
      std::vector<TransitionOp> legal = config.legal_transitions();
      REQUIRE(!legal.empty());
      const TransitionOp& op = legal[rng() % legal.size()];
      std::optional<std::string> token;
      switch (config.token_constraint(op)) {
        case TokenConstraint::AnyEntity: token = "e"; break;
        case TokenConstraint::NumberLiteral: token = "3"; break;
        case TokenConstraint::AnyRelation: token = "r"; break;
        case TokenConstraint::None: break;
      }
      config.apply(op, token);
      REQUIRE(++guard < 200);
    }
    LfPtr lf = config.result();
    CHECK_NOTHROW(type_check(lf));
    CHECK(config.terminals() <= limits.max_terminals);
    CHECK(config.total_nts() <= limits.max_total_nts);
  }
}

TEST_CASE("structural limits are enforced") {
  Limits limits;
  limits.max_open_nts = 2;
  limits.max_total_nts = 3;
  limits.max_terminals = -1;
  Config config(Mode::TopDown, limits);
  config.apply(TransitionOp::nt(SymbolTag::And));
  config.apply(TransitionOp::nt(SymbolTag::And));
  // Opening a third nonterminal would exceed the open cap.
  CHECK(!config.is_legal(TransitionOp::nt(SymbolTag::Relation)));
  config.apply(TransitionOp::ter(SymbolTag::Entity), std::string("e"));
  config.apply(TransitionOp::ter(SymbolTag::Entity), std::string("f"));
  config.apply(TransitionOp::red());
  // One slot reopened and one nonterminal left in the total budget.
  CHECK(config.is_legal(TransitionOp::nt(SymbolTag::Relation)));
  config.apply(TransitionOp::nt(SymbolTag::Relation), std::string("r"));
  CHECK(!config.is_legal(TransitionOp::nt(SymbolTag::Relation)));
}

TEST_CASE("consecutive terminal cap binds optional terminals only") {
  Limits limits;
  limits.max_consecutive_ters = 2;
  limits.max_terminals = -1;
  Config config(Mode::BottomUp, limits);
  config.apply(TransitionOp::ter(SymbolTag::Entity), std::string("a"));
  config.apply(TransitionOp::ter(SymbolTag::Entity), std::string("b"));
  // A third consecutive optional terminal is masked.
  CHECK(!config.is_legal(TransitionOp::ter(SymbolTag::Entity)));
  config.apply(TransitionOp::ntred(SymbolTag::And));
  CHECK(config.is_legal(TransitionOp::ter(SymbolTag::Entity)));
}

TEST_CASE("token availability masks token-hungry operations") {
  TokenAvailability avail;
  avail.numbers = false;
  Limits limits;
  limits.max_terminals = -1;
  Config config(Mode::TopDown, limits, avail);
  // filter needs a numeric literal child eventually; with no numbers in the
  // pool the filter nonterminals must be masked.
  for (const TransitionOp& op : config.legal_transitions()) {
    if (op.kind == TransitionOp::Kind::NT) {
      CHECK(op.tag != SymbolTag::FilterEq);
      CHECK(op.tag != SymbolTag::FilterLe);
    }
  }
}

TEST_CASE("illegal applications throw") {
  Limits limits;
  limits.max_terminals = -1;
  Config config(Mode::TopDown, limits);
  CHECK_THROWS_AS(config.apply(TransitionOp::red()), IllegalTransitionError);
  CHECK_THROWS_AS(config.apply(TransitionOp::ntred(SymbolTag::And)),
                  IllegalTransitionError);
  config.apply(TransitionOp::nt(SymbolTag::Count));
  // NT immediately followed by RED would build a childless operator.
  CHECK_THROWS_AS(config.apply(TransitionOp::red()), IllegalTransitionError);
}

TEST_CASE("derivations round trip through json") {
  LfPtr lf = parse_funql(kWorkedExample);
  for (Derivation d : {td_oracle(lf), bu_oracle(lf)}) {
    Derivation back = derivation_from_json(derivation_to_json(d));
    REQUIRE(back.steps.size() == d.steps.size());
    CHECK(back.mode == d.mode);
    for (std::size_t i = 0; i < d.steps.size(); ++i) {
      CHECK(back.steps[i].op == d.steps[i].op);
      CHECK(back.steps[i].token == d.steps[i].token);
    }
  }
}

TEST_CASE("action inventories are stable and indexable") {
  for (Mode mode : {Mode::TopDown, Mode::BottomUp}) {
    const std::vector<TransitionOp>& inv = action_inventory(mode);
    CHECK(!inv.empty());
    for (std::size_t i = 0; i < inv.size(); ++i)
      CHECK(action_index(mode, inv[i]) == static_cast<int>(i));
  }
}
