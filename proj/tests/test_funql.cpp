#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "semparse/funql.hpp"

#include "helpers.hpp"

using namespace semparse;

TEST_CASE("parse and print round trip") {
  const char* forms[] = {
      "Barack_Obama",
      "daughterOf(Barack_Obama)",
      "count(daughterOf(Barack_Obama))",
      "argmax(daughterOf(Barack_Obama),age)",
      "argmin(city(Texas),population)",
      "filter_ge(state(USA),population,1000000)",
      "filter_neq(state(USA),area,59425)",
      "and(daughterOf(Barack_Obama),InfluentialTeensByYear(2014))",
      "or(city(Georgia),city(Florida))",
      "count(and(daughterOf(Barack_Obama),InfluentialTeensByYear(2014)))",
  };
  for (const char* f : forms) {
    LfPtr lf = parse_funql(f);
    CHECK(print_funql(lf) == f);
    CHECK(equal(lf, parse_funql(print_funql(lf))));
  }
}

TEST_CASE("whitespace is accepted and normalized away") {
  LfPtr lf = parse_funql("  argmax( city( Texas ) , population )  ");
  CHECK(print_funql(lf) == "argmax(city(Texas),population)");
}

TEST_CASE("operator names are reserved only in head position") {
  LfPtr lf = parse_funql("count(r(count))");
  CHECK(lf->kind == LogicalForm::Kind::Count);
  CHECK(lf->children[0]->children[0]->symbol == "count");
}

TEST_CASE("syntax errors carry position information") {
  CHECK_THROWS_AS(parse_funql("and(a"), SyntaxError);
  CHECK_THROWS_AS(parse_funql("count(a))"), SyntaxError);
  CHECK_THROWS_AS(parse_funql(""), SyntaxError);
  CHECK_THROWS_AS(parse_funql("filter_bogus(a,r,1)"), SyntaxError);
  CHECK_THROWS_AS(parse_funql("a,b"), SyntaxError);
}

TEST_CASE("arity violations are rejected") {
  CHECK_THROWS_AS(parse_funql("count(a,b)"), ArityError);
  CHECK_THROWS_AS(parse_funql("and(a)"), ArityError);
  CHECK_THROWS_AS(parse_funql("argmax(a)"), ArityError);
  CHECK_THROWS_AS(parse_funql("filter_eq(a,r)"), ArityError);
}

TEST_CASE("count is legal only at the root") {
  CHECK_NOTHROW(type_check(parse_funql("count(r(a))")));
  CHECK_THROWS_AS(type_check(parse_funql("r(count(a))")), TypeError);
  CHECK_THROWS_AS(type_check(parse_funql("and(count(a),b)")), TypeError);
  CHECK_THROWS_AS(type_check(parse_funql("argmax(count(a),r)")), TypeError);
}

TEST_CASE("filter values must be numeric") {
  CHECK_NOTHROW(type_check(parse_funql("filter_gt(r(a),n,12.5)")));
  CHECK_THROWS_AS(type_check(parse_funql("filter_gt(r(a),n,abc)")), TypeError);
}

TEST_CASE("symbol tags cover the grammar and agree on arity") {
  CHECK(arity(SymbolTag::Count) == 1);
  CHECK(arity(SymbolTag::ArgMax) == 2);
  CHECK(arity(SymbolTag::ArgMin) == 2);
  CHECK(arity(SymbolTag::FilterLe) == 3);
  CHECK(arity(SymbolTag::And) == 2);
  CHECK(arity(SymbolTag::Or) == 2);
  CHECK(arity(SymbolTag::Relation) == 1);
  CHECK(arity(SymbolTag::Entity) == 0);
  for (const char* name : {"count", "argmax", "argmin", "filter_eq",
                           "filter_neq", "filter_gt", "filter_lt", "filter_ge",
                           "filter_le", "and", "or", "relation", "entity"}) {
    CHECK(symbol_tag_name(symbol_tag_from_name(name)) == std::string(name));
  }
}

TEST_CASE("random forms round trip through the printer") {
  std::mt19937_64 rng(42);
  std::vector<std::string> ents = {"e0", "e1", "Long_Name.v2"};
  std::vector<std::string> rels = {"r0", "r1", "rel.sub"};
  std::vector<std::string> lits = {"0", "7", "3.25", "-2"};
  for (int i = 0; i < 2000; ++i) {
    LfPtr lf = testutil::random_lf(rng, ents, rels, lits, 6);
    LfPtr back = parse_funql(print_funql(lf));
    CHECK(equal(lf, back));
  }
}
