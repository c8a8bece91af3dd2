#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "semparse/attention.hpp"
#include "semparse/encoder.hpp"
#include "semparse/kernels.hpp"
#include "semparse/model.hpp"

#include "helpers.hpp"

using namespace semparse;

namespace {

RunConfig tiny_config() {
  RunConfig cfg;
  cfg.word_dim = 3;
  cfg.token_dim = 4;
  cfg.hidden_dim = 5;
  cfg.att_dim = 3;
  cfg.feat_dim = 4;
  cfg.dropout = 0;
  return cfg;
}

Model tiny_model(unsigned seed = 42) {
  Model m(tiny_config(), 6, 7);
  std::mt19937_64 rng(seed);
  m.init_params(rng);
  return m;
}

// Exhaustive reference for the binary-chain attention CRF. A configuration
// scores w1*u_i for every position that is on, plus w2 + w3*u_i whenever
// position i stays on after an on predecessor; the first position has no
// predecessor. Marginals sum exp(score) over the 2^n configurations.
std::vector<double> enumerate_marginals(const std::vector<real>& u, double w1,
                                        double w2, double w3) {
  const int n = static_cast<int>(u.size());
  std::vector<double> m(n, 0);
  double z = 0;
  for (unsigned cfg = 0; cfg < (1u << n); ++cfg) {
    double score = 0;
    for (int i = 0; i < n; ++i) {
      if (!(cfg >> i & 1)) continue;
      score += w1 * u[i];
      if (i > 0 && (cfg >> (i - 1) & 1)) score += w2 + w3 * u[i];
    }
    const double p = std::exp(score);
    z += p;
    for (int i = 0; i < n; ++i)
      if (cfg >> i & 1) m[i] += p;
  }
  for (double& v : m) v /= z;
  return m;
}

}  // namespace

TEST_CASE("attention scores match the additive scorer formula") {
  Model m = tiny_model();
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-0.7, 0.7);

  EncodedUtteranceV enc;
  for (int i = 0; i < 4; ++i) {
    std::vector<real> b(2 * m.cfg.hidden_dim);
    for (real& v : b) v = dist(rng);
    std::vector<real> wb(m.cfg.att_dim);
    kernels::matvec(m.att_Wb.value.data(), b.data(), wb.data(), m.cfg.att_dim,
                    2 * m.cfg.hidden_dim);
    enc.buffer.push_back(std::move(b));
    enc.wb.push_back(std::move(wb));
  }
  std::vector<real> s(m.cfg.hidden_dim);
  for (real& v : s) v = dist(rng);

  std::vector<real> got = attention_scores_values(m, enc, s);
  REQUIRE(got.size() == 4);
  for (int i = 0; i < 4; ++i) {
    std::vector<real> ws(m.cfg.att_dim), t(m.cfg.att_dim);
    kernels::matvec(m.att_Ws.value.data(), s.data(), ws.data(), m.cfg.att_dim,
                    m.cfg.hidden_dim);
    kernels::add(enc.wb[i].data(), ws.data(), t.data(), m.cfg.att_dim);
    kernels::tanh_vec(t.data(), t.data(), m.cfg.att_dim);
    CHECK(got[i] == kernels::dot(m.att_V.value.data(), t.data(), m.cfg.att_dim));
  }

  // Tape path agrees bitwise.
  Tape tape;
  EncodedUtterance te;
  for (int i = 0; i < 4; ++i) {
    te.buffer.push_back(tape.input(enc.buffer[i]));
    te.wb.push_back(tape.input(enc.wb[i]));
  }
  std::vector<NodeId> ts = attention_scores(tape, m, te, tape.input(s));
  for (int i = 0; i < 4; ++i) CHECK(tape.scalar(ts[i]) == got[i]);
}

TEST_CASE("attention scorer matches finite differences") {
  Model m = tiny_model(5);
  std::mt19937_64 rng(7);
  Tensor b0 = testutil::random_tensor("b0", 2 * m.cfg.hidden_dim, 1, rng);
  Tensor b1 = testutil::random_tensor("b1", 2 * m.cfg.hidden_dim, 1, rng);
  Tensor s = testutil::random_tensor("s", m.cfg.hidden_dim, 1, rng);

  testutil::fd_check(
      {&m.att_V, &m.att_Wb, &m.att_Ws, &b0, &b1, &s},
      [&](Tape& t) {
        EncodedUtterance enc;
        for (Tensor* b : {&b0, &b1}) {
          NodeId nb = t.param(*b);
          enc.buffer.push_back(nb);
          enc.wb.push_back(t.matvec(t.param(m.att_Wb), nb));
        }
        std::vector<NodeId> scores = attention_scores(t, m, enc, t.param(s));
        SoftAttention att = soft_attend(t, scores, enc.buffer);
        return t.dot(att.context, t.tanh_(att.context));
      },
      1e-5, 1e-5);
}

TEST_CASE("soft attention weights form a convex combination") {
  std::vector<real> scores = {0.2, -1.3, 0.9};
  std::vector<std::vector<real>> buffer = {
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  std::vector<real> w;
  std::vector<real> ctx = soft_attend_values(scores, buffer, &w);
  REQUIRE(w.size() == 3);
  real z = 0;
  for (real x : w) {
    CHECK(x > 0);
    z += x;
  }
  CHECK(z == doctest::Approx(1.0).epsilon(1e-12));
  // With unit-basis buffers the context equals the weight vector.
  for (int i = 0; i < 3; ++i) CHECK(ctx[i] == doctest::Approx(w[i]).epsilon(1e-12));
  CHECK(w[2] > w[0]);
  CHECK(w[0] > w[1]);

  // Tape path agrees bitwise.
  Tape tape;
  std::vector<NodeId> sn, bn;
  for (real x : scores) sn.push_back(tape.scalar_input(x));
  for (auto& b : buffer) bn.push_back(tape.input(b));
  SoftAttention att = soft_attend(tape, sn, bn);
  for (int i = 0; i < 3; ++i) {
    CHECK(tape.value(att.weights)[i] == w[i]);
    CHECK(tape.value(att.context)[i] == ctx[i]);
  }
}

TEST_CASE("crf marginals match exhaustive enumeration") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> udist(-2.0, 2.0);
  std::uniform_real_distribution<double> wdist(-1.0, 1.0);

  Model m = tiny_model(13);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 11);  // up to 12 positions
    std::vector<real> u(n);
    for (real& v : u) v = udist(rng);
    for (real& w : m.crf_w.value) w = wdist(rng);

    std::vector<real> got = crf_marginals_values(m, u);
    std::vector<double> want =
        enumerate_marginals(u, m.crf_w.value[0], m.crf_w.value[1],
                            m.crf_w.value[2]);
    REQUIRE(got.size() == want.size());
    for (int i = 0; i < n; ++i) {
      INFO("trial " << trial << " position " << i);
      CHECK(std::abs(got[i] - want[i]) < 1e-9);
    }

    // Tape path agrees bitwise with the value path.
    Tape tape;
    std::vector<NodeId> sn;
    for (real v : u) sn.push_back(tape.scalar_input(v));
    std::vector<NodeId> tm = crf_marginals(tape, m, sn);
    for (int i = 0; i < n; ++i) CHECK(tape.scalar(tm[i]) == got[i]);
  }
}

TEST_CASE("crf without transition features factorizes into logistics") {
  Model m = tiny_model(17);
  m.crf_w.value = {0.8, 0.0, 0.0};
  std::vector<real> u = {-1.2, 0.3, 2.0, -0.4, 0.9};
  std::vector<real> got = crf_marginals_values(m, u);
  for (std::size_t i = 0; i < u.size(); ++i)
    CHECK(got[i] ==
          doctest::Approx(kernels::logistic(0.8 * u[i])).epsilon(1e-12));
}

TEST_CASE("crf forward-backward is linear in the chain length") {
  Model m = tiny_model(19);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int n : {10, 50, 100}) {
    std::vector<real> u(n);
    for (real& v : u) v = dist(rng);
    std::size_t ops = 0;
    crf_marginals_values(m, u, &ops);
    CHECK(ops == static_cast<std::size_t>(4 * n - 3));
  }
}

TEST_CASE("structured attention mixes buffers by marginal weight") {
  Model m = tiny_model(29);
  m.crf_w.value = {1.0, 0.5, -0.3};
  std::vector<real> u = {0.4, -0.6, 1.1};
  std::vector<std::vector<real>> buffer = {{1, 0}, {0, 1}, {2, 2}};

  std::vector<real> marg = crf_marginals_values(m, u);
  std::vector<real> ctx = structured_attend_values(marg, buffer);
  CHECK(ctx[0] == doctest::Approx(marg[0] + 2 * marg[2]).epsilon(1e-12));
  CHECK(ctx[1] == doctest::Approx(marg[1] + 2 * marg[2]).epsilon(1e-12));

  // Marginals are not renormalized across positions: each stays the
  // per-position on-probability, so their sum is not generally one.
  real z = 0;
  for (real x : marg) z += x;
  CHECK(z != doctest::Approx(1.0).epsilon(1e-6));

  Tape tape;
  std::vector<NodeId> sn, bn;
  for (real v : u) sn.push_back(tape.scalar_input(v));
  for (auto& b : buffer) bn.push_back(tape.input(b));
  NodeId tc = structured_attend(tape, crf_marginals(tape, m, sn), bn);
  for (int i = 0; i < 2; ++i) CHECK(tape.value(tc)[i] == ctx[i]);
}

TEST_CASE("structured attention matches finite differences") {
  Model m = tiny_model(31);
  std::mt19937_64 rng(37);
  Tensor scores = testutil::random_tensor("scores", 6, 1, rng);
  Tensor b0 = testutil::random_tensor("b0", 3, 1, rng);
  Tensor b1 = testutil::random_tensor("b1", 3, 1, rng);
  Tensor mix = testutil::random_tensor("mix", 3, 1, rng);

  testutil::fd_check(
      {&m.crf_w, &scores, &b0, &b1, &mix},
      [&](Tape& t) {
        NodeId sv = t.param(scores);
        std::vector<NodeId> sn;
        for (int i = 0; i < 6; ++i) sn.push_back(t.pick(sv, i));
        std::vector<NodeId> bn = {t.param(b0), t.param(b1), t.param(b0),
                                  t.param(b1), t.param(b0), t.param(b1)};
        NodeId ctx = structured_attend(t, crf_marginals(t, m, sn), bn);
        return t.dot(ctx, t.param(mix));
      },
      1e-5, 1e-5);
}

TEST_CASE("hard attention takes the argmax at inference and honors force") {
  std::vector<real> scores = {0.1, 1.4, -0.2, 0.9};
  std::vector<std::vector<real>> buffer = {{1, 0}, {2, 0}, {3, 0}, {4, 0}};

  CHECK(hard_attend_values(scores) == 1);

  Tape tape;
  std::vector<NodeId> sn, bn;
  for (real v : scores) sn.push_back(tape.scalar_input(v));
  for (auto& b : buffer) bn.push_back(tape.input(b));

  HardAttention att = hard_attend(tape, sn, bn, /*sample=*/false, nullptr);
  CHECK(att.index == 1);
  CHECK(att.context == bn[1]);

  // The recorded log-probability is the index's softmax log-probability.
  std::vector<unsigned char> legal(4, 1);
  std::vector<real> lp(4);
  kernels::masked_log_softmax(scores.data(), legal.data(), lp.data(), 4);
  CHECK(tape.scalar(att.log_prob) == lp[1]);

  int forced = 2;
  HardAttention f = hard_attend(tape, sn, bn, false, nullptr, &forced);
  CHECK(f.index == 2);
  CHECK(tape.scalar(f.log_prob) == lp[2]);
}

TEST_CASE("hard attention samples from the score softmax") {
  std::vector<real> scores = {0.0, 1.0, -1.0};
  std::vector<std::vector<real>> buffer = {{1}, {1}, {1}};
  std::vector<unsigned char> legal(3, 1);
  std::vector<real> p(3);
  kernels::masked_softmax(scores.data(), legal.data(), p.data(), 3);

  std::mt19937_64 rng(41);
  const int n = 20000;
  std::vector<int> counts(3, 0);
  for (int rep = 0; rep < n; ++rep) {
    Tape tape;
    std::vector<NodeId> sn, bn;
    for (real v : scores) sn.push_back(tape.scalar_input(v));
    for (auto& b : buffer) bn.push_back(tape.input(b));
    ++counts[hard_attend(tape, sn, bn, true, &rng).index];
  }
  for (int i = 0; i < 3; ++i) {
    const double freq = static_cast<double>(counts[i]) / n;
    const double se = std::sqrt(p[i] * (1 - p[i]) / n);
    INFO("index " << i << " freq " << freq << " expected " << p[i]);
    CHECK(std::abs(freq - p[i]) < 4 * se + 1e-4);
  }
}

TEST_CASE("binomial attention thresholds, falls back and scores selections") {
  std::vector<std::vector<real>> buffer = {{2, 0}, {0, 4}, {6, 6}};

  SUBCASE("positive scores are kept and averaged") {
    std::vector<real> scores = {1.3, -0.7, 0.2};  // logistic > .5 iff score > 0
    std::vector<unsigned char> sel;
    std::vector<real> ctx = binomial_attend_values(scores, buffer, &sel);
    CHECK(sel == std::vector<unsigned char>{1, 0, 1});
    CHECK(ctx[0] == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(ctx[1] == doctest::Approx(3.0).epsilon(1e-12));

    Tape tape;
    std::vector<NodeId> sn, bn;
    for (real v : scores) sn.push_back(tape.scalar_input(v));
    for (auto& b : buffer) bn.push_back(tape.input(b));
    BinomialAttention att = binomial_attend(tape, sn, bn, false, nullptr);
    CHECK(att.selected == sel);
    CHECK_FALSE(att.fallback);
    CHECK(tape.value(att.context)[0] == ctx[0]);
    CHECK(tape.value(att.context)[1] == ctx[1]);

    // log p(selection) is the sum of the Bernoulli log-terms.
    real want = 0;
    for (int i = 0; i < 3; ++i) {
      const real sig = kernels::logistic(scores[i]);
      want += std::log(sel[i] ? sig : 1 - sig);
    }
    CHECK(tape.scalar(att.log_prob) == doctest::Approx(want).epsilon(1e-12));
  }

  SUBCASE("all-negative scores fall back to the argmax position") {
    std::vector<real> scores = {-0.4, -0.1, -2.0};
    std::vector<unsigned char> sel;
    std::vector<real> ctx = binomial_attend_values(scores, buffer, &sel);
    CHECK(sel == std::vector<unsigned char>{0, 0, 0});
    CHECK(ctx == buffer[1]);

    Tape tape;
    std::vector<NodeId> sn, bn;
    for (real v : scores) sn.push_back(tape.scalar_input(v));
    for (auto& b : buffer) bn.push_back(tape.input(b));
    BinomialAttention att = binomial_attend(tape, sn, bn, false, nullptr);
    CHECK(att.fallback);
    CHECK(att.context == bn[1]);
  }

  SUBCASE("forced selections are honored") {
    std::vector<real> scores = {0.5, 0.5, 0.5};
    std::vector<unsigned char> force = {0, 1, 0};
    Tape tape;
    std::vector<NodeId> sn, bn;
    for (real v : scores) sn.push_back(tape.scalar_input(v));
    for (auto& b : buffer) bn.push_back(tape.input(b));
    BinomialAttention att = binomial_attend(tape, sn, bn, false, nullptr, &force);
    CHECK(att.selected == force);
    CHECK(tape.value(att.context)[0] == buffer[1][0]);
    CHECK(tape.value(att.context)[1] == buffer[1][1]);
  }
}

TEST_CASE("binomial attention samples indicators independently") {
  std::vector<real> scores = {1.0, -0.5, 0.0};
  std::vector<std::vector<real>> buffer = {{1}, {1}, {1}};
  std::mt19937_64 rng(43);
  const int n = 20000;
  std::vector<int> counts(3, 0);
  for (int rep = 0; rep < n; ++rep) {
    Tape tape;
    std::vector<NodeId> sn, bn;
    for (real v : scores) sn.push_back(tape.scalar_input(v));
    for (auto& b : buffer) bn.push_back(tape.input(b));
    BinomialAttention att = binomial_attend(tape, sn, bn, true, &rng);
    for (int i = 0; i < 3; ++i) counts[i] += att.selected[i];
  }
  for (int i = 0; i < 3; ++i) {
    const double p = kernels::logistic(scores[i]);
    const double freq = static_cast<double>(counts[i]) / n;
    const double se = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(freq - p) < 4 * se + 1e-4);
  }
}

TEST_CASE("prediction heads agree across paths and respect masks") {
  Model m = tiny_model(47);
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> dist(-0.6, 0.6);
  std::vector<real> ctx(2 * m.cfg.hidden_dim), s(m.cfg.hidden_dim);
  for (real& v : ctx) v = dist(rng);
  for (real& v : s) v = dist(rng);

  std::vector<real> feats = prediction_features_values(m, ctx, s);
  std::vector<unsigned char> act_legal(m.act_W.rows, 1);
  act_legal[0] = 0;
  std::vector<real> alp = action_log_probs_values(m, feats, act_legal);
  std::vector<unsigned char> tok_legal(m.tok_W.rows, 0);
  tok_legal[2] = tok_legal[5] = 1;
  std::vector<real> tlp = token_log_probs_values(m, feats, tok_legal);

  CHECK(alp[0] == -std::numeric_limits<real>::infinity());
  for (int r = 0; r < m.tok_W.rows; ++r)
    if (!tok_legal[r]) CHECK(tlp[r] == -std::numeric_limits<real>::infinity());
  CHECK(std::exp(tlp[2]) + std::exp(tlp[5]) == doctest::Approx(1.0).epsilon(1e-12));

  Tape tape;
  NodeId tf = prediction_features(tape, m, tape.input(ctx), tape.input(s),
                                  /*training=*/false, nullptr);
  std::vector<real> tfv = tape.value(tf);
  REQUIRE(tfv.size() == feats.size());
  for (std::size_t i = 0; i < feats.size(); ++i) CHECK(tfv[i] == feats[i]);
  NodeId ta = action_log_probs(tape, m, tf, act_legal);
  NodeId tt = token_log_probs(tape, m, tf, tok_legal);
  for (int r = 0; r < m.act_W.rows; ++r) CHECK(tape.value(ta)[r] == alp[r]);
  for (int r = 0; r < m.tok_W.rows; ++r) CHECK(tape.value(tt)[r] == tlp[r]);

  std::vector<unsigned char> none(m.act_W.rows, 0);
  CHECK_THROWS_AS(action_log_probs_values(m, feats, none), EmptyMaskError);
}

TEST_CASE("attention trace serializes to one json object per step") {
  AttentionTrace t;
  t.step = 3;
  t.kind = "soft";
  t.weights = {0.25, 0.75};
  std::string j = attention_trace_to_json(t);
  CHECK(j.find("\"step\":3") != std::string::npos);
  CHECK(j.find("\"kind\":\"soft\"") != std::string::npos);
  CHECK(j.find("0.75") != std::string::npos);
  CHECK(j.find('\n') == std::string::npos);
}
