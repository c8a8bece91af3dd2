#include "semparse/attention.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "semparse/errors.hpp"
#include "semparse/kernels.hpp"

namespace semparse {
namespace {

std::vector<unsigned char> all_legal(std::size_t n) {
  return std::vector<unsigned char>(n, 1);
}

real uniform01(std::mt19937_64& rng) {
  return static_cast<real>((rng() >> 11) * 0x1.0p-53);
}

int argmax_index(const std::vector<real>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace

std::vector<NodeId> attention_scores(Tape& tape, Model& model,
                                     const EncodedUtterance& enc, NodeId s) {
  NodeId ws = tape.matvec(tape.param(model.att_Ws), s);
  NodeId v = tape.param(model.att_V);
  std::vector<NodeId> out(enc.buffer.size());
  for (std::size_t i = 0; i < enc.buffer.size(); ++i)
    out[i] = tape.dot(v, tape.tanh_(tape.add(enc.wb[i], ws)));
  return out;
}

std::vector<real> attention_scores_values(const Model& model,
                                          const EncodedUtteranceV& enc,
                                          const std::vector<real>& s) {
  const int A = model.cfg.att_dim;
  std::vector<real> ws(A);
  kernels::matvec(model.att_Ws.value.data(), s.data(), ws.data(), A,
                  model.cfg.hidden_dim);
  std::vector<real> out(enc.buffer.size());
  std::vector<real> tmp(A);
  for (std::size_t i = 0; i < enc.buffer.size(); ++i) {
    kernels::add(enc.wb[i].data(), ws.data(), tmp.data(), A);
    kernels::tanh_vec(tmp.data(), tmp.data(), A);
    out[i] = kernels::dot(model.att_V.value.data(), tmp.data(), A);
  }
  return out;
}

SoftAttention soft_attend(Tape& tape, const std::vector<NodeId>& scores,
                          const std::vector<NodeId>& buffer) {
  NodeId logits = tape.stack_scalars(scores);
  NodeId weights = tape.masked_softmax(logits, all_legal(scores.size()));
  return {weights, tape.weighted_sum(weights, buffer)};
}

std::vector<real> soft_attend_values(const std::vector<real>& scores,
                                     const std::vector<std::vector<real>>& buffer,
                                     std::vector<real>* weights) {
  const int n = static_cast<int>(scores.size());
  std::vector<real> w(n);
  std::vector<unsigned char> legal(n, 1);
  kernels::masked_softmax(scores.data(), legal.data(), w.data(), n);
  std::vector<real> out(buffer[0].size(), real(0));
  for (int k = 0; k < n; ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w[k] * buffer[k][i];
  if (weights) *weights = std::move(w);
  return out;
}

std::vector<NodeId> crf_marginals(Tape& tape, Model& model,
                                  const std::vector<NodeId>& scores) {
  const int n = static_cast<int>(scores.size());
  NodeId crf = tape.param(model.crf_w);
  NodeId w1 = tape.pick(crf, 0);
  NodeId w2 = tape.pick(crf, 1);
  NodeId w3 = tape.pick(crf, 2);
  NodeId zero = tape.scalar_input(0);

  // Per-position potentials over the binary indicator: staying off scores
  // zero, turning on scores the state feature, and staying on additionally
  // pays the transition and joint features. Position one sees only the
  // state feature (the virtual preceding indicator is off).
  std::vector<NodeId> state(n), on_on(n);
  for (int i = 0; i < n; ++i) {
    state[i] = tape.cmul(w1, scores[i]);
    on_on[i] = tape.add(state[i], tape.add(w2, tape.cmul(w3, scores[i])));
  }

  std::vector<NodeId> lb0(n), lb1(n);
  lb0[0] = zero;
  lb1[0] = state[0];
  for (int i = 1; i < n; ++i) {
    lb0[i] = tape.logaddexp(lb0[i - 1], lb1[i - 1]);
    lb1[i] = tape.logaddexp(tape.add(lb0[i - 1], state[i]),
                            tape.add(lb1[i - 1], on_on[i]));
  }
  std::vector<NodeId> lg0(n), lg1(n);
  lg0[n - 1] = zero;
  lg1[n - 1] = zero;
  for (int i = n - 2; i >= 0; --i) {
    lg0[i] = tape.logaddexp(lg0[i + 1], tape.add(state[i + 1], lg1[i + 1]));
    lg1[i] = tape.logaddexp(lg0[i + 1], tape.add(on_on[i + 1], lg1[i + 1]));
  }
  NodeId log_z = tape.logaddexp(lb0[n - 1], lb1[n - 1]);

  std::vector<NodeId> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = tape.exp_(tape.sub(tape.add(lb1[i], lg1[i]), log_z));
  return out;
}

std::vector<real> crf_marginals_values(const Model& model,
                                       const std::vector<real>& scores,
                                       std::size_t* edge_ops) {
  const int n = static_cast<int>(scores.size());
  const real w1 = model.crf_w.value[0];
  const real w2 = model.crf_w.value[1];
  const real w3 = model.crf_w.value[2];
  std::size_t ops = 0;
  auto lae = [&ops](real a, real b) {
    ++ops;
    return kernels::logaddexp(a, b);
  };

  std::vector<real> state(n), on_on(n);
  for (int i = 0; i < n; ++i) {
    state[i] = w1 * scores[i];
    on_on[i] = state[i] + (w2 + w3 * scores[i]);
  }
  std::vector<real> lb0(n), lb1(n);
  lb0[0] = 0;
  lb1[0] = state[0];
  for (int i = 1; i < n; ++i) {
    lb0[i] = lae(lb0[i - 1], lb1[i - 1]);
    lb1[i] = lae(lb0[i - 1] + state[i], lb1[i - 1] + on_on[i]);
  }
  std::vector<real> lg0(n), lg1(n);
  lg0[n - 1] = 0;
  lg1[n - 1] = 0;
  for (int i = n - 2; i >= 0; --i) {
    lg0[i] = lae(lg0[i + 1], state[i + 1] + lg1[i + 1]);
    lg1[i] = lae(lg0[i + 1], on_on[i + 1] + lg1[i + 1]);
  }
  const real log_z = lae(lb0[n - 1], lb1[n - 1]);
  std::vector<real> out(n);
  for (int i = 0; i < n; ++i) out[i] = std::exp(lb1[i] + lg1[i] - log_z);
  if (edge_ops) *edge_ops = ops;
  return out;
}

NodeId structured_attend(Tape& tape, const std::vector<NodeId>& marginals,
                         const std::vector<NodeId>& buffer) {
  return tape.weighted_sum(tape.stack_scalars(marginals), buffer);
}

std::vector<real> structured_attend_values(
    const std::vector<real>& marginals,
    const std::vector<std::vector<real>>& buffer) {
  std::vector<real> out(buffer[0].size(), real(0));
  for (std::size_t k = 0; k < marginals.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += marginals[k] * buffer[k][i];
  return out;
}

HardAttention hard_attend(Tape& tape, const std::vector<NodeId>& scores,
                          const std::vector<NodeId>& buffer, bool sample,
                          std::mt19937_64* rng, const int* force) {
  const int n = static_cast<int>(scores.size());
  std::vector<real> values(n);
  for (int i = 0; i < n; ++i) values[i] = tape.scalar(scores[i]);

  int idx;
  if (force) {
    idx = *force;
  } else if (sample) {
    std::vector<real> p(n);
    std::vector<unsigned char> legal(n, 1);
    kernels::masked_softmax(values.data(), legal.data(), p.data(), n);
    real u = uniform01(*rng);
    idx = n - 1;
    real acc = 0;
    for (int i = 0; i < n; ++i) {
      acc += p[i];
      if (u < acc) {
        idx = i;
        break;
      }
    }
  } else {
    idx = argmax_index(values);
  }

  HardAttention out;
  out.index = idx;
  out.log_prob = tape.pick(
      tape.masked_log_softmax(tape.stack_scalars(scores), all_legal(n)), idx);
  out.context = buffer[idx];
  return out;
}

int hard_attend_values(const std::vector<real>& scores) {
  return argmax_index(scores);
}

BinomialAttention binomial_attend(Tape& tape,
                                  const std::vector<NodeId>& scores,
                                  const std::vector<NodeId>& buffer,
                                  bool sample, std::mt19937_64* rng,
                                  const std::vector<unsigned char>* force) {
  const int n = static_cast<int>(scores.size());
  std::vector<real> values(n);
  for (int i = 0; i < n; ++i) values[i] = tape.scalar(scores[i]);

  BinomialAttention out;
  out.selected.assign(n, 0);
  if (force) {
    out.selected = *force;
  } else if (sample) {
    for (int i = 0; i < n; ++i)
      out.selected[i] = uniform01(*rng) < kernels::logistic(values[i]) ? 1 : 0;
  } else {
    for (int i = 0; i < n; ++i)
      out.selected[i] = kernels::logistic(values[i]) > real(0.5) ? 1 : 0;
  }

  // log p(selection) = sum of Bernoulli terms; log sigmoid(u) is written as
  // -logaddexp(0, -u) so the tape stays numerically stable.
  NodeId zero = tape.scalar_input(0);
  std::vector<NodeId> terms(n);
  std::vector<NodeId> chosen;
  for (int i = 0; i < n; ++i) {
    if (out.selected[i]) {
      terms[i] = tape.scale(tape.logaddexp(zero, tape.scale(scores[i], -1)), -1);
      chosen.push_back(buffer[i]);
    } else {
      terms[i] = tape.scale(tape.logaddexp(zero, scores[i]), -1);
    }
  }
  out.log_prob = tape.sum(terms);
  if (chosen.empty()) {
    out.fallback = true;
    out.context = buffer[argmax_index(values)];
  } else {
    out.context = tape.mean_of(chosen);
  }
  return out;
}

std::vector<real> binomial_attend_values(
    const std::vector<real>& scores,
    const std::vector<std::vector<real>>& buffer,
    std::vector<unsigned char>* selected) {
  const int n = static_cast<int>(scores.size());
  std::vector<unsigned char> sel(n, 0);
  std::vector<int> chosen;
  for (int i = 0; i < n; ++i)
    if (kernels::logistic(scores[i]) > real(0.5)) {
      sel[i] = 1;
      chosen.push_back(i);
    }
  std::vector<real> out(buffer[0].size(), real(0));
  if (chosen.empty()) {
    out = buffer[argmax_index(scores)];
  } else {
    for (int k : chosen)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += buffer[k][i];
    const real inv = real(1) / static_cast<real>(chosen.size());
    for (real& v : out) v *= inv;
  }
  if (selected) *selected = std::move(sel);
  return out;
}

NodeId prediction_features(Tape& tape, Model& model, NodeId context, NodeId s,
                           bool training, std::mt19937_64* rng) {
  NodeId f = tape.tanh_(
      tape.matvec(tape.param(model.feat_W), tape.concat(context, s)));
  if (training && model.cfg.dropout > 0)
    f = tape.dropout(f, model.cfg.dropout, *rng);
  return f;
}

NodeId action_log_probs(Tape& tape, Model& model, NodeId feats,
                        const std::vector<unsigned char>& legal) {
  return tape.masked_log_softmax(tape.matvec(tape.param(model.act_W), feats),
                                 legal);
}

NodeId token_log_probs(Tape& tape, Model& model, NodeId feats,
                       const std::vector<unsigned char>& legal) {
  return tape.masked_log_softmax(tape.matvec(tape.param(model.tok_W), feats),
                                 legal);
}

std::vector<real> prediction_features_values(const Model& model,
                                             const std::vector<real>& context,
                                             const std::vector<real>& s) {
  std::vector<real> cat(context.size() + s.size());
  std::copy(context.begin(), context.end(), cat.begin());
  std::copy(s.begin(), s.end(), cat.begin() + context.size());
  std::vector<real> f(model.cfg.feat_dim);
  kernels::matvec(model.feat_W.value.data(), cat.data(), f.data(),
                  model.cfg.feat_dim, static_cast<int>(cat.size()));
  kernels::tanh_vec(f.data(), f.data(), model.cfg.feat_dim);
  return f;
}

std::vector<real> action_log_probs_values(const Model& model,
                                          const std::vector<real>& feats,
                                          const std::vector<unsigned char>& legal) {
  const int m = model.act_W.rows;
  std::vector<real> logits(m), out(m);
  kernels::matvec(model.act_W.value.data(), feats.data(), logits.data(), m,
                  model.cfg.feat_dim);
  if (!kernels::masked_log_softmax(logits.data(), legal.data(), out.data(), m))
    throw EmptyMaskError("no legal action");
  return out;
}

std::vector<real> token_log_probs_values(const Model& model,
                                         const std::vector<real>& feats,
                                         const std::vector<unsigned char>& legal) {
  const int m = model.tok_W.rows;
  std::vector<real> logits(m), out(m);
  kernels::matvec(model.tok_W.value.data(), feats.data(), logits.data(), m,
                  model.cfg.feat_dim);
  if (!kernels::masked_log_softmax(logits.data(), legal.data(), out.data(), m))
    throw EmptyMaskError("no legal token");
  return out;
}

std::string attention_trace_to_json(const AttentionTrace& t) {
  nlohmann::json j;
  j["step"] = t.step;
  j["kind"] = t.kind;
  j["weights"] = t.weights;
  return j.dump();
}

}  // namespace semparse
