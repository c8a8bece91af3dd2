#include "semparse/encoder.hpp"

#include "semparse/errors.hpp"
#include "semparse/kernels.hpp"

namespace semparse {

EncodedUtterance encode_utterance(Tape& tape, Model& model,
                                  const std::vector<int>& word_ids) {
  if (word_ids.empty()) throw EmptyUtteranceError("utterance has no tokens");
  const int n = static_cast<int>(word_ids.size());
  std::vector<NodeId> embeds(n);
  for (int i = 0; i < n; ++i) embeds[i] = tape.row(model.word_emb, word_ids[i]);

  std::vector<NodeId> fwd_h(n), bwd_h(n);
  LstmState s = lstm_initial(tape, model.fwd);
  for (int i = 0; i < n; ++i) {
    s = lstm_step(tape, model.fwd, s, embeds[i]);
    fwd_h[i] = s.h;
  }
  s = lstm_initial(tape, model.bwd);
  for (int i = n - 1; i >= 0; --i) {
    s = lstm_step(tape, model.bwd, s, embeds[i]);
    bwd_h[i] = s.h;
  }

  EncodedUtterance out;
  out.buffer.resize(n);
  out.wb.resize(n);
  NodeId wb_param = tape.param(model.att_Wb);
  for (int i = 0; i < n; ++i) {
    out.buffer[i] = tape.concat(fwd_h[i], bwd_h[i]);
    out.wb[i] = tape.matvec(wb_param, out.buffer[i]);
  }
  return out;
}

EncodedUtteranceV encode_utterance_values(const Model& model,
                                          const std::vector<int>& word_ids) {
  if (word_ids.empty()) throw EmptyUtteranceError("utterance has no tokens");
  const int n = static_cast<int>(word_ids.size());
  const int H = model.cfg.hidden_dim;

  std::vector<std::vector<real>> fwd_h(n), bwd_h(n);
  LstmStateV s = lstm_initial_values(model.fwd);
  for (int i = 0; i < n; ++i) {
    s = lstm_step_values(model.fwd, s,
                         model.word_emb.value.data() +
                             static_cast<std::size_t>(word_ids[i]) *
                                 model.cfg.word_dim);
    fwd_h[i] = s.h;
  }
  s = lstm_initial_values(model.bwd);
  for (int i = n - 1; i >= 0; --i) {
    s = lstm_step_values(model.bwd, s,
                         model.word_emb.value.data() +
                             static_cast<std::size_t>(word_ids[i]) *
                                 model.cfg.word_dim);
    bwd_h[i] = s.h;
  }

  EncodedUtteranceV out;
  out.buffer.resize(n);
  out.wb.resize(n);
  for (int i = 0; i < n; ++i) {
    out.buffer[i].resize(2 * H);
    for (int k = 0; k < H; ++k) out.buffer[i][k] = fwd_h[i][k];
    for (int k = 0; k < H; ++k) out.buffer[i][H + k] = bwd_h[i][k];
    out.wb[i].resize(model.cfg.att_dim);
    kernels::matvec(model.att_Wb.value.data(), out.buffer[i].data(),
                    out.wb[i].data(), model.cfg.att_dim, 2 * H);
  }
  return out;
}

StackEncoder::StackEncoder(Tape& tape, Model& model)
    : tape_(tape), model_(model) {
  states_.push_back(lstm_initial(tape_, model_.stack));
}

NodeId StackEncoder::state() const {
  return frames_.empty() ? states_[0].h
                         : states_[frames_.back().state_index].h;
}

void StackEncoder::push(NodeId embedding) {
  const LstmState& top =
      frames_.empty() ? states_[0] : states_[frames_.back().state_index];
  states_.push_back(lstm_step(tape_, model_.stack, top, embedding));
  frames_.push_back({embedding, static_cast<int>(states_.size()) - 1});
}

void StackEncoder::reduce(int n_children, NodeId parent,
                          bool pop_parent_frame) {
  if (static_cast<int>(frames_.size()) < n_children + (pop_parent_frame ? 1 : 0))
    throw StackUnderflowError("stack encoder reduce");
  std::vector<NodeId> children(n_children);
  for (int k = 0; k < n_children; ++k)
    children[k] = frames_[frames_.size() - n_children + k].embedding;
  frames_.resize(frames_.size() - n_children);
  if (pop_parent_frame) {
    parent = frames_.back().embedding;
    frames_.pop_back();
  }
  NodeId composed = tape_.matvec(
      tape_.param(model_.compose_W),
      tape_.concat(parent, tape_.mean_of(children)));
  push(composed);
}

StackEncoderV::StackEncoderV(const Model& model)
    : model_(model), init_(lstm_initial_values(model.stack)) {}

const std::vector<real>& StackEncoderV::state(const Snapshot& s) const {
  return s ? s->state.h : init_.h;
}

StackEncoderV::Snapshot StackEncoderV::push(
    const Snapshot& s, const std::vector<real>& embedding) const {
  auto frame = std::make_shared<StackFrameV>();
  frame->embedding = embedding;
  frame->state = lstm_step_values(model_.stack, s ? s->state : init_,
                                  embedding.data());
  frame->below = s;
  frame->depth = (s ? s->depth : 0) + 1;
  return frame;
}

StackEncoderV::Snapshot StackEncoderV::reduce(const Snapshot& s,
                                              int n_children,
                                              const std::vector<real>& parent,
                                              bool pop_parent_frame) const {
  Snapshot cur = s;
  std::vector<const std::vector<real>*> children(n_children);
  for (int k = n_children - 1; k >= 0; --k) {
    if (!cur) throw StackUnderflowError("stack encoder reduce");
    children[k] = &cur->embedding;
    cur = cur->below;
  }
  const std::vector<real>* head = &parent;
  if (pop_parent_frame) {
    if (!cur) throw StackUnderflowError("stack encoder reduce");
    head = &cur->embedding;
    cur = cur->below;
  }

  // Mirrors the tape composition bit for bit: children summed in push
  // order, scaled by 1/n, then concatenated after the head embedding.
  const int D = model_.cfg.token_dim;
  std::vector<real> mean(D, real(0));
  for (const std::vector<real>* c : children)
    for (int j = 0; j < D; ++j) mean[j] += (*c)[j];
  const real inv = real(1) / static_cast<real>(n_children);
  for (real& v : mean) v *= inv;
  std::vector<real> cat(2 * D);
  for (int j = 0; j < D; ++j) cat[j] = (*head)[j];
  for (int j = 0; j < D; ++j) cat[D + j] = mean[j];
  std::vector<real> composed(D);
  kernels::matvec(model_.compose_W.value.data(), cat.data(), composed.data(),
                  D, 2 * D);
  return push(cur, composed);
}

NodeId token_embedding(Tape& tape, Model& model, int token_id) {
  return tape.row(model.token_emb, token_id);
}

std::vector<real> token_embedding_values(const Model& model, int token_id) {
  const real* row = model.token_emb.value.data() +
                    static_cast<std::size_t>(token_id) * model.cfg.token_dim;
  return std::vector<real>(row, row + model.cfg.token_dim);
}

}  // namespace semparse
