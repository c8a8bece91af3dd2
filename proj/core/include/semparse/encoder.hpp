#pragma once

#include <memory>
#include <string>
#include <vector>

#include "semparse/model.hpp"
#include "semparse/nn.hpp"
#include "semparse/tape.hpp"

namespace semparse {

// Bidirectional utterance encoding: buffer vector i is the concatenation of
// the forward state after word i and the backward state after word i
// (scanning right to left). wb caches att_Wb * buffer[i] for the scorer.
struct EncodedUtterance {
  std::vector<NodeId> buffer;
  std::vector<NodeId> wb;
};

struct EncodedUtteranceV {
  std::vector<std::vector<real>> buffer;
  std::vector<std::vector<real>> wb;
};

EncodedUtterance encode_utterance(Tape& tape, Model& model,
                                  const std::vector<int>& word_ids);
EncodedUtteranceV encode_utterance_values(const Model& model,
                                          const std::vector<int>& word_ids);

// Derivation-stack encoder over the tape. Completed subtrees, open
// nonterminals and pending relation tokens each occupy one frame; reduction
// pops frames and pushes the composed representation
// compose_W * [parent ++ mean(children)]. States are append-only so popping
// restores the exact bits of the earlier encoding.
class StackEncoder {
 public:
  StackEncoder(Tape& tape, Model& model);

  NodeId state() const;  // hidden state summarizing the whole stack
  int depth() const { return static_cast<int>(frames_.size()); }

  void push(NodeId embedding);
  // Pops n frames and pushes the composition. With pop_parent_frame set
  // (top-down) the frame underneath is the subtree's head and supplies the
  // parent embedding, so `parent` is ignored; bottom-up passes the head
  // embedding explicitly since it was never pushed on its own.
  void reduce(int n_children, NodeId parent, bool pop_parent_frame);

 private:
  struct Frame {
    NodeId embedding;
    int state_index;
  };

  Tape& tape_;
  Model& model_;
  std::vector<LstmState> states_;  // states_[0] is the learned initial state
  std::vector<Frame> frames_;
};

// Persistent (shareable) mirror of StackEncoder for beam search: every
// hypothesis holds a snapshot; push/reduce return new snapshots without
// touching old ones.
struct StackFrameV {
  std::vector<real> embedding;
  LstmStateV state;
  std::shared_ptr<const StackFrameV> below;
  int depth = 0;
};

class StackEncoderV {
 public:
  using Snapshot = std::shared_ptr<const StackFrameV>;

  explicit StackEncoderV(const Model& model);

  Snapshot initial() const { return nullptr; }
  const std::vector<real>& state(const Snapshot& s) const;
  Snapshot push(const Snapshot& s, const std::vector<real>& embedding) const;
  // Same parent convention as StackEncoder::reduce.
  Snapshot reduce(const Snapshot& s, int n_children,
                  const std::vector<real>& parent, bool pop_parent_frame) const;

 private:
  const Model& model_;
  LstmStateV init_;
};

// Embedding row helpers shared by both paths.
NodeId token_embedding(Tape& tape, Model& model, int token_id);
std::vector<real> token_embedding_values(const Model& model, int token_id);

}  // namespace semparse
