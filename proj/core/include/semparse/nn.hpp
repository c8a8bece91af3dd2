#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "semparse/tape.hpp"
#include "semparse/tensor.hpp"

namespace semparse {

// One LSTM with learned initial state. The weight matrix stacks the four
// gates [input; forget; output; candidate] over the concatenation
// [h_prev; x], each gate with its own bias slice.
struct LstmCell {
  int input_dim;
  int hidden_dim;
  Tensor W;   // [4*hidden, hidden+input]
  Tensor b;   // [4*hidden]
  Tensor h0;  // [hidden]
  Tensor c0;  // [hidden]

  LstmCell(const std::string& name, int input, int hidden);
};

struct LstmState {
  NodeId h = -1;
  NodeId c = -1;
};

struct LstmStateV {
  std::vector<real> h;
  std::vector<real> c;
};

// Differentiable step: gates from W [h_prev; x] + b, then
// c = f*c_prev + i*tanh-candidate, h = o*tanh(c).
LstmState lstm_step(Tape& tape, LstmCell& cell, const LstmState& prev,
                    NodeId x);
LstmState lstm_initial(Tape& tape, LstmCell& cell);

// Gradient-free mirror of lstm_step; kernel-for-kernel identical to the
// tape composite so both paths produce the same bits.
LstmStateV lstm_step_values(const LstmCell& cell, const LstmStateV& prev,
                            const real* x);
LstmStateV lstm_initial_values(const LstmCell& cell);

// Momentum SGD over a fixed parameter set: v <- mu*v - lr*grad;
// theta <- theta + v; gradients are cleared after the step.
class MomentumSGD {
 public:
  MomentumSGD(real learning_rate, real momentum)
      : lr_(learning_rate), momentum_(momentum) {}

  real learning_rate() const { return lr_; }
  void set_learning_rate(real lr) { lr_ = lr; }
  void halve_learning_rate() { lr_ /= 2; }

  void step(const std::vector<Tensor*>& params);

 private:
  real lr_;
  real momentum_;
  std::map<const Tensor*, std::vector<real>> velocity_;
};

}  // namespace semparse
