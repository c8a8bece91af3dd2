#include "semparse/nn.hpp"

#include "semparse/kernels.hpp"

namespace semparse {

LstmCell::LstmCell(const std::string& name, int input, int hidden)
    : input_dim(input),
      hidden_dim(hidden),
      W(name + ".W", 4 * hidden, hidden + input),
      b(name + ".b", 4 * hidden),
      h0(name + ".h0", hidden),
      c0(name + ".c0", hidden) {}

LstmState lstm_step(Tape& tape, LstmCell& cell, const LstmState& prev,
                    NodeId x) {
  const int H = cell.hidden_dim;
  NodeId z = tape.concat(prev.h, x);
  NodeId pre = tape.add(tape.matvec(tape.param(cell.W), z),
                        tape.param(cell.b));
  NodeId i = tape.logistic_(tape.slice(pre, 0, H));
  NodeId f = tape.logistic_(tape.slice(pre, H, H));
  NodeId o = tape.logistic_(tape.slice(pre, 2 * H, H));
  NodeId chat = tape.tanh_(tape.slice(pre, 3 * H, H));
  NodeId c = tape.add(tape.cmul(f, prev.c), tape.cmul(i, chat));
  NodeId h = tape.cmul(o, tape.tanh_(c));
  return {h, c};
}

LstmState lstm_initial(Tape& tape, LstmCell& cell) {
  return {tape.param(cell.h0), tape.param(cell.c0)};
}

LstmStateV lstm_step_values(const LstmCell& cell, const LstmStateV& prev,
                            const real* x) {
  const int H = cell.hidden_dim;
  const int X = cell.input_dim;
  std::vector<real> z(H + X);
  for (int k = 0; k < H; ++k) z[k] = prev.h[k];
  for (int k = 0; k < X; ++k) z[H + k] = x[k];
  std::vector<real> pre(4 * H);
  kernels::matvec(cell.W.value.data(), z.data(), pre.data(), 4 * H, H + X);
  kernels::add(pre.data(), cell.b.value.data(), pre.data(), 4 * H);
  std::vector<real> i(H), f(H), o(H), chat(H);
  kernels::logistic_vec(pre.data(), i.data(), H);
  kernels::logistic_vec(pre.data() + H, f.data(), H);
  kernels::logistic_vec(pre.data() + 2 * H, o.data(), H);
  kernels::tanh_vec(pre.data() + 3 * H, chat.data(), H);
  LstmStateV out;
  out.h.resize(H);
  out.c.resize(H);
  std::vector<real> fc(H), ic(H);
  kernels::mul(f.data(), prev.c.data(), fc.data(), H);
  kernels::mul(i.data(), chat.data(), ic.data(), H);
  kernels::add(fc.data(), ic.data(), out.c.data(), H);
  std::vector<real> tc(H);
  kernels::tanh_vec(out.c.data(), tc.data(), H);
  kernels::mul(o.data(), tc.data(), out.h.data(), H);
  return out;
}

LstmStateV lstm_initial_values(const LstmCell& cell) {
  return {cell.h0.value, cell.c0.value};
}

void MomentumSGD::step(const std::vector<Tensor*>& params) {
  for (Tensor* t : params) {
    auto [it, fresh] =
        velocity_.try_emplace(t, std::vector<real>(t->size(), real(0)));
    std::vector<real>& v = it->second;
    if (!fresh && v.size() != t->value.size())
      throw ShapeMismatchError("optimizer state does not match " + t->name);
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = momentum_ * v[k] - lr_ * t->grad[k];
      t->value[k] += v[k];
    }
    t->zero_grad();
  }
}

}  // namespace semparse
