#include "semparse/tape.hpp"

#include <cmath>
#include <limits>

#include "semparse/kernels.hpp"

namespace semparse {

namespace {
constexpr real kNegInf = -std::numeric_limits<real>::infinity();
}

NodeId Tape::push(Node n) {
  n.grad.assign(n.value.size(), real(0));
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_same_size(NodeId a, NodeId b, const char* op) const {
  if (nodes_[a].value.size() != nodes_[b].value.size())
    throw ShapeMismatchError(std::string(op) + ": sizes " +
                             std::to_string(nodes_[a].value.size()) + " vs " +
                             std::to_string(nodes_[b].value.size()));
}

real Tape::scalar(NodeId id) const {
  if (nodes_[id].value.size() != 1)
    throw ShapeMismatchError("scalar() on node of size " +
                             std::to_string(nodes_[id].value.size()));
  return nodes_[id].value[0];
}

NodeId Tape::input(std::vector<real> value) {
  Node n;
  n.rows = static_cast<int>(value.size());
  n.value = std::move(value);
  return push(std::move(n));
}

NodeId Tape::scalar_input(real value) { return input({value}); }

NodeId Tape::param(Tensor& t) {
  auto it = param_cache_.find(&t);
  if (it != param_cache_.end()) return it->second;
  if (t.grad.size() != t.value.size()) t.grad.assign(t.value.size(), real(0));
  Node n;
  n.rows = t.rows;
  n.cols = t.cols;
  n.value = t.value;
  Tensor* tp = &t;
  n.back = [tp](Tape&, Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      tp->grad[i] += self.grad[i];
  };
  NodeId id = push(std::move(n));
  param_cache_[&t] = id;
  return id;
}

NodeId Tape::row(Tensor& table, int r) {
  auto key = std::make_pair(static_cast<const Tensor*>(&table), r);
  auto it = row_cache_.find(key);
  if (it != row_cache_.end()) return it->second;
  if (r < 0 || r >= table.rows)
    throw ShapeMismatchError("row " + std::to_string(r) + " out of range for " +
                             table.name);
  if (table.grad.size() != table.value.size())
    table.grad.assign(table.value.size(), real(0));
  Node n;
  n.rows = table.cols;
  n.value.assign(table.row_ptr(r), table.row_ptr(r) + table.cols);
  Tensor* tp = &table;
  n.back = [tp, r](Tape&, Node& self) {
    real* g = tp->grad.data() + static_cast<std::size_t>(r) * tp->cols;
    for (int i = 0; i < tp->cols; ++i) g[i] += self.grad[i];
  };
  NodeId id = push(std::move(n));
  row_cache_[key] = id;
  return id;
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_same_size(a, b, "add");
  Node n;
  n.rows = nodes_[a].rows;
  n.cols = nodes_[a].cols;
  n.value.resize(nodes_[a].value.size());
  kernels::add(nodes_[a].value.data(), nodes_[b].value.data(), n.value.data(),
               static_cast<int>(n.value.size()));
  n.back = [a, b](Tape& t, Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      t.at(a).grad[i] += self.grad[i];
      t.at(b).grad[i] += self.grad[i];
    }
  };
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_same_size(a, b, "sub");
  Node n;
  n.rows = nodes_[a].rows;
  n.cols = nodes_[a].cols;
  n.value.resize(nodes_[a].value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = nodes_[a].value[i] - nodes_[b].value[i];
  n.back = [a, b](Tape& t, Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      t.at(a).grad[i] += self.grad[i];
      t.at(b).grad[i] -= self.grad[i];
    }
  };
  return push(std::move(n));
}

NodeId Tape::cmul(NodeId a, NodeId b) {
  check_same_size(a, b, "cmul");
  Node n;
  n.rows = nodes_[a].rows;
  n.cols = nodes_[a].cols;
  n.value.resize(nodes_[a].value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = nodes_[a].value[i] * nodes_[b].value[i];
  n.back = [a, b](Tape& t, Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      t.at(a).grad[i] += self.grad[i] * t.at(b).value[i];
      t.at(b).grad[i] += self.grad[i] * t.at(a).value[i];
    }
  };
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, real c) {
  Node n;
  n.rows = nodes_[a].rows;
  n.cols = nodes_[a].cols;
  n.value.resize(nodes_[a].value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = nodes_[a].value[i] * c;
  n.back = [a, c](Tape& t, Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      t.at(a).grad[i] += self.grad[i] * c;
  };
  return push(std::move(n));
}

NodeId Tape::matvec(NodeId W, NodeId x) {
  const Node& w = nodes_[W];
  const Node& xv = nodes_[x];
  if (w.cols != static_cast<int>(xv.value.size()))
    throw ShapeMismatchError("matvec: " + std::to_string(w.rows) + "x" +
                             std::to_string(w.cols) + " times vector " +
                             std::to_string(xv.value.size()));
  Node n;
  n.rows = w.rows;
  n.value.resize(w.rows);
  kernels::matvec(w.value.data(), xv.value.data(), n.value.data(), w.rows,
                  w.cols);
  n.back = [W, x](Tape& t, Node& self) {
    Node& w_ = t.at(W);
    Node& x_ = t.at(x);
    const int m = w_.rows, k = w_.cols;
    for (int i = 0; i < m; ++i) {
      const real gi = self.grad[i];
      if (gi == real(0)) continue;
      real* wg = w_.grad.data() + static_cast<std::size_t>(i) * k;
      const real* xvv = x_.value.data();
      for (int j = 0; j < k; ++j) wg[j] += gi * xvv[j];
    }
    kernels::matvec_transposed_accum(w_.value.data(), self.grad.data(),
                                     x_.grad.data(), m, k);
  };
  return push(std::move(n));
}

NodeId Tape::dot(NodeId a, NodeId b) {
  check_same_size(a, b, "dot");
  Node n;
  n.rows = 1;
  n.value = {kernels::dot(nodes_[a].value.data(), nodes_[b].value.data(),
                          static_cast<int>(nodes_[a].value.size()))};
  n.back = [a, b](Tape& t, Node& self) {
    const real g = self.grad[0];
    if (g == real(0)) return;
    Node& a_ = t.at(a);
    Node& b_ = t.at(b);
    for (std::size_t i = 0; i < a_.value.size(); ++i) {
      a_.grad[i] += g * b_.value[i];
      b_.grad[i] += g * a_.value[i];
    }
  };
  return push(std::move(n));
}

NodeId Tape::concat(NodeId a, NodeId b) {
  Node n;
  n.rows = static_cast<int>(nodes_[a].value.size() + nodes_[b].value.size());
  n.value = nodes_[a].value;
  n.value.insert(n.value.end(), nodes_[b].value.begin(),
                 nodes_[b].value.end());
  n.back = [a, b](Tape& t, Node& self) {
    Node& a_ = t.at(a);
    Node& b_ = t.at(b);
    const std::size_t na = a_.value.size();
    for (std::size_t i = 0; i < na; ++i) a_.grad[i] += self.grad[i];
    for (std::size_t i = 0; i < b_.value.size(); ++i)
      b_.grad[i] += self.grad[na + i];
  };
  return push(std::move(n));
}

NodeId Tape::slice(NodeId a, int offset, int len) {
  const Node& src = nodes_[a];
  if (offset < 0 || len < 0 ||
      offset + len > static_cast<int>(src.value.size()))
    throw ShapeMismatchError("slice out of range");
  Node n;
  n.rows = len;
  n.value.assign(src.value.begin() + offset, src.value.begin() + offset + len);
  n.back = [a, offset, len](Tape& t, Node& self) {
    Node& a_ = t.at(a);
    for (int i = 0; i < len; ++i) a_.grad[offset + i] += self.grad[i];
  };
  return push(std::move(n));
}

NodeId Tape::tanh_(NodeId a) {
  Node n;
  n.rows = nodes_[a].rows;
  n.cols = nodes_[a].cols;
  n.value.resize(nodes_[a].value.size());
  kernels::tanh_vec(nodes_[a].value.data(), n.value.data(),
                    static_cast<int>(n.value.size()));
  n.back = [a](Tape& t, Node& self) {
    Node& a_ = t.at(a);
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      a_.grad[i] += self.grad[i] * (real(1) - self.value[i] * self.value[i]);
  };
  return push(std::move(n));
}

NodeId Tape::logistic_(NodeId a) {
  Node n;
  n.rows = nodes_[a].rows;
  n.cols = nodes_[a].cols;
  n.value.resize(nodes_[a].value.size());
  kernels::logistic_vec(nodes_[a].value.data(), n.value.data(),
                        static_cast<int>(n.value.size()));
  n.back = [a](Tape& t, Node& self) {
    Node& a_ = t.at(a);
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      a_.grad[i] += self.grad[i] * self.value[i] * (real(1) - self.value[i]);
  };
  return push(std::move(n));
}

NodeId Tape::exp_(NodeId a) {
  Node n;
  n.rows = nodes_[a].rows;
  n.cols = nodes_[a].cols;
  n.value.resize(nodes_[a].value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = std::exp(nodes_[a].value[i]);
  n.back = [a](Tape& t, Node& self) {
    Node& a_ = t.at(a);
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      a_.grad[i] += self.grad[i] * self.value[i];
  };
  return push(std::move(n));
}

NodeId Tape::mean_of(const std::vector<NodeId>& items) {
  if (items.empty()) throw ShapeMismatchError("mean_of: no items");
  for (NodeId id : items) check_same_size(items[0], id, "mean_of");
  Node n;
  n.rows = nodes_[items[0]].rows;
  n.cols = nodes_[items[0]].cols;
  n.value.assign(nodes_[items[0]].value.size(), real(0));
  for (NodeId id : items)
    for (std::size_t i = 0; i < n.value.size(); ++i)
      n.value[i] += nodes_[id].value[i];
  const real inv = real(1) / static_cast<real>(items.size());
  for (real& v : n.value) v *= inv;
  n.back = [items, inv](Tape& t, Node& self) {
    for (NodeId id : items) {
      Node& it = t.at(id);
      for (std::size_t i = 0; i < self.grad.size(); ++i)
        it.grad[i] += self.grad[i] * inv;
    }
  };
  return push(std::move(n));
}

NodeId Tape::stack_scalars(const std::vector<NodeId>& scalars) {
  Node n;
  n.rows = static_cast<int>(scalars.size());
  n.value.resize(scalars.size());
  for (std::size_t i = 0; i < scalars.size(); ++i)
    n.value[i] = scalar(scalars[i]);
  n.back = [scalars](Tape& t, Node& self) {
    for (std::size_t i = 0; i < scalars.size(); ++i)
      t.at(scalars[i]).grad[0] += self.grad[i];
  };
  return push(std::move(n));
}

NodeId Tape::sum(const std::vector<NodeId>& scalars) {
  if (scalars.empty()) throw ShapeMismatchError("sum: no items");
  Node n;
  n.rows = 1;
  real acc = 0;
  for (NodeId id : scalars) acc += scalar(id);
  n.value = {acc};
  n.back = [scalars](Tape& t, Node& self) {
    for (NodeId id : scalars) t.at(id).grad[0] += self.grad[0];
  };
  return push(std::move(n));
}

NodeId Tape::logaddexp(NodeId a, NodeId b) {
  Node n;
  n.rows = 1;
  const real va = scalar(a), vb = scalar(b);
  const real v = kernels::logaddexp(va, vb);
  n.value = {v};
  n.back = [a, b, va, vb, v](Tape& t, Node& self) {
    if (v == kNegInf) return;
    const real g = self.grad[0];
    t.at(a).grad[0] += g * std::exp(va - v);
    t.at(b).grad[0] += g * std::exp(vb - v);
  };
  return push(std::move(n));
}

NodeId Tape::weighted_sum(NodeId weights, const std::vector<NodeId>& items) {
  const Node& w = nodes_[weights];
  if (w.value.size() != items.size())
    throw ShapeMismatchError("weighted_sum: " + std::to_string(w.value.size()) +
                             " weights for " + std::to_string(items.size()) +
                             " items");
  if (items.empty()) throw ShapeMismatchError("weighted_sum: no items");
  for (NodeId id : items) check_same_size(items[0], id, "weighted_sum");
  Node n;
  n.rows = nodes_[items[0]].rows;
  n.value.assign(nodes_[items[0]].value.size(), real(0));
  for (std::size_t k = 0; k < items.size(); ++k) {
    const real wk = w.value[k];
    const std::vector<real>& iv = nodes_[items[k]].value;
    for (std::size_t i = 0; i < n.value.size(); ++i) n.value[i] += wk * iv[i];
  }
  n.back = [weights, items](Tape& t, Node& self) {
    Node& w_ = t.at(weights);
    for (std::size_t k = 0; k < items.size(); ++k) {
      Node& it = t.at(items[k]);
      real acc = 0;
      const real wk = w_.value[k];
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        acc += self.grad[i] * it.value[i];
        it.grad[i] += self.grad[i] * wk;
      }
      w_.grad[k] += acc;
    }
  };
  return push(std::move(n));
}

NodeId Tape::masked_softmax(NodeId logits,
                            const std::vector<unsigned char>& mask) {
  const Node& x = nodes_[logits];
  if (mask.size() != x.value.size())
    throw ShapeMismatchError("mask size mismatch");
  Node n;
  n.rows = x.rows;
  n.value.assign(x.value.size(), real(0));
  if (!kernels::masked_softmax(x.value.data(), mask.data(), n.value.data(),
                               static_cast<int>(mask.size())))
    throw EmptyMaskError("masked_softmax: empty mask");
  n.back = [logits, mask](Tape& t, Node& self) {
    Node& x_ = t.at(logits);
    real inner = 0;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) inner += self.grad[i] * self.value[i];
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i])
        x_.grad[i] += self.value[i] * (self.grad[i] - inner);
  };
  return push(std::move(n));
}

NodeId Tape::masked_log_softmax(NodeId logits,
                                const std::vector<unsigned char>& mask) {
  const Node& x = nodes_[logits];
  if (mask.size() != x.value.size())
    throw ShapeMismatchError("mask size mismatch");
  Node n;
  n.rows = x.rows;
  n.value.assign(x.value.size(), kNegInf);
  if (!kernels::masked_log_softmax(x.value.data(), mask.data(), n.value.data(),
                                   static_cast<int>(mask.size())))
    throw EmptyMaskError("masked_log_softmax: empty mask");
  n.back = [logits, mask](Tape& t, Node& self) {
    Node& x_ = t.at(logits);
    real gsum = 0;
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i]) gsum += self.grad[i];
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i])
        x_.grad[i] += self.grad[i] - std::exp(self.value[i]) * gsum;
  };
  return push(std::move(n));
}

NodeId Tape::pick(NodeId vec, int index) {
  const Node& x = nodes_[vec];
  if (index < 0 || index >= static_cast<int>(x.value.size()))
    throw ShapeMismatchError("pick index out of range");
  Node n;
  n.rows = 1;
  n.value = {x.value[index]};
  n.back = [vec, index](Tape& t, Node& self) {
    t.at(vec).grad[index] += self.grad[0];
  };
  return push(std::move(n));
}

NodeId Tape::dropout(NodeId a, real rate, std::mt19937_64& rng) {
  const Node& x = nodes_[a];
  std::vector<real> keep(x.value.size());
  const real scale_up = real(1) / (real(1) - rate);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (real& k : keep)
    k = u(rng) < static_cast<double>(rate) ? real(0) : scale_up;
  Node n;
  n.rows = x.rows;
  n.cols = x.cols;
  n.value.resize(x.value.size());
  for (std::size_t i = 0; i < n.value.size(); ++i)
    n.value[i] = x.value[i] * keep[i];
  n.back = [a, keep](Tape& t, Node& self) {
    Node& a_ = t.at(a);
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      a_.grad[i] += self.grad[i] * keep[i];
  };
  return push(std::move(n));
}

void Tape::backward(NodeId root) {
  if (nodes_[root].value.size() != 1)
    throw ShapeMismatchError("backward root must be scalar");
  nodes_[root].grad[0] = real(1);
  for (NodeId id = root; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.back) n.back(*this, n);
  }
}

}  // namespace semparse
