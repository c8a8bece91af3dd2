#pragma once

#include <functional>
#include <map>
#include <random>
#include <vector>

#include "semparse/errors.hpp"
#include "semparse/tensor.hpp"

namespace semparse {

using NodeId = int;

// Dynamic reverse-mode tape. Nodes store values and gradients at vector or
// matrix granularity; backward() walks the tape once in reverse creation
// order, accumulating parameter gradients into the bound Tensors. A tape is
// built per example and discarded after one backward pass.
class Tape {
 public:
  // Leaves.
  NodeId input(std::vector<real> value);           // constant vector
  NodeId scalar_input(real value);                 // constant scalar
  NodeId param(Tensor& t);                         // whole tensor
  NodeId row(Tensor& table, int r);                // one embedding row

  // Elementwise and linear algebra.
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId cmul(NodeId a, NodeId b);
  NodeId scale(NodeId a, real c);
  NodeId matvec(NodeId W, NodeId x);
  NodeId dot(NodeId a, NodeId b);
  NodeId concat(NodeId a, NodeId b);
  NodeId slice(NodeId a, int offset, int len);
  NodeId tanh_(NodeId a);
  NodeId logistic_(NodeId a);
  NodeId exp_(NodeId a);
  NodeId mean_of(const std::vector<NodeId>& items);
  NodeId stack_scalars(const std::vector<NodeId>& scalars);
  NodeId sum(const std::vector<NodeId>& scalars);
  NodeId logaddexp(NodeId a, NodeId b);

  // out = sum_i weights[i] * items[i]
  NodeId weighted_sum(NodeId weights, const std::vector<NodeId>& items);

  // Masked distributions; illegal entries get probability exactly zero
  // (log-probability -inf) and receive no gradient.
  NodeId masked_softmax(NodeId logits, const std::vector<unsigned char>& mask);
  NodeId masked_log_softmax(NodeId logits,
                            const std::vector<unsigned char>& mask);
  NodeId pick(NodeId vec, int index);

  // Inverted dropout: keeps each coordinate with probability 1-rate and
  // scales by 1/(1-rate), so the expectation matches the identity.
  NodeId dropout(NodeId a, real rate, std::mt19937_64& rng);

  const std::vector<real>& value(NodeId id) const { return nodes_[id].value; }
  real scalar(NodeId id) const;
  int size(NodeId id) const { return static_cast<int>(nodes_[id].value.size()); }

  // Seeds d(root)=1 and accumulates gradients. Root must be scalar.
  void backward(NodeId root);

 private:
  struct Node {
    int rows = 0;
    int cols = 1;
    std::vector<real> value;
    std::vector<real> grad;
    std::function<void(Tape&, Node&)> back;
  };

  NodeId push(Node n);
  Node& at(NodeId id) { return nodes_[id]; }
  void check_same_size(NodeId a, NodeId b, const char* op) const;

  std::vector<Node> nodes_;
  std::map<const Tensor*, NodeId> param_cache_;
  std::map<std::pair<const Tensor*, int>, NodeId> row_cache_;
};

}  // namespace semparse
