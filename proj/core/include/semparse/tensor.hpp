#pragma once

#include <random>
#include <string>
#include <vector>

#include "semparse/errors.hpp"
#include "semparse/real.hpp"

namespace semparse {

// A named parameter block: a row-major matrix, or a vector when cols == 1.
struct Tensor {
  std::string name;
  int rows = 0;
  int cols = 1;
  std::vector<real> value;
  std::vector<real> grad;

  Tensor() = default;
  Tensor(std::string name_, int rows_, int cols_ = 1)
      : name(std::move(name_)), rows(rows_), cols(cols_) {
    value.assign(static_cast<std::size_t>(rows) * cols, real(0));
    grad.assign(value.size(), real(0));
  }

  int size() const { return rows * cols; }

  void init_uniform(std::mt19937_64& rng, real lo, real hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    for (real& v : value) v = static_cast<real>(dist(rng));
  }

  void zero_grad() { std::fill(grad.begin(), grad.end(), real(0)); }

  real* row_ptr(int r) { return value.data() + static_cast<std::size_t>(r) * cols; }
  const real* row_ptr(int r) const {
    return value.data() + static_cast<std::size_t>(r) * cols;
  }
};

}  // namespace semparse
