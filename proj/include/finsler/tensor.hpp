#pragma once

// Small dense tensors over R^n with coordinate indices.

#include <cmath>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler {

class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int rank) : n_(n), rank_(rank), data_(power(n, rank), 0.0) {}

  int dim() const { return n_; }
  int rank() const { return rank_; }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  template <class... I>
  double& operator()(I... idx) {
    return data_[flat(idx...)];
  }
  template <class... I>
  double operator()(I... idx) const {
    return data_[flat(idx...)];
  }

  // Full multilinear evaluation T(v1, ..., vr).
  double apply(const std::vector<Vec>& args) const;
  // Contract the last rank-1 slots with args: returns the covector T(., v2, ..., vr).
  Vec partial_apply(const std::vector<Vec>& args) const;

  double max_abs() const;
  // Largest difference over all index permutations of each entry.
  double symmetry_defect() const;

  Tensor& operator*=(double c) {
    for (auto& v : data_) v *= c;
    return *this;
  }
  friend Tensor operator-(Tensor a, const Tensor& b) {
    for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] -= b.data_[k];
    return a;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) {
    for (std::size_t k = 0; k < a.data_.size(); ++k) a.data_[k] += b.data_[k];
    return a;
  }
  friend Tensor operator*(Tensor a, double c) { return a *= c; }

  static std::size_t power(int n, int r) {
    std::size_t p = 1;
    for (int k = 0; k < r; ++k) p *= static_cast<std::size_t>(n);
    return p;
  }

 private:
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t f = 0;
    ((f = f * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx)), ...);
    return f;
  }

  int n_ = 0;
  int rank_ = 0;
  std::vector<double> data_;
};

// Multi-index digits of a flat position, most significant first.
std::vector<int> unflatten(std::size_t flat, int n, int rank);

}  // namespace finsler
