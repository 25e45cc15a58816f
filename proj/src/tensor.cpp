#include "finsler/tensor.hpp"

#include <algorithm>

namespace finsler {

std::vector<int> unflatten(std::size_t flat, int n, int rank) {
  std::vector<int> idx(static_cast<std::size_t>(rank));
  for (int k = rank - 1; k >= 0; --k) {
    idx[static_cast<std::size_t>(k)] = static_cast<int>(flat % static_cast<std::size_t>(n));
    flat /= static_cast<std::size_t>(n);
  }
  return idx;
}

double Tensor::apply(const std::vector<Vec>& args) const {
  if (static_cast<int>(args.size()) != rank_)
    throw ConfigurationError("tensor apply: wrong number of arguments");
  double s = 0.0;
  for (std::size_t f = 0; f < data_.size(); ++f) {
    if (data_[f] == 0.0) continue;
    const auto idx = unflatten(f, n_, rank_);
    double w = data_[f];
    for (int k = 0; k < rank_; ++k) w *= args[static_cast<std::size_t>(k)][idx[static_cast<std::size_t>(k)]];
    s += w;
  }
  return s;
}

Vec Tensor::partial_apply(const std::vector<Vec>& args) const {
  if (static_cast<int>(args.size()) != rank_ - 1)
    throw ConfigurationError("tensor partial_apply: wrong number of arguments");
  Vec out = Vec::Zero(n_);
  for (std::size_t f = 0; f < data_.size(); ++f) {
    if (data_[f] == 0.0) continue;
    const auto idx = unflatten(f, n_, rank_);
    double w = data_[f];
    for (int k = 1; k < rank_; ++k)
      w *= args[static_cast<std::size_t>(k - 1)][idx[static_cast<std::size_t>(k)]];
    out[idx[0]] += w;
  }
  return out;
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Tensor::symmetry_defect() const {
  double worst = 0.0;
  for (std::size_t f = 0; f < data_.size(); ++f) {
    auto idx = unflatten(f, n_, rank_);
    std::sort(idx.begin(), idx.end());
    std::size_t g = 0;
    for (int v : idx) g = g * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v);
    worst = std::max(worst, std::abs(data_[f] - data_[g]));
  }
  return worst;
}

}  // namespace finsler
