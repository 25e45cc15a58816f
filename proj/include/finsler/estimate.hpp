#pragma once

#include <cstdint>
#include <string>

namespace finsler {

enum class EstimateMethod { quadrature, monte_carlo, closed_form };

std::string to_string(EstimateMethod m);

struct MeasureEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // standard error (quadrature: error estimate)
  long long n_samples = 0;
  std::uint64_t seed = 0;
  EstimateMethod method = EstimateMethod::closed_form;
  bool flagged = false;  // zero acceptance, chart exit, lower bound, ...
  std::string note;
};

}  // namespace finsler
