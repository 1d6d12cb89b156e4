#ifndef RELPARSE_ADAM_H_
#define RELPARSE_ADAM_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "relparse/param_store.h"

namespace relparse {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;
  std::int64_t step_count = 0;
  // Moment buffers keyed by parameter name, created on first use.
  std::map<std::string, std::vector<double>> first_moment;
  std::map<std::string, std::vector<double>> second_moment;
};

// One bias-corrected Adam update over every parameter, then zeroes grads.
// Throws naming the first parameter that has no gradient buffer.
void adam_step(ParamStore& params, AdamState& state, double lr);

}  // namespace relparse

#endif  // RELPARSE_ADAM_H_
