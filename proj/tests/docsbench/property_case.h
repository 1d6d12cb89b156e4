#ifndef RELPARSE_DOCSBENCH_PROPERTY_CASE_H_
#define RELPARSE_DOCSBENCH_PROPERTY_CASE_H_

#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "generators.h"
#include "relparse/model.h"

namespace relparse::bench {

// Returns an empty string on success, otherwise a description of the failure.
using CaseFn = std::function<std::string(std::uint64_t seed, double tolerance)>;

struct PropertyCase {
  std::string name;       // "<module>.<property>"
  std::string module;
  std::string reference;  // formula or behaviour the case exercises
  std::uint64_t first_seed = 1;
  int n_seeds = 100;
  double tolerance = 0.0;
  std::string tolerance_note;
  CaseFn run;
};

std::vector<PropertyCase>& registry();

struct Register {
  explicit Register(PropertyCase c);
};

// Module names in report order.
const std::vector<std::string>& module_names();

template <typename... Args>
std::string describe(const Args&... args) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << args);
  return os.str();
}

// Small model shared by several cases.
ModelConfig tiny_model_config(std::mt19937_64& rng);
testgen::GraphShape shape_for(const ModelConfig& cfg);

}  // namespace relparse::bench

#endif  // RELPARSE_DOCSBENCH_PROPERTY_CASE_H_
