#ifndef RELPARSE_PARAM_STORE_H_
#define RELPARSE_PARAM_STORE_H_

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "relparse/tensor.h"

namespace relparse {

// Named trainable parameters. Iteration order is the lexicographic name
// order, which keeps initialization and checkpoints deterministic.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t rng_seed = 0) : rng_seed_(rng_seed), rng_(rng_seed) {}

  // Registers a parameter drawn uniformly from ±1/√(last dim). Throws if the
  // name is taken.
  Tensor add_uniform(const std::string& name, Shape shape);
  Tensor add_constant(const std::string& name, Shape shape, double value);
  Tensor add(const std::string& name, Tensor value);

  bool contains(const std::string& name) const { return params_.count(name) > 0; }
  const Tensor& get(const std::string& name) const;
  Tensor& get(const std::string& name);

  const std::map<std::string, Tensor>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;
  std::size_t scalar_count_with_prefix(const std::string& prefix) const;

  void zero_grad();
  std::uint64_t rng_seed() const { return rng_seed_; }

 private:
  std::uint64_t rng_seed_;
  std::mt19937_64 rng_;
  std::map<std::string, Tensor> params_;
};

}  // namespace relparse

#endif  // RELPARSE_PARAM_STORE_H_
