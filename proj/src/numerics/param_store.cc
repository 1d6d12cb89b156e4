#include "relparse/param_store.h"

#include <cmath>

#include "relparse/errors.h"

namespace relparse {

Tensor ParamStore::add_uniform(const std::string& name, Shape shape) {
  const std::size_t fan_in = shape.empty() ? 1 : shape.back();
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> values(shape_size(shape));
  for (double& v : values) v = dist(rng_);
  return add(name, Tensor::from(std::move(shape), std::move(values)));
}

Tensor ParamStore::add_constant(const std::string& name, Shape shape, double value) {
  return add(name, Tensor::full(std::move(shape), value));
}

Tensor ParamStore::add(const std::string& name, Tensor value) {
  if (params_.count(name)) throw Error("duplicate parameter name: " + name);
  value.set_requires_grad(true);
  params_.emplace(name, value);
  return value;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

std::size_t ParamStore::scalar_count() const { return scalar_count_with_prefix(""); }

std::size_t ParamStore::scalar_count_with_prefix(const std::string& prefix) const {
  std::size_t n = 0;
  for (const auto& [name, t] : params_)
    if (name.compare(0, prefix.size(), prefix) == 0) n += t.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, t] : params_) t.zero_grad();
}

}  // namespace relparse
