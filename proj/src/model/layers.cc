#include "relparse/layers.h"

namespace relparse {

LayerNorm::LayerNorm(ParamStore& params, const std::string& prefix, int d)
    : gain_(params.add_constant(prefix + ".gain", {static_cast<std::size_t>(d)}, 1.0)),
      bias_(params.add_constant(prefix + ".bias", {static_cast<std::size_t>(d)}, 0.0)) {}

FeedForward::FeedForward(ParamStore& params, const std::string& prefix, int d, int d_ff) {
  const auto dd = static_cast<std::size_t>(d), ff = static_cast<std::size_t>(d_ff);
  w1_ = params.add_uniform(prefix + ".W1", {ff, dd});
  b1_ = params.add_constant(prefix + ".b1", {ff}, 0.0);
  w2_ = params.add_uniform(prefix + ".W2", {dd, ff});
  b2_ = params.add_constant(prefix + ".b2", {dd}, 0.0);
}

Tensor FeedForward::operator()(const Tensor& x) const {
  const Tensor hidden = ops::relu(ops::add_row(ops::matmul_t(x, w1_), b1_));
  return ops::add_row(ops::matmul_t(hidden, w2_), b2_);
}

Tensor residual_norm(const Tensor& x, const Tensor& sublayer_out, const LayerNorm& norm, double p,
                     bool train, std::mt19937_64* rng) {
  Tensor branch = sublayer_out;
  if (train && p > 0.0 && rng) branch = ops::dropout(branch, p, *rng);
  return norm(ops::add(x, branch));
}

}  // namespace relparse
