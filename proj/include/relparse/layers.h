#ifndef RELPARSE_LAYERS_H_
#define RELPARSE_LAYERS_H_

#include <string>

#include "relparse/ops.h"
#include "relparse/param_store.h"

namespace relparse {

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParamStore& params, const std::string& prefix, int d);
  Tensor operator()(const Tensor& x) const { return ops::layer_norm_rows(x, gain_, bias_); }

 private:
  Tensor gain_, bias_;
};

// ReLU(x W1ᵀ + b1) W2ᵀ + b2, applied row-wise.
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParamStore& params, const std::string& prefix, int d, int d_ff);
  Tensor operator()(const Tensor& x) const;

 private:
  Tensor w1_, b1_, w2_, b2_;
};

// LayerNorm(x + Dropout(sublayer_out)).
Tensor residual_norm(const Tensor& x, const Tensor& sublayer_out, const LayerNorm& norm, double p,
                     bool train, std::mt19937_64* rng);

}  // namespace relparse

#endif  // RELPARSE_LAYERS_H_
