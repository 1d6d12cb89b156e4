// Differentiable operations over Tensor.
//
// All ops use the 2-D view of their inputs (rank-1 tensors are one row) and
// produce rank-2 results unless stated otherwise. Gradients are recorded only
// when grad mode is on and some input requires grad.

#ifndef RELPARSE_OPS_H_
#define RELPARSE_OPS_H_

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "relparse/tensor.h"

namespace relparse::ops {

// Row-major attend/keep flags; 1 keeps a position, 0 masks it.
using Mask = std::vector<std::uint8_t>;

Tensor matmul(const Tensor& a, const Tensor& b);
// a · bᵀ without materializing the transpose.
Tensor matmul_t(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// Adds a 1×n row to every row of an m×n tensor.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);

// Row-wise softmax. Masked entries are exactly zero; max-subtracted for
// stability. Throws InvalidMaskError when a row has no unmasked entry.
Tensor softmax_rows(const Tensor& logits, const Mask* mask = nullptr);
Tensor log_softmax_rows(const Tensor& logits, const Mask* mask = nullptr);

// Per-row normalization to zero mean / unit variance, then gain and bias.
Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-12);

Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);
Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);

// out[i] = table[ids[i]].
Tensor gather_rows(const Tensor& table, std::span<const int> ids);
// 1×n mean of all rows.
Tensor mean_rows(const Tensor& a);

// out[i][j] = m[i][index[i*k + j]] for an r×L input and r×k index.
Tensor pick_by_index(const Tensor& m, std::span<const int> index, std::size_t k);
// out[i][l] = Σ_{j : index[i*k + j] == l} a[i][j]; the adjoint of pick_by_index.
Tensor scatter_by_index(const Tensor& a, std::span<const int> index, std::size_t width);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Inverted dropout: kept entries are scaled by 1/(1-p).
Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng);

// Mean over rows of -log Σ_{a ∈ gold[t]} softmax(logits[t] | enabled)[a].
Tensor marginal_nll(const Tensor& logits, const Mask& enabled,
                    const std::vector<std::vector<int>>& gold);

namespace testing {
// Scales by forward_factor but back-propagates with backward_factor. Only
// used to inject forward/backward disagreements into gradient checks.
Tensor mismatched_scale(const Tensor& a, double forward_factor, double backward_factor);
}  // namespace testing

}  // namespace relparse::ops

#endif  // RELPARSE_OPS_H_
