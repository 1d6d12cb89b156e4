// Multi-head self-attention whose key/value map depends on the edge label
// between the attending and attended node.
//
// For head k, with q_i = W_q u_i and f(u_j, r_ij) the label-aware transform:
//   s_ij  = q_i · f(u_j, r_ij) / sqrt(d')
//   a_ij  = softmax_j(s_ij)             (masked entries excluded)
//   u'_ik = Σ_j a_ij f(u_j, r_ij)
//   u'_i  = W_h [u'_i1 | ... | u'_iH]
//
// f is one of
//   vanilla      f(m, l) = W_r m
//   edge matrix  f(m, l) = W_l m          (one d'×d matrix per label and head)
//   edge vector  f(m, l) = W_r (m + w_l)  (w_l ∈ R^d, one per label, shared by heads)

#ifndef RELPARSE_RELATIONAL_ATTENTION_H_
#define RELPARSE_RELATIONAL_ATTENTION_H_

#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relparse/ops.h"
#include "relparse/param_store.h"

namespace relparse {

enum class Formulation { kVanilla, kEdgeMatrix, kEdgeVector };

std::string_view formulation_name(Formulation f);
// Accepts "vanilla", "edge_matrix", "edge_vector".
Formulation formulation_from_name(std::string_view name);

struct AttentionConfig {
  int d = 64;
  int n_heads = 8;
  Formulation formulation = Formulation::kEdgeVector;
  int n_edge_labels = 1;
  double dropout_p = 0.0;  // applied to attention coefficients in training mode

  int head_dim() const { return d / n_heads; }
  void validate() const;
};

// Exact number of scalars registered for one attention block.
std::size_t attention_parameter_count(const AttentionConfig& cfg);

class RelationalAttention {
 public:
  RelationalAttention() = default;
  // Registers parameters as "<prefix>.<head>.Wq" etc. in the store.
  RelationalAttention(ParamStore& params, std::string prefix, AttentionConfig cfg);

  const AttentionConfig& config() const { return cfg_; }
  const std::string& prefix() const { return prefix_; }

  // f(m, label) for one head; m is 1×d, result is 1×d'.
  Tensor edge_transform(const Tensor& m, int label, int head) const;

  // Attention from `queries` (nq×d) over `memory` (nm×d). `labels` is nq×nm
  // row-major and may be empty for the vanilla formulation. `mask` (nq×nm,
  // optional) marks attendable pairs. When `weights` is non-null it receives
  // one nq×nm coefficient matrix per head.
  Tensor forward(const Tensor& queries, const Tensor& memory, std::span<const int> labels,
                 const ops::Mask* mask, bool train, std::mt19937_64* rng,
                 std::vector<Tensor>* weights = nullptr) const;

  Tensor self_attention(const Tensor& nodes, std::span<const int> labels, const ops::Mask* mask,
                        bool train, std::mt19937_64* rng,
                        std::vector<Tensor>* weights = nullptr) const {
    return forward(nodes, nodes, labels, mask, train, rng, weights);
  }

 private:
  Tensor head_output(int head, const Tensor& queries, const Tensor& memory,
                     std::span<const int> labels, const ops::Mask* mask, bool train,
                     std::mt19937_64* rng, std::vector<Tensor>* weights) const;

  AttentionConfig cfg_;
  std::string prefix_;
  std::vector<Tensor> wq_;  // per head, d'×d
  std::vector<Tensor> wr_;  // per head, d'×d (vanilla, edge vector)
  std::vector<Tensor> wl_;  // per head, (L·d')×d (edge matrix)
  Tensor edge_vectors_;     // L×d (edge vector)
  Tensor wh_;               // d×d
};

namespace testing {
// Flips the sign of the score scaling in the forward pass only, leaving the
// backward pass untouched. Used by mutation checks.
void set_score_sign_flip(bool on);
}  // namespace testing

}  // namespace relparse

#endif  // RELPARSE_RELATIONAL_ATTENTION_H_
