#include "relparse/relational_attention.h"

#include <atomic>
#include <cmath>
#include <set>

#include "relparse/errors.h"

namespace relparse {
namespace {

std::atomic<bool> g_score_sign_flip{false};

}  // namespace

namespace testing {
void set_score_sign_flip(bool on) { g_score_sign_flip = on; }
}  // namespace testing

std::string_view formulation_name(Formulation f) {
  switch (f) {
    case Formulation::kVanilla:
      return "vanilla";
    case Formulation::kEdgeMatrix:
      return "edge_matrix";
    case Formulation::kEdgeVector:
      return "edge_vector";
  }
  return "unknown";
}

Formulation formulation_from_name(std::string_view name) {
  if (name == "vanilla") return Formulation::kVanilla;
  if (name == "edge_matrix") return Formulation::kEdgeMatrix;
  if (name == "edge_vector") return Formulation::kEdgeVector;
  throw InputError("unknown formulation '" + std::string(name) +
                   "' (expected vanilla, edge_matrix or edge_vector)");
}

void AttentionConfig::validate() const {
  if (d <= 0 || n_heads <= 0 || d % n_heads != 0) {
    throw InputError("attention width " + std::to_string(d) + " is not divisible by " +
                     std::to_string(n_heads) + " heads");
  }
  if (n_edge_labels < 1) throw InputError("attention needs at least one edge label");
}

std::size_t attention_parameter_count(const AttentionConfig& cfg) {
  const std::size_t d = cfg.d, h = cfg.n_heads, dh = cfg.head_dim(), L = cfg.n_edge_labels;
  const std::size_t query_and_output = h * dh * d + d * d;
  switch (cfg.formulation) {
    case Formulation::kVanilla:
      return query_and_output + h * dh * d;
    case Formulation::kEdgeMatrix:
      return query_and_output + h * L * dh * d;
    case Formulation::kEdgeVector:
      return query_and_output + h * dh * d + L * d;
  }
  return 0;
}

RelationalAttention::RelationalAttention(ParamStore& params, std::string prefix, AttentionConfig cfg)
    : cfg_(cfg), prefix_(std::move(prefix)) {
  cfg_.validate();
  const std::size_t d = cfg_.d, dh = cfg_.head_dim(), L = cfg_.n_edge_labels;
  for (int h = 0; h < cfg_.n_heads; ++h) {
    const std::string head = prefix_ + "." + std::to_string(h) + ".";
    wq_.push_back(params.add_uniform(head + "Wq", {dh, d}));
    if (cfg_.formulation == Formulation::kEdgeMatrix) {
      wl_.push_back(params.add_uniform(head + "Wl", {L * dh, d}));
    } else {
      wr_.push_back(params.add_uniform(head + "Wr", {dh, d}));
    }
  }
  if (cfg_.formulation == Formulation::kEdgeVector) {
    edge_vectors_ = params.add_uniform(prefix_ + ".edge_vectors", {L, d});
  }
  wh_ = params.add_uniform(prefix_ + ".Wh", {d, d});
}

Tensor RelationalAttention::edge_transform(const Tensor& m, int label, int head) const {
  if (label < 0 || label >= cfg_.n_edge_labels) {
    throw InputError("edge label " + std::to_string(label) + " outside [0," +
                     std::to_string(cfg_.n_edge_labels) + ")");
  }
  if (head < 0 || head >= cfg_.n_heads) throw InputError("head index out of range");
  const std::size_t dh = cfg_.head_dim();
  switch (cfg_.formulation) {
    case Formulation::kVanilla:
      return ops::matmul_t(m, wr_[head]);
    case Formulation::kEdgeMatrix:
      return ops::matmul_t(m, ops::slice_rows(wl_[head], label * dh, (label + 1) * dh));
    case Formulation::kEdgeVector: {
      const Tensor w = ops::slice_rows(edge_vectors_, label, label + 1);
      return ops::matmul_t(ops::add(m, w), wr_[head]);
    }
  }
  return {};
}

Tensor RelationalAttention::head_output(int head, const Tensor& queries, const Tensor& memory,
                                        std::span<const int> labels, const ops::Mask* mask,
                                        bool train, std::mt19937_64* rng,
                                        std::vector<Tensor>* weights) const {
  const std::size_t nq = queries.rows(), nm = memory.rows(), dh = cfg_.head_dim();
  const std::size_t L = cfg_.n_edge_labels;
  const double factor = 1.0 / std::sqrt(static_cast<double>(dh));
  const Tensor q = ops::matmul_t(queries, wq_[head]);

  auto normalize = [&](const Tensor& scores) {
    const Tensor scaled = g_score_sign_flip ? ops::testing::mismatched_scale(scores, -factor, factor)
                                            : ops::scale(scores, factor);
    Tensor alpha = ops::softmax_rows(scaled, mask);
    if (weights) weights->push_back(alpha);
    if (train && cfg_.dropout_p > 0.0 && rng) alpha = ops::dropout(alpha, cfg_.dropout_p, *rng);
    return alpha;
  };

  switch (cfg_.formulation) {
    case Formulation::kVanilla: {
      const Tensor keys = ops::matmul_t(memory, wr_[head]);
      const Tensor alpha = normalize(ops::matmul_t(q, keys));
      return ops::matmul(alpha, keys);
    }
    case Formulation::kEdgeVector: {
      // f(u_j, l) = W_r u_j + W_r w_l: a node term plus a per-label term.
      const Tensor keys = ops::matmul_t(memory, wr_[head]);
      const Tensor label_keys = ops::matmul_t(edge_vectors_, wr_[head]);
      const Tensor label_scores = ops::pick_by_index(ops::matmul_t(q, label_keys), labels, nm);
      const Tensor alpha = normalize(ops::add(ops::matmul_t(q, keys), label_scores));
      const Tensor per_label = ops::scatter_by_index(alpha, labels, L);
      return ops::add(ops::matmul(alpha, keys), ops::matmul(per_label, label_keys));
    }
    case Formulation::kEdgeMatrix: {
      std::set<int> present(labels.begin(), labels.end());
      std::vector<Tensor> keys_by_label;
      std::vector<Tensor> indicators;
      Tensor scores;
      for (int l : present) {
        const Tensor keys = ops::matmul_t(memory, ops::slice_rows(wl_[head], l * dh, (l + 1) * dh));
        std::vector<double> ind(nq * nm);
        for (std::size_t i = 0; i < ind.size(); ++i) ind[i] = labels[i] == l ? 1.0 : 0.0;
        const Tensor indicator = Tensor::from({nq, nm}, std::move(ind));
        const Tensor part = ops::mul(ops::matmul_t(q, keys), indicator);
        scores = scores.defined() ? ops::add(scores, part) : part;
        keys_by_label.push_back(keys);
        indicators.push_back(indicator);
      }
      const Tensor alpha = normalize(scores);
      Tensor out;
      for (std::size_t k = 0; k < keys_by_label.size(); ++k) {
        const Tensor part = ops::matmul(ops::mul(alpha, indicators[k]), keys_by_label[k]);
        out = out.defined() ? ops::add(out, part) : part;
      }
      return out;
    }
  }
  return {};
}

Tensor RelationalAttention::forward(const Tensor& queries, const Tensor& memory,
                                    std::span<const int> labels, const ops::Mask* mask, bool train,
                                    std::mt19937_64* rng, std::vector<Tensor>* weights) const {
  const std::size_t nq = queries.rows(), nm = memory.rows();
  if (queries.cols() != static_cast<std::size_t>(cfg_.d) ||
      memory.cols() != static_cast<std::size_t>(cfg_.d)) {
    throw DimensionError("attention " + prefix_ + ": node width must be " + std::to_string(cfg_.d));
  }
  if (nm == 0) throw DimensionError("attention " + prefix_ + ": empty memory");
  std::vector<int> zeros;
  if (labels.empty()) {
    if (cfg_.formulation != Formulation::kVanilla) {
      throw InputError("attention " + prefix_ + ": edge labels required for this formulation");
    }
    zeros.assign(nq * nm, 0);
    labels = zeros;
  }
  if (labels.size() != nq * nm) {
    throw DimensionError("attention " + prefix_ + ": label matrix must be " + std::to_string(nq) +
                         "x" + std::to_string(nm));
  }
  for (int l : labels) {
    if (l < 0 || l >= cfg_.n_edge_labels) {
      throw InputError("attention " + prefix_ + ": edge label " + std::to_string(l) + " out of range");
    }
  }
  std::vector<Tensor> heads;
  heads.reserve(cfg_.n_heads);
  for (int h = 0; h < cfg_.n_heads; ++h)
    heads.push_back(head_output(h, queries, memory, labels, mask, train, rng, weights));
  return ops::matmul_t(ops::concat_cols(heads), wh_);
}

}  // namespace relparse
