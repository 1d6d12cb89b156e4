// Loop-based reference computations over plain vectors. They read parameter
// values from a ParamStore but share no code with the tensor library.

#ifndef RELPARSE_TESTS_ORACLES_H_
#define RELPARSE_TESTS_ORACLES_H_

#include <string>
#include <vector>

#include "relparse/decoder.h"
#include "relparse/encoder.h"
#include "relparse/param_store.h"

namespace relparse::oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

Mat to_mat(const Tensor& t);
Mat param(const ParamStore& params, const std::string& name);
Vec param_vec(const ParamStore& params, const std::string& name);

Vec matvec(const Mat& w, const Vec& x);  // w · x
Vec vecmat(const Vec& x, const Mat& w);  // xᵀ · w
double dot(const Vec& a, const Vec& b);
Vec add(const Vec& a, const Vec& b);
Vec softmax(const Vec& logits, const std::vector<bool>& keep);
Vec layer_norm(const Vec& x, const Vec& gain, const Vec& bias, double eps = 1e-12);
double max_abs_diff(const Mat& a, const Mat& b);
double max_abs_diff(const Vec& a, const Vec& b);

// f(m, label) for one head.
Vec edge_transform(const ParamStore& params, const std::string& prefix, const AttentionConfig& cfg,
                   const Vec& m, int label, int head);

// Scores, softmax, weighted sum per head, concatenation and output
// projection, written out element by element. Empty labels mean label 0;
// an empty mask attends everywhere.
Mat gnn_sublayer(const ParamStore& params, const std::string& prefix, const AttentionConfig& cfg,
                 const Mat& queries, const Mat& memory, const std::vector<int>& labels,
                 const std::vector<bool>& mask = {}, std::vector<Mat>* weights = nullptr);

Mat feed_forward(const ParamStore& params, const std::string& prefix, const Mat& x);
Mat norm_rows(const ParamStore& params, const std::string& prefix, const Mat& x);

// One post-norm encoder layer "encoder.layer{n}".
Mat encoder_layer(const ParamStore& params, int layer, const EncoderConfig& cfg, const Mat& u,
                  const GraphInput& graph);
Mat embed_nodes(const ParamStore& params, const GraphInput& graph);
Mat encode(const ParamStore& params, const EncoderConfig& cfg, const GraphInput& graph);

std::vector<int> time_labels(std::size_t steps, int clip_distance);

Vec embed_action(const ParamStore& params, const OutputAction& action, const GraphInput& graph);
// Decoder states for [BOS, prefix...].
Mat decoder_states(const ParamStore& params, const DecoderConfig& cfg,
                   const std::vector<OutputAction>& prefix, const Mat& enc_nodes,
                   const GraphInput& graph);
// Generate, CopyEntity and CopyToken logits for one state z, in flat order.
Vec step_logits(const ParamStore& params, const Vec& z, const Mat& enc_nodes,
                const GraphInput& graph);

}  // namespace relparse::oracle

#endif  // RELPARSE_TESTS_ORACLES_H_
