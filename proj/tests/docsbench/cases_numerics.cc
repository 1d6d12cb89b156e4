#include <cmath>

#include "gradcheck.h"
#include "property_case.h"
#include "relparse/adam.h"
#include "relparse/ops.h"

namespace relparse::bench {
namespace {

using testgen::random_tensor;
using testgen::uniform_int;

Tensor leaf(std::mt19937_64& rng, std::size_t r, std::size_t c) {
  Tensor t = random_tensor(rng, r, c, 1.0);
  t.set_requires_grad(true);
  return t;
}

ops::Mask random_mask(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  ops::Mask m(rows * cols);
  for (auto& v : m) v = uniform_int(rng, 0, 1);
  for (std::size_t r = 0; r < rows; ++r) m[r * cols + uniform_int(rng, 0, static_cast<int>(cols) - 1)] = 1;
  return m;
}

// Every op on freshly drawn shapes; returns the worst relative error and its op.
std::string op_gradients(std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  const std::size_t r = uniform_int(rng, 1, 4), c = uniform_int(rng, 1, 4), k = uniform_int(rng, 1, 4);
  using Op = std::function<Tensor(const std::vector<Tensor>&)>;
  struct Spec {
    std::string name;
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    Op f;
  };
  const ops::Mask mask = random_mask(rng, r, c);
  std::vector<int> ids(uniform_int(rng, 1, 5));
  for (int& i : ids) i = uniform_int(rng, 0, static_cast<int>(r) - 1);
  std::vector<int> index(r * c);
  for (int& i : index) i = uniform_int(rng, 0, static_cast<int>(k) - 1);
  std::vector<int> picks(r * k);
  for (int& i : picks) i = uniform_int(rng, 0, static_cast<int>(c) - 1);
  const std::size_t b0 = uniform_int(rng, 0, static_cast<int>(r) - 1);
  const std::size_t b1 = uniform_int(rng, static_cast<int>(b0) + 1, static_cast<int>(r));
  const std::size_t c0 = uniform_int(rng, 0, static_cast<int>(c) - 1);
  const std::size_t c1 = uniform_int(rng, static_cast<int>(c0) + 1, static_cast<int>(c));
  const double factor = testgen::uniform_real(rng, -3.0, 3.0);
  std::vector<std::vector<int>> gold(r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j)
      if (mask[i * c + j] && (gold[i].empty() || uniform_int(rng, 0, 1))) gold[i].push_back(static_cast<int>(j));
  }
  const std::vector<Spec> specs = {
      {"matmul", {{r, k}, {k, c}}, [](const auto& x) { return ops::matmul(x[0], x[1]); }},
      {"matmul_t", {{r, k}, {c, k}}, [](const auto& x) { return ops::matmul_t(x[0], x[1]); }},
      {"add", {{r, c}, {r, c}}, [](const auto& x) { return ops::add(x[0], x[1]); }},
      {"sub", {{r, c}, {r, c}}, [](const auto& x) { return ops::sub(x[0], x[1]); }},
      {"mul", {{r, c}, {r, c}}, [](const auto& x) { return ops::mul(x[0], x[1]); }},
      {"add_row", {{r, c}, {1, c}}, [](const auto& x) { return ops::add_row(x[0], x[1]); }},
      {"transpose", {{r, c}}, [](const auto& x) { return ops::transpose(x[0]); }},
      {"scale", {{r, c}}, [&](const auto& x) { return ops::scale(x[0], factor); }},
      {"relu", {{r, c}}, [](const auto& x) { return ops::relu(x[0]); }},
      {"softmax_rows", {{r, c}}, [](const auto& x) { return ops::softmax_rows(x[0]); }},
      {"masked_softmax_rows", {{r, c}}, [&](const auto& x) { return ops::softmax_rows(x[0], &mask); }},
      {"log_softmax_rows", {{r, c}}, [](const auto& x) { return ops::log_softmax_rows(x[0]); }},
      {"layer_norm_rows", {{r, c + 1}, {1, c + 1}, {1, c + 1}},
       [](const auto& x) { return ops::layer_norm_rows(x[0], x[1], x[2]); }},
      {"concat_rows", {{r, c}, {k, c}}, [](const auto& x) { return ops::concat_rows(std::span(x)); }},
      {"concat_cols", {{r, c}, {r, k}}, [](const auto& x) { return ops::concat_cols(std::span(x)); }},
      {"slice_rows", {{r, c}}, [&](const auto& x) { return ops::slice_rows(x[0], b0, b1); }},
      {"slice_cols", {{r, c}}, [&](const auto& x) { return ops::slice_cols(x[0], c0, c1); }},
      {"gather_rows", {{r, c}}, [&](const auto& x) { return ops::gather_rows(x[0], ids); }},
      {"mean_rows", {{r, c}}, [](const auto& x) { return ops::mean_rows(x[0]); }},
      {"pick_by_index", {{r, c}}, [&](const auto& x) { return ops::pick_by_index(x[0], picks, k); }},
      {"scatter_by_index", {{r, c}}, [&](const auto& x) { return ops::scatter_by_index(x[0], index, k + 1); }},
      {"sum", {{r, c}}, [](const auto& x) { return ops::sum(x[0]); }},
      {"mean", {{r, c}}, [](const auto& x) { return ops::mean(x[0]); }},
      {"marginal_nll", {{r, c}}, [&](const auto& x) { return ops::marginal_nll(x[0], mask, gold); }},
  };
  for (const auto& spec : specs) {
    std::vector<Tensor> inputs;
    std::vector<std::pair<std::string, Tensor>> named;
    for (const auto& [rows, cols] : spec.shapes) {
      inputs.push_back(leaf(rng, rows, cols));
      named.emplace_back("x" + std::to_string(named.size()), inputs.back());
    }
    const Tensor y0 = spec.f(inputs);
    const Tensor w = random_tensor(rng, y0.rows(), y0.cols(), 1.0);
    const auto res = testgen::check_gradients(named, [&] { return ops::sum(ops::mul(spec.f(inputs), w)); });
    if (!(res.max_rel_error < tol))
      return describe(spec.name, ": relative error ", res.max_rel_error, " at ", res.worst);
  }
  return {};
}

std::string softmax_sums(std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  const std::size_t r = uniform_int(rng, 1, 6), c = uniform_int(rng, 1, 12);
  const double magnitude = std::pow(10.0, testgen::uniform_real(rng, -3.0, 3.0));
  const Tensor x = random_tensor(rng, r, c, magnitude);
  const ops::Mask mask = random_mask(rng, r, c);
  for (const ops::Mask* m : {static_cast<const ops::Mask*>(nullptr), &mask}) {
    const Tensor p = ops::softmax_rows(x, m);
    for (std::size_t i = 0; i < r; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < c; ++j) total += p.at(i, j);
      if (std::abs(total - 1.0) > tol) return describe("row ", i, " sums to ", total, " at scale ", magnitude);
    }
  }
  return {};
}

std::string adam_identity(std::uint64_t seed, double) {
  std::mt19937_64 rng(seed);
  ParamStore params(seed);
  std::vector<Tensor> ts;
  const int n = uniform_int(rng, 1, 4);
  for (int i = 0; i < n; ++i)
    ts.push_back(params.add_uniform("p" + std::to_string(i), {static_cast<std::size_t>(uniform_int(rng, 1, 4)),
                                                               static_cast<std::size_t>(uniform_int(rng, 1, 4))}));
  AdamState state;
  for (int step = 0; step < 3; ++step) {
    params.zero_grad();
    Tensor loss = Tensor::scalar(0.0);
    for (const auto& t : ts) loss = ops::add(loss, ops::sum(ops::mul(t, random_tensor(rng, t.rows(), t.cols(), 1.0))));
    loss.backward();
    std::vector<std::vector<double>> before;
    for (const auto& t : ts) before.emplace_back(t.data().begin(), t.data().end());
    adam_step(params, state, 0.0);
    for (std::size_t i = 0; i < ts.size(); ++i)
      if (!std::equal(before[i].begin(), before[i].end(), ts[i].data().begin()))
        return describe("parameter p", i, " changed at step ", step);
    for (const auto& [name, t] : params.all())
      if (state.first_moment.at(name).size() != t.size()) return "moment buffer shape differs from parameter";
  }
  return {};
}

std::string seeded_determinism(std::uint64_t seed, double) {
  auto run = [seed] {
    ParamStore params(seed);
    Tensor w = params.add_uniform("w", {3, 4});
    std::mt19937_64 rng(seed);
    const Tensor x = random_tensor(rng, 2, 3, 1.0);
    const Tensor y = ops::dropout(ops::matmul(x, w), 0.3, rng);
    ops::sum(ops::mul(y, y)).backward();
    AdamState state;
    adam_step(params, state, 0.01);
    std::vector<double> out(w.data().begin(), w.data().end());
    out.insert(out.end(), y.data().begin(), y.data().end());
    return out;
  };
  return run() == run() ? std::string() : std::string("two runs with the same seed differ");
}

const Register r1({"numerics.op_gradients", "numerics",
                   "reverse-mode gradient of every tensor op vs central differences", 1, 100, 1e-4,
                   "1e-4 relative (finite differences)", op_gradients});
const Register r2({"numerics.softmax_sums_to_one", "numerics", "softmax normalization, max-shifted", 1, 200,
                   1e-9, "1e-9 absolute", softmax_sums});
const Register r3({"numerics.adam_zero_lr_identity", "numerics",
                   "Adam update theta -= lr * m_hat / (sqrt(v_hat) + eps) with lr = 0", 1, 100, 0.0,
                   "exact", adam_identity});
const Register r4({"numerics.seeded_determinism", "numerics", "init, dropout and update driven only by the seed",
                   1, 100, 0.0, "exact", seeded_determinism});

}  // namespace
}  // namespace relparse::bench
