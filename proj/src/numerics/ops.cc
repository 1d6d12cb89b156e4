#include "relparse/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "relparse/errors.h"

namespace relparse::ops {
namespace {

using NodePtr = std::shared_ptr<Node>;

Tensor make_result(Shape shape, std::vector<double> value, std::vector<NodePtr> parents,
                   std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  bool needs = false;
  if (grad_enabled()) {
    for (const auto& p : parents) needs = needs || p->requires_grad;
  }
  if (needs) {
    node->requires_grad = true;
    node->is_leaf = false;
    node->parents = std::move(parents);
    node->backward_fn = std::move(backward);
  }
  return Tensor(std::move(node));
}

// Parent grad buffer, or nullptr when that input needs no gradient.
double* grad_of(Node& self, std::size_t k) {
  Node* p = self.parents[k].get();
  if (!p->requires_grad) return nullptr;
  p->ensure_grad();
  return p->grad.data();
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void check_mask(const Mask* mask, std::size_t n, const char* op) {
  if (mask && mask->size() != n) {
    throw DimensionError(std::string(op) + ": mask has " + std::to_string(mask->size()) +
                         " entries, expected " + std::to_string(n));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree " + shape_string(a.shape()) + " · " +
                         shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const double* A = a.data().data();
  const double* B = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* c = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      const double* br = B + p * n;
      for (std::size_t j = 0; j < n; ++j) c[j] += av * br[j];
    }
  }
  return make_result({m, n}, std::move(out), {a.node_ptr(), b.node_ptr()},
                     [m, k, n](Node& self) {
                       const double* g = self.grad.data();
                       const double* A = self.parents[0]->value.data();
                       const double* B = self.parents[1]->value.data();
                       if (double* ga = grad_of(self, 0)) {
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t p = 0; p < k; ++p) {
                             double s = 0.0;
                             const double* br = B + p * n;
                             const double* gr = g + i * n;
                             for (std::size_t j = 0; j < n; ++j) s += gr[j] * br[j];
                             ga[i * k + p] += s;
                           }
                       }
                       if (double* gb = grad_of(self, 1)) {
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t p = 0; p < k; ++p) {
                             const double av = A[i * k + p];
                             double* gbr = gb + p * n;
                             const double* gr = g + i * n;
                             for (std::size_t j = 0; j < n; ++j) gbr[j] += av * gr[j];
                           }
                       }
                     });
}

Tensor matmul_t(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw DimensionError("matmul_t: inner dimensions disagree " + shape_string(a.shape()) +
                         " · " + shape_string(b.shape()) + "ᵀ");
  }
  std::vector<double> out(m * n);
  const double* A = a.data().data();
  const double* B = b.data().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      const double* ar = A + i * k;
      const double* br = B + j * k;
      for (std::size_t p = 0; p < k; ++p) s += ar[p] * br[p];
      out[i * n + j] = s;
    }
  return make_result({m, n}, std::move(out), {a.node_ptr(), b.node_ptr()},
                     [m, k, n](Node& self) {
                       const double* g = self.grad.data();
                       const double* A = self.parents[0]->value.data();
                       const double* B = self.parents[1]->value.data();
                       if (double* ga = grad_of(self, 0)) {
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t j = 0; j < n; ++j) {
                             const double gv = g[i * n + j];
                             if (gv == 0.0) continue;
                             double* gar = ga + i * k;
                             const double* br = B + j * k;
                             for (std::size_t p = 0; p < k; ++p) gar[p] += gv * br[p];
                           }
                       }
                       if (double* gb = grad_of(self, 1)) {
                         for (std::size_t i = 0; i < m; ++i)
                           for (std::size_t j = 0; j < n; ++j) {
                             const double gv = g[i * n + j];
                             if (gv == 0.0) continue;
                             double* gbr = gb + j * k;
                             const double* ar = A + i * k;
                             for (std::size_t p = 0; p < k; ++p) gbr[p] += gv * ar[p];
                           }
                       }
                     });
}

Tensor transpose(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  const double* A = a.data().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = A[i * n + j];
  return make_result({n, m}, std::move(out), {a.node_ptr()}, [m, n](Node& self) {
    const double* g = self.grad.data();
    if (double* ga = grad_of(self, 0))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += g[j * m + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_result({a.rows(), a.cols()}, std::move(out), {a.node_ptr(), b.node_ptr()},
                     [](Node& self) {
                       const std::size_t n = self.value.size();
                       for (std::size_t k = 0; k < 2; ++k)
                         if (double* g = grad_of(self, k))
                           for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i];
                     });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_result({a.rows(), a.cols()}, std::move(out), {a.node_ptr(), b.node_ptr()},
                     [](Node& self) {
                       const std::size_t n = self.value.size();
                       if (double* g = grad_of(self, 0))
                         for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i];
                       if (double* g = grad_of(self, 1))
                         for (std::size_t i = 0; i < n; ++i) g[i] -= self.grad[i];
                     });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_result({a.rows(), a.cols()}, std::move(out), {a.node_ptr(), b.node_ptr()},
                     [](Node& self) {
                       const std::size_t n = self.value.size();
                       const double* av = self.parents[0]->value.data();
                       const double* bv = self.parents[1]->value.data();
                       if (double* g = grad_of(self, 0))
                         for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i] * bv[i];
                       if (double* g = grad_of(self, 1))
                         for (std::size_t i = 0; i < n; ++i) g[i] += self.grad[i] * av[i];
                     });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  const std::size_t m = a.rows(), n = a.cols();
  if (row.size() != n) {
    throw DimensionError("add_row: row of " + std::to_string(row.size()) + " for width " +
                         std::to_string(n));
  }
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] = a[i * n + j] + row[j];
  return make_result({m, n}, std::move(out), {a.node_ptr(), row.node_ptr()}, [m, n](Node& self) {
    const double* g = self.grad.data();
    if (double* ga = grad_of(self, 0))
      for (std::size_t i = 0; i < m * n; ++i) ga[i] += g[i];
    if (double* gr = grad_of(self, 1))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) gr[j] += g[i * n + j];
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * factor;
  return make_result({a.rows(), a.cols()}, std::move(out), {a.node_ptr()}, [factor](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < self.value.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
  return make_result({a.rows(), a.cols()}, std::move(out), {a.node_ptr()}, [](Node& self) {
    const double* av = self.parents[0]->value.data();
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < self.value.size(); ++i)
        if (av[i] > 0.0) g[i] += self.grad[i];
  });
}

Tensor softmax_rows(const Tensor& logits, const Mask* mask) {
  const std::size_t m = logits.rows(), n = logits.cols();
  check_mask(mask, m * n, "softmax_rows");
  std::vector<double> out(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && !(*mask)[i * n + j]) continue;
      any = true;
      hi = std::max(hi, logits[i * n + j]);
    }
    if (!any) throw InvalidMaskError("softmax_rows: row " + std::to_string(i) + " is fully masked");
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && !(*mask)[i * n + j]) continue;
      out[i * n + j] = std::exp(logits[i * n + j] - hi);
      total += out[i * n + j];
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= total;
  }
  return make_result({m, n}, std::move(out), {logits.node_ptr()}, [m, n](Node& self) {
    double* gx = grad_of(self, 0);
    if (!gx) return;
    const double* y = self.value.data();
    const double* g = self.grad.data();
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += y[i * n + j] * g[i * n + j];
      for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += y[i * n + j] * (g[i * n + j] - dot);
    }
  });
}

Tensor log_softmax_rows(const Tensor& logits, const Mask* mask) {
  const std::size_t m = logits.rows(), n = logits.cols();
  check_mask(mask, m * n, "log_softmax_rows");
  const double neg_inf = -std::numeric_limits<double>::infinity();
  std::vector<double> out(m * n, neg_inf);
  std::vector<double> probs(m * n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double hi = neg_inf;
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && !(*mask)[i * n + j]) continue;
      any = true;
      hi = std::max(hi, logits[i * n + j]);
    }
    if (!any) {
      throw InvalidMaskError("log_softmax_rows: row " + std::to_string(i) + " is fully masked");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && !(*mask)[i * n + j]) continue;
      total += std::exp(logits[i * n + j] - hi);
    }
    const double lse = hi + std::log(total);
    for (std::size_t j = 0; j < n; ++j) {
      if (mask && !(*mask)[i * n + j]) continue;
      out[i * n + j] = logits[i * n + j] - lse;
      probs[i * n + j] = std::exp(out[i * n + j]);
    }
  }
  return make_result({m, n}, std::move(out), {logits.node_ptr()},
                     [m, n, probs = std::move(probs)](Node& self) {
                       double* gx = grad_of(self, 0);
                       if (!gx) return;
                       const double* g = self.grad.data();
                       for (std::size_t i = 0; i < m; ++i) {
                         double total = 0.0;
                         for (std::size_t j = 0; j < n; ++j)
                           if (probs[i * n + j] > 0.0) total += g[i * n + j];
                         for (std::size_t j = 0; j < n; ++j)
                           if (probs[i * n + j] > 0.0)
                             gx[i * n + j] += g[i * n + j] - probs[i * n + j] * total;
                       }
                     });
}

Tensor layer_norm_rows(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  const std::size_t m = x.rows(), n = x.cols();
  if (n == 0) throw DimensionError("layer_norm_rows: zero-width input");
  if (gain.size() != n || bias.size() != n) {
    throw DimensionError("layer_norm_rows: gain/bias width mismatch for width " +
                         std::to_string(n));
  }
  std::vector<double> out(m * n), xhat(m * n), inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += x[i * n + j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double c = x[i * n + j] - mu;
      var += c * c;
    }
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      xhat[i * n + j] = (x[i * n + j] - mu) * inv_std[i];
      out[i * n + j] = gain[j] * xhat[i * n + j] + bias[j];
    }
  }
  return make_result(
      {m, n}, std::move(out), {x.node_ptr(), gain.node_ptr(), bias.node_ptr()},
      [m, n, xhat = std::move(xhat), inv_std = std::move(inv_std)](Node& self) {
        const double* g = self.grad.data();
        const double* gain = self.parents[1]->value.data();
        if (double* gx = grad_of(self, 0)) {
          std::vector<double> dxhat(n);
          for (std::size_t i = 0; i < m; ++i) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              dxhat[j] = g[i * n + j] * gain[j];
              s1 += dxhat[j];
              s2 += dxhat[j] * xhat[i * n + j];
            }
            const double dn = static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j)
              gx[i * n + j] += inv_std[i] / dn * (dn * dxhat[j] - s1 - xhat[i * n + j] * s2);
          }
        }
        if (double* gg = grad_of(self, 1))
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) gg[j] += g[i * n + j] * xhat[i * n + j];
        if (double* gb = grad_of(self, 2))
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) gb[j] += g[i * n + j];
      });
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t n = parts.front().cols();
  std::size_t m = 0;
  std::vector<NodePtr> parents;
  std::vector<std::size_t> offsets;
  for (const Tensor& p : parts) {
    if (p.cols() != n) throw DimensionError("concat_rows: width mismatch");
    offsets.push_back(m * n);
    m += p.rows();
    parents.push_back(p.node_ptr());
  }
  std::vector<double> out;
  out.reserve(m * n);
  for (const Tensor& p : parts) out.insert(out.end(), p.data().begin(), p.data().end());
  return make_result({m, n}, std::move(out), std::move(parents),
                     [offsets = std::move(offsets)](Node& self) {
                       for (std::size_t k = 0; k < offsets.size(); ++k)
                         if (double* g = grad_of(self, k)) {
                           const std::size_t len = self.parents[k]->value.size();
                           for (std::size_t i = 0; i < len; ++i) g[i] += self.grad[offsets[k] + i];
                         }
                     });
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts.front().rows();
  std::size_t n = 0;
  std::vector<NodePtr> parents;
  std::vector<std::size_t> offsets, widths;
  for (const Tensor& p : parts) {
    if (p.rows() != m) throw DimensionError("concat_cols: row count mismatch");
    offsets.push_back(n);
    widths.push_back(p.cols());
    n += p.cols();
    parents.push_back(p.node_ptr());
  }
  std::vector<double> out(m * n);
  for (std::size_t k = 0; k < parts.size(); ++k)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < widths[k]; ++j)
        out[i * n + offsets[k] + j] = parts[k][i * widths[k] + j];
  return make_result({m, n}, std::move(out), std::move(parents),
                     [m, n, offsets = std::move(offsets), widths = std::move(widths)](Node& self) {
                       for (std::size_t k = 0; k < offsets.size(); ++k)
                         if (double* g = grad_of(self, k))
                           for (std::size_t i = 0; i < m; ++i)
                             for (std::size_t j = 0; j < widths[k]; ++j)
                               g[i * widths[k] + j] += self.grad[i * n + offsets[k] + j];
                     });
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  const std::size_t n = a.cols();
  if (begin > end || end > a.rows()) throw DimensionError("slice_rows: range out of bounds");
  std::vector<double> out(a.data().begin() + begin * n, a.data().begin() + end * n);
  return make_result({end - begin, n}, std::move(out), {a.node_ptr()}, [begin, n](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < self.value.size(); ++i) g[begin * n + i] += self.grad[i];
  });
}

Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end) {
  const std::size_t m = a.rows(), n = a.cols();
  if (begin > end || end > n) throw DimensionError("slice_cols: range out of bounds");
  const std::size_t w = end - begin;
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a[i * n + begin + j];
  return make_result({m, w}, std::move(out), {a.node_ptr()}, [m, n, w, begin](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] += self.grad[i * w + j];
  });
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  const std::size_t rows = table.rows(), n = table.cols();
  std::vector<double> out(ids.size() * n);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= rows) {
      throw DimensionError("gather_rows: index " + std::to_string(ids[i]) + " outside table of " +
                           std::to_string(rows) + " rows");
    }
    std::copy_n(table.data().begin() + ids[i] * n, n, out.begin() + i * n);
  }
  return make_result({ids.size(), n}, std::move(out), {table.node_ptr()},
                     [n, ids = std::vector<int>(ids.begin(), ids.end())](Node& self) {
                       if (double* g = grad_of(self, 0))
                         for (std::size_t i = 0; i < ids.size(); ++i)
                           for (std::size_t j = 0; j < n; ++j) g[ids[i] * n + j] += self.grad[i * n + j];
                     });
}

Tensor mean_rows(const Tensor& a) {
  const std::size_t m = a.rows(), n = a.cols();
  if (m == 0) throw DimensionError("mean_rows: no rows");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j] += a[i * n + j];
  for (double& v : out) v /= static_cast<double>(m);
  return make_result({1, n}, std::move(out), {a.node_ptr()}, [m, n](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j] / static_cast<double>(m);
  });
}

Tensor pick_by_index(const Tensor& m, std::span<const int> index, std::size_t k) {
  const std::size_t r = m.rows(), width = m.cols();
  if (index.size() != r * k) throw DimensionError("pick_by_index: index size mismatch");
  std::vector<double> out(r * k);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const int l = index[i * k + j];
      if (l < 0 || static_cast<std::size_t>(l) >= width) {
        throw DimensionError("pick_by_index: index " + std::to_string(l) + " out of range");
      }
      out[i * k + j] = m[i * width + l];
    }
  return make_result({r, k}, std::move(out), {m.node_ptr()},
                     [r, k, width, index = std::vector<int>(index.begin(), index.end())](Node& self) {
                       if (double* g = grad_of(self, 0))
                         for (std::size_t i = 0; i < r; ++i)
                           for (std::size_t j = 0; j < k; ++j)
                             g[i * width + index[i * k + j]] += self.grad[i * k + j];
                     });
}

Tensor scatter_by_index(const Tensor& a, std::span<const int> index, std::size_t width) {
  const std::size_t r = a.rows(), k = a.cols();
  if (index.size() != r * k) throw DimensionError("scatter_by_index: index size mismatch");
  std::vector<double> out(r * width, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const int l = index[i * k + j];
      if (l < 0 || static_cast<std::size_t>(l) >= width) {
        throw DimensionError("scatter_by_index: index " + std::to_string(l) + " out of range");
      }
      out[i * width + l] += a[i * k + j];
    }
  return make_result({r, width}, std::move(out), {a.node_ptr()},
                     [r, k, width, index = std::vector<int>(index.begin(), index.end())](Node& self) {
                       if (double* g = grad_of(self, 0))
                         for (std::size_t i = 0; i < r; ++i)
                           for (std::size_t j = 0; j < k; ++j)
                             g[i * k + j] += self.grad[i * width + index[i * k + j]];
                     });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return make_result({}, {s}, {a.node_ptr()}, [](Node& self) {
    if (double* g = grad_of(self, 0))
      for (std::size_t i = 0; i < self.parents[0]->value.size(); ++i) g[i] += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw DimensionError("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor dropout(const Tensor& a, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return a;
  if (p >= 1.0) throw Error("dropout: probability must be < 1");
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> mask(a.size());
  const double kept = 1.0 / (1.0 - p);
  for (double& v : mask) v = keep(rng) ? kept : 0.0;
  return mul(a, Tensor::from({a.rows(), a.cols()}, std::move(mask)));
}

Tensor marginal_nll(const Tensor& logits, const Mask& enabled,
                    const std::vector<std::vector<int>>& gold) {
  const std::size_t m = logits.rows(), n = logits.cols();
  if (gold.size() != m) throw DimensionError("marginal_nll: one gold set per row required");
  check_mask(&enabled, m * n, "marginal_nll");
  // d(loss)/d(logit) = (p - q) / m, with q the posterior restricted to the gold set.
  std::vector<double> delta(m * n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (gold[i].empty()) throw Error("marginal_nll: empty gold set at row " + std::to_string(i));
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (enabled[i * n + j]) hi = std::max(hi, logits[i * n + j]);
    if (!std::isfinite(hi)) throw InvalidMaskError("marginal_nll: row has no enabled action");
    double z_all = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (enabled[i * n + j]) z_all += std::exp(logits[i * n + j] - hi);
    double z_gold = 0.0;
    for (int a : gold[i]) {
      if (a < 0 || static_cast<std::size_t>(a) >= n || !enabled[i * n + a]) {
        throw Error("marginal_nll: gold action " + std::to_string(a) + " is not enabled");
      }
      z_gold += std::exp(logits[i * n + a] - hi);
    }
    total += std::log(z_all) - std::log(z_gold);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t j = 0; j < n; ++j)
      if (enabled[i * n + j]) delta[i * n + j] = std::exp(logits[i * n + j] - hi) / z_all * inv_m;
    for (int a : gold[i]) delta[i * n + a] -= std::exp(logits[i * n + a] - hi) / z_gold * inv_m;
  }
  return make_result({}, {total / static_cast<double>(m)}, {logits.node_ptr()},
                     [delta = std::move(delta)](Node& self) {
                       if (double* g = grad_of(self, 0))
                         for (std::size_t i = 0; i < delta.size(); ++i) g[i] += self.grad[0] * delta[i];
                     });
}

namespace testing {

Tensor mismatched_scale(const Tensor& a, double forward_factor, double backward_factor) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * forward_factor;
  return make_result({a.rows(), a.cols()}, std::move(out), {a.node_ptr()},
                     [backward_factor](Node& self) {
                       if (double* g = grad_of(self, 0))
                         for (std::size_t i = 0; i < self.value.size(); ++i)
                           g[i] += backward_factor * self.grad[i];
                     });
}

}  // namespace testing

}  // namespace relparse::ops
