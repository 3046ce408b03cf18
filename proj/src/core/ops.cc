/* Copyright 2026 The DSGL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dsgl/core/ops.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dsgl/core/errors.h"

namespace dsgl {

namespace {

using RowMat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using ConstMapMat = Eigen::Map<const RowMat>;

ConstMapMat View(std::span<const Real> data, std::size_t rows,
                 std::size_t cols) {
  return ConstMapMat(data.data(), static_cast<Eigen::Index>(rows),
                     static_cast<Eigen::Index>(cols));
}

MapMat View(std::vector<Real>& data, std::size_t rows, std::size_t cols) {
  return MapMat(data.data(), static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " +
                         ShapeToString(a.shape()) + " vs " +
                         ShapeToString(b.shape()));
  }
}

void RequireRank(const Tensor& t, std::size_t rank, const char* op,
                 const char* what) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + what + " must have rank " +
                         std::to_string(rank) + ", got " +
                         ShapeToString(t.shape()));
  }
}

// Splits a shape around `axis` into (outer, extent, inner) for strided loops.
struct AxisSplit {
  std::size_t outer = 1;
  std::size_t extent = 1;
  std::size_t inner = 1;
};

AxisSplit SplitAt(const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw DimensionError("axis " + std::to_string(axis) +
                         " out of range for shape " + ShapeToString(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.extent = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

// c (m x n) += a (m x k) . b (k x n). Every output row is accumulated over p
// in ascending order with the same instruction sequence whatever m is, so a
// row's value does not depend on which other rows share the call. Rows are
// processed four at a time to reuse each row of b. A p whose four
// coefficients are all zero is skipped; c never holds -0 and b is finite, so
// adding 0 * b would leave c unchanged anyway.
void RowStableProduct(const Real* a, std::size_t m, std::size_t k, const Real* b,
                      std::size_t n, Real* c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    Real* c0 = c + i * n;
    Real* c1 = c0 + n;
    Real* c2 = c1 + n;
    Real* c3 = c2 + n;
    const Real* a0 = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real s0 = a0[p], s1 = a0[k + p], s2 = a0[2 * k + p], s3 = a0[3 * k + p];
      if (s0 == 0.0 && s1 == 0.0 && s2 == 0.0 && s3 == 0.0) continue;
      const Real* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const Real v = bp[j];
        c0[j] += s0 * v;
        c1[j] += s1 * v;
        c2[j] += s2 * v;
        c3[j] += s3 * v;
      }
    }
  }
  for (; i < m; ++i) {
    Real* ci = c + i * n;
    const Real* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const Real s = ai[p];
      if (s == 0.0) continue;
      const Real* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += s * bp[j];
    }
  }
}

Real StableSigmoid(Real x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const Real e = std::exp(x);
  return e / (1.0 + e);
}

template <typename Fn>
Tensor Unary(const Tensor& x, Fn&& fn,
             Real (*derivative_from_output)(Real out, Real in)) {
  std::vector<Real> out(x.numel());
  const auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(in[i]);
  return MakeResult(x.shape(), std::move(out), {x},
                    [x, derivative_from_output](const auto& out_node) {
                      return [x, out_node, derivative_from_output](
                                 std::span<const Real> g) {
                        auto& gx = GradBuffer(*x.node());
                        const auto& y = out_node->data;
                        const auto& xin = x.node()->data;
                        for (std::size_t i = 0; i < gx.size(); ++i) {
                          gx[i] += g[i] * derivative_from_output(y[i], xin[i]);
                        }
                      };
                    });
}

}  // namespace

Tensor MatMul(const Tensor& a, const Tensor& b) {
  RequireRank(a, 2, "matmul", "lhs");
  RequireRank(b, 2, "matmul", "rhs");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ " +
                         ShapeToString(a.shape()) + " . " +
                         ShapeToString(b.shape()));
  }
  std::vector<Real> out(m * n, 0.0);
  RowStableProduct(a.data().data(), m, k, b.data().data(), n, out.data());
  return MakeResult({m, n}, std::move(out), {a, b}, [a, b, m, k, n](const auto&) {
    return [a, b, m, k, n](std::span<const Real> g) {
      const auto dc = View(g, m, n);
      if (a.requires_grad()) {
        View(GradBuffer(*a.node()), m, k).noalias() +=
            dc * View(b.data(), k, n).transpose();
      }
      if (b.requires_grad()) {
        View(GradBuffer(*b.node()), k, n).noalias() +=
            View(a.data(), m, k).transpose() * dc;
      }
    };
  });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  const bool broadcast = a.shape() != b.shape();
  if (broadcast && !(b.rank() == 1 && b.dim(0) == a.cols() && a.rank() >= 1)) {
    throw DimensionError("add: cannot broadcast " + ShapeToString(b.shape()) +
                         " onto " + ShapeToString(a.shape()));
  }
  const std::size_t cols = broadcast ? b.numel() : a.numel();
  std::vector<Real> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bd[i % cols];
  return MakeResult(a.shape(), std::move(out), {a, b}, [a, b, cols](const auto&) {
    return [a, b, cols](std::span<const Real> g) {
      if (a.requires_grad()) {
        auto& ga = GradBuffer(*a.node());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto& gb = GradBuffer(*b.node());
        for (std::size_t i = 0; i < g.size(); ++i) gb[i % cols] += g[i];
      }
    };
  });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "sub");
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return MakeResult(a.shape(), std::move(out), {a, b}, [a, b](const auto&) {
    return [a, b](std::span<const Real> g) {
      if (a.requires_grad()) {
        auto& ga = GradBuffer(*a.node());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto& gb = GradBuffer(*b.node());
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    };
  });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mul");
  std::vector<Real> out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return MakeResult(a.shape(), std::move(out), {a, b}, [a, b](const auto&) {
    return [a, b](std::span<const Real> g) {
      if (a.requires_grad()) {
        auto& ga = GradBuffer(*a.node());
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * b[i];
      }
      if (b.requires_grad()) {
        auto& gb = GradBuffer(*b.node());
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * a[i];
      }
    };
  });
}

Tensor Scale(const Tensor& a, Real factor) {
  std::vector<Real> out(a.data().begin(), a.data().end());
  for (Real& v : out) v *= factor;
  return MakeResult(a.shape(), std::move(out), {a}, [a, factor](const auto&) {
    return [a, factor](std::span<const Real> g) {
      auto& ga = GradBuffer(*a.node());
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
    };
  });
}

Tensor Sigmoid(const Tensor& x) {
  return Unary(x, StableSigmoid, [](Real y, Real) { return y * (1.0 - y); });
}

Tensor Tanh(const Tensor& x) {
  return Unary(x, [](Real v) { return std::tanh(v); },
               [](Real y, Real) { return 1.0 - y * y; });
}

Tensor Relu(const Tensor& x) {
  return Unary(x, [](Real v) { return v > 0 ? v : 0.0; },
               [](Real, Real in) { return in > 0 ? 1.0 : 0.0; });
}

Tensor Concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts.front().shape();
  if (axis >= first.size()) {
    throw DimensionError("concat: axis " + std::to_string(axis) +
                         " out of range for shape " + ShapeToString(first));
  }
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) ok = false;
    }
    if (!ok) {
      throw DimensionError("concat: incompatible shapes " +
                           ShapeToString(first) + " and " + ShapeToString(s));
    }
    out_shape[axis] += s[axis];
  }
  const AxisSplit split = SplitAt(out_shape, axis);
  // Each part contributes a contiguous block of extent*inner per outer index.
  std::vector<std::size_t> block(parts.size()), offset(parts.size());
  std::size_t acc = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    block[p] = parts[p].shape()[axis] * split.inner;
    offset[p] = acc;
    acc += block[p];
  }
  const std::size_t row = acc;
  std::vector<Real> out(NumElements(out_shape));
  for (std::size_t o = 0; o < split.outer; ++o) {
    for (std::size_t p = 0; p < parts.size(); ++p) {
      const auto src = parts[p].data().subspan(o * block[p], block[p]);
      std::copy(src.begin(), src.end(), out.begin() + o * row + offset[p]);
    }
  }
  return MakeResult(out_shape, std::move(out), parts,
                    [parts, block, offset, row, split](const auto&) {
                      return [parts, block, offset, row, split](
                                 std::span<const Real> g) {
                        for (std::size_t p = 0; p < parts.size(); ++p) {
                          if (!parts[p].requires_grad()) continue;
                          auto& gp = GradBuffer(*parts[p].node());
                          for (std::size_t o = 0; o < split.outer; ++o) {
                            for (std::size_t j = 0; j < block[p]; ++j) {
                              gp[o * block[p] + j] += g[o * row + offset[p] + j];
                            }
                          }
                        }
                      };
                    });
}

Tensor Reshape(const Tensor& x, Shape shape) {
  if (NumElements(shape) != x.numel()) {
    throw DimensionError("reshape: " + ShapeToString(x.shape()) + " -> " +
                         ShapeToString(shape));
  }
  std::vector<Real> out(x.data().begin(), x.data().end());
  return MakeResult(std::move(shape), std::move(out), {x}, [x](const auto&) {
    return [x](std::span<const Real> g) {
      auto& gx = GradBuffer(*x.node());
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    };
  });
}

Tensor SumAll(const Tensor& x) {
  Real total = 0.0;
  for (Real v : x.data()) total += v;
  return MakeResult({}, {total}, {x}, [x](const auto&) {
    return [x](std::span<const Real> g) {
      auto& gx = GradBuffer(*x.node());
      for (Real& v : gx) v += g[0];
    };
  });
}

namespace {

Tensor ReduceAxis(const Tensor& x, std::size_t axis, bool mean) {
  const AxisSplit s = SplitAt(x.shape(), axis);
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + static_cast<std::ptrdiff_t>(axis));
  const Real factor = mean ? (s.extent ? 1.0 / static_cast<Real>(s.extent) : 0.0)
                           : 1.0;
  std::vector<Real> out(s.outer * s.inner, 0.0);
  const auto in = x.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t e = 0; e < s.extent; ++e) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        out[o * s.inner + i] += in[(o * s.extent + e) * s.inner + i];
      }
    }
  }
  if (mean) {
    for (Real& v : out) v *= factor;
  }
  return MakeResult(out_shape, std::move(out), {x}, [x, s, factor](const auto&) {
    return [x, s, factor](std::span<const Real> g) {
      auto& gx = GradBuffer(*x.node());
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t e = 0; e < s.extent; ++e) {
          for (std::size_t i = 0; i < s.inner; ++i) {
            gx[(o * s.extent + e) * s.inner + i] += g[o * s.inner + i] * factor;
          }
        }
      }
    };
  });
}

}  // namespace

Tensor SumAxis(const Tensor& x, std::size_t axis) {
  return ReduceAxis(x, axis, false);
}

Tensor MeanAxis(const Tensor& x, std::size_t axis) {
  return ReduceAxis(x, axis, true);
}

Tensor GatherRows(const Tensor& table, std::span<const std::int64_t> indices) {
  RequireRank(table, 2, "gather_rows", "table");
  const std::size_t vocab = table.dim(0), d = table.dim(1);
  std::vector<std::int64_t> idx(indices.begin(), indices.end());
  std::vector<Real> out(idx.size() * d);
  const auto src = table.data();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || static_cast<std::size_t>(idx[r]) >= vocab) {
      throw IndexError("gather_rows: index " + std::to_string(idx[r]) +
                       " outside table of " + std::to_string(vocab) + " rows");
    }
    const auto row = src.subspan(static_cast<std::size_t>(idx[r]) * d, d);
    std::copy(row.begin(), row.end(), out.begin() + r * d);
  }
  const std::size_t n = idx.size();
  return MakeResult({n, d}, std::move(out), {table},
                    [table, idx = std::move(idx), d](const auto&) {
                      return [table, idx, d](std::span<const Real> g) {
                        auto& gt = GradBuffer(*table.node());
                        for (std::size_t r = 0; r < idx.size(); ++r) {
                          const std::size_t base = static_cast<std::size_t>(idx[r]) * d;
                          for (std::size_t j = 0; j < d; ++j) {
                            gt[base + j] += g[r * d + j];
                          }
                        }
                      };
                    });
}

Tensor MaskedSoftmax(const Tensor& logits, const Tensor& mask,
                     std::size_t axis) {
  RequireSameShape(logits, mask, "masked_softmax");
  const AxisSplit s = SplitAt(logits.shape(), axis);
  std::vector<Real> out(logits.numel(), 0.0);
  const auto x = logits.data();
  const auto m = mask.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.extent * s.inner + i;
      Real max_logit = -std::numeric_limits<Real>::infinity();
      for (std::size_t e = 0; e < s.extent; ++e) {
        const std::size_t at = base + e * s.inner;
        if (m[at] != 0.0) max_logit = std::max(max_logit, x[at]);
      }
      if (max_logit == -std::numeric_limits<Real>::infinity()) continue;
      Real total = 0.0;
      for (std::size_t e = 0; e < s.extent; ++e) {
        const std::size_t at = base + e * s.inner;
        if (m[at] != 0.0) {
          out[at] = std::exp(x[at] - max_logit);
          total += out[at];
        }
      }
      for (std::size_t e = 0; e < s.extent; ++e) out[base + e * s.inner] /= total;
    }
  }
  return MakeResult(logits.shape(), std::move(out), {logits},
                    [logits, s](const auto& out_node) {
                      return [logits, s, out_node](std::span<const Real> g) {
                        auto& gx = GradBuffer(*logits.node());
                        const auto& y = out_node->data;
                        for (std::size_t o = 0; o < s.outer; ++o) {
                          for (std::size_t i = 0; i < s.inner; ++i) {
                            const std::size_t base = o * s.extent * s.inner + i;
                            Real dot = 0.0;
                            for (std::size_t e = 0; e < s.extent; ++e) {
                              const std::size_t at = base + e * s.inner;
                              dot += y[at] * g[at];
                            }
                            for (std::size_t e = 0; e < s.extent; ++e) {
                              const std::size_t at = base + e * s.inner;
                              gx[at] += y[at] * (g[at] - dot);
                            }
                          }
                        }
                      };
                    });
}

Tensor MaskRows(const Tensor& x, const Tensor& row_mask) {
  const std::size_t rows = x.rows(), cols = x.cols();
  if (row_mask.numel() != rows) {
    throw DimensionError("mask_rows: mask of " + std::to_string(row_mask.numel()) +
                         " entries for " + std::to_string(rows) + " rows");
  }
  std::vector<Real> out(x.numel(), 0.0);
  const auto in = x.data();
  const auto m = row_mask.data();
  for (std::size_t r = 0; r < rows; ++r) {
    if (m[r] == 0.0) continue;
    std::copy_n(in.begin() + r * cols, cols, out.begin() + r * cols);
  }
  return MakeResult(x.shape(), std::move(out), {x}, [x, row_mask, rows, cols](const auto&) {
    return [x, row_mask, rows, cols](std::span<const Real> g) {
      auto& gx = GradBuffer(*x.node());
      for (std::size_t r = 0; r < rows; ++r) {
        if (row_mask[r] == 0.0) continue;
        for (std::size_t j = 0; j < cols; ++j) gx[r * cols + j] += g[r * cols + j];
      }
    };
  });
}

Tensor MaskedMean(const Tensor& values, const Tensor& mask) {
  RequireRank(values, 3, "masked_mean", "values");
  RequireRank(mask, 2, "masked_mean", "mask");
  const std::size_t n = values.dim(0), len = values.dim(1), d = values.dim(2);
  if (mask.dim(0) != n || mask.dim(1) != len) {
    throw DimensionError("masked_mean: mask " + ShapeToString(mask.shape()) +
                         " vs values " + ShapeToString(values.shape()));
  }
  std::vector<Real> out(n * d, 0.0);
  std::vector<Real> inv_count(n, 0.0);
  const auto v = values.data();
  const auto m = mask.data();
  for (std::size_t r = 0; r < n; ++r) {
    std::size_t count = 0;
    for (std::size_t l = 0; l < len; ++l) {
      if (m[r * len + l] == 0.0) continue;
      ++count;
      for (std::size_t j = 0; j < d; ++j) out[r * d + j] += v[(r * len + l) * d + j];
    }
    if (count == 0) continue;
    inv_count[r] = 1.0 / static_cast<Real>(count);
    for (std::size_t j = 0; j < d; ++j) out[r * d + j] /= static_cast<Real>(count);
  }
  return MakeResult({n, d}, std::move(out), {values},
                    [values, mask, inv_count, n, len, d](const auto&) {
                      return [values, mask, inv_count, n, len, d](std::span<const Real> g) {
                        auto& gv = GradBuffer(*values.node());
                        for (std::size_t r = 0; r < n; ++r) {
                          for (std::size_t l = 0; l < len; ++l) {
                            if (mask[r * len + l] == 0.0) continue;
                            for (std::size_t j = 0; j < d; ++j) {
                              gv[(r * len + l) * d + j] += g[r * d + j] * inv_count[r];
                            }
                          }
                        }
                      };
                    });
}

Tensor HeadScores(const Tensor& query, const Tensor& keys, std::size_t heads) {
  RequireRank(query, 2, "head_scores", "query");
  RequireRank(keys, 3, "head_scores", "keys");
  const std::size_t n = query.dim(0), d = query.dim(1), len = keys.dim(1);
  if (keys.dim(0) != n || keys.dim(2) != d) {
    throw DimensionError("head_scores: query " + ShapeToString(query.shape()) +
                         " vs keys " + ShapeToString(keys.shape()));
  }
  if (heads == 0 || d % heads != 0) {
    throw DimensionError("head_scores: width " + std::to_string(d) +
                         " not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t dh = d / heads;
  std::vector<Real> out(n * heads * len, 0.0);
  const auto q = query.data();
  const auto k = keys.data();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t l = 0; l < len; ++l) {
      const Real* krow = k.data() + (r * len + l) * d;
      const Real* qrow = q.data() + r * d;
      for (std::size_t h = 0; h < heads; ++h) {
        Real acc = 0.0;
        for (std::size_t j = h * dh; j < (h + 1) * dh; ++j) acc += qrow[j] * krow[j];
        out[(r * heads + h) * len + l] = acc;
      }
    }
  }
  return MakeResult({n, heads, len}, std::move(out), {query, keys},
                    [query, keys, n, d, len, heads, dh](const auto&) {
                      return [query, keys, n, d, len, heads, dh](std::span<const Real> g) {
                        const bool gq_needed = query.requires_grad();
                        const bool gk_needed = keys.requires_grad();
                        std::vector<Real>* gq = gq_needed ? &GradBuffer(*query.node()) : nullptr;
                        std::vector<Real>* gk = gk_needed ? &GradBuffer(*keys.node()) : nullptr;
                        const auto q = query.data();
                        const auto k = keys.data();
                        for (std::size_t r = 0; r < n; ++r) {
                          for (std::size_t l = 0; l < len; ++l) {
                            const std::size_t krow = (r * len + l) * d;
                            for (std::size_t h = 0; h < heads; ++h) {
                              const Real gs = g[(r * heads + h) * len + l];
                              if (gs == 0.0) continue;
                              for (std::size_t j = h * dh; j < (h + 1) * dh; ++j) {
                                if (gq) (*gq)[r * d + j] += gs * k[krow + j];
                                if (gk) (*gk)[krow + j] += gs * q[r * d + j];
                              }
                            }
                          }
                        }
                      };
                    });
}

Tensor HeadPool(const Tensor& weights, const Tensor& values, std::size_t heads) {
  RequireRank(weights, 3, "head_pool", "weights");
  RequireRank(values, 3, "head_pool", "values");
  const std::size_t n = values.dim(0), len = values.dim(1), d = values.dim(2);
  if (weights.dim(0) != n || weights.dim(1) != heads || weights.dim(2) != len) {
    throw DimensionError("head_pool: weights " + ShapeToString(weights.shape()) +
                         " vs values " + ShapeToString(values.shape()));
  }
  if (heads == 0 || d % heads != 0) {
    throw DimensionError("head_pool: width " + std::to_string(d) +
                         " not divisible by " + std::to_string(heads) + " heads");
  }
  const std::size_t dh = d / heads;
  std::vector<Real> out(n * d, 0.0);
  const auto w = weights.data();
  const auto v = values.data();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t l = 0; l < len; ++l) {
      const Real* vrow = v.data() + (r * len + l) * d;
      for (std::size_t h = 0; h < heads; ++h) {
        const Real wt = w[(r * heads + h) * len + l];
        if (wt == 0.0) continue;
        for (std::size_t j = h * dh; j < (h + 1) * dh; ++j) out[r * d + j] += wt * vrow[j];
      }
    }
  }
  return MakeResult({n, d}, std::move(out), {weights, values},
                    [weights, values, n, len, d, heads, dh](const auto&) {
                      return [weights, values, n, len, d, heads, dh](std::span<const Real> g) {
                        std::vector<Real>* gw = weights.requires_grad() ? &GradBuffer(*weights.node()) : nullptr;
                        std::vector<Real>* gv = values.requires_grad() ? &GradBuffer(*values.node()) : nullptr;
                        const auto w = weights.data();
                        const auto v = values.data();
                        for (std::size_t r = 0; r < n; ++r) {
                          for (std::size_t l = 0; l < len; ++l) {
                            const std::size_t vrow = (r * len + l) * d;
                            for (std::size_t h = 0; h < heads; ++h) {
                              const std::size_t wi = (r * heads + h) * len + l;
                              Real acc = 0.0;
                              for (std::size_t j = h * dh; j < (h + 1) * dh; ++j) {
                                acc += g[r * d + j] * v[vrow + j];
                                if (gv) (*gv)[vrow + j] += g[r * d + j] * w[wi];
                              }
                              if (gw) (*gw)[wi] += acc;
                            }
                          }
                        }
                      };
                    });
}

Tensor GruSequence(const Tensor& inputs, const Tensor& mask,
                   const Tensor& w_input, const Tensor& w_hidden,
                   const Tensor& b_input, const Tensor& b_hidden) {
  RequireRank(inputs, 3, "gru", "inputs");
  RequireRank(mask, 2, "gru", "mask");
  RequireRank(w_input, 2, "gru", "w_input");
  RequireRank(w_hidden, 2, "gru", "w_hidden");
  const std::size_t n = inputs.dim(0), len = inputs.dim(1), in = inputs.dim(2);
  const std::size_t h = w_hidden.dim(0);
  const std::size_t g3 = 3 * h;
  if (mask.dim(0) != n || mask.dim(1) != len) {
    throw DimensionError("gru: mask " + ShapeToString(mask.shape()) +
                         " vs inputs " + ShapeToString(inputs.shape()));
  }
  if (w_input.dim(0) != in || w_input.dim(1) != g3 || w_hidden.dim(1) != g3 ||
      b_input.numel() != g3 || b_hidden.numel() != g3) {
    throw DimensionError("gru: weight shapes " + ShapeToString(w_input.shape()) +
                         ", " + ShapeToString(w_hidden.shape()) +
                         " incompatible with input width " + std::to_string(in));
  }

  // Input-side gate pre-activations for all steps at once.
  std::vector<Real> gx(n * len * g3, 0.0);
  RowStableProduct(inputs.data().data(), n * len, in, w_input.data().data(), g3, gx.data());
  View(gx, n * len, g3).rowwise() += View(b_input.data(), 1, g3).row(0);

  // Per-step caches for the backward pass, laid out (len x n x .).
  std::vector<Real> h_prev_cache(len * n * h, 0.0);
  std::vector<Real> r_cache(len * n * h), z_cache(len * n * h), n_cache(len * n * h);
  std::vector<Real> ghn_cache(len * n * h);
  std::vector<Real> out(n * len * h, 0.0);
  std::vector<Real> state(n * h, 0.0);
  std::vector<Real> gh(n * g3);
  const auto m = mask.data();
  const auto bh = b_hidden.data();

  for (std::size_t t = 0; t < len; ++t) {
    std::copy(state.begin(), state.end(), h_prev_cache.begin() + t * n * h);
    std::fill(gh.begin(), gh.end(), 0.0);
    RowStableProduct(state.data(), n, h, w_hidden.data().data(), g3, gh.data());
    for (std::size_t r = 0; r < n; ++r) {
      if (m[r * len + t] == 0.0) continue;
      const Real* gxr = gx.data() + (r * len + t) * g3;
      const Real* ghr = gh.data() + r * g3;
      const std::size_t c = (t * n + r) * h;
      for (std::size_t j = 0; j < h; ++j) {
        const Real rg = StableSigmoid(gxr[j] + ghr[j] + bh[j]);
        const Real zg = StableSigmoid(gxr[h + j] + ghr[h + j] + bh[h + j]);
        const Real ghn = ghr[2 * h + j] + bh[2 * h + j];
        const Real ng = std::tanh(gxr[2 * h + j] + rg * ghn);
        const Real hp = state[r * h + j];
        const Real hn = (1.0 - zg) * ng + zg * hp;
        r_cache[c + j] = rg;
        z_cache[c + j] = zg;
        n_cache[c + j] = ng;
        ghn_cache[c + j] = ghn;
        state[r * h + j] = hn;
        out[(r * len + t) * h + j] = hn;
      }
    }
  }

  return MakeResult(
      {n, len, h}, std::move(out), {inputs, w_input, w_hidden, b_input, b_hidden},
      [=, h_prev_cache = std::move(h_prev_cache),
       r_cache = std::move(r_cache), z_cache = std::move(z_cache),
       n_cache = std::move(n_cache), ghn_cache = std::move(ghn_cache)](const auto&) {
        return [=](std::span<const Real> g) {
          std::vector<Real> dgx(n * len * g3, 0.0);
          std::vector<Real> dgh(n * g3);
          std::vector<Real> carry(n * h, 0.0);
          std::vector<Real> dwh(h * g3, 0.0);
          std::vector<Real> dbh(g3, 0.0);
          const auto mk = mask.data();
          for (std::size_t step = len; step-- > 0;) {
            std::fill(dgh.begin(), dgh.end(), 0.0);
            for (std::size_t r = 0; r < n; ++r) {
              if (mk[r * len + step] == 0.0) continue;
              const std::size_t c = (step * n + r) * h;
              Real* dgxr = dgx.data() + (r * len + step) * g3;
              Real* dghr = dgh.data() + r * g3;
              for (std::size_t j = 0; j < h; ++j) {
                const Real dh = g[(r * len + step) * h + j] + carry[r * h + j];
                const Real rg = r_cache[c + j], zg = z_cache[c + j];
                const Real ng = n_cache[c + j], hp = h_prev_cache[c + j];
                const Real dn = dh * (1.0 - zg);
                const Real dz = dh * (hp - ng);
                const Real dan = dn * (1.0 - ng * ng);
                const Real dr = dan * ghn_cache[c + j];
                const Real daz = dz * zg * (1.0 - zg);
                const Real dar = dr * rg * (1.0 - rg);
                dgxr[j] = dar;
                dgxr[h + j] = daz;
                dgxr[2 * h + j] = dan;
                dghr[j] = dar;
                dghr[h + j] = daz;
                dghr[2 * h + j] = dan * rg;
                carry[r * h + j] = dh * zg;
              }
            }
            // Masked rows have zero dgh, so the carry passes through them.
            View(carry, n, h).noalias() += View(dgh, n, g3) * View(w_hidden.data(), h, g3).transpose();
            View(dwh, h, g3).noalias() += View(std::span<const Real>(h_prev_cache).subspan(step * n * h, n * h), n, h).transpose() *
                                          View(dgh, n, g3);
            for (std::size_t r = 0; r < n; ++r) {
              for (std::size_t j = 0; j < g3; ++j) dbh[j] += dgh[r * g3 + j];
            }
          }
          if (inputs.requires_grad()) {
            View(GradBuffer(*inputs.node()), n * len, in).noalias() +=
                View(dgx, n * len, g3) * View(w_input.data(), in, g3).transpose();
          }
          if (w_input.requires_grad()) {
            View(GradBuffer(*w_input.node()), in, g3).noalias() +=
                View(inputs.data(), n * len, in).transpose() * View(dgx, n * len, g3);
          }
          if (b_input.requires_grad()) {
            auto& gb = GradBuffer(*b_input.node());
            for (std::size_t row = 0; row < n * len; ++row) {
              for (std::size_t j = 0; j < g3; ++j) gb[j] += dgx[row * g3 + j];
            }
          }
          if (w_hidden.requires_grad()) {
            auto& gw = GradBuffer(*w_hidden.node());
            for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += dwh[i];
          }
          if (b_hidden.requires_grad()) {
            auto& gb = GradBuffer(*b_hidden.node());
            for (std::size_t j = 0; j < g3; ++j) gb[j] += dbh[j];
          }
        };
      });
}

Tensor BinaryCrossEntropy(const Tensor& probs, std::span<const Real> labels,
                          Real eps, Reduction reduction) {
  if (probs.numel() != labels.size()) {
    throw DimensionError("binary_cross_entropy: " + std::to_string(probs.numel()) +
                         " predictions vs " + std::to_string(labels.size()) + " labels");
  }
  const std::size_t n = labels.size();
  const Real factor = reduction == Reduction::kMean && n > 0 ? 1.0 / static_cast<Real>(n) : 1.0;
  std::vector<Real> y(labels.begin(), labels.end());
  Real total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real p = std::clamp(probs[i], eps, 1.0 - eps);
    total -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return MakeResult({}, {total * factor}, {probs}, [probs, y, eps, factor](const auto&) {
    return [probs, y, eps, factor](std::span<const Real> g) {
      auto& gp = GradBuffer(*probs.node());
      for (std::size_t i = 0; i < y.size(); ++i) {
        const Real p = probs[i];
        if (p < eps || p > 1.0 - eps) continue;
        gp[i] += g[0] * factor * (-y[i] / p + (1.0 - y[i]) / (1.0 - p));
      }
    };
  });
}

}  // namespace dsgl
