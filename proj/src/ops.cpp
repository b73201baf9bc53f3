#include "primeie/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "primeie/error.hpp"
#include "primeie/kernels.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

constexpr Real kNegInf = -std::numeric_limits<Real>::infinity();

std::string dims(const Graph& g, Var v) { return shape_string({g.rows(v), g.cols(v)}); }

[[noreturn]] void mismatch(const char* op, const Graph& g, Var a, Var b) {
  throw ShapeError(std::string(op) + ": shape mismatch " + dims(g, a) + " vs " + dims(g, b));
}

// Elementwise f with derivative expressed through (x, y).
template <typename F, typename D>
Var unary(Graph& g, Var a, F f, D df) {
  const std::size_t n = g.size(a);
  const Real* x = g.value(a);
  std::vector<Real> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = f(x[i]);
  return g.emplace(g.rows(a), g.cols(a), std::move(y), {a}, [a, n, df](Graph& gr, Var self) {
    const Real* gy = gr.grad(self);
    const Real* xv = gr.value(a);
    const Real* yv = gr.value(self);
    Real* gx = gr.grad(a);
    for (std::size_t i = 0; i < n; ++i) gx[i] += gy[i] * df(xv[i], yv[i]);
  });
}

}  // namespace

Var matmul(Graph& g, Var a, Var b) {
  const int m = g.rows(a), k = g.cols(a), n = g.cols(b);
  if (g.rows(b) != k) mismatch("matmul", g, a, b);
  std::vector<Real> c(static_cast<std::size_t>(m) * n);
  kernels::gemm(g.value(a), g.value(b), c.data(), m, k, n, false);
  return g.emplace(m, n, std::move(c), {a, b}, [a, b, m, k, n](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    if (gr.requires_grad(a)) kernels::gemm_nt(gc, gr.value(b), gr.grad(a), m, n, k);
    if (gr.requires_grad(b)) kernels::gemm_tn(gr.value(a), gc, gr.grad(b), m, k, n);
  });
}

Var add(Graph& g, Var a, Var b) {
  const int m = g.rows(a), n = g.cols(a);
  const bool broadcast = g.rows(b) == 1 && m != 1;
  if (g.cols(b) != n || (!broadcast && g.rows(b) != m)) mismatch("add", g, a, b);
  std::vector<Real> c(g.values(a));
  const Real* bv = g.value(b);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c[static_cast<std::size_t>(i) * n + j] += bv[broadcast ? j : i * n + j];
  return g.emplace(m, n, std::move(c), {a, b}, [a, b, m, n, broadcast](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    const std::size_t total = static_cast<std::size_t>(m) * n;
    if (gr.requires_grad(a)) {
      Real* ga = gr.grad(a);
      for (std::size_t i = 0; i < total; ++i) ga[i] += gc[i];
    }
    if (gr.requires_grad(b)) {
      Real* gb = gr.grad(b);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) gb[broadcast ? j : i * n + j] += gc[static_cast<std::size_t>(i) * n + j];
    }
  });
}

Var sub(Graph& g, Var a, Var b) { return add(g, a, scale(g, b, Real(-1))); }

Var scale(Graph& g, Var a, Real s) {
  return unary(g, a, [s](Real x) { return s * x; }, [s](Real, Real) { return s; });
}

Var mul(Graph& g, Var a, Var b) {
  if (g.rows(a) != g.rows(b) || g.cols(a) != g.cols(b)) mismatch("mul", g, a, b);
  const std::size_t n = g.size(a);
  std::vector<Real> c(n);
  const Real* av = g.value(a);
  const Real* bv = g.value(b);
  for (std::size_t i = 0; i < n; ++i) c[i] = av[i] * bv[i];
  return g.emplace(g.rows(a), g.cols(a), std::move(c), {a, b}, [a, b, n](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    if (gr.requires_grad(a)) {
      Real* ga = gr.grad(a);
      const Real* bv2 = gr.value(b);
      for (std::size_t i = 0; i < n; ++i) ga[i] += gc[i] * bv2[i];
    }
    if (gr.requires_grad(b)) {
      Real* gb = gr.grad(b);
      const Real* av2 = gr.value(a);
      for (std::size_t i = 0; i < n; ++i) gb[i] += gc[i] * av2[i];
    }
  });
}

Var transpose(Graph& g, Var a) {
  const int m = g.rows(a), n = g.cols(a);
  const Real* av = g.value(a);
  std::vector<Real> t(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) t[static_cast<std::size_t>(j) * m + i] = av[static_cast<std::size_t>(i) * n + j];
  return g.emplace(n, m, std::move(t), {a}, [a, m, n](Graph& gr, Var self) {
    const Real* gt = gr.grad(self);
    Real* ga = gr.grad(a);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ga[static_cast<std::size_t>(i) * n + j] += gt[static_cast<std::size_t>(j) * m + i];
  });
}

Var concat_cols(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const int m = g.rows(parts[0]);
  int n = 0;
  std::vector<int> offsets;
  for (Var p : parts) {
    if (g.rows(p) != m) mismatch("concat_cols", g, parts[0], p);
    offsets.push_back(n);
    n += g.cols(p);
  }
  std::vector<Real> c(static_cast<std::size_t>(m) * n);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const int w = g.cols(parts[k]);
    const Real* pv = g.value(parts[k]);
    for (int i = 0; i < m; ++i)
      std::copy(pv + static_cast<std::size_t>(i) * w, pv + static_cast<std::size_t>(i + 1) * w,
                c.begin() + static_cast<std::size_t>(i) * n + offsets[k]);
  }
  return g.emplace(m, n, std::move(c), parts, [parts, offsets, m, n](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (!gr.requires_grad(parts[k])) continue;
      const int w = gr.cols(parts[k]);
      Real* gp = gr.grad(parts[k]);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < w; ++j)
          gp[static_cast<std::size_t>(i) * w + j] += gc[static_cast<std::size_t>(i) * n + offsets[k] + j];
    }
  });
}

Var concat_rows(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const int n = g.cols(parts[0]);
  int m = 0;
  std::vector<Real> c;
  std::vector<std::size_t> offsets;
  for (Var p : parts) {
    if (g.cols(p) != n) mismatch("concat_rows", g, parts[0], p);
    offsets.push_back(c.size());
    const Real* pv = g.value(p);
    c.insert(c.end(), pv, pv + g.size(p));
    m += g.rows(p);
  }
  return g.emplace(m, n, std::move(c), parts, [parts, offsets](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (!gr.requires_grad(parts[k])) continue;
      Real* gp = gr.grad(parts[k]);
      const std::size_t len = gr.size(parts[k]);
      for (std::size_t i = 0; i < len; ++i) gp[i] += gc[offsets[k] + i];
    }
  });
}

Var slice_cols(Graph& g, Var a, int begin, int end) {
  const int m = g.rows(a), n = g.cols(a);
  if (begin < 0 || end > n || begin >= end)
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + dims(g, a));
  const int w = end - begin;
  const Real* av = g.value(a);
  std::vector<Real> c(static_cast<std::size_t>(m) * w);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j) c[static_cast<std::size_t>(i) * w + j] = av[static_cast<std::size_t>(i) * n + begin + j];
  return g.emplace(m, w, std::move(c), {a}, [a, m, n, w, begin](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    Real* ga = gr.grad(a);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j) ga[static_cast<std::size_t>(i) * n + begin + j] += gc[static_cast<std::size_t>(i) * w + j];
  });
}

Var slice_rows(Graph& g, Var a, int begin, int end) {
  const int m = g.rows(a), n = g.cols(a);
  if (begin < 0 || end > m || begin >= end)
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + dims(g, a));
  const Real* av = g.value(a);
  std::vector<Real> c(av + static_cast<std::size_t>(begin) * n, av + static_cast<std::size_t>(end) * n);
  return g.emplace(end - begin, n, std::move(c), {a}, [a, n, begin](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    Real* ga = gr.grad(a) + static_cast<std::size_t>(begin) * n;
    const std::size_t len = gr.size(self);
    for (std::size_t i = 0; i < len; ++i) ga[i] += gc[i];
  });
}

Var gather_rows(Graph& g, Var a, std::span<const int> rows) {
  const int m = g.rows(a), n = g.cols(a);
  std::vector<int> idx(rows.begin(), rows.end());
  std::vector<Real> c(idx.size() * n);
  const Real* av = g.value(a);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= m)
      throw ShapeError("gather_rows: row " + std::to_string(idx[r]) + " out of range for " + dims(g, a));
    std::copy(av + static_cast<std::size_t>(idx[r]) * n, av + static_cast<std::size_t>(idx[r] + 1) * n,
              c.begin() + r * n);
  }
  return g.emplace(static_cast<int>(idx.size()), n, std::move(c), {a}, [a, n, idx](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    Real* ga = gr.grad(a);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (int j = 0; j < n; ++j) ga[static_cast<std::size_t>(idx[r]) * n + j] += gc[r * n + j];
  });
}

Var embedding(Graph& g, Var table, std::span<const int> ids) { return gather_rows(g, table, ids); }

Var gather_cols(Graph& g, Var a, std::span<const int> cols) {
  const int m = g.rows(a), n = g.cols(a);
  std::vector<int> idx(cols.begin(), cols.end());
  const int w = static_cast<int>(idx.size());
  for (int c : idx)
    if (c < 0 || c >= n) throw ShapeError("gather_cols: column " + std::to_string(c) + " out of range for " + dims(g, a));
  const Real* av = g.value(a);
  std::vector<Real> out(static_cast<std::size_t>(m) * w);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < w; ++j) out[static_cast<std::size_t>(i) * w + j] = av[static_cast<std::size_t>(i) * n + idx[j]];
  return g.emplace(m, w, std::move(out), {a}, [a, m, n, w, idx](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    Real* ga = gr.grad(a);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < w; ++j) ga[static_cast<std::size_t>(i) * n + idx[j]] += gc[static_cast<std::size_t>(i) * w + j];
  });
}

Var gather_block(Graph& g, Var a, std::span<const int> idx_span) {
  const int n = g.cols(a);
  if (g.rows(a) != n) throw ShapeError("gather_block: expected square input, got " + dims(g, a));
  std::vector<int> idx(idx_span.begin(), idx_span.end());
  const int w = static_cast<int>(idx.size());
  for (int c : idx)
    if (c < 0 || c >= n) throw ShapeError("gather_block: index " + std::to_string(c) + " out of range for " + dims(g, a));
  const Real* av = g.value(a);
  std::vector<Real> out(static_cast<std::size_t>(w) * w);
  for (int i = 0; i < w; ++i)
    for (int j = 0; j < w; ++j) out[static_cast<std::size_t>(i) * w + j] = av[static_cast<std::size_t>(idx[i]) * n + idx[j]];
  return g.emplace(w, w, std::move(out), {a}, [a, n, w, idx](Graph& gr, Var self) {
    const Real* gc = gr.grad(self);
    Real* ga = gr.grad(a);
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j) ga[static_cast<std::size_t>(idx[i]) * n + idx[j]] += gc[static_cast<std::size_t>(i) * w + j];
  });
}

Var softmax_rows(Graph& g, Var a) {
  const int m = g.rows(a), n = g.cols(a);
  const Real* av = g.value(a);
  std::vector<Real> y(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const Real* row = av + static_cast<std::size_t>(i) * n;
    Real* out = y.data() + static_cast<std::size_t>(i) * n;
    const Real mx = *std::max_element(row, row + n);
    if (mx == kNegInf) {
      std::fill(out, out + n, Real(0));
      continue;
    }
    Real sum = 0;
    for (int j = 0; j < n; ++j) sum += out[j] = std::exp(row[j] - mx);
    for (int j = 0; j < n; ++j) out[j] /= sum;
  }
  return g.emplace(m, n, std::move(y), {a}, [a, m, n](Graph& gr, Var self) {
    const Real* gy = gr.grad(self);
    const Real* yv = gr.value(self);
    Real* ga = gr.grad(a);
    for (int i = 0; i < m; ++i) {
      const std::size_t o = static_cast<std::size_t>(i) * n;
      Real dot = 0;
      for (int j = 0; j < n; ++j) dot += gy[o + j] * yv[o + j];
      for (int j = 0; j < n; ++j) ga[o + j] += yv[o + j] * (gy[o + j] - dot);
    }
  });
}

Var log_softmax_rows(Graph& g, Var a) {
  const int m = g.rows(a), n = g.cols(a);
  const Real* av = g.value(a);
  std::vector<Real> y(static_cast<std::size_t>(m) * n);
  for (int i = 0; i < m; ++i) {
    const Real* row = av + static_cast<std::size_t>(i) * n;
    Real* out = y.data() + static_cast<std::size_t>(i) * n;
    const Real mx = *std::max_element(row, row + n);
    Real sum = 0;
    for (int j = 0; j < n; ++j) sum += std::exp(row[j] - mx);
    const Real lse = mx + std::log(sum);
    for (int j = 0; j < n; ++j) out[j] = row[j] - lse;
  }
  return g.emplace(m, n, std::move(y), {a}, [a, m, n](Graph& gr, Var self) {
    const Real* gy = gr.grad(self);
    const Real* yv = gr.value(self);
    Real* ga = gr.grad(a);
    for (int i = 0; i < m; ++i) {
      const std::size_t o = static_cast<std::size_t>(i) * n;
      Real total = 0;
      for (int j = 0; j < n; ++j) total += gy[o + j];
      for (int j = 0; j < n; ++j) ga[o + j] += gy[o + j] - std::exp(yv[o + j]) * total;
    }
  });
}

Var logsumexp_rows(Graph& g, Var a) {
  const int m = g.rows(a), n = g.cols(a);
  const Real* av = g.value(a);
  std::vector<Real> y(m);
  for (int i = 0; i < m; ++i) {
    const Real* row = av + static_cast<std::size_t>(i) * n;
    const Real mx = *std::max_element(row, row + n);
    if (mx == kNegInf) {
      y[i] = kNegInf;
      continue;
    }
    Real sum = 0;
    for (int j = 0; j < n; ++j) sum += std::exp(row[j] - mx);
    y[i] = mx + std::log(sum);
  }
  return g.emplace(m, 1, std::move(y), {a}, [a, m, n](Graph& gr, Var self) {
    const Real* gy = gr.grad(self);
    const Real* yv = gr.value(self);
    const Real* xv = gr.value(a);
    Real* ga = gr.grad(a);
    for (int i = 0; i < m; ++i) {
      if (yv[i] == kNegInf) continue;
      const std::size_t o = static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) ga[o + j] += gy[i] * std::exp(xv[o + j] - yv[i]);
    }
  });
}

Var layer_norm_rows(Graph& g, Var x, Var gain, Var bias, Real eps) {
  const int m = g.rows(x), n = g.cols(x);
  if (g.rows(gain) != 1 || g.cols(gain) != n) mismatch("layer_norm", g, x, gain);
  if (g.rows(bias) != 1 || g.cols(bias) != n) mismatch("layer_norm", g, x, bias);
  const Real* xv = g.value(x);
  const Real* gv = g.value(gain);
  const Real* bv = g.value(bias);
  std::vector<Real> y(static_cast<std::size_t>(m) * n);
  std::vector<Real> xhat(y.size());
  std::vector<Real> inv_sigma(m);
  for (int i = 0; i < m; ++i) {
    const std::size_t o = static_cast<std::size_t>(i) * n;
    Real mean = 0;
    for (int j = 0; j < n; ++j) mean += xv[o + j];
    mean /= n;
    Real var = 0;
    for (int j = 0; j < n; ++j) var += (xv[o + j] - mean) * (xv[o + j] - mean);
    var /= n;
    inv_sigma[i] = Real(1) / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) {
      xhat[o + j] = (xv[o + j] - mean) * inv_sigma[i];
      y[o + j] = gv[j] * xhat[o + j] + bv[j];
    }
  }
  return g.emplace(m, n, std::move(y), {x, gain, bias},
                   [x, gain, bias, m, n, xhat = std::move(xhat), inv_sigma = std::move(inv_sigma)](Graph& gr, Var self) {
                     const Real* gy = gr.grad(self);
                     const Real* gv2 = gr.value(gain);
                     if (gr.requires_grad(gain) || gr.requires_grad(bias)) {
                       Real* gg = gr.requires_grad(gain) ? gr.grad(gain) : nullptr;
                       Real* gb = gr.requires_grad(bias) ? gr.grad(bias) : nullptr;
                       for (int i = 0; i < m; ++i)
                         for (int j = 0; j < n; ++j) {
                           const std::size_t o = static_cast<std::size_t>(i) * n + j;
                           if (gg) gg[j] += gy[o] * xhat[o];
                           if (gb) gb[j] += gy[o];
                         }
                     }
                     if (!gr.requires_grad(x)) return;
                     Real* gx = gr.grad(x);
                     for (int i = 0; i < m; ++i) {
                       const std::size_t o = static_cast<std::size_t>(i) * n;
                       Real mean_d = 0, mean_dx = 0;
                       for (int j = 0; j < n; ++j) {
                         const Real d = gy[o + j] * gv2[j];
                         mean_d += d;
                         mean_dx += d * xhat[o + j];
                       }
                       mean_d /= n;
                       mean_dx /= n;
                       for (int j = 0; j < n; ++j) {
                         const Real d = gy[o + j] * gv2[j];
                         gx[o + j] += inv_sigma[i] * (d - mean_d - xhat[o + j] * mean_dx);
                       }
                     }
                   });
}

Var gelu(Graph& g, Var a) {
  constexpr Real kC = Real(0.7978845608028654);  // sqrt(2/pi)
  constexpr Real kA = Real(0.044715);
  return unary(
      g, a,
      [](Real x) { return Real(0.5) * x * (Real(1) + std::tanh(kC * (x + kA * x * x * x))); },
      [](Real x, Real) {
        const Real t = std::tanh(kC * (x + kA * x * x * x));
        return Real(0.5) * (Real(1) + t) + Real(0.5) * x * (Real(1) - t * t) * kC * (Real(1) + Real(3) * kA * x * x);
      });
}

Var tanh_act(Graph& g, Var a) {
  return unary(g, a, [](Real x) { return std::tanh(x); }, [](Real, Real y) { return Real(1) - y * y; });
}

Var sigmoid(Graph& g, Var a) {
  return unary(
      g, a, [](Real x) { return Real(1) / (Real(1) + std::exp(-x)); },
      [](Real, Real y) { return y * (Real(1) - y); });
}

Var mean_rows(Graph& g, Var a) {
  const int m = g.rows(a), n = g.cols(a);
  const Real* av = g.value(a);
  std::vector<Real> y(n, Real(0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) y[j] += av[static_cast<std::size_t>(i) * n + j];
  for (Real& v : y) v /= m;
  return g.emplace(1, n, std::move(y), {a}, [a, m, n](Graph& gr, Var self) {
    const Real* gy = gr.grad(self);
    Real* ga = gr.grad(a);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) ga[static_cast<std::size_t>(i) * n + j] += gy[j] / m;
  });
}

Var sum_all(Graph& g, Var a) {
  const std::size_t n = g.size(a);
  const Real* av = g.value(a);
  Real s = 0;
  for (std::size_t i = 0; i < n; ++i) s += av[i];
  return g.emplace(1, 1, {s}, {a}, [a, n](Graph& gr, Var self) {
    const Real gy = gr.grad(self)[0];
    Real* ga = gr.grad(a);
    for (std::size_t i = 0; i < n; ++i) ga[i] += gy;
  });
}

Var mean_all(Graph& g, Var a) { return scale(g, sum_all(g, a), Real(1) / static_cast<Real>(g.size(a))); }

Var segment_mean(Graph& g, Var a, std::span<const std::pair<int, int>> ranges_span) {
  const int m = g.rows(a), n = g.cols(a);
  std::vector<std::pair<int, int>> ranges(ranges_span.begin(), ranges_span.end());
  std::vector<Real> y(ranges.size() * n, Real(0));
  const Real* av = g.value(a);
  for (std::size_t r = 0; r < ranges.size(); ++r) {
    const auto [b, e] = ranges[r];
    if (b < 0 || e > m || b >= e)
      throw ShapeError("segment_mean: range [" + std::to_string(b) + "," + std::to_string(e) + ") invalid for " +
                       dims(g, a));
    for (int i = b; i < e; ++i)
      for (int j = 0; j < n; ++j) y[r * n + j] += av[static_cast<std::size_t>(i) * n + j];
    for (int j = 0; j < n; ++j) y[r * n + j] /= static_cast<Real>(e - b);
  }
  return g.emplace(static_cast<int>(ranges.size()), n, std::move(y), {a}, [a, n, ranges](Graph& gr, Var self) {
    const Real* gy = gr.grad(self);
    Real* ga = gr.grad(a);
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      const auto [b, e] = ranges[r];
      const Real w = Real(1) / static_cast<Real>(e - b);
      for (int i = b; i < e; ++i)
        for (int j = 0; j < n; ++j) ga[static_cast<std::size_t>(i) * n + j] += gy[r * n + j] * w;
    }
  });
}

Var masked_fill(Graph& g, Var a, const std::vector<bool>& mask) {
  const std::size_t n = g.size(a);
  if (mask.size() != n)
    throw ShapeError("masked_fill: mask of " + std::to_string(mask.size()) + " entries vs " + dims(g, a));
  std::vector<Real> y(g.values(a));
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) y[i] = kNegInf;
  return g.emplace(g.rows(a), g.cols(a), std::move(y), {a}, [a, n, mask](Graph& gr, Var self) {
    const Real* gy = gr.grad(self);
    Real* ga = gr.grad(a);
    for (std::size_t i = 0; i < n; ++i)
      if (!mask[i]) ga[i] += gy[i];
  });
}

Var pick_nll(Graph& g, Var log_probs, std::span<const int> targets_span) {
  const int m = g.rows(log_probs), n = g.cols(log_probs);
  std::vector<int> targets(targets_span.begin(), targets_span.end());
  if (static_cast<int>(targets.size()) != m)
    throw ShapeError("pick_nll: " + std::to_string(targets.size()) + " targets for " + dims(g, log_probs));
  const Real* lp = g.value(log_probs);
  Real s = 0;
  for (int i = 0; i < m; ++i) {
    if (targets[i] < 0 || targets[i] >= n) throw ShapeError("pick_nll: target out of range");
    s -= lp[static_cast<std::size_t>(i) * n + targets[i]];
  }
  return g.emplace(1, 1, {s}, {log_probs}, [log_probs, n, targets](Graph& gr, Var self) {
    const Real gy = gr.grad(self)[0];
    Real* ga = gr.grad(log_probs);
    for (std::size_t i = 0; i < targets.size(); ++i) ga[i * n + targets[i]] -= gy;
  });
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
