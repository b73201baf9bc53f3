#include "primeie/lstm.hpp"

#include <cmath>

#include "primeie/encoder.hpp"
#include "primeie/error.hpp"
#include "primeie/ops.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

namespace {

inline Real sigm(Real x) { return Real(1) / (Real(1) + std::exp(-x)); }

}  // namespace

Var lstm_sequence(Graph& g, Var pre, Var w_hh, bool reverse) {
  const int n = g.rows(pre);
  const int h = g.rows(w_hh);
  if (g.cols(w_hh) != 4 * h || g.cols(pre) != 4 * h)
    throw ShapeError("lstm_sequence: pre [" + std::to_string(n) + "x" + std::to_string(g.cols(pre)) + "] and w_hh [" +
                     std::to_string(h) + "x" + std::to_string(g.cols(w_hh)) + "] disagree");
  const std::size_t H = h, G = 4 * H;
  // Per step: activated gates (i, f, g, o), cell state and tanh(cell).
  std::vector<Real> gates(n * G), cell(n * H), tcell(n * H), out(n * H);
  const Real* p = g.value(pre);
  const Real* w = g.value(w_hh);
  std::vector<Real> z(G);
  for (int s = 0; s < n; ++s) {
    const int t = reverse ? n - 1 - s : s;
    const int prev = reverse ? t + 1 : t - 1;
    std::copy(p + t * G, p + (t + 1) * G, z.begin());
    if (s > 0) {
      const Real* hp = &out[prev * H];
      for (std::size_t k = 0; k < H; ++k) {
        const Real a = hp[k];
        if (a == 0) continue;
        const Real* wr = w + k * G;
        for (std::size_t j = 0; j < G; ++j) z[j] += a * wr[j];
      }
    }
    Real* gt = &gates[t * G];
    for (std::size_t k = 0; k < H; ++k) {
      gt[k] = sigm(z[k]);
      gt[H + k] = sigm(z[H + k]);
      gt[2 * H + k] = std::tanh(z[2 * H + k]);
      gt[3 * H + k] = sigm(z[3 * H + k]);
      const Real cp = s > 0 ? cell[prev * H + k] : Real(0);
      const Real c = gt[H + k] * cp + gt[k] * gt[2 * H + k];
      cell[t * H + k] = c;
      tcell[t * H + k] = std::tanh(c);
      out[t * H + k] = gt[3 * H + k] * tcell[t * H + k];
    }
  }
  std::vector<Real> hidden_copy = out;
  return g.emplace(n, h, std::move(out), {pre, w_hh},
                   [=, gates = std::move(gates), cell = std::move(cell), tcell = std::move(tcell),
                    hs = std::move(hidden_copy)](Graph& gr, Var self) {
                     const Real* dout = gr.grad(self);
                     const Real* wv = gr.value(w_hh);
                     Real* dpre = gr.requires_grad(pre) ? gr.grad(pre) : nullptr;
                     Real* dw = gr.requires_grad(w_hh) ? gr.grad(w_hh) : nullptr;
                     std::vector<Real> dh_rec(H, 0), dc_rec(H, 0), dz(G);
                     for (int s = n - 1; s >= 0; --s) {
                       const int t = reverse ? n - 1 - s : s;
                       const int prev = reverse ? t + 1 : t - 1;
                       const Real* gt = &gates[t * G];
                       for (std::size_t k = 0; k < H; ++k) {
                         const Real i = gt[k], f = gt[H + k], gg = gt[2 * H + k], o = gt[3 * H + k];
                         const Real tc = tcell[t * H + k];
                         const Real dh = dout[t * H + k] + dh_rec[k];
                         const Real dct = dh * o * (Real(1) - tc * tc) + dc_rec[k];
                         const Real cp = s > 0 ? cell[prev * H + k] : Real(0);
                         dz[k] = dct * gg * i * (Real(1) - i);
                         dz[H + k] = dct * cp * f * (Real(1) - f);
                         dz[2 * H + k] = dct * i * (Real(1) - gg * gg);
                         dz[3 * H + k] = dh * tc * o * (Real(1) - o);
                         dc_rec[k] = dct * f;
                       }
                       if (dpre)
                         for (std::size_t j = 0; j < G; ++j) dpre[t * G + j] += dz[j];
                       if (s == 0) break;
                       const Real* hp = &hs[prev * H];
                       for (std::size_t k = 0; k < H; ++k) {
                         const Real* wr = wv + k * G;
                         Real acc = 0;
                         for (std::size_t j = 0; j < G; ++j) acc += wr[j] * dz[j];
                         dh_rec[k] = acc;
                         if (dw && hp[k] != 0) {
                           Real* dwr = dw + k * G;
                           for (std::size_t j = 0; j < G; ++j) dwr[j] += hp[k] * dz[j];
                         }
                       }
                     }
                   });
}

BiLstm::BiLstm(ParamSet& params, const std::string& prefix, int input, int hidden)
    : input_(input), hidden_(hidden) {
  if (input < 1 || hidden < 1) throw ConfigError("bilstm: sizes must be positive");
  const char* dir[2] = {"fwd", "bwd"};
  for (int d = 0; d < 2; ++d) {
    const std::string p = prefix + dir[d] + ".";
    w_ih_[d] = params.add(p + "w_ih", input, 4 * hidden);
    w_hh_[d] = params.add(p + "w_hh", hidden, 4 * hidden);
    bias_[d] = params.add(p + "bias", 1, 4 * hidden);
  }
}

void BiLstm::init(ParamSet& params, Rng& rng) const {
  for (int d = 0; d < 2; ++d) {
    xavier_uniform(params.at(w_ih_[d]), rng);
    xavier_uniform(params.at(w_hh_[d]), rng);
    Tensor& b = params.at(bias_[d]);
    fill(b, 0);
    for (int k = hidden_; k < 2 * hidden_; ++k) b.values[k] = 1;
  }
}

Var BiLstm::forward(Binder& bind, Var x) const {
  Graph& g = bind.graph();
  if (g.cols(x) != input_)
    throw ShapeError("bilstm: input has " + std::to_string(g.cols(x)) + " columns, expected " + std::to_string(input_));
  Var fwd = lstm_sequence(g, affine(g, x, bind(w_ih_[0]), bind(bias_[0])), bind(w_hh_[0]), false);
  Var bwd = lstm_sequence(g, affine(g, x, bind(w_ih_[1]), bind(bias_[1])), bind(w_hh_[1]), true);
  return concat_cols(g, {fwd, bwd});
}

}  // namespace PRIMEIE_ABI
}  // namespace primeie
