#pragma once

#include <string>

#include "primeie/params.hpp"

namespace primeie {
inline namespace PRIMEIE_ABI {

/// One LSTM direction over precomputed input projections. `pre` is n x 4h
/// (x W_ih + b, gates ordered i, f, g, o) and `w_hh` is h x 4h; returns the
/// n x h hidden states. With `reverse` the sequence is read right to left
/// and row t still holds the state at position t.
Var lstm_sequence(Graph& g, Var pre, Var w_hh, bool reverse);

/// Bidirectional LSTM; output row t is [forward_t, backward_t].
class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParamSet& params, const std::string& prefix, int input, int hidden);

  int input() const { return input_; }
  int hidden() const { return hidden_; }
  int output() const { return 2 * hidden_; }
  /// Xavier-uniform weights, zero biases except forget gates at 1.
  void init(ParamSet& params, Rng& rng) const;
  Var forward(Binder& bind, Var x) const;

 private:
  int input_ = 0, hidden_ = 0;
  int w_ih_[2] = {-1, -1};
  int w_hh_[2] = {-1, -1};
  int bias_[2] = {-1, -1};
};

}  // namespace PRIMEIE_ABI
}  // namespace primeie
