#pragma once

#include <span>
#include <utility>
#include <vector>

#include "primeie/graph.hpp"

// Differentiable operator set. All operators act on rank-2 values; a row
// vector is 1 x n. Shape mismatches throw ShapeError naming both shapes.

namespace primeie {
inline namespace PRIMEIE_ABI {

Var matmul(Graph& g, Var a, Var b);
/// a + b where b has a's shape or is a 1 x cols row broadcast over rows.
Var add(Graph& g, Var a, Var b);
Var sub(Graph& g, Var a, Var b);
Var scale(Graph& g, Var a, Real s);
Var mul(Graph& g, Var a, Var b);
Var transpose(Graph& g, Var a);

Var concat_cols(Graph& g, const std::vector<Var>& parts);
Var concat_rows(Graph& g, const std::vector<Var>& parts);
Var slice_cols(Graph& g, Var a, int begin, int end);
Var slice_rows(Graph& g, Var a, int begin, int end);
/// Rows `ids` of `table`.
Var embedding(Graph& g, Var table, std::span<const int> ids);
Var gather_rows(Graph& g, Var a, std::span<const int> rows);
Var gather_cols(Graph& g, Var a, std::span<const int> cols);
/// Square sub-block a[idx][idx].
Var gather_block(Graph& g, Var a, std::span<const int> idx);

Var softmax_rows(Graph& g, Var a);
Var log_softmax_rows(Graph& g, Var a);
/// One value per row: log sum_j exp(a[i][j]), shifted by the row max.
Var logsumexp_rows(Graph& g, Var a);
Var layer_norm_rows(Graph& g, Var x, Var gain, Var bias, Real eps = Real(1e-5));

Var gelu(Graph& g, Var a);
Var tanh_act(Graph& g, Var a);
Var sigmoid(Graph& g, Var a);

/// Column-wise mean over rows: m x n -> 1 x n.
Var mean_rows(Graph& g, Var a);
Var mean_all(Graph& g, Var a);
Var sum_all(Graph& g, Var a);
/// Mean of each row range [begin, end): one output row per range.
Var segment_mean(Graph& g, Var a, std::span<const std::pair<int, int>> ranges);

/// Entries where mask is true become -inf; their gradient is zero.
Var masked_fill(Graph& g, Var a, const std::vector<bool>& mask);

/// -sum_i a[i][targets[i]], for rows of log-probabilities.
Var pick_nll(Graph& g, Var log_probs, std::span<const int> targets);

}  // namespace PRIMEIE_ABI
}  // namespace primeie
