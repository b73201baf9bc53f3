#pragma once

// Exhaustive-enumeration oracle for the linear-chain CRF. Deliberately
// independent of the dynamic programs it checks.

#include <cmath>
#include <limits>
#include <vector>

#include "primeie/crf.hpp"
#include "primeie/random.hpp"

namespace testutil {

struct BruteForce {
  double log_z = -std::numeric_limits<double>::infinity();
  std::vector<int> best;
  double best_score = -std::numeric_limits<double>::infinity();
};

inline double path_score(const primeie::Tensor& e, const primeie::TransitionTable& t, const std::vector<int>& y) {
  const int T = t.labels();
  if (t.mask.start[y[0]]) return -std::numeric_limits<double>::infinity();
  double s = t.start.values[y[0]];
  for (std::size_t i = 0; i < y.size(); ++i) {
    s += e.values[i * T + y[i]];
    if (i > 0) {
      if (t.mask.transition[y[i - 1] * T + y[i]]) return -std::numeric_limits<double>::infinity();
      s += t.transition.values[y[i - 1] * T + y[i]];
    }
  }
  return s + t.end.values[y.back()];
}

// Visits sequences in lexicographic order; a strictly greater score is
// required to replace the incumbent, which yields the smallest-label
// tie-break.
inline BruteForce brute_force(const primeie::Tensor& e, const primeie::TransitionTable& t) {
  const int L = e.rows(), T = t.labels();
  BruteForce r;
  std::vector<int> y(L, 0);
  std::vector<double> scores;
  while (true) {
    const double s = path_score(e, t, y);
    scores.push_back(s);
    if (s > r.best_score) {
      r.best_score = s;
      r.best = y;
    }
    int pos = L - 1;
    while (pos >= 0 && ++y[pos] == T) y[pos--] = 0;
    if (pos < 0) break;
  }
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s);
  if (std::isinf(m)) return r;
  double acc = 0;
  for (double s : scores) acc += std::exp(s - m);
  r.log_z = m + std::log(acc);
  return r;
}

inline primeie::TransitionTable random_table(primeie::Rng& rng, int T, double scale = 1.0) {
  primeie::TransitionTable t(T);
  for (auto* p : {&t.transition, &t.start, &t.end})
    for (auto& v : p->values) v = static_cast<primeie::Real>(primeie::uniform(rng, -scale, scale));
  return t;
}

}  // namespace testutil
