// Serial reference kernels against their OpenMP counterparts. Thread count
// follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <span>
#include <vector>

#include "primeie/kernels.hpp"
#include "primeie/random.hpp"
#include "primeie/syngen.hpp"
#include "primeie/training.hpp"

using namespace primeie;
using namespace primeie::kernels;

namespace {

std::vector<Real> filled(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Real> v(n);
  for (auto& x : v) x = static_cast<Real>(uniform(rng, -1, 1));
  return v;
}

using Kernel = void (*)(const Real*, const Real*, Real*, int, int, int);

template <Kernel K>
void bench_gemm_variant(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto a = filled(std::size_t(n) * n, 1), b = filled(std::size_t(n) * n, 2);
  std::vector<Real> c(std::size_t(n) * n);
  for (auto _ : state) {
    K(a.data(), b.data(), c.data(), n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * 2LL * n * n * n);
}

void gemm_serial_nn(const Real* a, const Real* b, Real* c, int m, int k, int n) { gemm_serial(a, b, c, m, k, n, false); }
void gemm_parallel_nn(const Real* a, const Real* b, Real* c, int m, int k, int n) {
  gemm_parallel(a, b, c, m, k, n, false);
}

BENCHMARK(bench_gemm_variant<gemm_serial_nn>)->Name("gemm/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bench_gemm_variant<gemm_parallel_nn>)->Name("gemm/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bench_gemm_variant<gemm_tn_serial>)->Name("gemm_tn/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bench_gemm_variant<gemm_tn_parallel>)->Name("gemm_tn/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bench_gemm_variant<gemm_nt_serial>)->Name("gemm_nt/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(bench_gemm_variant<gemm_nt_parallel>)->Name("gemm_nt/parallel")->RangeMultiplier(2)->Range(32, 256);

struct BatchFixture {
  Ontology ontology = default_ontology();
  Corpus corpus = generate_corpus(default_grammar(), ontology, 64, 5, GenMode::simple);
  SubwordVocab vocab = build_vocab(corpus, 400, 0, {";"});
  Model model{ModelKind::args_role_primed, ModelConfig{}, ontology, vocab, 1};
  std::vector<Instance> instances = model.build_instances(corpus);
};

const BatchFixture& fixture() {
  static const BatchFixture f;
  return f;
}

template <bool Parallel>
void bench_batch_gradient(benchmark::State& state) {
  const BatchFixture& f = fixture();
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(state.range(0)), f.instances.size());
  std::span<const Instance> batch(f.instances.data(), n);
  GradBuffer grads(f.model.params());
  for (auto _ : state) {
    grads.zero();
    const double loss = Parallel ? batch_gradient_parallel(f.model, f.corpus, batch, grads)
                                 : batch_gradient_serial(f.model, f.corpus, batch, grads);
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(n));
}

BENCHMARK(bench_batch_gradient<false>)->Name("batch_gradient/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(bench_batch_gradient<true>)->Name("batch_gradient/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
