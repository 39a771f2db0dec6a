#include <benchmark/benchmark.h>

#include "rsf/kernels.hpp"
#include "rsf/rng.hpp"

using namespace rsf;

namespace {

Tensor noise(int c, int n, std::uint64_t seed) {
  Rng rng(seed);
  return rng.uniform_tensor(c, n, n, 0.0, 1.0);
}

// Args: side, kernel. Shapes match one dehaze unit (6 -> 3 channels).
template <bool Serial>
void conv_forward(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0)), k = static_cast<int>(st.range(1));
  const Tensor x = noise(6, n, 1), w = noise(18, k, 2), b(3, 1, 1);
  for (auto _ : st) {
    Tensor y = Serial ? kernels::serial::conv2d_forward(x, w, b, k) : kernels::omp::conv2d_forward(x, w, b, k);
    benchmark::DoNotOptimize(y.data().data());
  }
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n);
}

template <bool Serial>
void conv_backward(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0)), k = static_cast<int>(st.range(1));
  const Tensor x = noise(6, n, 1), w = noise(18, k, 2), g = noise(3, n, 3);
  for (auto _ : st) {
    Tensor gi(6, n, n), gw(18, k, k), gb(3, 1, 1);
    if (Serial) kernels::serial::conv2d_backward(x, w, g, k, &gi, &gw, &gb);
    else kernels::omp::conv2d_backward(x, w, g, k, &gi, &gw, &gb);
    benchmark::DoNotOptimize(gw.data().data());
  }
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n);
}

template <bool Serial>
void box(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0)), k = static_cast<int>(st.range(1));
  const Tensor x = noise(1, n, 4);
  for (auto _ : st) {
    Tensor y = Serial ? kernels::serial::box_filter(x, k) : kernels::omp::box_filter(x, k);
    benchmark::DoNotOptimize(y.data().data());
  }
  st.SetItemsProcessed(st.iterations() * int64_t(n) * n);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int n : {64, 256})
    for (int k : {3, 7}) b->Args({n, k});
  b->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(conv_forward<true>)->Name("conv_forward/serial")->Apply(sizes);
BENCHMARK(conv_forward<false>)->Name("conv_forward/omp")->Apply(sizes);
BENCHMARK(conv_backward<true>)->Name("conv_backward/serial")->Apply(sizes);
BENCHMARK(conv_backward<false>)->Name("conv_backward/omp")->Apply(sizes);
BENCHMARK(box<true>)->Name("box_filter/serial")->Apply(sizes);
BENCHMARK(box<false>)->Name("box_filter/omp")->Apply(sizes);

BENCHMARK_MAIN();
