#include <benchmark/benchmark.h>

#include <vector>

#include "tailvar/garch.hpp"
#include "tailvar/htqf.hpp"
#include "tailvar/lstm.hpp"
#include "tailvar/prng.hpp"
#include "tailvar/simulate.hpp"
#include "tailvar/special_functions.hpp"

namespace {

using namespace tailvar;

void BM_NormalQuantile(benchmark::State& state) {
  double tau = 0.012345;
  for (auto _ : state) {
    benchmark::DoNotOptimize(std_normal_quantile(tau));
    tau += 1e-9;
  }
}
BENCHMARK(BM_NormalQuantile);

void BM_StudentTQuantile(benchmark::State& state) {
  double tau = 0.012345;
  for (auto _ : state) {
    benchmark::DoNotOptimize(student_t_quantile(tau, 5.0));
    tau += 1e-9;
  }
}
BENCHMARK(BM_StudentTQuantile);

void BM_HtqfQuantile(benchmark::State& state) {
  const HtqfParams params(0.1, 1.2, 0.4, 0.2);
  double tau = 0.012345;
  for (auto _ : state) {
    benchmark::DoNotOptimize(htqf_quantile(params, tau));
    tau += 1e-9;
  }
}
BENCHMARK(BM_HtqfQuantile);

void BM_HtqfGradient(benchmark::State& state) {
  const HtqfParams params(0.1, 1.2, 0.4, 0.2);
  double tau = 0.012345;
  for (auto _ : state) {
    benchmark::DoNotOptimize(htqf_gradient(params, tau));
    tau += 1e-9;
  }
}
BENCHMARK(BM_HtqfGradient);

Matrix random_window(std::size_t window_len, Prng& rng) {
  Matrix window(window_len, 4);
  for (double& x : window.flat()) x = rng.next_range(-1.0, 1.0);
  return window;
}

void BM_LstmForward(benchmark::State& state) {
  Prng rng(1);
  LstmModel model = lstm_init(static_cast<std::size_t>(state.range(1)),
                              HeadKind::htqf, 4, rng);
  const Matrix window = random_window(static_cast<std::size_t>(state.range(0)),
                                      rng);
  ForwardTrace trace;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lstm_forward(model, window, &trace));
  }
}
BENCHMARK(BM_LstmForward)->Args({40, 8})->Args({100, 16});

void BM_LstmBackward(benchmark::State& state) {
  Prng rng(1);
  LstmModel model = lstm_init(static_cast<std::size_t>(state.range(1)),
                              HeadKind::htqf, 4, rng);
  const Matrix window = random_window(static_cast<std::size_t>(state.range(0)),
                                      rng);
  ForwardTrace trace;
  lstm_forward(model, window, &trace);
  const std::vector<double> d_output{0.3, -0.2, 0.1, 0.05};
  LstmWeights grad = LstmWeights::shaped(model.hidden, model.input, 4);
  for (auto _ : state) {
    lstm_backward_into(model, trace, d_output, grad);
    benchmark::DoNotOptimize(grad);
  }
}
BENCHMARK(BM_LstmBackward)->Args({40, 8})->Args({100, 16});

void BM_GarchFilter(benchmark::State& state) {
  const GarchParams params(0.0, 0.1, 0.1, 0.8);
  const GarchSim sim =
      generate_garch(static_cast<std::size_t>(state.range(0)), params, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter_volatility(params, sim.returns));
  }
}
BENCHMARK(BM_GarchFilter)->Arg(1000)->Arg(10000);

void BM_GarchLogLikelihood(benchmark::State& state) {
  const GarchParams params(0.0, 0.1, 0.1, 0.8, Innovation::student_t, 6.0);
  const GarchSim sim =
      generate_garch(static_cast<std::size_t>(state.range(0)), params, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_likelihood(params, sim.returns));
  }
}
BENCHMARK(BM_GarchLogLikelihood)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
