#include <benchmark/benchmark.h>

#include <cmath>

#include "lou/calibration.hpp"
#include "lou/charfn.hpp"
#include "lou/cumulants.hpp"
#include "lou/montecarlo.hpp"
#include "lou/pricer.hpp"

namespace {

const lou::ModelParams kLin{5.6, 1.9, 0.264, -0.41, 1.0, 0.047};

void BM_CfEvaluate(benchmark::State& state) {
  const lou::LinearCf cf(kLin, 0.5);
  double phi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cf(lou::cplx(phi, -2.0)));
    phi += 1e-3;
  }
}
BENCHMARK(BM_CfEvaluate);

void BM_LewisCall(benchmark::State& state) {
  const double tau = state.range(0) / 1000.0;
  const lou::LinearCf cf(kLin, tau);
  const auto cc = lou::contour_offset(kLin);
  for (auto _ : state) benchmark::DoNotOptimize(lou::lewis_call(5.16, 5.0, kLin.r, cf, cc));
}
BENCHMARK(BM_LewisCall)->Arg(80)->Arg(330)->Arg(830)->Unit(benchmark::kMicrosecond);

void BM_AnalyticCumulants(benchmark::State& state) {
  double tau = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lou::analytic_cumulants(tau, kLin));
    tau = tau > 2.0 ? 0.1 : tau * 1.01;
  }
}
BENCHMARK(BM_AnalyticCumulants);

void BM_SimulateLinear(benchmark::State& state) {
  lou::SimConfig sim;
  sim.n_paths = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lou::simulate(lou::ModelKind::kLinear, kLin, 0.5, sim));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateLinear)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_SmileFit(benchmark::State& state) {
  std::vector<lou::MarketQuote> quotes;
  const lou::SmileStats s{0.5, 0.2, -0.6, 1.5};
  for (double lm = -0.2; lm <= 0.2; lm += 0.05) {
    const double sd = 0.2;
    quotes.push_back({0.5, 0.04, lm, lou::backus_iv(lou::d1_from_log_moneyness(lm, 0.04, 0.5, sd), s, 0.5)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(lou::fit_smile(quotes));
}
BENCHMARK(BM_SmileFit)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
