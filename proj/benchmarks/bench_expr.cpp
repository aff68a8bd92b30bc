#include <benchmark/benchmark.h>

#include "pshlab/dsl.hpp"
#include "pshlab/expr.hpp"

using namespace pshlab;

namespace {
const char* kOmega6 =
    "u + (1/9)*(x^2+y^2)^3 - (1/2)*(x^2+y^2)^2*v + (x^2+y^2)*v^2 + (x^2+y^2)^5";
}

static void BM_Parse(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(parse_field(kOmega6));
  }
}
BENCHMARK(BM_Parse);

static void BM_TreeEval(benchmark::State& state) {
  ScalarField f = parse_field(kOmega6);
  Point4 p{0.05, 0.02, -0.01, 0.03};
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval(f, p));
  }
}
BENCHMARK(BM_TreeEval);

static void BM_TapeEval(benchmark::State& state) {
  ScalarField f = parse_field(kOmega6);
  auto g = gradient(f);
  Tape tape = Tape::compile({f, g[0], g[1], g[2], g[3]});
  std::vector<double> scratch;
  std::array<double, 5> out{};
  Point4 p{0.05, 0.02, -0.01, 0.03};
  for (auto _ : state) {
    tape.eval(p, scratch, out);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_TapeEval);

static void BM_Wirtinger4(benchmark::State& state) {
  ScalarField f = parse_field(kOmega6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wirtinger(f, 2, 2, 0, 0));
  }
}
BENCHMARK(BM_Wirtinger4);

BENCHMARK_MAIN();
