#include <benchmark/benchmark.h>

#include "pshlab/boundary.hpp"
#include "pshlab/cframe.hpp"
#include "pshlab/classify.hpp"
#include "pshlab/gallery.hpp"

using namespace pshlab;

static void BM_LeviTapeEval(benchmark::State& state) {
  ScalarField r = gallery_make("omega_local", {{"k", "3"}}).field;
  Tape tape = Tape::compile(levi_field(r));
  std::vector<double> scratch;
  double out = 0;
  Point4 p{0.05, 0.02, -0.001, 0.01};
  for (auto _ : state) {
    tape.eval(p, scratch, {&out, 1});
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_LeviTapeEval);

static void BM_Projection(benchmark::State& state) {
  ScalarField r = gallery_make("omega_local", {{"k", "3"}}).field;
  Projector proj(r);
  std::uint64_t i = 0;
  for (auto _ : state) {
    Point4 q{0.04 + 1e-4 * (i % 7), 0.01, -0.01, 0.002};
    ++i;
    benchmark::DoNotOptimize(proj.project(q));
  }
}
BENCHMARK(BM_Projection);

static void BM_FrameAt(benchmark::State& state) {
  ScalarField r = gallery_make("tanlog").field;
  FrameFields ff = frame_fields(r);
  Point4 p{0.3, 0.1, std::log(std::cos(0.3)), 0.3};
  for (auto _ : state) {
    benchmark::DoNotOptimize(frame_at(ff, p));
  }
}
BENCHMARK(BM_FrameAt);

static void BM_ClassifyQuart(benchmark::State& state) {
  ScalarField quart = gallery_make("tube", {{"f", "absz2^2"}}).field;
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_point(quart, {0, 0, 0, 0}));
  }
}
BENCHMARK(BM_ClassifyQuart);

static void BM_LoopIntegral(benchmark::State& state) {
  for (auto _ : state) {
    double v = loop_integral(
        [](std::complex<double> zeta, const Point4&) { return forced_obstruction_hz(3, zeta); }, 3,
        0.1, 256);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_LoopIntegral);
