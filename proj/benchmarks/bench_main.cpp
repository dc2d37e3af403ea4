#include <benchmark/benchmark.h>

#include "dnt/adam.hpp"
#include "dnt/hungarian.hpp"
#include "dnt/ops.hpp"
#include "dnt/train.hpp"

using namespace dnt;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_tensor({n, n}, rng), b = random_tensor({n, n}, rng);
  for (auto _ : state) {
    Tape tape;
    benchmark::DoNotOptimize(matmul(tape.constant(a), tape.constant(b)).value());
  }
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64);

void BM_AttentionBackward(benchmark::State& state) {
  Rng rng(2);
  Tensor q = random_tensor({8, 16}, rng), k = random_tensor({8, 16}, rng), v = random_tensor({8, 16}, rng);
  for (Tensor* t : {&q, &k, &v}) t->set_requires_grad(true);
  for (auto _ : state) {
    Tape tape;
    Var out = sum(attention(tape.leaf(q), tape.leaf(k), tape.leaf(v), 0.25));
    tape.backward(out);
  }
}
BENCHMARK(BM_AttentionBackward);

void BM_Hungarian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  const Tensor c = random_tensor({n, n}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(hungarian(c));
}
BENCHMARK(BM_Hungarian)->Arg(8)->Arg(32);

void BM_GenSequence(benchmark::State& state) {
  WorldConfig w;
  for (auto _ : state) {
    ++w.seed;
    benchmark::DoNotOptimize(gen_sequence(w));
  }
}
BENCHMARK(BM_GenSequence);

void BM_TrainingStep(benchmark::State& state) {
  TrackerModel model = init_model({}, 0);
  model.set_requires_grad(true);
  AdamState adam({}, model.parameter_tensors());
  WorldConfig w;
  w.seed = 4;
  const Sequence seq = gen_sequence(w);
  Rng rng(5);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        training_step(model, adam, std::span<const Sequence>(&seq, 1), NoiseStrategy::kShuffle, rng, {}));
}
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMillisecond);

void BM_Propagate(benchmark::State& state) {
  const TrackerModel model = init_model({}, 0);
  WorldConfig w;
  w.seed = 6;
  const Sequence seq = gen_sequence(w);
  for (auto _ : state) benchmark::DoNotOptimize(propagate(model, seq));
}
BENCHMARK(BM_Propagate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
