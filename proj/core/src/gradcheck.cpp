#include "dnt/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dnt/ops.hpp"
#include "dnt/train.hpp"

namespace dnt {

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -2.0, double hi = 2.0) {
  Tensor t(std::move(shape), 0.0);
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

// Keeps relu inputs away from the kink, where central differences are meaningless.
Tensor away_from_zero(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t = random_tensor(std::move(shape), rng);
  for (double& v : t.values()) {
    while (std::abs(v) < 1e-3) v = rng.uniform(-2.0, 2.0);
  }
  return t;
}

double projected(const GradFn& fn, const std::vector<Tensor>& inputs, const Tensor& projection) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  return sum(mul(fn(tape, vars), tape.constant(projection))).value().item();
}

double tracker_loss(TrackerModel& model, const Sequence& seq, std::uint64_t noise_seed) {
  Tape tape;
  BoundTracker bound(model, tape);
  Rng rng(noise_seed);
  return sequence_loss(bound, seq, NoiseStrategy::kShuffle, rng, LossOptions{}).value().item();
}

double check_tracker_loss(Rng& rng) {
  WorldConfig w;
  w.frames = 2;
  w.slots = 3;
  w.channels = 8;
  w.objects = 3;
  w.position_channels = 4;
  w.confusion_pairs = 1;
  w.occlusion_rate = 0.0;
  w.seed = rng.next_u64();
  const Sequence seq = gen_sequence(w);
  TrackerModel model = init_model({1, 8, 8}, rng.next_u64());
  // Perturb every parameter so that no gradient is structurally zero.
  for (Tensor* p : model.parameter_tensors())
    for (double& v : p->values()) v += rng.uniform(-0.5, 0.5);
  const std::uint64_t noise_seed = rng.next_u64();

  model.set_requires_grad(true);
  {
    Tape tape;
    BoundTracker bound(model, tape);
    Rng noise(noise_seed);
    Var loss = sequence_loss(bound, seq, NoiseStrategy::kShuffle, noise, LossOptions{});
    model.zero_grad();
    tape.backward(loss);
  }
  double worst = 0.0;
  for (Tensor* p : model.parameter_tensors()) {
    const std::vector<double> analytic = p->grad();
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = p->values()[i];
      p->values()[i] = saved + kGradCheckStep;
      const double up = tracker_loss(model, seq, noise_seed);
      p->values()[i] = saved - kGradCheckStep;
      const double down = tracker_loss(model, seq, noise_seed);
      p->values()[i] = saved;
      worst = std::max(worst, relative_error(analytic[i], (up - down) / (2.0 * kGradCheckStep)));
    }
  }
  return worst;
}

}  // namespace

double relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-3});
  return std::abs(analytic - numeric) / denom;
}

double check_gradient(const GradFn& fn, const std::vector<Tensor>& inputs, Rng& rng, double step) {
  Tensor projection;
  {
    Tape probe;
    std::vector<Var> vars;
    for (const Tensor& t : inputs) vars.push_back(probe.constant(t));
    projection = random_tensor(fn(probe, vars).shape(), rng, -1.0, 1.0);
  }

  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.variable(t));
  tape.backward(sum(mul(fn(tape, vars), tape.constant(projection))));

  double worst = 0.0;
  std::vector<Tensor> probe = inputs;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor analytic = tape.gradient(vars[k]);
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double saved = probe[k].values()[i];
      probe[k].values()[i] = saved + step;
      const double up = projected(fn, probe, projection);
      probe[k].values()[i] = saved - step;
      const double down = projected(fn, probe, projection);
      probe[k].values()[i] = saved;
      worst = std::max(worst, relative_error(analytic.values()[i], (up - down) / (2.0 * step)));
    }
  }
  return worst;
}

std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed, std::size_t trials) {
  Rng rng(seed);
  struct Case {
    std::string name;
    std::function<std::vector<Tensor>(Rng&)> inputs;
    GradFn fn;
  };
  const auto two = [](std::vector<std::size_t> a, std::vector<std::size_t> b) {
    return [a, b](Rng& r) { return std::vector<Tensor>{random_tensor(a, r), random_tensor(b, r)}; };
  };
  const auto one = [](std::vector<std::size_t> a) {
    return [a](Rng& r) { return std::vector<Tensor>{random_tensor(a, r)}; };
  };
  const std::vector<std::size_t> targets = {2, 0, 4, 1};
  const std::vector<bool> mask = {true, false, true};

  const std::vector<Case> cases = {
      {"matmul", two({3, 4}, {4, 2}), [](Tape&, auto v) { return matmul(v[0], v[1]); }},
      {"transpose", one({3, 4}), [](Tape&, auto v) { return transpose(v[0]); }},
      {"add", two({3, 4}, {3, 4}), [](Tape&, auto v) { return add(v[0], v[1]); }},
      {"add_row_broadcast", two({3, 4}, {4}), [](Tape&, auto v) { return add(v[0], v[1]); }},
      {"sub", two({3, 4}, {3, 4}), [](Tape&, auto v) { return sub(v[0], v[1]); }},
      {"mul", two({3, 4}, {3, 4}), [](Tape&, auto v) { return mul(v[0], v[1]); }},
      {"mul_row_broadcast", two({3, 4}, {4}), [](Tape&, auto v) { return mul(v[0], v[1]); }},
      {"mul_scalar_broadcast", two({3, 4}, {1}), [](Tape&, auto v) { return mul(v[0], v[1]); }},
      {"scale", one({3, 4}), [](Tape&, auto v) { return scale(v[0], -1.7); }},
      {"select_rows", two({3, 4}, {3, 4}), [mask](Tape&, auto v) { return select_rows(mask, v[0], v[1]); }},
      {"concat_last", two({3, 2}, {3, 3}),
       [](Tape&, auto v) {
         const Var parts[] = {v[0], v[1]};
         return concat_last(parts);
       }},
      {"slice_last", one({3, 5}), [](Tape&, auto v) { return slice_last(v[0], 1, 4); }},
      {"gelu", one({3, 4}), [](Tape&, auto v) { return gelu(v[0]); }},
      {"relu", [](Rng& r) { return std::vector<Tensor>{away_from_zero({3, 4}, r)}; },
       [](Tape&, auto v) { return relu(v[0]); }},
      {"sum", one({3, 4}), [](Tape&, auto v) { return sum(v[0]); }},
      {"mean", one({3, 4}), [](Tape&, auto v) { return mean(v[0]); }},
      {"softmax_axis0", one({3, 4}), [](Tape&, auto v) { return softmax(v[0], 0); }},
      {"softmax_axis1", one({3, 4}), [](Tape&, auto v) { return softmax(v[0], 1); }},
      {"layer_norm",
       [](Rng& r) { return std::vector<Tensor>{random_tensor({2, 8}, r), random_tensor({8}, r), random_tensor({8}, r)}; },
       [](Tape&, auto v) { return layer_norm(v[0], v[1], v[2], 1e-5); }},
      {"cross_entropy", one({4, 5}), [targets](Tape&, auto v) { return cross_entropy(v[0], targets); }},
      {"attention",
       [](Rng& r) {
         return std::vector<Tensor>{random_tensor({3, 4}, r), random_tensor({5, 4}, r), random_tensor({5, 3}, r)};
       },
       [](Tape&, auto v) { return attention(v[0], v[1], v[2], 0.5); }},
  };

  std::vector<GradCheckResult> out;
  for (const Case& c : cases) {
    GradCheckResult r{c.name, 0.0, trials};
    for (std::size_t t = 0; t < trials; ++t)
      r.max_relative_error = std::max(r.max_relative_error, check_gradient(c.fn, c.inputs(rng), rng));
    out.push_back(r);
  }
  GradCheckResult tracker{"tracker_loss", 0.0, trials};
  for (std::size_t t = 0; t < trials; ++t) tracker.max_relative_error = std::max(tracker.max_relative_error, check_tracker_loss(rng));
  out.push_back(tracker);
  return out;
}

}  // namespace dnt
