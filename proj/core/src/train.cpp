#include "dnt/train.hpp"

#include <cmath>

#include "dnt/error.hpp"
#include "dnt/rng.hpp"

namespace dnt {

void TrainConfig::validate() const {
  world.validate();
  auto fail = [](const std::string& m) { throw ConfigError("train config: " + m); };
  if (batch_sequences < 1) fail("batch_sequences must be >= 1");
  if (!(learning_rate > 0.0)) fail("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) fail("beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) fail("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
  if (!(temperature > 0.0)) fail("temperature must be > 0");
  if (!(noise_probability >= 0.0 && noise_probability <= 1.0)) fail("noise_probability must lie in [0, 1]");
  if (model.channels != world.channels) {
    fail("model channels (" + std::to_string(model.channels) + ") must equal world channels (" +
         std::to_string(world.channels) + ")");
  }
  if (model.layers < 1 || model.hidden < 1) fail("layers and hidden must be >= 1");
  if (!(inference.heuristic.ema >= 0.0 && inference.heuristic.ema <= 1.0)) fail("ema must lie in [0, 1]");
}

Var sequence_loss(const BoundTracker& model, const Sequence& seq, NoiseStrategy strategy, Rng& rng,
                  const LossOptions& opts) {
  Tape& tape = model.tape();
  const std::size_t N = seq.slots(), T = seq.length();
  const std::vector<int> canonical = canonical_slots(seq);

  Var refs = tape.constant(align_to_ground_truth(seq.frames[0], canonical).queries);
  Var total;
  for (std::size_t t = 1; t < T; ++t) {
    const QueryFrame aligned = align_to_ground_truth(seq.frames[t], canonical);
    const bool noisy = opts.noise_probability >= 1.0 || rng.bernoulli(opts.noise_probability);
    const NoiseOutcome noise = apply_noise(noisy ? strategy : NoiseStrategy::kNone, aligned.queries, rng, opts.noise);
    Var input = tape.constant(noise.noised);
    Var out = tracker_forward(model, refs, input, input);

    // Logits against the clean aligned queries plus the inactive column.
    Var targets_t = tape.constant(aligned.queries);
    const Var parts[] = {matmul(out, transpose(targets_t)), matmul(out, transpose(model.inactive()))};
    Var logits = scale(concat_last(parts), 1.0 / opts.temperature);

    std::vector<std::size_t> targets(N);
    for (std::size_t i = 0; i < N; ++i) {
      const std::size_t src = opts.supervision == Supervision::kFollowPermutation ? noise.permutation[i] : i;
      targets[i] = aligned.visible(src) ? src : N;
    }
    Var loss_t = cross_entropy(logits, targets);
    total = total.valid() ? add(total, loss_t) : loss_t;
    // Visible objects hand their clean query to the next frame as reference.
    std::vector<bool> visible(N);
    for (std::size_t i = 0; i < N; ++i) visible[i] = aligned.visible(i);
    refs = select_rows(visible, targets_t, refs);
  }
  return scale(total, 1.0 / static_cast<double>(T - 1));
}

double training_step(TrackerModel& model, AdamState& adam, std::span<const Sequence> batch, NoiseStrategy strategy,
                     Rng& rng, const LossOptions& opts) {
  if (batch.empty()) throw ContractError("training_step: empty batch");
  Tape tape;
  BoundTracker bound(model, tape);
  Var loss;
  for (const Sequence& seq : batch) {
    Var l = sequence_loss(bound, seq, strategy, rng, opts);
    loss = loss.valid() ? add(loss, l) : l;
  }
  loss = scale(loss, 1.0 / static_cast<double>(batch.size()));
  model.zero_grad();
  tape.backward(loss);
  const std::vector<Tensor*> params = model.parameter_tensors();
  adam.step(params);
  return loss.value().item();
}

std::vector<Sequence> make_eval_set(const WorldConfig& world, std::uint64_t seed, std::size_t count) {
  std::vector<Sequence> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    WorldConfig w = world;
    w.seed = derive_seed(seed, stream::kEvalWorld, i);
    out.push_back(gen_sequence(w));
  }
  return out;
}

TrainResult train(const TrainConfig& config, const std::function<void(const LogRecord&)>& on_record) {
  config.validate();
  TrainResult result{init_model(config.model, config.seed), {}};
  TrackerModel& model = result.model;
  model.set_requires_grad(true);
  const std::vector<Tensor*> params = model.parameter_tensors();
  AdamState adam({config.learning_rate, config.beta1, config.beta2, config.epsilon}, params);
  Rng noise_rng(derive_seed(config.seed, stream::kNoise));
  const LossOptions opts{config.temperature, config.noise_probability, config.noise, config.supervision};

  std::vector<Sequence> eval_set;
  const bool any_eval = config.eval_every > 0 || config.steps > 0;
  if (any_eval && config.eval_sequences > 0) eval_set = make_eval_set(config.world, config.seed, config.eval_sequences);

  std::vector<Sequence> batch(config.batch_sequences);
  for (std::size_t step = 1; step <= config.steps; ++step) {
    for (std::size_t b = 0; b < config.batch_sequences; ++b) {
      WorldConfig w = config.world;
      w.seed = derive_seed(config.seed, stream::kTrainWorld, (step - 1) * config.batch_sequences + b);
      batch[b] = gen_sequence(w);
    }
    LogRecord rec;
    rec.step = step;
    rec.loss = training_step(model, adam, batch, config.strategy, noise_rng, opts);
    const bool eval_now = !eval_set.empty() &&
                          ((config.eval_every > 0 && step % config.eval_every == 0) || step == config.steps);
    if (eval_now) rec.eval_accuracy = evaluate(model, eval_set, config.inference).association_accuracy;
    if (on_record) on_record(rec);
    result.log.push_back(rec);
  }
  model.set_requires_grad(false);
  return result;
}

}  // namespace dnt
