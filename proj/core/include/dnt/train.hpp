#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dnt/adam.hpp"
#include "dnt/evaluate.hpp"
#include "dnt/noise.hpp"
#include "dnt/tracker.hpp"
#include "dnt/world.hpp"

namespace dnt {

/// How the identity loss labels output slots under shuffle noise.
enum class Supervision {
  kSlotConsistent,     // slot i is always supervised toward its canonical object
  kFollowPermutation,  // slot i is supervised toward the object shuffled into it
};

struct TrainConfig {
  NoiseStrategy strategy = NoiseStrategy::kNone;
  std::size_t steps = 3000;
  std::size_t batch_sequences = 1;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  WorldConfig world{};
  std::size_t eval_every = 0;       // 0: evaluate only after the final step
  std::size_t eval_sequences = 32;  // size of the held-out set
  std::uint64_t seed = 0;
  double temperature = 0.1;
  TrackerHyper model{};             // model.channels must equal world.channels
  NoiseOptions noise{};
  double noise_probability = 1.0;   // chance that a frame t > 0 is noised
  Supervision supervision = Supervision::kSlotConsistent;
  PropagateOptions inference{};

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct LossOptions {
  double temperature = 0.1;
  double noise_probability = 1.0;
  NoiseOptions noise{};
  Supervision supervision = Supervision::kSlotConsistent;
};

/// Mean identity loss over frames t > 0 of one sequence, recorded on the
/// model's tape. Frame 0 (teacher-aligned) seeds the references; each later
/// frame's aligned queries are noised to form keys and identity input. The
/// clean aligned query of each visible object becomes its next reference,
/// mirroring propagate(), where a slot takes the observation it matched.
Var sequence_loss(const BoundTracker& model, const Sequence& seq, NoiseStrategy strategy, Rng& rng,
                  const LossOptions& opts);

/// One forward/backward pass over `batch` and one Adam update. Returns the loss.
double training_step(TrackerModel& model, AdamState& adam, std::span<const Sequence> batch, NoiseStrategy strategy,
                     Rng& rng, const LossOptions& opts);

struct LogRecord {
  std::size_t step = 0;
  double loss = 0.0;
  std::optional<double> eval_accuracy;
};

struct TrainResult {
  TrackerModel model;
  std::vector<LogRecord> log;
};

/// Held-out sequences, seeded on a stream disjoint from training worlds.
std::vector<Sequence> make_eval_set(const WorldConfig& world, std::uint64_t seed, std::size_t count);

/// Full training run. Step s (1-based) trains on freshly generated worlds;
/// periodic evaluation uses make_eval_set(config.world, config.seed, ...).
TrainResult train(const TrainConfig& config, const std::function<void(const LogRecord&)>& on_record = {});

}  // namespace dnt
