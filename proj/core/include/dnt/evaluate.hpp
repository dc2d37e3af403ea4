#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dnt/association.hpp"
#include "dnt/tracker.hpp"
#include "dnt/world.hpp"

namespace dnt {

/// Counts for one sequence. Strata are indexed by Stratum.
struct SequenceScore {
  std::array<std::size_t, 3> correct{};
  std::array<std::size_t, 3> observations{};
  std::size_t id_switches = 0;
};

/// Association metrics over an evaluation set. Accuracy is the fraction of
/// (frame, visible object) pairs whose track id equals the object's
/// canonical slot; the overall value is the observation-weighted mean of
/// the three occlusion strata. An empty stratum reports accuracy 0.
struct EvalReport {
  double association_accuracy = 0.0;
  double accuracy_light = 0.0;
  double accuracy_moderate = 0.0;
  double accuracy_heavy = 0.0;
  std::array<std::size_t, 3> stratum_observations{};
  std::size_t id_switches = 0;
  std::size_t num_sequences = 0;
  std::size_t num_observations = 0;
  std::uint64_t seed = 0;
  std::string strategy;
  std::size_t steps = 0;
};

/// Scores one assignment against ground truth.
SequenceScore score_assignment(const Sequence& seq, const TrackAssignment& assignment);

/// Number of changes in an object's track-id history (first entry excluded).
std::size_t count_id_switches(std::span<const int> history);

/// Reduces per-sequence scores in order.
EvalReport summarize(std::span<const SequenceScore> scores);

/// Runs propagate on every sequence. Work may be split over `threads`
/// workers; results are reduced in sequence order, so they do not depend
/// on the thread count.
EvalReport evaluate(const TrackerModel& model, std::span<const Sequence> eval_set, const PropagateOptions& opts = {},
                    std::size_t threads = 1);

EvalReport evaluate_heuristic(std::span<const Sequence> eval_set, const HeuristicParams& params = {},
                              std::size_t threads = 1);

/// Runs `fn(i)` for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace dnt
