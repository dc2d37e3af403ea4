#include "dnt/evaluate.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "dnt/error.hpp"

namespace dnt {

std::size_t count_id_switches(std::span<const int> history) {
  std::size_t n = 0;
  for (std::size_t i = 1; i < history.size(); ++i) n += history[i] != history[i - 1] ? 1 : 0;
  return n;
}

SequenceScore score_assignment(const Sequence& seq, const TrackAssignment& assignment) {
  if (assignment.track_of_slot.size() != seq.length()) {
    throw ContractError("score_assignment: assignment covers " + std::to_string(assignment.track_of_slot.size()) +
                        " frames, sequence has " + std::to_string(seq.length()));
  }
  const std::vector<int> canonical = canonical_slots(seq);
  const std::vector<Stratum> strata = stratify_occlusion(seq);
  SequenceScore score;
  std::vector<std::vector<int>> history(seq.num_objects);
  for (std::size_t t = 0; t < seq.length(); ++t) {
    const QueryFrame& f = seq.frames[t];
    for (std::size_t s = 0; s < f.slots(); ++s) {
      if (!f.visible(s)) continue;
      const auto k = static_cast<std::size_t>(f.identity[s]);
      const int track = assignment.track_of_slot[t][s];
      const auto stratum = static_cast<std::size_t>(strata[k]);
      ++score.observations[stratum];
      if (canonical[k] >= 0 && track == canonical[k]) ++score.correct[stratum];
      history[k].push_back(track);
    }
  }
  for (const auto& h : history) score.id_switches += count_id_switches(h);
  return score;
}

EvalReport summarize(std::span<const SequenceScore> scores) {
  EvalReport r;
  std::array<std::size_t, 3> correct{};
  for (const SequenceScore& s : scores) {
    for (std::size_t i = 0; i < 3; ++i) {
      correct[i] += s.correct[i];
      r.stratum_observations[i] += s.observations[i];
    }
    r.id_switches += s.id_switches;
  }
  r.num_sequences = scores.size();
  std::size_t total_correct = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    r.num_observations += r.stratum_observations[i];
    total_correct += correct[i];
  }
  auto ratio = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  r.accuracy_light = ratio(correct[0], r.stratum_observations[0]);
  r.accuracy_moderate = ratio(correct[1], r.stratum_observations[1]);
  r.accuracy_heavy = ratio(correct[2], r.stratum_observations[2]);
  r.association_accuracy = ratio(total_correct, r.num_observations);
  return r;
}

void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  const std::size_t count = std::min(threads, n);
  workers.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

EvalReport evaluate(const TrackerModel& model, std::span<const Sequence> eval_set, const PropagateOptions& opts,
                    std::size_t threads) {
  std::vector<SequenceScore> scores(eval_set.size());
  parallel_for(eval_set.size(), threads, [&](std::size_t i) {
    PropagateOptions o = opts;
    o.inference_noise_seed = opts.inference_noise_seed + i;
    scores[i] = score_assignment(eval_set[i], propagate(model, eval_set[i], o).assignment);
  });
  return summarize(scores);
}

EvalReport evaluate_heuristic(std::span<const Sequence> eval_set, const HeuristicParams& params, std::size_t threads) {
  std::vector<SequenceScore> scores(eval_set.size());
  parallel_for(eval_set.size(), threads,
               [&](std::size_t i) { scores[i] = score_assignment(eval_set[i], heuristic_track(eval_set[i], params)); });
  return summarize(scores);
}

}  // namespace dnt
