#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dnt/evaluate.hpp"
#include "dnt/train.hpp"

namespace dnt {

struct AblationConfig {
  TrainConfig base{};              // strategy and seed are overridden per run
  std::size_t seeds = 5;           // training seeds base.seed + i
  std::size_t long_factor = 4;     // the None/Shuffle rerun uses steps * long_factor
  std::size_t eval_sequences = 128;  // one held-out set, shared by every run
};

/// The standard benchmark world, 3000 base steps, five seeds.
AblationConfig table2_preset(std::uint64_t seed);

struct AblationRow {
  std::string strategy;  // strategy name, or "heuristic"
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  EvalReport report;
  double shuffled_accuracy = 0.0;  // identity input shuffled at inference
};

struct Stat {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1); 0 for n < 2
};
Stat mean_std(const std::vector<double>& values);

struct AblationCell {
  std::string strategy;
  std::size_t steps = 0;
  std::size_t runs = 0;
  Stat accuracy, light, moderate, heavy, id_switches, shuffled_accuracy;
};

struct AblationResult {
  AblationConfig config;
  std::vector<AblationRow> rows;    // per run, in cell order then seed order
  std::vector<AblationCell> cells;  // none, weighted_average, crop_concat, shuffle, none@long, shuffle@long, heuristic
  double shuffle_minus_none = 0.0;  // at the base step count

  const AblationCell& cell(const std::string& strategy, std::size_t steps) const;
};

/// Trains and evaluates every cell. Runs are independent and may be spread
/// over `threads` workers; the result does not depend on the thread count.
/// `on_run` (if set) is called once per finished run, serialized.
AblationResult run_ablation(const AblationConfig& config, std::size_t threads = 1,
                            const std::function<void(const AblationRow&)>& on_run = {});

/// Header: strategy,steps,seed,accuracy,light,moderate,heavy,id_switches
std::string ablation_csv(const AblationResult& result);
/// Cell means and standard deviations, the shortcut probe, the ordering
/// check and the published reference values.
std::string ablation_json(const AblationResult& result);

}  // namespace dnt
