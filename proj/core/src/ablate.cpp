#include "dnt/ablate.hpp"

#include <cmath>
#include <cstdio>
#include <mutex>

#include <json.hpp>

#include "dnt/error.hpp"

namespace dnt {

namespace {

constexpr NoiseStrategy kBaseStrategies[] = {NoiseStrategy::kNone, NoiseStrategy::kWeightedAverage,
                                             NoiseStrategy::kCropConcat, NoiseStrategy::kShuffle};
constexpr NoiseStrategy kLongStrategies[] = {NoiseStrategy::kNone, NoiseStrategy::kShuffle};

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

nlohmann::json stat_json(const Stat& s) { return {{"mean", s.mean}, {"std", s.stddev}}; }

}  // namespace

AblationConfig table2_preset(std::uint64_t seed) {
  AblationConfig c;
  c.base.seed = seed;
  c.base.steps = 3000;
  c.base.learning_rate = 3e-3;
  c.base.eval_sequences = 0;
  return c;
}

Stat mean_std(const std::vector<double>& values) {
  Stat s;
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

const AblationCell& AblationResult::cell(const std::string& strategy, std::size_t steps) const {
  for (const AblationCell& c : cells)
    if (c.strategy == strategy && c.steps == steps) return c;
  throw ContractError("ablation has no cell " + strategy + "@" + std::to_string(steps));
}

AblationResult run_ablation(const AblationConfig& config, std::size_t threads,
                            const std::function<void(const AblationRow&)>& on_run) {
  config.base.validate();
  if (config.seeds < 1) throw ConfigError("ablation needs at least one seed");
  if (config.long_factor < 1) throw ConfigError("ablation long_factor must be >= 1");
  const std::size_t base_steps = config.base.steps, long_steps = base_steps * config.long_factor;

  struct Job {
    NoiseStrategy strategy;
    std::size_t steps;
  };
  std::vector<Job> cells;
  for (NoiseStrategy s : kBaseStrategies) cells.push_back({s, base_steps});
  for (NoiseStrategy s : kLongStrategies) cells.push_back({s, long_steps});

  const std::vector<Sequence> eval_set = make_eval_set(config.base.world, config.base.seed, config.eval_sequences);

  AblationResult result;
  result.config = config;
  result.rows.resize(cells.size() * config.seeds);
  std::mutex report_mutex;
  parallel_for(result.rows.size(), threads, [&](std::size_t r) {
    const Job& job = cells[r / config.seeds];
    TrainConfig tc = config.base;
    tc.strategy = job.strategy;
    tc.steps = job.steps;
    tc.seed = config.base.seed + r % config.seeds;
    tc.eval_sequences = 0;
    const TrainResult trained = train(tc);

    AblationRow row;
    row.strategy = std::string(strategy_name(job.strategy));
    row.steps = job.steps;
    row.seed = tc.seed;
    row.report = evaluate(trained.model, eval_set, tc.inference);
    PropagateOptions shuffled = tc.inference;
    shuffled.inference_noise = NoiseStrategy::kShuffle;
    shuffled.inference_noise_seed = tc.seed;
    row.shuffled_accuracy = evaluate(trained.model, eval_set, shuffled).association_accuracy;
    result.rows[r] = row;
    if (on_run) {
      std::lock_guard<std::mutex> lock(report_mutex);
      on_run(row);
    }
  });

  AblationRow heuristic;
  heuristic.strategy = "heuristic";
  heuristic.seed = config.base.seed;
  heuristic.report = evaluate_heuristic(eval_set, config.base.inference.heuristic, threads);
  heuristic.shuffled_accuracy = heuristic.report.association_accuracy;  // no identity input to shuffle
  result.rows.push_back(heuristic);
  if (on_run) on_run(heuristic);

  for (std::size_t c = 0; c <= cells.size(); ++c) {
    const std::size_t begin = c * config.seeds;
    const std::size_t end = c < cells.size() ? begin + config.seeds : begin + 1;
    std::vector<double> acc, light, moderate, heavy, switches, shuffled;
    for (std::size_t r = begin; r < end; ++r) {
      const AblationRow& row = result.rows[r];
      acc.push_back(row.report.association_accuracy);
      light.push_back(row.report.accuracy_light);
      moderate.push_back(row.report.accuracy_moderate);
      heavy.push_back(row.report.accuracy_heavy);
      switches.push_back(static_cast<double>(row.report.id_switches));
      shuffled.push_back(row.shuffled_accuracy);
    }
    const AblationRow& first = result.rows[begin];
    result.cells.push_back({first.strategy, first.steps, end - begin, mean_std(acc), mean_std(light),
                            mean_std(moderate), mean_std(heavy), mean_std(switches), mean_std(shuffled)});
  }
  result.shuffle_minus_none =
      result.cell("shuffle", base_steps).accuracy.mean - result.cell("none", base_steps).accuracy.mean;
  return result;
}

std::string ablation_csv(const AblationResult& result) {
  std::string out = "strategy,steps,seed,accuracy,light,moderate,heavy,id_switches\n";
  for (const AblationRow& r : result.rows) {
    out += r.strategy + "," + std::to_string(r.steps) + "," + std::to_string(r.seed) + "," +
           fixed(r.report.association_accuracy) + "," + fixed(r.report.accuracy_light) + "," +
           fixed(r.report.accuracy_moderate) + "," + fixed(r.report.accuracy_heavy) + "," +
           std::to_string(r.report.id_switches) + "\n";
  }
  return out;
}

std::string ablation_json(const AblationResult& result) {
  using nlohmann::json;
  const AblationConfig& c = result.config;
  json doc;
  doc["seed"] = c.base.seed;
  doc["seeds"] = c.seeds;
  doc["base_steps"] = c.base.steps;
  doc["long_steps"] = c.base.steps * c.long_factor;
  doc["eval_sequences"] = c.eval_sequences;
  doc["learning_rate"] = c.base.learning_rate;
  doc["temperature"] = c.base.temperature;
  doc["world"] = {{"frames", c.base.world.frames},
                  {"slots", c.base.world.slots},
                  {"channels", c.base.world.channels},
                  {"objects", c.base.world.objects},
                  {"position_channels", c.base.world.position_channels},
                  {"confusion_pairs", c.base.world.confusion_pairs},
                  {"drift_sigma", c.base.world.drift_sigma},
                  {"occlusion_rate", c.base.world.occlusion_rate}};
  json cells = json::array();
  for (const AblationCell& cell : result.cells) {
    cells.push_back({{"strategy", cell.strategy},
                     {"steps", cell.steps},
                     {"runs", cell.runs},
                     {"accuracy", stat_json(cell.accuracy)},
                     {"light", stat_json(cell.light)},
                     {"moderate", stat_json(cell.moderate)},
                     {"heavy", stat_json(cell.heavy)},
                     {"id_switches", stat_json(cell.id_switches)}});
  }
  doc["cells"] = cells;
  json shortcut = json::object();
  for (const AblationCell& cell : result.cells) {
    if (cell.strategy == "heuristic") continue;
    const std::string key = cell.strategy + "@" + std::to_string(cell.steps);
    shortcut[key] = {{"clean", cell.accuracy.mean},
                     {"shuffled_identity", cell.shuffled_accuracy.mean},
                     {"drop", cell.accuracy.mean - cell.shuffled_accuracy.mean}};
  }
  doc["shortcut"] = shortcut;
  doc["shuffle_minus_none"] = result.shuffle_minus_none;
  doc["ordering_ok"] = result.shuffle_minus_none > 0.0;
  doc["reference"] = {
      {"source", "published results, mask AP on OVIS val; only the orderings are comparable"},
      {"base", {{"iterations", 40000}, {"none", 30.5}, {"weighted_average", 31.7}, {"crop_concat", 31.9}, {"shuffle", 32.7}}},
      {"long", {{"iterations", 160000}, {"none", 30.6}, {"shuffle", 34.3}}}};
  return doc.dump(2) + "\n";
}

}  // namespace dnt
