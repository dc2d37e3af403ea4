#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnt/ablate.hpp"
#include "dnt/checkpoint.hpp"
#include "dnt/error.hpp"
#include "dnt/gradcheck.hpp"
#include "dnt/run_config.hpp"
#include "dnt/sequence_io.hpp"
#include "dnt/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitAcceptance = 4;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::size_t threads = 1;
};

dnt::RunConfig resolve(const Globals& g) {
  dnt::RunConfig c = g.config_path.empty() ? dnt::RunConfig{} : dnt::load_run_config(g.config_path);
  if (g.seed) c.train.seed = *g.seed;
  if (g.out) c.out_dir = *g.out;
  if (g.threads < 1) throw dnt::ConfigError("--threads must be >= 1");
  return c;
}

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw dnt::IoError("cannot create directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw dnt::IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw dnt::IoError("write failed for " + path.string());
}

json report_json(const dnt::EvalReport& r) {
  return {{"association_accuracy", r.association_accuracy},
          {"accuracy_light", r.accuracy_light},
          {"accuracy_moderate", r.accuracy_moderate},
          {"accuracy_heavy", r.accuracy_heavy},
          {"stratum_observations", r.stratum_observations},
          {"id_switches", r.id_switches},
          {"num_sequences", r.num_sequences},
          {"num_observations", r.num_observations},
          {"seed", r.seed},
          {"strategy", r.strategy},
          {"steps", r.steps}};
}

std::vector<dnt::Sequence> load_eval_set(const dnt::RunConfig& c) {
  if (c.eval_set.empty()) return dnt::make_eval_set(c.train.world, c.train.seed, c.train.eval_sequences);
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(c.eval_set, ec))
    if (entry.path().extension() == ".seq") files.push_back(entry.path());
  if (ec) throw dnt::IoError("cannot read eval set directory " + c.eval_set + ": " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<dnt::Sequence> out;
  for (const fs::path& f : files) out.push_back(dnt::load_sequence(f.string()));
  return out;
}

int cmd_gen(const Globals& g, std::size_t count) {
  const dnt::RunConfig c = resolve(g);
  const fs::path dir = ensure_dir(c.out_dir);
  json manifest;
  manifest["count"] = count;
  manifest["root_seed"] = c.train.seed;
  std::array<std::size_t, 3> totals{};
  json entries = json::array();
  for (std::size_t i = 0; i < count; ++i) {
    dnt::WorldConfig w = c.train.world;
    w.seed = dnt::derive_seed(c.train.seed, dnt::stream::kEvalWorld, i);
    const dnt::Sequence seq = dnt::gen_sequence(w);
    char name[32];
    std::snprintf(name, sizeof name, "seq_%05zu.seq", i);
    dnt::save_sequence(seq, (dir / name).string());
    std::array<std::size_t, 3> strata{};
    for (dnt::Stratum s : dnt::stratify_occlusion(seq)) ++strata[static_cast<std::size_t>(s)];
    for (std::size_t s = 0; s < 3; ++s) totals[s] += strata[s];
    entries.push_back({{"file", name},
                       {"seed", w.seed},
                       {"strata", {{"light", strata[0]}, {"moderate", strata[1]}, {"heavy", strata[2]}}}});
  }
  manifest["sequences"] = entries;
  manifest["strata_totals"] = {{"light", totals[0]}, {"moderate", totals[1]}, {"heavy", totals[2]}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  std::printf("wrote %zu sequences to %s\n", count, dir.string().c_str());
  return 0;
}

int cmd_train(const Globals& g, const std::optional<std::string>& strategy, const std::optional<std::size_t>& steps) {
  dnt::RunConfig c = resolve(g);
  if (strategy) {
    const auto s = dnt::parse_strategy(*strategy);
    if (!s) throw dnt::ConfigError("unknown strategy '" + *strategy + "'");
    c.train.strategy = *s;
  }
  if (steps) c.train.steps = *steps;
  c.train.validate();
  const fs::path dir = ensure_dir(c.out_dir);
  const std::string config_text = dnt::to_json(c);
  write_text(dir / "config.json", config_text + "\n");

  std::ofstream log(dir / "train_log.ndjson", std::ios::trunc);
  if (!log) throw dnt::IoError("cannot open " + (dir / "train_log.ndjson").string() + " for writing");
  const dnt::TrainResult result = dnt::train(c.train, [&log](const dnt::LogRecord& r) {
    json rec = {{"step", r.step}, {"loss", r.loss}};
    if (r.eval_accuracy) rec["eval_accuracy"] = *r.eval_accuracy;
    log << rec.dump() << "\n";
  });
  log.close();
  dnt::save_checkpoint(result.model, {dnt::fingerprint(config_text), c.train.steps}, (dir / "checkpoint.dnt").string());
  if (!result.log.empty() && result.log.back().eval_accuracy)
    std::printf("final loss %.6f, held-out accuracy %.4f\n", result.log.back().loss, *result.log.back().eval_accuracy);
  std::printf("checkpoint: %s\n", (dir / "checkpoint.dnt").string().c_str());
  return 0;
}

int cmd_eval(const Globals& g, const std::string& checkpoint, bool untrained, const std::string& identity,
             bool shuffle_identity) {
  // A checkpoint written by `train` has its config.json alongside; use it
  // unless --config says otherwise, so world and inference settings match.
  Globals eg = g;
  std::string sibling_text;
  if (checkpoint != "none" && g.config_path.empty()) {
    const fs::path sibling = fs::path(checkpoint).parent_path() / "config.json";
    if (fs::exists(sibling)) {
      eg.config_path = sibling.string();
      std::ifstream in(sibling, std::ios::binary);
      sibling_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
      if (!sibling_text.empty() && sibling_text.back() == '\n') sibling_text.pop_back();
    }
  }
  dnt::RunConfig c = resolve(eg);
  if (!eg.config_path.empty() && g.config_path.empty() && !g.out) c.out_dir = dnt::RunConfig{}.out_dir;
  dnt::TrackerModel model;
  std::uint64_t steps = 0;
  if (checkpoint == "none") {
    if (!untrained) throw dnt::ConfigError("--checkpoint none requires --untrained");
    model = dnt::init_model(c.train.model, c.train.seed);
  } else {
    if (untrained) throw dnt::ConfigError("--untrained cannot be combined with a checkpoint");
    dnt::CheckpointMeta meta;
    model = dnt::load_checkpoint(checkpoint, &meta);
    steps = meta.step;
    if (!sibling_text.empty() && dnt::fingerprint(sibling_text) != meta.config_fingerprint)
      std::fprintf(stderr, "warning: %s does not match the config fingerprint stored in %s\n",
                   eg.config_path.c_str(), checkpoint.c_str());
  }
  dnt::PropagateOptions opts = c.train.inference;
  if (identity == "none") opts.identity = dnt::IdentitySource::kNone;
  else if (identity != "heuristic") throw dnt::ConfigError("--identity must be heuristic or none");
  if (shuffle_identity) {
    opts.inference_noise = dnt::NoiseStrategy::kShuffle;
    opts.inference_noise_seed = c.train.seed;
  }
  const std::vector<dnt::Sequence> set = load_eval_set(c);
  dnt::EvalReport report = dnt::evaluate(model, set, opts, g.threads);
  report.seed = c.train.seed;
  report.strategy = untrained ? "untrained" : std::string(dnt::strategy_name(c.train.strategy));
  report.steps = steps;
  const fs::path dir = ensure_dir(c.out_dir);
  write_text(dir / "eval_report.json", report_json(report).dump(2) + "\n");
  std::printf("accuracy %.4f (light %.4f, moderate %.4f, heavy %.4f), id switches %zu over %zu sequences\n",
              report.association_accuracy, report.accuracy_light, report.accuracy_moderate, report.accuracy_heavy,
              report.id_switches, report.num_sequences);
  return 0;
}

int cmd_ablate(const Globals& g, const std::string& preset, const std::optional<std::size_t>& seeds) {
  dnt::AblationConfig ac;
  const dnt::RunConfig c = resolve(g);
  if (preset == "table2-analog") {
    if (!g.config_path.empty()) throw dnt::ConfigError("--preset and --config are mutually exclusive");
    ac = dnt::table2_preset(g.seed.value_or(7));
  } else if (preset.empty()) {
    ac.base = c.train;
    ac.eval_sequences = c.train.eval_sequences;
  } else {
    throw dnt::ConfigError("unknown preset '" + preset + "'");
  }
  if (seeds) ac.seeds = *seeds;
  const dnt::AblationResult result = dnt::run_ablation(ac, g.threads, [](const dnt::AblationRow& r) {
    std::fprintf(stderr, "%-17s steps %6zu seed %llu accuracy %.4f\n", r.strategy.c_str(), r.steps,
                 static_cast<unsigned long long>(r.seed), r.report.association_accuracy);
  });
  const fs::path dir = ensure_dir(c.out_dir);
  write_text(dir / "ablation.csv", dnt::ablation_csv(result));
  write_text(dir / "ablation.json", dnt::ablation_json(result));
  for (const dnt::AblationCell& cell : result.cells) {
    std::printf("%-17s %6zu  accuracy %.4f +- %.4f  light %.4f  moderate %.4f  heavy %.4f  switches %.1f\n",
                cell.strategy.c_str(), cell.steps, cell.accuracy.mean, cell.accuracy.stddev, cell.light.mean,
                cell.moderate.mean, cell.heavy.mean, cell.id_switches.mean);
  }
  std::printf("shuffle - none: %+.4f\n", result.shuffle_minus_none);
  if (!(result.shuffle_minus_none > 0.0)) {
    std::fprintf(stderr, "ordering check failed: shuffle does not beat none\n");
    return kExitAcceptance;
  }
  return 0;
}

int cmd_gradcheck(const Globals& g, std::size_t trials) {
  const std::vector<dnt::GradCheckResult> results = dnt::run_gradcheck_suite(g.seed.value_or(0), trials);
  bool ok = true;
  for (const dnt::GradCheckResult& r : results) {
    std::printf("%-22s max relative error %.3e  %s\n", r.name.c_str(), r.max_relative_error, r.passed() ? "ok" : "FAIL");
    ok = ok && r.passed();
  }
  return ok ? 0 : kExitAcceptance;
}

std::string config_help() {
  std::string out = "Config keys (JSON object; unknown keys are rejected):\n";
  for (const dnt::ConfigKey& k : dnt::config_keys()) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-18s %-14s %s\n", k.name.c_str(), k.default_value.c_str(), k.description.c_str());
    out += line;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dntrack: denoising-trained referring tracker on synthetic query worlds"};
  app.require_subcommand(1);
  app.fallthrough();
  app.footer(config_help());

  Globals g;
  app.add_option("--config", g.config_path, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "root seed (overrides the config)");
  app.add_option("--out", g.out, "output directory (overrides the config)");
  app.add_option("--threads", g.threads, "worker threads; results do not depend on it")->capture_default_str();

  std::size_t count = 10;
  auto* gen = app.add_subcommand("gen", "write SEQ1 sequences and a manifest");
  gen->add_option("--count", count, "number of sequences")->capture_default_str();

  std::optional<std::string> strategy;
  std::optional<std::size_t> steps;
  auto* train = app.add_subcommand("train", "train a tracker; writes checkpoint.dnt and train_log.ndjson");
  train->add_option("--strategy", strategy, "noise strategy (overrides the config)");
  train->add_option("--steps", steps, "optimizer steps (overrides the config)");

  std::string checkpoint;
  bool untrained = false, shuffle_identity = false;
  std::string identity = "heuristic";
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint; writes eval_report.json");
  eval->add_option("--checkpoint", checkpoint, "checkpoint path, or 'none' together with --untrained")->required();
  eval->add_flag("--untrained", untrained, "evaluate a freshly initialized model");
  eval->add_option("--identity", identity, "identity input: heuristic or none")->capture_default_str();
  eval->add_flag("--shuffle-identity", shuffle_identity, "shuffle the identity input (shortcut probe)");

  std::string preset;
  std::optional<std::size_t> seeds;
  auto* ablate = app.add_subcommand("ablate", "noise-strategy ablation; writes ablation.csv and ablation.json");
  ablate->add_option("--preset", preset, "table2-analog: the standard benchmark (seed defaults to 7)");
  ablate->add_option("--seeds", seeds, "training seeds per cell");

  std::size_t trials = 10;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of every differentiable op");
  gradcheck->add_option("--trials", trials, "random points per op")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(g, count);
    if (*train) return cmd_train(g, strategy, steps);
    if (*eval) return cmd_eval(g, checkpoint, untrained, identity, shuffle_identity);
    if (*ablate) return cmd_ablate(g, preset, seeds);
    if (*gradcheck) return cmd_gradcheck(g, trials);
  } catch (const dnt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const dnt::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitIo;
  } catch (const dnt::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
