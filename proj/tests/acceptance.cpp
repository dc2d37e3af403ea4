// Acceptance run: one PASS/FAIL line per criterion. Tolerances are pinned here.
//
//   dnt_acceptance <work_dir> [dntrack]
//
// With the dntrack path, criterion 9 runs the CLI twice more (threads 1 and
// 4) and compares its files against the in-process run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "dnt/ablate.hpp"
#include "dnt/association.hpp"
#include "dnt/evaluate.hpp"
#include "dnt/gradcheck.hpp"
#include "dnt/hungarian.hpp"
#include "dnt/noise.hpp"
#include "dnt/tracker.hpp"

using namespace dnt;
namespace fs = std::filesystem;

namespace {

constexpr double kNoiseRuntimeLimit = 5.0;       // seconds
constexpr double kShuffleUniformTolerance = 0.02;
constexpr int kShuffleDraws = 10000;
constexpr double kHungarianRuntimeLimit = 10.0;  // seconds
constexpr int kHungarianTrials = 200;
constexpr double kGradRuntimeLimit = 60.0;       // seconds
constexpr double kSymmetryTolerance = 1e-9;
constexpr int kSymmetryTrials = 10;
constexpr double kMinShuffleMargin = 0.02;       // accuracy points / 100
constexpr double kMinShortcutDrop = 0.05;
constexpr std::uint64_t kAblationSeed = 7;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void criterion_noise() {
  const auto t0 = Clock::now();
  Rng rng(1);
  bool ok = true;
  const std::size_t N = 6, C = 10;
  const Tensor q = random_tensor({N, C}, rng);
  std::vector<int> other(N), self(N);
  for (std::size_t i = 0; i < N; ++i) {
    other[i] = static_cast<int>((i + 1) % N);
    self[i] = static_cast<int>(i);
  }
  std::vector<double> alphas(N);
  for (double& a : alphas) a = rng.uniform_open01();
  ok &= weighted_average_rows(q, std::vector<double>(N, 1.0), other) == q;     // alpha = 1
  ok &= weighted_average_rows(q, alphas, self) == q;                          // j = i
  ok &= crop_concat_rows(q, std::vector<std::size_t>(N, C), other) == q;      // k = C
  ok &= crop_concat_rows(q, std::vector<std::size_t>(N, 0), other) ==
        permute_rows(q, {1, 2, 3, 4, 5, 0});                                  // k = 0
  const Tensor single = random_tensor({1, C}, rng);
  const NoiseOutcome one = noise_shuffle(single, rng);
  ok &= one.noised == single && one.permutation == std::vector<std::size_t>{0};

  std::map<std::vector<std::size_t>, int> counts;
  const Tensor three = Tensor::matrix({{0}, {1}, {2}});
  for (int i = 0; i < kShuffleDraws; ++i) ++counts[noise_shuffle(three, rng).permutation];
  double worst = counts.size() == 6 ? 0.0 : 1.0;
  for (const auto& [perm, n] : counts) worst = std::max(worst, std::abs(static_cast<double>(n) / kShuffleDraws - 1.0 / 6.0));
  const double secs = seconds_since(t0);
  report(1, ok && worst <= kShuffleUniformTolerance && secs < kNoiseRuntimeLimit,
         std::string("boundary cases ") + (ok ? "bit-exact" : "MISMATCH") +
             fmt("; shuffle max |p - 1/6| = %.4f (tol %.2f); %.2fs", worst, kShuffleUniformTolerance, secs));
}

void criterion_hungarian() {
  const auto t0 = Clock::now();
  Rng rng(2);
  int mismatches = 0, total = 0;
  for (std::size_t n = 2; n <= 7; ++n) {
    for (int trial = 0; trial < kHungarianTrials; ++trial, ++total) {
      // Multiples of 1/8 keep every partial sum exact.
      Tensor c({n, n});
      for (double& x : c.values()) x = static_cast<double>(rng.uniform_index(81)) / 8.0;
      std::vector<std::size_t> p(n);
      std::iota(p.begin(), p.end(), 0);
      double best = INFINITY;
      do {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += c.at(i, p[i]);
        best = std::min(best, s);
      } while (std::next_permutation(p.begin(), p.end()));
      const Assignment a = hungarian(c);
      double got = 0.0;
      for (std::size_t i = 0; i < n; ++i) got += c.at(i, static_cast<std::size_t>(a.mapping[i]));
      if (got != best || a.total_cost != best) ++mismatches;
    }
  }
  const double secs = seconds_since(t0);
  report(2, mismatches == 0 && secs < kHungarianRuntimeLimit,
         std::to_string(total - mismatches) + "/" + std::to_string(total) + " exact matches with brute force" +
             fmt("; %.2fs", secs));
}

void criterion_gradients() {
  const auto t0 = Clock::now();
  const auto results = run_gradcheck_suite(3);
  double worst = 0.0;
  std::string worst_name, failed;
  for (const GradCheckResult& r : results) {
    if (r.max_relative_error >= worst) {
      worst = r.max_relative_error;
      worst_name = r.name;
    }
    if (!r.passed()) failed += " " + r.name;
  }
  const double secs = seconds_since(t0);
  report(3, failed.empty() && secs < kGradRuntimeLimit,
         std::to_string(results.size()) + " cases, worst " + worst_name + fmt(" %.2e (tol %.0e); %.2fs", worst,
                                                                              kGradCheckTolerance, secs) +
             (failed.empty() ? "" : "; failed:" + failed));
}

void criterion_symmetry() {
  Rng rng(4);
  double inv = 0.0, eqv = 0.0;
  for (int trial = 0; trial < kSymmetryTrials; ++trial) {
    const TrackerHyper h{1 + static_cast<std::size_t>(trial % 2), 8, 16};
    TrackerModel m(h);
    for (auto& p : m.parameters())
      for (double& v : p.tensor->values()) v = rng.uniform(-1.0, 1.0);
    const std::size_t N = 6;
    const Tensor refs = random_tensor({N, 8}, rng), keys = random_tensor({N, 8}, rng), id = random_tensor({N, 8}, rng);
    const Tensor out = tracker_forward(m, refs, keys, &id);
    inv = std::max(inv, max_abs_diff(tracker_forward(m, refs, permute_rows(keys, rng.permutation(N)), &id), out));
    const auto p = rng.permutation(N);
    const Tensor pid = permute_rows(id, p);
    eqv = std::max(eqv, max_abs_diff(tracker_forward(m, permute_rows(refs, p), keys, &pid), permute_rows(out, p)));
  }
  report(4, inv <= kSymmetryTolerance && eqv <= kSymmetryTolerance,
         fmt("key permutation %.2e, reference equivariance %.2e (tol %.0e)", inv, eqv, kSymmetryTolerance));
}

double pooled_se(const Stat& a, const Stat& b, std::size_t n) {
  return std::sqrt((a.stddev * a.stddev + b.stddev * b.stddev) / static_cast<double>(n));
}

void criteria_ablation(const AblationResult& r) {
  const std::size_t base = r.config.base.steps, lng = base * r.config.long_factor, n = r.config.seeds;
  const AblationCell& none = r.cell("none", base);
  const AblationCell& wa = r.cell("weighted_average", base);
  const AblationCell& cc = r.cell("crop_concat", base);
  const AblationCell& shuf = r.cell("shuffle", base);
  const AblationCell& none4 = r.cell("none", lng);
  const AblationCell& shuf4 = r.cell("shuffle", lng);
  const AblationCell& heur = r.cell("heuristic", 0);

  const double margin = shuf.accuracy.mean - none.accuracy.mean;
  const double se = pooled_se(shuf.accuracy, none.accuracy, n);
  report(5, margin >= kMinShuffleMargin && margin > se && wa.accuracy.mean > none.accuracy.mean &&
                cc.accuracy.mean > none.accuracy.mean,
         fmt("none %.4f, W.A. %.4f, C&C %.4f, shuffle %.4f", none.accuracy.mean, wa.accuracy.mean, cc.accuracy.mean,
             shuf.accuracy.mean) +
             fmt("; margin %.4f (min %.2f), pooled SE %.4f", margin, kMinShuffleMargin, se));

  const double pooled_sd =
      std::sqrt((none.accuracy.stddev * none.accuracy.stddev + none4.accuracy.stddev * none4.accuracy.stddev) / 2.0);
  const double none_delta = none4.accuracy.mean - none.accuracy.mean;
  report(6, shuf4.accuracy.mean >= shuf.accuracy.mean && std::abs(none_delta) <= pooled_sd,
         fmt("shuffle %.4f -> %.4f; none %.4f -> %.4f", shuf.accuracy.mean, shuf4.accuracy.mean, none.accuracy.mean,
             none4.accuracy.mean) +
             fmt(" (|delta| %.4f, pooled sd %.4f)", std::abs(none_delta), pooled_sd));

  const double none_drop = none.accuracy.mean - none.shuffled_accuracy.mean;
  const double shuf_drop = shuf.accuracy.mean - shuf.shuffled_accuracy.mean;
  report(7, none_drop >= kMinShortcutDrop && shuf_drop < none_drop,
         fmt("drop under shuffled identity: none %.4f (min %.2f), shuffle %.4f", none_drop, kMinShortcutDrop, shuf_drop));

  WorldConfig easy;
  easy.occlusion_rate = 0.0;
  easy.drift_sigma = 0.0;
  easy.confusion_pairs = 0;
  std::vector<Sequence> noiseless;
  for (std::uint64_t s = 0; s < 32; ++s) {
    easy.seed = derive_seed(kAblationSeed, stream::kEvalWorld, s);
    noiseless.push_back(gen_sequence(easy));
  }
  const double easy_acc = evaluate_heuristic(noiseless).association_accuracy;
  double best = 0.0;
  std::string best_name;
  for (const AblationCell& c : r.cells) {
    if (c.strategy == "heuristic" || c.accuracy.mean <= best) continue;
    best = c.accuracy.mean;
    best_name = c.strategy + "@" + std::to_string(c.steps);
  }
  report(8, easy_acc == 1.0 && best > heur.accuracy.mean,
         fmt("heuristic on noiseless %.4f; standard heuristic %.4f vs best learned ", easy_acc, heur.accuracy.mean) +
             best_name + fmt(" %.4f", best));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

bool run_cli(const std::string& dntrack, const fs::path& out, int threads) {
  const std::string cmd = "\"" + dntrack + "\" ablate --preset table2-analog --seed " + std::to_string(kAblationSeed) +
                          " --threads " + std::to_string(threads) + " --out \"" + out.string() + "\" > \"" +
                          (out.string() + ".log") + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc != -1 && WIFEXITED(rc) && WEXITSTATUS(rc) == 0;
}

void criterion_determinism(const AblationResult& r, const fs::path& dir, const std::string& dntrack) {
  const std::string csv = ablation_csv(r), json = ablation_json(r);
  write(dir / "inprocess" / "ablation.csv", csv);
  write(dir / "inprocess" / "ablation.json", json);
  if (dntrack.empty()) {
    const AblationResult again = run_ablation(table2_preset(kAblationSeed), 1);
    report(9, ablation_csv(again) == csv && ablation_json(again) == json,
           "second in-process run byte-identical (no CLI path given; threads 4 not checked)");
    return;
  }
  const fs::path t1 = dir / "cli_threads1", t4 = dir / "cli_threads4";
  const bool ran1 = run_cli(dntrack, t1, 1);
  const bool ran4 = run_cli(dntrack, t4, 4);
  const bool same1 = ran1 && slurp(t1 / "ablation.csv") == csv && slurp(t1 / "ablation.json") == json;
  // Aggregates live in the JSON cells; the CSV holds every per-run number.
  const bool same4 = ran4 && slurp(t4 / "ablation.csv") == csv && slurp(t4 / "ablation.json") == json;
  report(9, same1 && same4,
         std::string("threads 1 runs byte-identical: ") + (same1 ? "yes" : "no") +
             "; threads 4 aggregates identical: " + (same4 ? "yes" : "no"));
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path dir = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_runs");
  const std::string dntrack = argc > 2 ? argv[2] : "";
  fs::create_directories(dir / "inprocess");

  criterion_noise();
  criterion_hungarian();
  criterion_gradients();
  criterion_symmetry();

  const auto t0 = Clock::now();
  const AblationResult result = run_ablation(table2_preset(kAblationSeed), 1, [](const AblationRow& row) {
    std::printf("  run %-16s steps %5zu seed %2llu  accuracy %.4f  shuffled %.4f\n", row.strategy.c_str(), row.steps,
                static_cast<unsigned long long>(row.seed), row.report.association_accuracy, row.shuffled_accuracy);
    std::fflush(stdout);
  });
  std::printf("  ablation finished in %.0fs\n", seconds_since(t0));
  criteria_ablation(result);
  criterion_determinism(result, dir, dntrack);

  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
