#include "dnt/world.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <string>

#include "dnt/error.hpp"
#include "dnt/rng.hpp"

namespace dnt {

namespace {

// Generator constants. The random-draw order below is part of the
// determinism contract: changing it changes every generated sequence.
constexpr double kPositionScale = 1.0;  // norm of the position encoding
constexpr double kPositionFreq = 2.0;   // radians per unit distance along each band
constexpr double kMinSpeed = 0.04;
constexpr double kMaxSpeed = 0.08;
constexpr double kMaxTurn = 0.05;       // radians per frame
constexpr double kPairOffset = 0.05;    // appearance separation inside a confusion pair
constexpr double kOverlapRadius = 0.3;  // partner hidden while this close to its leader

using Vec2 = std::array<double, 2>;

std::vector<double> random_unit(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = rng.normal();
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

void normalize(std::vector<double>& v) {
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (double& x : v) x /= norm;
}

}  // namespace

std::size_t QueryFrame::num_visible() const {
  std::size_t n = 0;
  for (int id : identity) n += id >= 0 ? 1 : 0;
  return n;
}

void WorldConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("world config: " + msg); };
  if (frames < 2) fail("frames (T) must be >= 2, got " + std::to_string(frames));
  if (slots < 1) fail("slots (N) must be >= 1");
  if (objects < 1) fail("objects (K) must be >= 1");
  if (objects > slots) {
    fail("objects (K=" + std::to_string(objects) + ") must not exceed slots (N=" + std::to_string(slots) + ")");
  }
  if (position_channels < 2) fail("position_channels (P) must be >= 2");
  if (position_channels >= channels) fail("position_channels (P) must be < channels (C)");
  if (!(drift_sigma >= 0.0) || !std::isfinite(drift_sigma)) fail("drift_sigma must be finite and >= 0");
  if (!(occlusion_rate >= 0.0 && occlusion_rate < 1.0)) fail("occlusion_rate must lie in [0, 1)");
  if (2 * confusion_pairs > objects) fail("confusion_pairs needs 2 objects per pair; K is too small");
}

Sequence gen_sequence(const WorldConfig& cfg, GenerationTrace* trace) {
  cfg.validate();
  const std::size_t T = cfg.frames, N = cfg.slots, C = cfg.channels, K = cfg.objects;
  const std::size_t P = cfg.position_channels, A = C - P;
  Rng rng(cfg.seed);

  // Per-object static draws: appearance, then trajectory.
  std::vector<std::vector<double>> appearance(K);
  for (std::size_t k = 0; k < K; ++k) appearance[k] = random_unit(rng, A);

  std::vector<std::vector<Vec2>> pos(K, std::vector<Vec2>(T));
  for (std::size_t k = 0; k < K; ++k) {
    Vec2 p{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = rng.uniform(kMinSpeed, kMaxSpeed);
    const double turn = rng.uniform(-kMaxTurn, kMaxTurn);
    for (std::size_t t = 0; t < T; ++t) {
      pos[k][t] = p;
      p[0] += speed * std::cos(heading);
      p[1] += speed * std::sin(heading);
      heading += turn;
    }
  }

  // Confusion pairs (2p, 2p+1): the partner shares the leader's appearance up
  // to a fixed small offset and crosses the leader's path mid-sequence.
  std::vector<std::vector<double>> pair_offset(cfg.confusion_pairs);
  for (std::size_t p = 0; p < cfg.confusion_pairs; ++p) {
    const std::size_t leader = 2 * p, partner = 2 * p + 1;
    pair_offset[p] = random_unit(rng, A);
    const std::size_t lo = T / 3, hi = std::max(lo, (2 * T) / 3);
    const std::size_t cross = lo + rng.uniform_index(hi - lo + 1);
    const Vec2 meet = pos[leader][cross];
    const Vec2 lv{pos[leader][std::min(cross + 1, T - 1)][0] - pos[leader][cross > 0 ? cross - 1 : 0][0],
                  pos[leader][std::min(cross + 1, T - 1)][1] - pos[leader][cross > 0 ? cross - 1 : 0][1]};
    const double lead_heading = std::atan2(lv[1], lv[0]);
    const double heading = lead_heading + rng.uniform(0.5 * std::numbers::pi, 1.5 * std::numbers::pi);
    const double speed = rng.uniform(kMinSpeed, kMaxSpeed);
    for (std::size_t t = 0; t < T; ++t) {
      const double dt = static_cast<double>(t) - static_cast<double>(cross);
      pos[partner][t] = {meet[0] + speed * dt * std::cos(heading), meet[1] + speed * dt * std::sin(heading)};
    }
  }

  auto partner_appearance = [&](std::size_t p, const std::vector<double>& leader_app) {
    std::vector<double> v(A);
    for (std::size_t c = 0; c < A; ++c) v[c] = leader_app[c] + kPairOffset * pair_offset[p][c];
    normalize(v);
    return v;
  };
  for (std::size_t p = 0; p < cfg.confusion_pairs; ++p) appearance[2 * p + 1] = partner_appearance(p, appearance[2 * p]);

  const std::size_t bands = P / 2;
  const double band_gain = kPositionScale / std::sqrt(static_cast<double>(bands));
  auto encode = [&](const Vec2& p, std::span<double> out) {
    for (std::size_t j = 0; j < bands; ++j) {
      const double theta = std::numbers::pi * static_cast<double>(j) / static_cast<double>(bands);
      const double u = kPositionFreq * (p[0] * std::cos(theta) + p[1] * std::sin(theta));
      out[2 * j] = band_gain * std::cos(u);
      out[2 * j + 1] = band_gain * std::sin(u);
    }
  };

  Sequence seq;
  seq.num_objects = K;
  seq.position_channels = P;
  seq.frames.reserve(T);
  std::vector<std::size_t> occluded_count(K, 0);
  if (trace) {
    trace->slot_of_object.assign(T, std::vector<int>(K, -1));
    trace->positions.assign(T, std::vector<Vec2>(K));
  }

  for (std::size_t t = 0; t < T; ++t) {
    // Appearance random walk (leaders and free objects), partners follow.
    if (t > 0 && cfg.drift_sigma > 0.0) {
      for (std::size_t k = 0; k < K; ++k) {
        if (k < 2 * cfg.confusion_pairs && k % 2 == 1) continue;
        for (double& x : appearance[k]) x += cfg.drift_sigma * rng.normal();
        normalize(appearance[k]);
      }
      for (std::size_t p = 0; p < cfg.confusion_pairs; ++p)
        appearance[2 * p + 1] = partner_appearance(p, appearance[2 * p]);
    }

    std::vector<bool> visible(K, true);
    if (t > 0) {
      for (std::size_t k = 0; k < K; ++k) visible[k] = !rng.bernoulli(cfg.occlusion_rate);
      for (std::size_t p = 0; p < cfg.confusion_pairs; ++p) {
        const Vec2& a = pos[2 * p][t];
        const Vec2& b = pos[2 * p + 1][t];
        if (std::hypot(a[0] - b[0], a[1] - b[1]) < kOverlapRadius) visible[2 * p + 1] = false;
      }
    }

    const std::vector<std::size_t> perm = rng.permutation(N);
    QueryFrame frame{Tensor({N, C}, 0.0), std::vector<int>(N, -1)};
    std::size_t next = 0;
    for (std::size_t k = 0; k < K; ++k) {
      if (!visible[k]) {
        ++occluded_count[k];
        continue;
      }
      const std::size_t slot = perm[next++];
      frame.identity[slot] = static_cast<int>(k);
      auto row = frame.queries.row(slot);
      for (std::size_t c = 0; c < A; ++c) row[c] = appearance[k][c];
      encode(pos[k][t], row.subspan(A, P));
      if (trace) trace->slot_of_object[t][k] = static_cast<int>(slot);
    }
    if (trace)
      for (std::size_t k = 0; k < K; ++k) trace->positions[t][k] = pos[k][t];
    seq.frames.push_back(std::move(frame));
  }

  seq.occlusion_fraction.resize(K);
  for (std::size_t k = 0; k < K; ++k)
    seq.occlusion_fraction[k] = static_cast<double>(occluded_count[k]) / static_cast<double>(T);
  return seq;
}

Stratum stratum_of(double f) noexcept {
  if (f < 0.25) return Stratum::kLight;
  if (f < 0.5) return Stratum::kModerate;
  return Stratum::kHeavy;
}

std::vector<Stratum> stratify_occlusion(const Sequence& seq) {
  std::vector<Stratum> out;
  out.reserve(seq.occlusion_fraction.size());
  for (double f : seq.occlusion_fraction) out.push_back(stratum_of(f));
  return out;
}

const char* stratum_name(Stratum s) noexcept {
  switch (s) {
    case Stratum::kLight:
      return "light";
    case Stratum::kModerate:
      return "moderate";
    case Stratum::kHeavy:
      return "heavy";
  }
  return "?";
}

void validate_sequence(const Sequence& seq) {
  if (seq.frames.empty()) throw ContractError("sequence has no frames");
  const std::size_t N = seq.slots(), C = seq.channels();
  if (seq.occlusion_fraction.size() != seq.num_objects) {
    throw ContractError("sequence: occlusion_fraction has " + std::to_string(seq.occlusion_fraction.size()) +
                        " entries for " + std::to_string(seq.num_objects) + " objects");
  }
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    const QueryFrame& f = seq.frames[t];
    if (f.slots() != N || f.queries.shape() != std::vector<std::size_t>{N, C}) {
      throw ContractError("sequence: frame " + std::to_string(t) + " shape differs from frame 0");
    }
    std::vector<bool> seen(seq.num_objects, false);
    for (int id : f.identity) {
      if (id < -1 || id >= static_cast<int>(seq.num_objects)) {
        throw ContractError("sequence: frame " + std::to_string(t) + " has identity " + std::to_string(id) +
                            " outside [-1, " + std::to_string(seq.num_objects) + ")");
      }
      if (id >= 0) {
        if (seen[id]) {
          throw ContractError("sequence: identity " + std::to_string(id) + " repeated in frame " + std::to_string(t));
        }
        seen[id] = true;
      }
    }
  }
}

}  // namespace dnt
