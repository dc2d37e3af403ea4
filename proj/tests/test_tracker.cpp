#include <cmath>

#include <gtest/gtest.h>

#include "dnt/error.hpp"
#include "dnt/evaluate.hpp"
#include "dnt/noise.hpp"
#include "dnt/tracker.hpp"

using namespace dnt;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-scale, scale);
  return t;
}

// Every parameter random, gains included, so no symmetry comes for free.
TrackerModel random_model(const TrackerHyper& h, Rng& rng) {
  TrackerModel m(h);
  for (auto& p : m.parameters())
    for (double& v : p.tensor->values()) v = rng.uniform(-1.0, 1.0);
  return m;
}

Tensor eye(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

// Identity projections and head, zero FFN and biases, unit norm gains, no identity path.
TrackerModel pass_through_model(std::size_t C) {
  TrackerModel m({1, C, 8});
  DecoderBlock& b = m.blocks()[0];
  for (Tensor* w : {&b.attn_query_weight, &b.attn_key_weight, &b.attn_value_weight, &b.attn_out_weight}) *w = eye(C);
  std::fill(b.norm1_gain.values().begin(), b.norm1_gain.values().end(), 1.0);
  std::fill(b.norm2_gain.values().begin(), b.norm2_gain.values().end(), 1.0);
  m.head() = eye(C);
  return m;
}

std::vector<double> layer_norm_ref(std::vector<double> x, double eps) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  var /= static_cast<double>(x.size());
  for (double& v : x) v = (v - mean) / std::sqrt(var + eps);
  return x;
}

Tensor permute(const Tensor& t, const std::vector<std::size_t>& p) { return permute_rows(t, p); }

}  // namespace

TEST(Tracker, ParameterCountFormula) {
  for (TrackerHyper h : {TrackerHyper{1, 16, 32}, TrackerHyper{2, 8, 5}, TrackerHyper{3, 4, 64}}) {
    const TrackerModel m(h);
    EXPECT_EQ(m.parameter_count(), TrackerModel::parameter_count(h));
    const std::size_t C = h.channels, H = h.hidden;
    EXPECT_EQ(m.parameter_count(), h.layers * (4 * C * C + 2 * C * H + H + 10 * C) + C * C + C);
  }
}

TEST(Tracker, ParameterOrderIsStable) {
  TrackerModel m({2, 4, 4});
  const auto params = m.parameters();
  ASSERT_EQ(params.size(), 2 * 17 + 2u);
  EXPECT_EQ(params.front().name, "block0.attn_key_bias");
  EXPECT_EQ(params[16].name, "block0.norm2_gain");
  EXPECT_EQ(params[17].name, "block1.attn_key_bias");
  EXPECT_EQ(params[params.size() - 2].name, "head");
  EXPECT_EQ(params.back().name, "inactive");
  for (std::size_t i = 1; i < 17; ++i) EXPECT_LT(params[i - 1].name, params[i].name);
}

TEST(Tracker, InitIsDeterministic) {
  const TrackerHyper h{2, 8, 12};
  EXPECT_EQ(init_model(h, 3), init_model(h, 3));
  EXPECT_FALSE(init_model(h, 3) == init_model(h, 4));
  const TrackerModel m = init_model(h, 3);
  const double bound = 1.0 / std::sqrt(8.0);
  for (double v : m.head().values()) EXPECT_LE(std::abs(v), bound);
  for (double v : m.blocks()[0].norm1_gain.values()) EXPECT_EQ(v, 1.0);
  for (double v : m.blocks()[0].attn_query_bias.values()) EXPECT_EQ(v, 0.0);
}

TEST(Tracker, SingleKeyAttentionReturnsValue) {
  const std::size_t C = 4;
  const TrackerModel m = pass_through_model(C);
  const Tensor ref = Tensor::matrix({{0.3, -1.0, 2.0, 0.5}});
  const Tensor obs = Tensor::matrix({{1.0, 0.25, -0.5, 0.0}});
  const Tensor out = tracker_forward(m, ref, obs);
  // One key: softmax weight 1, so the attention term is obs itself.
  std::vector<double> x(C);
  for (std::size_t c = 0; c < C; ++c) x[c] = ref.at(0, c) + obs.at(0, c);
  const std::vector<double> expected = layer_norm_ref(layer_norm_ref(x, 1e-5), 1e-5);
  for (std::size_t c = 0; c < C; ++c) EXPECT_NEAR(out.at(0, c), expected[c], 1e-12);

  Tape tape;
  const Tensor v = Tensor::matrix({{1.5, -2.0, 0.125}});
  const Var a = attention(tape.constant(Tensor::matrix({{0.2, 0.1}, {-4, 9}})), tape.constant(Tensor::matrix({{3, 1}})),
                          tape.constant(v), 0.5);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(a.value().at(r, c), v.at(0, c));
}

TEST(Tracker, KeyPermutationInvarianceAndReferenceEquivariance) {
  Rng rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    const TrackerHyper h{2, 8, 12};
    const TrackerModel m = random_model(h, rng);
    const std::size_t N = 6;
    const Tensor refs = random_tensor({N, 8}, rng), keys = random_tensor({N, 8}, rng), id = random_tensor({N, 8}, rng);
    const Tensor out = tracker_forward(m, refs, keys, &id);
    const auto pk = rng.permutation(N);
    EXPECT_LE(max_abs_diff(tracker_forward(m, refs, permute(keys, pk), &id), out), 1e-9);
    const auto pr = rng.permutation(N);
    const Tensor pid = permute(id, pr);
    EXPECT_LE(max_abs_diff(tracker_forward(m, permute(refs, pr), keys, &pid), permute(out, pr)), 1e-9);
  }
}

TEST(Tracker, ForwardShapeErrors) {
  const TrackerModel m = init_model({1, 4, 4}, 0);
  EXPECT_THROW(tracker_forward(m, Tensor({2, 3}), Tensor({2, 4})), DimensionError);
  EXPECT_THROW(tracker_forward(m, Tensor({2, 4}), Tensor({2, 5})), DimensionError);
  const Tensor id({3, 4});
  EXPECT_THROW(tracker_forward(m, Tensor({2, 4}), Tensor({2, 4}), &id), DimensionError);
  // Different key count is fine: attention runs over whatever keys exist.
  EXPECT_EQ(tracker_forward(m, Tensor({2, 4}, 1.0), Tensor({5, 4}, 0.5)).shape(), (std::vector<std::size_t>{2, 4}));
}

TEST(Tracker, ForwardIsPure) {
  Rng rng(3);
  const TrackerModel m = random_model({1, 4, 4}, rng);
  const TrackerModel copy = m;
  const Tensor r = random_tensor({3, 4}, rng), k = random_tensor({3, 4}, rng);
  EXPECT_EQ(tracker_forward(m, r, k), tracker_forward(m, r, k));
  EXPECT_EQ(m, copy);
}

TEST(Propagate, SingleFrame) {
  WorldConfig w;
  w.frames = 2;
  w.seed = 1;
  Sequence seq = gen_sequence(w);
  seq.frames.resize(1);
  const Propagation p = propagate(init_model({1, 16, 32}, 0), seq);
  ASSERT_EQ(p.assignment.track_of_slot.size(), 1u);
  for (std::size_t s = 0; s < seq.slots(); ++s)
    EXPECT_EQ(p.assignment.track_of_slot[0][s], seq.frames[0].visible(s) ? static_cast<int>(s) : -1);
  EXPECT_EQ(score_assignment(seq, p.assignment).id_switches, 0u);
}

TEST(Propagate, Deterministic) {
  WorldConfig w;
  w.seed = 2;
  const Sequence seq = gen_sequence(w);
  const TrackerModel m = init_model({1, 16, 32}, 5);
  PropagateOptions opts;
  opts.inference_noise = NoiseStrategy::kShuffle;
  opts.inference_noise_seed = 9;
  const Propagation a = propagate(m, seq, opts), b = propagate(m, seq, opts);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_EQ(a.outputs, b.outputs);
}

TEST(Propagate, PassThroughModelIsPerfectOnNoiselessWorld) {
  WorldConfig w;
  w.occlusion_rate = 0.0;
  w.drift_sigma = 0.0;
  w.confusion_pairs = 0;
  std::vector<Sequence> set;
  for (std::uint64_t s = 0; s < 10; ++s) {
    w.seed = s;
    set.push_back(gen_sequence(w));
  }
  PropagateOptions opts;
  opts.identity = IdentitySource::kNone;
  const EvalReport r = evaluate(pass_through_model(w.channels), set, opts);
  EXPECT_EQ(r.association_accuracy, 1.0);
  EXPECT_EQ(r.id_switches, 0u);
}

TEST(Propagate, ChannelMismatch) {
  WorldConfig w;
  const Sequence seq = gen_sequence(w);
  EXPECT_THROW(propagate(init_model({1, 8, 8}, 0), seq), DimensionError);
}
