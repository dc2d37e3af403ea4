#include "dnt/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "dnt/error.hpp"
#include "dnt/rng.hpp"

namespace dnt {

namespace {

// Sorted by name; BoundTracker and tracker_forward index into this order.
enum BlockParam : std::size_t {
  kAttnKeyBias,
  kAttnKeyWeight,
  kAttnOutBias,
  kAttnOutWeight,
  kAttnQueryBias,
  kAttnQueryWeight,
  kAttnValueBias,
  kAttnValueWeight,
  kFfnInBias,
  kFfnInWeight,
  kFfnOutBias,
  kFfnOutWeight,
  kIdentityGain,
  kNorm1Bias,
  kNorm1Gain,
  kNorm2Bias,
  kNorm2Gain,
  kBlockParamCount
};

constexpr const char* kBlockParamNames[kBlockParamCount] = {
    "attn_key_bias",   "attn_key_weight", "attn_out_bias",   "attn_out_weight", "attn_query_bias", "attn_query_weight",
    "attn_value_bias", "attn_value_weight", "ffn_in_bias",   "ffn_in_weight",   "ffn_out_bias",    "ffn_out_weight",
    "identity_gain",   "norm1_bias",      "norm1_gain",      "norm2_bias",      "norm2_gain"};

template <typename Block>
auto block_tensors(Block& b) {
  using T = std::conditional_t<std::is_const_v<Block>, const Tensor*, Tensor*>;
  return std::array<T, kBlockParamCount>{
      &b.attn_key_bias,   &b.attn_key_weight, &b.attn_out_bias,  &b.attn_out_weight, &b.attn_query_bias,
      &b.attn_query_weight, &b.attn_value_bias, &b.attn_value_weight, &b.ffn_in_bias, &b.ffn_in_weight,
      &b.ffn_out_bias,    &b.ffn_out_weight,  &b.identity_gain,  &b.norm1_bias,      &b.norm1_gain,
      &b.norm2_bias,      &b.norm2_gain};
}

constexpr double kNormEpsilon = 1e-5;
// Small but nonzero: the identity path starts almost closed, so a model only
// leans on it when training shows it is worth trusting.
constexpr double kIdentityGainInit = 0.1;

}  // namespace

TrackerModel::TrackerModel(const TrackerHyper& h) : hyper_(h) {
  if (h.layers < 1 || h.channels < 1 || h.hidden < 1) throw ConfigError("tracker: L, C and H must be >= 1");
  const std::size_t C = h.channels, H = h.hidden;
  blocks_.resize(h.layers);
  for (DecoderBlock& b : blocks_) {
    for (Tensor* w : {&b.attn_query_weight, &b.attn_key_weight, &b.attn_value_weight, &b.attn_out_weight})
      *w = Tensor({C, C}, 0.0);
    for (Tensor* v : {&b.attn_query_bias, &b.attn_key_bias, &b.attn_value_bias, &b.attn_out_bias, &b.identity_gain,
                      &b.norm1_gain, &b.norm1_bias, &b.ffn_out_bias, &b.norm2_gain, &b.norm2_bias})
      *v = Tensor({C}, 0.0);
    b.ffn_in_weight = Tensor({C, H}, 0.0);
    b.ffn_in_bias = Tensor({H}, 0.0);
    b.ffn_out_weight = Tensor({H, C}, 0.0);
  }
  head_ = Tensor({C, C}, 0.0);
  inactive_ = Tensor({1, C}, 0.0);
}

std::vector<NamedParam> TrackerModel::parameters() {
  std::vector<NamedParam> out;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto ts = block_tensors(blocks_[l]);
    for (std::size_t i = 0; i < kBlockParamCount; ++i)
      out.push_back({"block" + std::to_string(l) + "." + kBlockParamNames[i], ts[i]});
  }
  out.push_back({"head", &head_});
  out.push_back({"inactive", &inactive_});
  return out;
}

std::vector<NamedConstParam> TrackerModel::parameters() const {
  std::vector<NamedConstParam> out;
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    const auto ts = block_tensors(blocks_[l]);
    for (std::size_t i = 0; i < kBlockParamCount; ++i)
      out.push_back({"block" + std::to_string(l) + "." + kBlockParamNames[i], ts[i]});
  }
  out.push_back({"head", &head_});
  out.push_back({"inactive", &inactive_});
  return out;
}

std::vector<Tensor*> TrackerModel::parameter_tensors() {
  std::vector<Tensor*> out;
  for (auto& p : parameters()) out.push_back(p.tensor);
  return out;
}

std::size_t TrackerModel::parameter_count(const TrackerHyper& h) {
  const std::size_t C = h.channels, H = h.hidden;
  return h.layers * (4 * C * C + 2 * C * H + H + 10 * C) + C * C + C;
}

std::size_t TrackerModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.tensor->size();
  return n;
}

void TrackerModel::set_requires_grad(bool on) {
  for (auto& p : parameters()) p.tensor->set_requires_grad(on);
}

void TrackerModel::zero_grad() {
  for (auto& p : parameters()) p.tensor->zero_grad();
}

bool TrackerModel::operator==(const TrackerModel& other) const {
  if (!(hyper_ == other.hyper_)) return false;
  const auto a = parameters();
  const auto b = other.parameters();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || !(*a[i].tensor == *b[i].tensor)) return false;
  return true;
}

TrackerModel init_model(const TrackerHyper& hyper, std::uint64_t seed) {
  TrackerModel model(hyper);
  Rng rng(derive_seed(seed, stream::kModelInit));
  const double bound_c = 1.0 / std::sqrt(static_cast<double>(hyper.channels));
  const double bound_h = 1.0 / std::sqrt(static_cast<double>(hyper.hidden));
  for (auto& p : model.parameters()) {
    const std::string& n = p.name;
    const auto ends_with = [&n](std::string_view suffix) {
      return n.size() >= suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0;
    };
    if (ends_with("_gain")) {
      std::fill(p.tensor->values().begin(), p.tensor->values().end(), ends_with("identity_gain") ? kIdentityGainInit : 1.0);
    } else if (ends_with("_bias")) {
      // zero
    } else {
      const double bound = ends_with("ffn_out_weight") ? bound_h : bound_c;
      for (double& x : p.tensor->values()) x = rng.uniform(-bound, bound);
    }
  }
  return model;
}

BoundTracker::BoundTracker(TrackerModel& model, Tape& tape) : tape_(&tape), hyper_(model.hyper()) {
  for (DecoderBlock& b : model.blocks()) {
    std::vector<Var> vars;
    for (Tensor* t : block_tensors(b)) vars.push_back(tape.leaf(*t));
    block_vars_.push_back(std::move(vars));
  }
  head_ = tape.leaf(model.head());
  inactive_ = tape.leaf(model.inactive());
}

Var tracker_forward(const BoundTracker& m, Var refs, Var keys, Var identity) {
  const std::size_t C = m.hyper().channels;
  if (refs.value().rank() != 2 || refs.value().cols() != C || keys.value().rank() != 2 || keys.value().cols() != C) {
    throw DimensionError("tracker_forward: refs " + shape_to_string(refs.shape()) + " and keys " +
                         shape_to_string(keys.shape()) + " must both be ? x " + std::to_string(C));
  }
  if (identity.valid() && identity.shape() != refs.shape()) {
    throw DimensionError("tracker_forward: identity " + shape_to_string(identity.shape()) + " must match refs " +
                         shape_to_string(refs.shape()));
  }
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(C));
  Var x = refs;
  for (std::size_t l = 0; l < m.hyper().layers; ++l) {
    auto p = [&](BlockParam which) { return m.param(l, which); };
    Var q = add(matmul(x, p(kAttnQueryWeight)), p(kAttnQueryBias));
    Var k = add(matmul(keys, p(kAttnKeyWeight)), p(kAttnKeyBias));
    Var v = add(matmul(keys, p(kAttnValueWeight)), p(kAttnValueBias));
    Var a = add(matmul(attention(q, k, v, attn_scale), p(kAttnOutWeight)), p(kAttnOutBias));
    Var r = add(x, a);
    if (identity.valid()) r = add(r, mul(identity, p(kIdentityGain)));
    x = layer_norm(r, p(kNorm1Gain), p(kNorm1Bias), kNormEpsilon);
    Var h = add(matmul(gelu(add(matmul(x, p(kFfnInWeight)), p(kFfnInBias))), p(kFfnOutWeight)), p(kFfnOutBias));
    x = layer_norm(add(x, h), p(kNorm2Gain), p(kNorm2Bias), kNormEpsilon);
  }
  return matmul(x, m.head());
}

Tensor tracker_forward(const TrackerModel& model, const Tensor& refs, const Tensor& keys, const Tensor* identity) {
  Tape tape;
  // Binding copies parameter values; the model itself is never mutated.
  BoundTracker bound(const_cast<TrackerModel&>(model), tape);
  Var id = identity ? tape.constant(*identity) : Var();
  return tracker_forward(bound, tape.constant(refs), tape.constant(keys), id).value();
}

Propagation propagate(const TrackerModel& model, const Sequence& seq, const PropagateOptions& opts) {
  validate_sequence(seq);
  const std::size_t N = seq.slots(), C = seq.channels();
  if (C != model.hyper().channels) {
    throw DimensionError("propagate: sequence has " + std::to_string(C) + " channels, model expects " +
                         std::to_string(model.hyper().channels));
  }
  Propagation out;
  const QueryFrame& first = seq.frames[0];
  Tensor refs = first.queries;
  std::vector<bool> active(N, false);
  std::vector<int> tracks0(N, -1);
  for (std::size_t s = 0; s < N; ++s) {
    active[s] = first.visible(s);
    if (active[s]) tracks0[s] = static_cast<int>(s);
  }
  out.assignment.track_of_slot.push_back(std::move(tracks0));
  out.outputs.push_back(first.queries);

  TrackAssignment pre;
  if (opts.identity == IdentitySource::kHeuristic) pre = heuristic_track(seq, opts.heuristic);
  Rng noise_rng(derive_seed(opts.inference_noise_seed, stream::kInferenceNoise));

  int next_id = static_cast<int>(N);
  for (std::size_t t = 1; t < seq.length(); ++t) {
    const QueryFrame& frame = seq.frames[t];
    Tensor outputs;
    if (opts.identity == IdentitySource::kHeuristic) {
      Tensor identity = align_by_tracks(frame, pre.track_of_slot[t]).queries;
      if (opts.inference_noise != NoiseStrategy::kNone)
        identity = apply_noise(opts.inference_noise, identity, noise_rng).noised;
      outputs = tracker_forward(model, refs, frame.queries, &identity);
    } else {
      outputs = tracker_forward(model, refs, frame.queries, nullptr);
    }
    std::vector<int> tracks = match_to_references(outputs, active, frame, opts.reject_cost, next_id);
    for (std::size_t s = 0; s < N; ++s) {
      const int tr = tracks[s];
      if (tr >= 0 && static_cast<std::size_t>(tr) < N)
        std::copy_n(frame.queries.row(s).begin(), C, refs.row(static_cast<std::size_t>(tr)).begin());
    }
    out.assignment.track_of_slot.push_back(std::move(tracks));
    out.outputs.push_back(std::move(outputs));
  }
  return out;
}

}  // namespace dnt
