#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dnt/association.hpp"
#include "dnt/noise.hpp"
#include "dnt/ops.hpp"
#include "dnt/tensor.hpp"
#include "dnt/world.hpp"

namespace dnt {

struct TrackerHyper {
  std::size_t layers = 1;   // L
  std::size_t channels = 16;  // C
  std::size_t hidden = 32;    // H

  bool operator==(const TrackerHyper&) const = default;
};

/// One cross-attention decoder block. Field order here is irrelevant;
/// parameter enumeration sorts by name.
struct DecoderBlock {
  Tensor attn_query_weight, attn_query_bias;
  Tensor attn_key_weight, attn_key_bias;
  Tensor attn_value_weight, attn_value_bias;
  Tensor attn_out_weight, attn_out_bias;
  Tensor identity_gain;  // per-channel weight on the pre-aligned current-frame query
  Tensor norm1_gain, norm1_bias;
  Tensor ffn_in_weight, ffn_in_bias;    // C x H, H
  Tensor ffn_out_weight, ffn_out_bias;  // H x C, C
  Tensor norm2_gain, norm2_bias;
};

struct NamedParam {
  std::string name;
  Tensor* tensor;
};
struct NamedConstParam {
  std::string name;
  const Tensor* tensor;
};

/// The referring tracker: L cross-attention decoder blocks followed by a
/// C x C output head, plus the learned "inactive" embedding used as the
/// extra logit column during training.
class TrackerModel {
 public:
  TrackerModel() = default;
  explicit TrackerModel(const TrackerHyper& hyper);  // all-zero parameters

  const TrackerHyper& hyper() const noexcept { return hyper_; }
  std::vector<DecoderBlock>& blocks() noexcept { return blocks_; }
  const std::vector<DecoderBlock>& blocks() const noexcept { return blocks_; }
  Tensor& head() noexcept { return head_; }
  const Tensor& head() const noexcept { return head_; }
  Tensor& inactive() noexcept { return inactive_; }  // 1 x C
  const Tensor& inactive() const noexcept { return inactive_; }

  /// Stable order: block-major ("block0.", "block1.", ...), names sorted
  /// within each block, then the global "head" and "inactive".
  std::vector<NamedParam> parameters();
  std::vector<NamedConstParam> parameters() const;
  std::vector<Tensor*> parameter_tensors();

  /// L * (4C^2 + 2CH + H + 10C) + C^2 + C.
  std::size_t parameter_count() const;
  static std::size_t parameter_count(const TrackerHyper& h);

  void set_requires_grad(bool on);
  void zero_grad();

  /// Bitwise equality of hyperparameters and all parameter values.
  bool operator==(const TrackerModel& other) const;

 private:
  TrackerHyper hyper_;
  std::vector<DecoderBlock> blocks_;
  Tensor head_;
  Tensor inactive_;
};

/// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)] (fan_in = C for
/// every C-input projection and the head, H for the FFN output), biases 0,
/// norm gains 1, identity gains 0.1. Deterministic in seed.
TrackerModel init_model(const TrackerHyper& hyper, std::uint64_t seed);

/// Model parameters bound as leaves of one tape.
class BoundTracker {
 public:
  BoundTracker(TrackerModel& model, Tape& tape);
  Tape& tape() const noexcept { return *tape_; }
  const TrackerHyper& hyper() const noexcept { return hyper_; }
  Var param(std::size_t block, std::size_t index) const { return block_vars_[block][index]; }
  Var head() const noexcept { return head_; }
  Var inactive() const noexcept { return inactive_; }

 private:
  Tape* tape_;
  TrackerHyper hyper_;
  std::vector<std::vector<Var>> block_vars_;
  Var head_, inactive_;
};

/// x = refs; per block:
///   x = LN1(x + CrossAttn(q = x Wq, k = keys Wk, v = keys Wv) Wo + identity * g)
///   x = LN2(x + FFN(x))
/// output = x * head.
/// `identity` (N x C, row-aligned with refs) may be invalid (no identity term).
/// Attention is over the rows of `keys`, so the output is invariant to any
/// permutation of keys and equivariant to a joint permutation of refs and identity.
Var tracker_forward(const BoundTracker& model, Var refs, Var keys, Var identity = Var());

/// Value-only convenience wrapper.
Tensor tracker_forward(const TrackerModel& model, const Tensor& refs, const Tensor& keys,
                       const Tensor* identity = nullptr);

/// Where the identity input comes from during propagation.
enum class IdentitySource {
  kHeuristic,  // current queries pre-aligned by heuristic_track
  kNone,       // no identity term
};

struct PropagateOptions {
  double reject_cost = 1.5;
  HeuristicParams heuristic{};
  IdentitySource identity = IdentitySource::kHeuristic;
  /// Noise applied to the identity input at t > 0 (shortcut probing).
  NoiseStrategy inference_noise = NoiseStrategy::kNone;
  std::uint64_t inference_noise_seed = 0;
};

struct Propagation {
  TrackAssignment assignment;
  std::vector<Tensor> outputs;  // per frame, N x C (frame 0: the raw queries)
};

/// Frame-by-frame inference. Frame 0: references are the raw queries and
/// slot i gets track id i. Later frames: outputs = tracker_forward(refs,
/// keys = raw queries, identity), observations matched to output slots by
/// Hungarian on 1 - cosine (rejection as heuristic_track). A matched slot's
/// next reference is the observation it matched (the reference stays in
/// query space); unmatched slots keep theirs.
Propagation propagate(const TrackerModel& model, const Sequence& seq, const PropagateOptions& opts = {});

}  // namespace dnt
