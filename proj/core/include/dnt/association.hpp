#pragma once

#include <vector>

#include "dnt/hungarian.hpp"
#include "dnt/tensor.hpp"
#include "dnt/world.hpp"

namespace dnt {

/// Per frame, the track id assigned to each observation slot (-1 for empty
/// slots). Track ids below N name canonical slots; ids >= N are tracks
/// spawned after frame 0.
struct TrackAssignment {
  std::vector<std::vector<int>> track_of_slot;

  bool operator==(const TrackAssignment&) const = default;
};

/// Entry (i, j) = <A_i, B_j> / (|A_i| |B_j|); 0 when either row is zero.
Tensor cosine_similarity_matrix(const Tensor& a, const Tensor& b);

struct HeuristicParams {
  double ema = 0.7;           // memory <- ema * memory + (1 - ema) * matched query
  double reject_cost = 1.5;   // matches costlier than this spawn a new track
};

/// Baseline association: Hungarian on 1 - cosine between per-track memory
/// vectors and the current visible queries. Frame-0 observations open
/// tracks whose ids equal their slot index.
TrackAssignment heuristic_track(const Sequence& seq, const HeuristicParams& params = {});

/// Maps an observation slot to a track id by matching current queries
/// against per-track reference rows; shared by the heuristic and learned
/// trackers. `refs` rows with index < N are track ids 0..N-1.
std::vector<int> match_to_references(const Tensor& refs, const std::vector<bool>& ref_active,
                                     const QueryFrame& frame, double reject_cost, int& next_track_id);

/// canonical[k] = slot of object k in frame 0, or -1 if k is absent there.
std::vector<int> canonical_slots(const Sequence& seq);

/// Reorders rows so slot s holds the object whose canonical slot is s.
/// Objects absent from this frame leave a zero row with identity -1.
/// Throws ContractError for an identity with no canonical slot.
QueryFrame align_to_ground_truth(const QueryFrame& frame, const std::vector<int>& canonical);

/// Reorders rows so slot s holds the observation assigned track id s
/// (s < N). Observations on spawned tracks (id >= N) are dropped.
QueryFrame align_by_tracks(const QueryFrame& frame, const std::vector<int>& track_of_slot);

}  // namespace dnt
