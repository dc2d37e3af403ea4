#include "dnt/association.hpp"

#include <algorithm>
#include <cmath>

#include "dnt/error.hpp"

namespace dnt {

Tensor cosine_similarity_matrix(const Tensor& a, const Tensor& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.cols() != b.cols()) {
    throw DimensionError("cosine_similarity_matrix: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                         shape_to_string(b.shape()));
  }
  const std::size_t ra = a.dim(0), rb = b.dim(0), c = a.cols();
  auto norms = [c](const Tensor& t) {
    std::vector<double> n(t.dim(0));
    for (std::size_t i = 0; i < n.size(); ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < c; ++k) s += t.at(i, k) * t.at(i, k);
      n[i] = std::sqrt(s);
    }
    return n;
  };
  const std::vector<double> na = norms(a), nb = norms(b);
  Tensor out({ra, rb}, 0.0);
  for (std::size_t i = 0; i < ra; ++i) {
    for (std::size_t j = 0; j < rb; ++j) {
      if (na[i] == 0.0 || nb[j] == 0.0) continue;
      double dot = 0.0;
      for (std::size_t k = 0; k < c; ++k) dot += a.at(i, k) * b.at(j, k);
      out.at(i, j) = std::clamp(dot / (na[i] * nb[j]), -1.0, 1.0);
    }
  }
  return out;
}

std::vector<int> match_to_references(const Tensor& refs, const std::vector<bool>& ref_active,
                                     const QueryFrame& frame, double reject_cost, int& next_track_id) {
  const std::size_t N = frame.slots();
  std::vector<int> tracks(N, -1);
  std::vector<std::size_t> obs_slots, ref_rows;
  for (std::size_t s = 0; s < N; ++s)
    if (frame.visible(s)) obs_slots.push_back(s);
  for (std::size_t r = 0; r < refs.dim(0); ++r)
    if (ref_active[r]) ref_rows.push_back(r);
  if (obs_slots.empty()) return tracks;

  if (!ref_rows.empty()) {
    const std::size_t C = refs.cols();
    Tensor rsub({ref_rows.size(), C}), osub({obs_slots.size(), C});
    for (std::size_t i = 0; i < ref_rows.size(); ++i)
      std::copy_n(refs.row(ref_rows[i]).begin(), C, rsub.row(i).begin());
    for (std::size_t j = 0; j < obs_slots.size(); ++j)
      std::copy_n(frame.queries.row(obs_slots[j]).begin(), C, osub.row(j).begin());
    Tensor cost = cosine_similarity_matrix(rsub, osub);
    for (double& x : cost.values()) x = 1.0 - x;
    const Assignment a = hungarian(cost);
    for (std::size_t i = 0; i < ref_rows.size(); ++i) {
      const int j = a.mapping[i];
      if (j < 0 || cost.at(i, static_cast<std::size_t>(j)) > reject_cost) continue;
      tracks[obs_slots[static_cast<std::size_t>(j)]] = static_cast<int>(ref_rows[i]);
    }
  }
  for (std::size_t s : obs_slots)
    if (tracks[s] < 0) tracks[s] = next_track_id++;
  return tracks;
}

TrackAssignment heuristic_track(const Sequence& seq, const HeuristicParams& params) {
  validate_sequence(seq);
  const std::size_t N = seq.slots(), C = seq.channels();
  TrackAssignment out;
  out.track_of_slot.reserve(seq.length());

  // Rows 0..N-1 are canonical tracks; spawned tracks append rows.
  std::vector<std::vector<double>> memory;
  std::vector<bool> active;
  int next_id = static_cast<int>(N);

  const QueryFrame& first = seq.frames[0];
  std::vector<int> tracks0(N, -1);
  for (std::size_t s = 0; s < N; ++s) {
    const auto row = first.queries.row(s);
    memory.emplace_back(row.begin(), row.end());
    active.push_back(first.visible(s));
    if (first.visible(s)) tracks0[s] = static_cast<int>(s);
  }
  out.track_of_slot.push_back(std::move(tracks0));

  for (std::size_t t = 1; t < seq.length(); ++t) {
    const QueryFrame& frame = seq.frames[t];
    Tensor refs({memory.size(), C});
    for (std::size_t r = 0; r < memory.size(); ++r) std::copy(memory[r].begin(), memory[r].end(), refs.row(r).begin());
    const int before = next_id;
    std::vector<int> tracks = match_to_references(refs, active, frame, params.reject_cost, next_id);
    for (int id = before; id < next_id; ++id) {
      memory.emplace_back(C, 0.0);
      active.push_back(true);
    }
    for (std::size_t s = 0; s < N; ++s) {
      if (tracks[s] < 0) continue;
      const auto q = frame.queries.row(s);
      std::vector<double>& mem = memory[static_cast<std::size_t>(tracks[s])];
      if (tracks[s] >= before) {
        std::copy(q.begin(), q.end(), mem.begin());
      } else {
        for (std::size_t c = 0; c < C; ++c) mem[c] = params.ema * mem[c] + (1.0 - params.ema) * q[c];
      }
    }
    out.track_of_slot.push_back(std::move(tracks));
  }
  return out;
}

std::vector<int> canonical_slots(const Sequence& seq) {
  validate_sequence(seq);
  std::vector<int> canonical(seq.num_objects, -1);
  const QueryFrame& first = seq.frames[0];
  for (std::size_t s = 0; s < first.slots(); ++s)
    if (first.visible(s)) canonical[static_cast<std::size_t>(first.identity[s])] = static_cast<int>(s);
  return canonical;
}

QueryFrame align_to_ground_truth(const QueryFrame& frame, const std::vector<int>& canonical) {
  const std::size_t N = frame.slots(), C = frame.queries.cols();
  QueryFrame out{Tensor({N, C}, 0.0), std::vector<int>(N, -1)};
  for (std::size_t s = 0; s < N; ++s) {
    const int id = frame.identity[s];
    if (id < 0) continue;
    if (static_cast<std::size_t>(id) >= canonical.size() || canonical[static_cast<std::size_t>(id)] < 0) {
      throw ContractError("align_to_ground_truth: identity " + std::to_string(id) + " has no canonical slot");
    }
    const std::size_t dst = static_cast<std::size_t>(canonical[static_cast<std::size_t>(id)]);
    if (dst >= N) throw ContractError("align_to_ground_truth: canonical slot out of range");
    out.identity[dst] = id;
    std::copy_n(frame.queries.row(s).begin(), C, out.queries.row(dst).begin());
  }
  return out;
}

QueryFrame align_by_tracks(const QueryFrame& frame, const std::vector<int>& track_of_slot) {
  const std::size_t N = frame.slots(), C = frame.queries.cols();
  QueryFrame out{Tensor({N, C}, 0.0), std::vector<int>(N, -1)};
  for (std::size_t s = 0; s < N; ++s) {
    const int tr = track_of_slot[s];
    if (tr < 0 || static_cast<std::size_t>(tr) >= N) continue;
    out.identity[static_cast<std::size_t>(tr)] = frame.identity[s];
    std::copy_n(frame.queries.row(s).begin(), C, out.queries.row(static_cast<std::size_t>(tr)).begin());
  }
  return out;
}

}  // namespace dnt
