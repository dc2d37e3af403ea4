#include "dnt/sequence_io.hpp"

#include <fstream>
#include <iterator>

#include "dnt/binary_io.hpp"
#include "dnt/error.hpp"

namespace dnt {

namespace binio {

std::vector<char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, const std::vector<char>& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace binio

std::vector<char> encode_sequence(const Sequence& seq) {
  validate_sequence(seq);
  binio::Writer w;
  w.bytes("SEQ1");
  w.u32(kSequenceVersion);
  w.u32(static_cast<std::uint32_t>(seq.length()));
  w.u32(static_cast<std::uint32_t>(seq.slots()));
  w.u32(static_cast<std::uint32_t>(seq.channels()));
  w.u32(static_cast<std::uint32_t>(seq.num_objects));
  w.u32(static_cast<std::uint32_t>(seq.position_channels));
  for (double f : seq.occlusion_fraction) w.f64(f);
  for (const QueryFrame& f : seq.frames) {
    for (double v : f.queries.values()) w.f64(v);
    for (int id : f.identity) w.i32(id);
  }
  return w.buffer();
}

Sequence decode_sequence(const std::vector<char>& bytes) {
  binio::Reader r(bytes);
  if (r.remaining() < 4) throw FormatError("truncated file while reading magic", 0);
  if (r.bytes(4, "magic") != "SEQ1") throw FormatError("bad magic, expected SEQ1", 0);
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kSequenceVersion) {
    throw FormatError("unsupported SEQ1 version " + std::to_string(version) + " (expected " +
                          std::to_string(kSequenceVersion) + ")",
                      version_at);
  }
  const std::uint64_t header_at = r.offset();
  const std::uint32_t T = r.u32("T"), N = r.u32("N"), C = r.u32("C"), K = r.u32("K"), P = r.u32("P");
  if (T == 0 || N == 0 || C == 0 || K > N || P >= C) {
    throw FormatError("inconsistent header T=" + std::to_string(T) + " N=" + std::to_string(N) +
                          " C=" + std::to_string(C) + " K=" + std::to_string(K) + " P=" + std::to_string(P),
                      header_at);
  }
  Sequence seq;
  seq.num_objects = K;
  seq.position_channels = P;
  seq.occlusion_fraction.resize(K);
  for (std::uint32_t k = 0; k < K; ++k) seq.occlusion_fraction[k] = r.f64("occlusion_fraction[" + std::to_string(k) + "]");
  seq.frames.reserve(T);
  for (std::uint32_t t = 0; t < T; ++t) {
    const std::string where = "frame " + std::to_string(t);
    QueryFrame f{Tensor({N, C}, 0.0), std::vector<int>(N, -1)};
    for (double& v : f.queries.values()) v = r.f64(where + " queries");
    for (std::uint32_t i = 0; i < N; ++i) {
      const std::uint64_t at = r.offset();
      const std::int32_t id = r.i32(where + " identity");
      if (id < -1 || id >= static_cast<std::int32_t>(K)) {
        throw FormatError(where + ": identity " + std::to_string(id) + " out of range", at);
      }
      f.identity[i] = id;
    }
    seq.frames.push_back(std::move(f));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last frame", r.offset());
  return seq;
}

void save_sequence(const Sequence& seq, const std::string& path) { binio::write_file(path, encode_sequence(seq)); }

Sequence load_sequence(const std::string& path) {
  try {
    return decode_sequence(binio::read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.detail(), e.offset());
  }
}

}  // namespace dnt
