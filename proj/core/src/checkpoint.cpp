#include "dnt/checkpoint.hpp"

#include "dnt/binary_io.hpp"
#include "dnt/error.hpp"

namespace dnt {

std::uint64_t fingerprint(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<char> encode_checkpoint(const TrackerModel& model, const CheckpointMeta& meta) {
  const TrackerHyper& h = model.hyper();
  const std::vector<NamedConstParam> params = model.parameters();
  binio::Writer w;
  w.bytes("DNT1");
  w.u32(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(h.layers));
  w.u32(static_cast<std::uint32_t>(h.channels));
  w.u32(static_cast<std::uint32_t>(h.hidden));
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const NamedConstParam& p : params) {
    w.u16(static_cast<std::uint16_t>(p.name.size()));
    w.bytes(p.name);
    w.u8(static_cast<std::uint8_t>(p.tensor->rank()));
    for (std::size_t d : p.tensor->shape()) w.u32(static_cast<std::uint32_t>(d));
    for (double v : p.tensor->values()) w.f64(v);
  }
  w.u64(meta.config_fingerprint);
  w.u64(meta.step);
  return w.buffer();
}

TrackerModel decode_checkpoint(const std::vector<char>& bytes, CheckpointMeta* meta) {
  binio::Reader r(bytes);
  if (r.remaining() < 4) throw FormatError("truncated file while reading magic", 0);
  if (r.bytes(4, "magic") != "DNT1") throw FormatError("bad magic, expected DNT1", 0);
  const std::uint64_t version_at = r.offset();
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported DNT1 version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")",
                      version_at);
  }
  const std::uint64_t header_at = r.offset();
  TrackerHyper h;
  h.layers = r.u32("L");
  h.channels = r.u32("C");
  h.hidden = r.u32("H");
  if (h.layers == 0 || h.channels == 0 || h.hidden == 0) {
    throw FormatError("inconsistent header L=" + std::to_string(h.layers) + " C=" + std::to_string(h.channels) +
                          " H=" + std::to_string(h.hidden),
                      header_at);
  }
  TrackerModel model(h);
  std::vector<NamedParam> params = model.parameters();
  const std::uint64_t count_at = r.offset();
  const std::uint32_t count = r.u32("parameter count");
  if (count != params.size()) {
    throw FormatError("parameter count " + std::to_string(count) + " does not match " +
                          std::to_string(params.size()) + " implied by L, C, H",
                      count_at);
  }
  for (NamedParam& p : params) {
    const std::uint64_t name_at = r.offset();
    const std::uint16_t len = r.u16("name length of " + p.name);
    const std::string name = r.bytes(len, "name of " + p.name);
    if (name != p.name) throw FormatError("expected parameter " + p.name + ", found '" + name + "'", name_at);
    const std::uint64_t shape_at = r.offset();
    const std::uint8_t ndim = r.u8(p.name + " rank");
    std::vector<std::size_t> shape(ndim);
    for (std::size_t& d : shape) d = r.u32(p.name + " shape");
    if (shape != p.tensor->shape()) {
      throw FormatError(p.name + ": shape " + shape_to_string(shape) + " does not match expected " +
                            shape_to_string(p.tensor->shape()),
                        shape_at);
    }
    for (double& v : p.tensor->values()) v = r.f64(p.name + " values");
  }
  CheckpointMeta m;
  m.config_fingerprint = r.u64("config fingerprint");
  m.step = r.u64("step count");
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint trailer", r.offset());
  if (meta) *meta = m;
  return model;
}

void save_checkpoint(const TrackerModel& model, const CheckpointMeta& meta, const std::string& path) {
  binio::write_file(path, encode_checkpoint(model, meta));
}

TrackerModel load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  try {
    return decode_checkpoint(binio::read_file(path), meta);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.detail(), e.offset());
  }
}

}  // namespace dnt
