#include <filesystem>

#include <gtest/gtest.h>

#include "dnt/error.hpp"
#include "dnt/sequence_io.hpp"

using namespace dnt;

namespace {

Sequence sample() {
  WorldConfig w;
  w.frames = 5;
  w.seed = 21;
  return gen_sequence(w);
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dnt_test_" + name)).string();
}

}  // namespace

TEST(SequenceIo, RoundTrip) {
  const Sequence seq = sample();
  const std::string path = temp_path("roundtrip.seq");
  save_sequence(seq, path);
  EXPECT_EQ(load_sequence(path), seq);
  std::filesystem::remove(path);
}

TEST(SequenceIo, BadMagic) {
  auto bytes = encode_sequence(sample());
  bytes[0] = 'X';
  try {
    decode_sequence(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
}

TEST(SequenceIo, VersionMismatch) {
  auto bytes = encode_sequence(sample());
  bytes[4] = 2;
  try {
    decode_sequence(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 4u);
    EXPECT_NE(std::string(e.what()).find("version 2"), std::string::npos);
  }
}

TEST(SequenceIo, TruncatedMidFrameNamesFrame) {
  const Sequence seq = sample();
  auto bytes = encode_sequence(seq);
  const std::size_t header = 4 + 6 * 4 + 8 * seq.num_objects;
  const std::size_t frame = seq.slots() * seq.channels() * 8 + seq.slots() * 4;
  bytes.resize(header + 2 * frame + 100);  // inside frame 2's queries
  try {
    decode_sequence(bytes);
    FAIL();
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("frame 2"), std::string::npos) << what;
    EXPECT_EQ(e.offset(), header + 2 * frame + 96);
  }
}

TEST(SequenceIo, TrailingBytesRejected) {
  auto bytes = encode_sequence(sample());
  bytes.push_back(0);
  EXPECT_THROW(decode_sequence(bytes), FormatError);
}

TEST(SequenceIo, MissingFileIsIoError) {
  EXPECT_THROW(load_sequence(temp_path("missing.seq")), IoError);
}
