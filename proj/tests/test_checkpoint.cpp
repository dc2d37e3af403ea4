#include <filesystem>

#include <gtest/gtest.h>

#include "dnt/checkpoint.hpp"
#include "dnt/error.hpp"

using namespace dnt;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dnt_test_" + name)).string();
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  const TrackerModel m = init_model({2, 8, 12}, 17);
  const CheckpointMeta meta{fingerprint("{\"steps\": 3}"), 3};
  const std::string path = temp_path("roundtrip.dnt");
  save_checkpoint(m, meta, path);
  CheckpointMeta back;
  EXPECT_EQ(load_checkpoint(path, &back), m);
  EXPECT_EQ(back, meta);
  EXPECT_EQ(encode_checkpoint(decode_checkpoint(encode_checkpoint(m, meta)), meta), encode_checkpoint(m, meta));
  std::filesystem::remove(path);
}

TEST(Checkpoint, HeaderLayout) {
  const auto bytes = encode_checkpoint(init_model({1, 4, 3}, 0), {});
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DNT1");
  EXPECT_EQ(bytes[4], 1);  // version, little-endian
  EXPECT_EQ(bytes[8], 1);  // L
  EXPECT_EQ(bytes[12], 4); // C
  EXPECT_EQ(bytes[16], 3); // H
  EXPECT_EQ(bytes[20], 19); // 17 block tensors + head + inactive
}

TEST(Checkpoint, TruncationNamesOffset) {
  const auto full = encode_checkpoint(init_model({1, 4, 3}, 0), {});
  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, std::size_t{30}, full.size() / 2, full.size() - 1}) {
    std::vector<char> bytes(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(cut));
    try {
      decode_checkpoint(bytes);
      FAIL() << "cut " << cut;
    } catch (const FormatError& e) {
      EXPECT_LE(e.offset(), cut);
      EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
    }
  }
}

TEST(Checkpoint, VersionBumpIsExplicit) {
  auto bytes = encode_checkpoint(init_model({1, 4, 3}, 0), {});
  bytes[4] = 2;
  try {
    decode_checkpoint(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported DNT1 version 2"), std::string::npos);
    EXPECT_EQ(e.offset(), 4u);
  }
}

TEST(Checkpoint, BadMagicAndTrailingBytes) {
  auto bytes = encode_checkpoint(init_model({1, 4, 3}, 0), {});
  auto extra = bytes;
  extra.push_back(0);
  EXPECT_THROW(decode_checkpoint(extra), FormatError);
  bytes[3] = '2';
  EXPECT_THROW(decode_checkpoint(bytes), FormatError);
}

TEST(Checkpoint, LoadErrorsNameThePath) {
  const std::string path = temp_path("short.dnt");
  const auto full = encode_checkpoint(init_model({1, 4, 3}, 0), {});
  {
    std::vector<char> cut(full.begin(), full.begin() + 40);
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fwrite(cut.data(), 1, cut.size(), f);
    std::fclose(f);
  }
  try {
    load_checkpoint(path);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find(path), std::string::npos);
  }
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), IoError);
}

TEST(Checkpoint, Fingerprint) {
  EXPECT_EQ(fingerprint(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fingerprint("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_NE(fingerprint("{\"seed\": 1}"), fingerprint("{\"seed\": 2}"));
}
