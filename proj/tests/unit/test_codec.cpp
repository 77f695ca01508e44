#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <limits>
#include <random>

#include "aam/codec.hpp"
#include "aam/error.hpp"

using namespace aam;

namespace {

// bitwise reflected CRC-32, polynomial 0xEDB88320
std::uint32_t ref_crc32(const std::uint8_t* p, std::size_t n) {
  std::uint32_t c = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    c ^= p[i];
    for (int k = 0; k < 8; ++k) c = (c >> 1) ^ (0xEDB88320u & (0u - (c & 1u)));
  }
  return ~c;
}

PhasorFrame random_frame(std::mt19937_64& rng) {
  PhasorFrame f;
  f.timestamp_us = rng();
  f.stream_id = static_cast<std::uint16_t>(rng());
  const auto n = std::uniform_int_distribution<int>(0, 64)(rng);
  for (int c = 0; c < n; ++c) {
    // arbitrary finite bit patterns; NaN would defeat operator==
    double a;
    do {
      a = std::bit_cast<double>(rng());
    } while (!std::isfinite(a));
    if (rng() % 2) a = std::uniform_real_distribution<double>(-180.0, 180.0)(rng);
    f.channels.push_back({a, static_cast<Quality>(rng() % 4)});
  }
  return f;
}

std::uint32_t le32(const std::uint8_t* p) { return p[0] | (p[1] << 8) | (p[2] << 16) | (std::uint32_t(p[3]) << 24); }

}  // namespace

TEST(Crc32, CheckValue) {
  const char* s = "123456789";
  EXPECT_EQ(ref_crc32(reinterpret_cast<const std::uint8_t*>(s), 9), 0xCBF43926u);
}

TEST(Codec, ByteLayout) {
  const PhasorFrame f{0x0102030405060708ULL, 0x0A0B, {{1.5, Quality::Suspect}}};
  const auto b = encode_frame(f);
  ASSERT_EQ(b.size(), kFrameHeaderSize + kChannelSize + 4);
  EXPECT_EQ(std::memcmp(b.data(), "AAMF", 4), 0);
  EXPECT_EQ(b[4], 1);
  EXPECT_EQ(b[5], 0x0B);
  EXPECT_EQ(b[6], 0x0A);
  for (int k = 0; k < 8; ++k) EXPECT_EQ(b[7 + k], 8 - k);
  EXPECT_EQ(b[15], 1);
  EXPECT_EQ(b[16], 0);
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(1.5);
  for (int k = 0; k < 8; ++k) EXPECT_EQ(b[17 + k], (bits >> (8 * k)) & 0xFF);
  EXPECT_EQ(b[25], 1);
  EXPECT_EQ(le32(b.data() + 26), ref_crc32(b.data(), 26));

  const auto msg = encode_message(f);
  EXPECT_EQ(le32(msg.data()), b.size());
  EXPECT_TRUE(std::equal(b.begin(), b.end(), msg.begin() + 4));
}

TEST(Codec, RandomFramesRoundtripBitExact) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 10000; ++i) {
    const auto f = random_frame(rng);
    const auto bytes = encode_frame(f);
    const auto g = decode_frame(bytes);
    ASSERT_EQ(g.timestamp_us, f.timestamp_us);
    ASSERT_EQ(g.stream_id, f.stream_id);
    ASSERT_EQ(g.channels.size(), f.channels.size());
    for (std::size_t c = 0; c < f.channels.size(); ++c) {
      ASSERT_EQ(std::bit_cast<std::uint64_t>(g.channels[c].angle), std::bit_cast<std::uint64_t>(f.channels[c].angle));
      ASSERT_EQ(g.channels[c].quality, f.channels[c].quality);
    }
    ASSERT_EQ(encode_frame(g), bytes);
  }
}

TEST(Codec, CorruptionIsRejected) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 500; ++i) {
    auto bytes = encode_frame(random_frame(rng));
    // flip one bit anywhere past the magic and version
    const std::size_t pos = 5 + rng() % (bytes.size() - 5);
    bytes[pos] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
    try {
      decode_frame(bytes);
      FAIL() << "accepted corrupted frame";
    } catch (const Error& e) {
      // a flip in the channel count surfaces as a length mismatch
      EXPECT_TRUE(e.code() == Errc::CrcMismatch || e.code() == Errc::MalformedFrame);
    }
  }
}

TEST(Codec, MalformedInput) {
  const PhasorFrame f{1, 0, {{0.0, Quality::Good}}};
  auto good = encode_frame(f);
  auto code = [](std::vector<std::uint8_t> b) {
    try {
      decode_frame(b);
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  EXPECT_EQ(code({}), Errc::MalformedFrame);
  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(code(bad), Errc::MalformedFrame);
  bad = good;
  bad[4] = 2;
  EXPECT_EQ(code(bad), Errc::MalformedFrame);
  bad = good;
  bad.pop_back();
  EXPECT_EQ(code(bad), Errc::MalformedFrame);
  // quality code 7 with a valid checksum
  bad = good;
  bad.resize(bad.size() - 4);
  bad.back() = 7;
  const auto crc = ref_crc32(bad.data(), bad.size());
  for (int k = 0; k < 4; ++k) bad.push_back(static_cast<std::uint8_t>(crc >> (8 * k)));
  EXPECT_EQ(code(bad), Errc::MalformedFrame);
}

TEST(FrameDecoder, ArbitrarySplitsAndCounting) {
  std::mt19937_64 rng(77);
  std::vector<PhasorFrame> sent;
  std::vector<std::uint8_t> stream;
  std::size_t corrupted = 0;
  for (int i = 0; i < 300; ++i) {
    auto f = random_frame(rng);
    auto msg = encode_message(f);
    if (i % 10 == 3) {
      msg.back() ^= 0x5A;  // checksum byte
      ++corrupted;
    } else {
      sent.push_back(f);
    }
    stream.insert(stream.end(), msg.begin(), msg.end());
  }
  FrameDecoder dec;
  std::vector<PhasorFrame> got;
  for (std::size_t off = 0; off < stream.size();) {
    const std::size_t n = std::min<std::size_t>(1 + rng() % 97, stream.size() - off);
    dec.push(std::span(stream.data() + off, n), got);
    off += n;
  }
  EXPECT_EQ(got, sent);
  EXPECT_EQ(dec.crc_errors(), corrupted);
  EXPECT_EQ(dec.decoded(), sent.size());
  EXPECT_EQ(dec.malformed(), 0u);
  EXPECT_EQ(dec.buffered(), 0u);
}

TEST(FrameDecoder, OversizeLengthDropsBuffer) {
  FrameDecoder dec(64);
  std::vector<PhasorFrame> got;
  const std::vector<std::uint8_t> junk{0xFF, 0xFF, 0xFF, 0x7F, 1, 2, 3};
  dec.push(junk, got);
  EXPECT_EQ(dec.malformed(), 1u);
  EXPECT_EQ(dec.buffered(), 0u);
  EXPECT_TRUE(got.empty());
}
