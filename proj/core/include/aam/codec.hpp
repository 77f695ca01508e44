#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aam {

enum class Quality : std::uint8_t { Good = 0, Suspect = 1, Bad = 2, Missing = 3 };

const char* to_string(Quality q);

struct ChannelSample {
  double angle = 0.0;  // degrees
  Quality quality = Quality::Good;
  bool operator==(const ChannelSample&) const = default;
};

struct PhasorFrame {
  std::uint64_t timestamp_us = 0;
  std::uint16_t stream_id = 0;
  std::vector<ChannelSample> channels;
  bool operator==(const PhasorFrame&) const = default;
};

// magic "AAMF" | u8 version | u16 stream | u64 timestamp_us | u16 nchan |
// nchan x (f64 angle, u8 quality) | u32 crc32 over everything before it.
// All integers and floats little-endian.
inline constexpr std::uint8_t kFrameVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 4 + 1 + 2 + 8 + 2;
inline constexpr std::size_t kChannelSize = 9;

std::vector<std::uint8_t> encode_frame(const PhasorFrame& frame);

// Throws Error{MalformedFrame} or Error{CrcMismatch}.
PhasorFrame decode_frame(std::span<const std::uint8_t> msg);

// Adds the u32 length prefix used on TCP.
std::vector<std::uint8_t> encode_message(const PhasorFrame& frame);

// Incremental reader for a length-prefixed byte stream.
class FrameDecoder {
 public:
  explicit FrameDecoder(std::size_t max_message = 1 << 20) : max_message_(max_message) {}

  // Feeds bytes; complete frames are appended to `out`.
  void push(std::span<const std::uint8_t> bytes, std::vector<PhasorFrame>& out);

  std::uint64_t decoded() const { return decoded_; }
  std::uint64_t crc_errors() const { return crc_errors_; }
  std::uint64_t malformed() const { return malformed_; }
  std::size_t buffered() const { return buf_.size(); }

 private:
  std::size_t max_message_;
  std::vector<std::uint8_t> buf_;
  std::uint64_t decoded_ = 0, crc_errors_ = 0, malformed_ = 0;
};

}  // namespace aam
