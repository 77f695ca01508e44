#include "aam/codec.hpp"

#include <bit>
#include <cstring>

#include <boost/crc.hpp>
#include <boost/endian/conversion.hpp>

#include "aam/error.hpp"

namespace aam {

namespace {

template <class T>
void put(std::vector<std::uint8_t>& out, T v) {
  boost::endian::native_to_little_inplace(v);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <class T>
T get(const std::uint8_t* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return boost::endian::little_to_native(v);
}

std::uint32_t crc32(const std::uint8_t* p, std::size_t n) {
  boost::crc_32_type crc;
  crc.process_bytes(p, n);
  return crc.checksum();
}

}  // namespace

const char* to_string(Quality q) {
  switch (q) {
    case Quality::Good: return "GOOD";
    case Quality::Suspect: return "SUSPECT";
    case Quality::Bad: return "BAD";
    case Quality::Missing: return "MISSING";
  }
  return "MISSING";
}

std::vector<std::uint8_t> encode_frame(const PhasorFrame& frame) {
  if (frame.channels.size() > 0xFFFF) throw Error(Errc::InvalidArgument, "too many channels");
  std::vector<std::uint8_t> out;
  out.reserve(kFrameHeaderSize + frame.channels.size() * kChannelSize + 4);
  out.insert(out.end(), {'A', 'A', 'M', 'F'});
  out.push_back(kFrameVersion);
  put<std::uint16_t>(out, frame.stream_id);
  put<std::uint64_t>(out, frame.timestamp_us);
  put<std::uint16_t>(out, static_cast<std::uint16_t>(frame.channels.size()));
  for (const auto& c : frame.channels) {
    put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(c.angle));
    out.push_back(static_cast<std::uint8_t>(c.quality));
  }
  put<std::uint32_t>(out, crc32(out.data(), out.size()));
  return out;
}

PhasorFrame decode_frame(std::span<const std::uint8_t> msg) {
  if (msg.size() < kFrameHeaderSize + 4) throw Error(Errc::MalformedFrame, "short frame");
  const std::uint8_t* p = msg.data();
  if (std::memcmp(p, "AAMF", 4) != 0) throw Error(Errc::MalformedFrame, "bad magic");
  if (p[4] != kFrameVersion) throw Error(Errc::MalformedFrame, "unsupported version");
  const auto nchan = get<std::uint16_t>(p + 15);
  const std::size_t body = kFrameHeaderSize + nchan * kChannelSize;
  if (msg.size() != body + 4) throw Error(Errc::MalformedFrame, "length does not match channel count");
  if (crc32(p, body) != get<std::uint32_t>(p + body)) throw Error(Errc::CrcMismatch, "crc32");

  PhasorFrame f;
  f.stream_id = get<std::uint16_t>(p + 5);
  f.timestamp_us = get<std::uint64_t>(p + 7);
  f.channels.resize(nchan);
  for (std::size_t c = 0; c < nchan; ++c) {
    const std::uint8_t* q = p + kFrameHeaderSize + c * kChannelSize;
    f.channels[c].angle = std::bit_cast<double>(get<std::uint64_t>(q));
    if (q[8] > 3) throw Error(Errc::MalformedFrame, "bad quality code");
    f.channels[c].quality = static_cast<Quality>(q[8]);
  }
  return f;
}

std::vector<std::uint8_t> encode_message(const PhasorFrame& frame) {
  const auto body = encode_frame(frame);
  std::vector<std::uint8_t> out;
  out.reserve(body.size() + 4);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

void FrameDecoder::push(std::span<const std::uint8_t> bytes, std::vector<PhasorFrame>& out) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  std::size_t off = 0;
  while (buf_.size() - off >= 4) {
    const auto len = get<std::uint32_t>(buf_.data() + off);
    if (len > max_message_) {
      // the stream is out of sync; nothing after this point can be trusted
      ++malformed_;
      buf_.clear();
      return;
    }
    if (buf_.size() - off - 4 < len) break;
    try {
      out.push_back(decode_frame({buf_.data() + off + 4, len}));
      ++decoded_;
    } catch (const Error& e) {
      if (e.code() == Errc::CrcMismatch) ++crc_errors_;
      else ++malformed_;
    }
    off += 4 + len;
  }
  buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(off));
}

}  // namespace aam
