#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "aam/area.hpp"
#include "aam/codec.hpp"
#include "aam/monitor.hpp"
#include "aam/netmodel.hpp"

namespace aam {

struct ScenarioEvent {
  enum class Kind { BranchOutage, InjectionStep };
  double t = 0.0;  // seconds from start
  Kind kind = Kind::BranchOutage;
  std::vector<std::string> branches;  // BranchOutage
  std::string bus;                    // InjectionStep
  double delta_mw = 0.0;              // InjectionStep
};

struct Scenario {
  NetworkModel model;
  AreaDefinition area;
  std::vector<ChannelBinding> channels;  // default: boundary buses in order
  Vector injections;                     // per unit, before any event
  std::vector<ScenarioEvent> events;
  double duration = 0.0;    // seconds
  double frame_rate = 30.0;  // Hz
  double noise_std = 0.0;   // degrees
  double lag = 0.5;         // first-order time constant, seconds; 0 = none
  std::uint64_t seed = 1;
  std::uint64_t start_time_us = 1'700'000'000'000'000ULL;
  std::uint16_t stream_id = 0;

  void validate() const;
};

Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json, const std::filesystem::path& base_dir);

std::vector<PhasorFrame> synthesize_scenario(const Scenario& scenario);

// Wraps an angle in degrees into [-180, 180).
double wrap_degrees(double deg);

// `timestamp_us,ch0,ch0_q,ch1,ch1_q,...`
std::string frames_to_csv(const std::vector<PhasorFrame>& frames);

struct CsvFrames {
  std::vector<PhasorFrame> frames;
  std::size_t malformed = 0;
};

CsvFrames frames_from_csv(const std::string& text, std::uint16_t stream_id = 0);

struct ReplayStats {
  std::size_t delivered = 0;
  std::size_t malformed = 0;
};

inline constexpr double kAsFastAsPossible = std::numeric_limits<double>::infinity();

// Emits frames in timestamp order, spaced by their timestamp gaps / speed.
ReplayStats replay_frames(const std::vector<PhasorFrame>& frames, double speed,
                          const std::function<void(const PhasorFrame&)>& sink);
ReplayStats replay_file(const std::filesystem::path& path, double speed,
                        const std::function<void(const PhasorFrame&)>& sink);

// Broadcasts length-prefixed frames to every connected TCP client. Each
// client has a bounded queue; when it is full the oldest message is dropped.
class StreamServer {
 public:
  StreamServer(const std::string& host, std::uint16_t port, std::size_t queue_capacity = 1024);
  ~StreamServer();
  StreamServer(const StreamServer&) = delete;
  StreamServer& operator=(const StreamServer&) = delete;

  std::uint16_t port() const;
  void publish(const PhasorFrame& frame);
  std::size_t client_count() const;
  bool wait_for_clients(std::size_t n, std::chrono::milliseconds timeout) const;
  // Closes every client once its queue is written out, then waits for that.
  bool finish(std::chrono::milliseconds timeout);
  void stop();
  std::uint64_t dropped() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Publishes frames on the schedule of replay_frames.
ReplayStats serve_stream(const std::vector<PhasorFrame>& frames, StreamServer& server, double speed);

struct StreamStats {
  std::uint64_t frames = 0;
  std::uint64_t crc_errors = 0;
  std::uint64_t malformed = 0;
};

// Connects (retrying until `connect_timeout`) and reads until the server
// closes the connection.
StreamStats read_stream(const std::string& host, std::uint16_t port,
                        const std::function<void(const PhasorFrame&)>& on_frame,
                        std::chrono::milliseconds connect_timeout = std::chrono::seconds(5));

// Parses "host:port" or ":port".
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text,
                                                     const std::string& default_host = "127.0.0.1");

}  // namespace aam
