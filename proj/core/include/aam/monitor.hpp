#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aam/area.hpp"
#include "aam/codec.hpp"
#include "aam/pac.hpp"
#include "aam/study.hpp"

namespace aam {

enum class Status { Normal, Warning, Emergency, DataUnavailable };

const char* to_string(Status s);

// An angle channel carrying the phase angle of `bus`.
struct ChannelBinding {
  std::uint16_t stream = 0;
  std::uint16_t channel = 0;
  std::string bus;
};

// Single-line estimate of `bus` from a neighbour's voltage and line current.
// Angles are on v_channel / i_channel, magnitudes on the channel right after.
struct LseBinding {
  std::string bus;
  std::uint16_t stream = 0;
  std::uint16_t v_channel = 0;
  std::uint16_t i_channel = 0;
  std::complex<double> z;
};

struct ChannelMap {
  std::vector<ChannelBinding> bindings;
  std::vector<LseBinding> lse;
};

struct MonitorConfig {
  ThresholdSet thresholds;
  double t_area = 5.0;       // seconds
  double frame_rate = 30.0;  // Hz
  double stale_limit = 1.0;  // seconds
  BoundaryWeights weights;
  PacTable pac;

  void validate() const;
};

struct Transition {
  std::uint64_t timestamp_us = 0;
  Status from = Status::Normal;
  Status to = Status::Normal;
};

// Dwell is tracked per threshold level: the reported class rises to a level
// once the angle has stayed at or above it for t_area, and falls below a
// level once the angle has stayed below it for t_area.
struct AlertState {
  Status status = Status::Normal;  // reported
  Status alarm = Status::Normal;   // last confirmed alarm class, kept through data outages
  // start of the current run at/above and below each level, [0] warning, [1] emergency
  std::array<std::optional<std::uint64_t>, 2> above_since;
  std::array<std::optional<std::uint64_t>, 2> below_since;
  std::optional<double> last_area_angle;
  std::uint64_t last_timestamp_us = 0;
};

// Instantaneous class of an angle against the operation-frame thresholds.
Status instantaneous_class(double area_angle, const ThresholdSet& t);

// An empty angle means the data is unavailable. Any change of the reported
// status is appended to `transitions` when given.
AlertState classify_status(const AlertState& state, std::optional<double> area_angle,
                           std::uint64_t now_us, const MonitorConfig& config,
                           std::vector<Transition>* transitions = nullptr);

struct BoundaryReading {
  std::string bus;
  std::optional<double> angle;  // degrees
  AngleSource source = AngleSource::Stale;
};

struct TickResult {
  std::uint64_t timestamp_us = 0;
  std::optional<double> area_angle;
  Status status = Status::Normal;
  std::vector<Transition> transitions;
  std::vector<BoundaryReading> boundary;
};

// `timestamp_us,area_angle_deg,status`
std::string status_log_header();
std::string status_log_line(const TickResult& tick);

class Monitor {
 public:
  Monitor(std::vector<std::string> boundary, MonitorConfig config, ChannelMap map);

  // Returns false when the frame is dropped as out of order.
  bool ingest_frame(const PhasorFrame& frame);
  TickResult evaluate_tick(std::uint64_t now_us);

  const AlertState& alert() const { return alert_; }
  const MonitorConfig& config() const { return config_; }
  std::uint64_t out_of_order() const { return out_of_order_; }

 private:
  struct ChannelState {
    bool has = false;
    double raw = 0.0;
    double value = 0.0;  // unwrapped for angle channels
    std::uint64_t last_good_us = 0;
  };
  using Key = std::pair<std::uint16_t, std::uint16_t>;

  bool fresh(const Key& k, std::uint64_t now_us) const;

  std::vector<std::string> boundary_;
  MonitorConfig config_;
  ChannelMap map_;
  std::set<Key> magnitude_channels_;
  std::map<Key, ChannelState> channels_;
  std::map<std::uint16_t, std::uint64_t> last_ts_;
  AlertState alert_;
  std::uint64_t out_of_order_ = 0;
};

// Ticks once per distinct timestamp: a tick for time T runs when the first
// frame newer than T arrives, or on flush().
class TickScheduler {
 public:
  explicit TickScheduler(Monitor& monitor) : monitor_(&monitor) {}
  std::vector<TickResult> push(const PhasorFrame& frame);
  std::vector<TickResult> flush();

 private:
  Monitor* monitor_;
  std::optional<std::uint64_t> pending_;
};

}  // namespace aam
