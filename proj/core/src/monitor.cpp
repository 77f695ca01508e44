#include "aam/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "aam/error.hpp"

namespace aam {

const char* to_string(Status s) {
  switch (s) {
    case Status::Normal: return "NORMAL";
    case Status::Warning: return "WARNING";
    case Status::Emergency: return "EMERGENCY";
    case Status::DataUnavailable: return "DATA_UNAVAILABLE";
  }
  return "DATA_UNAVAILABLE";
}

void MonitorConfig::validate() const {
  if (!(t_area > 0.0)) throw Error(Errc::InvalidArgument, "t_area must be positive");
  if (!(stale_limit > 0.0)) throw Error(Errc::InvalidArgument, "stale_limit must be positive");
  if (!(frame_rate > 0.0)) throw Error(Errc::InvalidArgument, "frame_rate must be positive");
  if (thresholds.warning_ope > thresholds.emergency_ope)
    throw Error(Errc::InvalidArgument, "warning threshold above emergency threshold");
}

namespace {

int severity(Status s) { return s == Status::Emergency ? 2 : s == Status::Warning ? 1 : 0; }

Status level_status(int level) {
  return level == 2 ? Status::Emergency : level == 1 ? Status::Warning : Status::Normal;
}

}  // namespace

Status instantaneous_class(double a, const ThresholdSet& t) {
  if (a >= t.emergency_ope) return Status::Emergency;
  if (a >= t.warning_ope) return Status::Warning;
  return Status::Normal;
}

AlertState classify_status(const AlertState& state, std::optional<double> area_angle,
                           std::uint64_t now_us, const MonitorConfig& config,
                           std::vector<Transition>* transitions) {
  AlertState s = state;
  s.last_timestamp_us = now_us;
  s.last_area_angle = area_angle;
  const Status before = state.status;

  if (!area_angle) {
    // freeze: no dwell accumulates while data is missing
    s.status = Status::DataUnavailable;
    s.above_since = {};
    s.below_since = {};
  } else {
    const int inst = severity(instantaneous_class(*area_angle, config.thresholds));
    const auto dwell_us = static_cast<std::uint64_t>(std::llround(config.t_area * 1e6));
    int floor = 0, ceiling = 2;
    for (int level = 1; level <= 2; ++level) {
      auto& above = s.above_since[static_cast<std::size_t>(level - 1)];
      auto& below = s.below_since[static_cast<std::size_t>(level - 1)];
      if (inst >= level) {
        below.reset();
        if (!above) above = now_us;
        if (now_us - *above >= dwell_us) floor = level;
      } else {
        above.reset();
        if (!below) below = now_us;
        if (now_us - *below >= dwell_us) ceiling = std::min(ceiling, level - 1);
      }
    }
    s.alarm = level_status(std::clamp(severity(s.alarm), floor, ceiling));
    s.status = s.alarm;
  }
  if (transitions && s.status != before) transitions->push_back({now_us, before, s.status});
  return s;
}

std::string status_log_header() { return "timestamp_us,area_angle_deg,status"; }

std::string status_log_line(const TickResult& tick) {
  char buf[96];
  if (tick.area_angle)
    std::snprintf(buf, sizeof buf, "%llu,%.6f,%s", static_cast<unsigned long long>(tick.timestamp_us),
                  *tick.area_angle, to_string(tick.status));
  else
    std::snprintf(buf, sizeof buf, "%llu,,%s", static_cast<unsigned long long>(tick.timestamp_us),
                  to_string(tick.status));
  return buf;
}

Monitor::Monitor(std::vector<std::string> boundary, MonitorConfig config, ChannelMap map)
    : boundary_(std::move(boundary)), config_(std::move(config)), map_(std::move(map)) {
  config_.validate();
  if (config_.weights.weights.size() != static_cast<Eigen::Index>(boundary_.size()))
    throw Error(Errc::DimensionMismatch, "weights do not match the boundary");
  std::set<std::string> bound;
  for (const auto& b : map_.bindings)
    if (!bound.insert(b.bus).second) throw Error(Errc::InvalidArgument, "bus " + b.bus + " bound twice");
  for (const auto& l : map_.lse) {
    magnitude_channels_.insert({l.stream, static_cast<std::uint16_t>(l.v_channel + 1)});
    magnitude_channels_.insert({l.stream, static_cast<std::uint16_t>(l.i_channel + 1)});
  }
}

bool Monitor::ingest_frame(const PhasorFrame& frame) {
  auto [it, fresh_stream] = last_ts_.emplace(frame.stream_id, frame.timestamp_us);
  if (!fresh_stream) {
    if (frame.timestamp_us <= it->second) {
      ++out_of_order_;
      return false;
    }
    it->second = frame.timestamp_us;
  }
  for (std::size_t c = 0; c < frame.channels.size(); ++c) {
    const auto& sample = frame.channels[c];
    if (sample.quality == Quality::Bad || sample.quality == Quality::Missing) continue;
    const Key key{frame.stream_id, static_cast<std::uint16_t>(c)};
    ChannelState& ch = channels_[key];
    if (!ch.has || magnitude_channels_.count(key)) {
      ch.value = sample.angle;
    } else {
      // jumps beyond half a turn are wraps
      ch.value += std::remainder(sample.angle - ch.raw, 360.0);
    }
    ch.raw = sample.angle;
    ch.has = true;
    ch.last_good_us = frame.timestamp_us;
  }
  return true;
}

bool Monitor::fresh(const Key& k, std::uint64_t now_us) const {
  auto it = channels_.find(k);
  if (it == channels_.end() || !it->second.has) return false;
  const auto limit = static_cast<std::uint64_t>(std::llround(config_.stale_limit * 1e6));
  return now_us < it->second.last_good_us || now_us - it->second.last_good_us <= limit;
}

TickResult Monitor::evaluate_tick(std::uint64_t now_us) {
  TickResult tick;
  tick.timestamp_us = now_us;

  std::map<std::string, double> measured;
  std::set<std::string> stale_bound;
  for (const auto& b : map_.bindings) {
    const Key k{b.stream, b.channel};
    if (fresh(k, now_us)) measured[b.bus] = channels_.at(k).value;
    else stale_bound.insert(b.bus);
  }
  std::map<std::string, LseInput> lse;
  for (const auto& l : map_.lse) {
    const Key va{l.stream, l.v_channel}, vm{l.stream, static_cast<std::uint16_t>(l.v_channel + 1)};
    const Key ia{l.stream, l.i_channel}, im{l.stream, static_cast<std::uint16_t>(l.i_channel + 1)};
    if (!(fresh(va, now_us) && fresh(vm, now_us) && fresh(ia, now_us) && fresh(im, now_us))) continue;
    lse[l.bus] = LseInput{{channels_.at(vm).value, channels_.at(va).value},
                          {channels_.at(im).value, channels_.at(ia).value}, l.z};
  }

  bool available = true;
  std::map<std::string, std::pair<double, AngleSource>> resolved;
  for (const auto& bus : boundary_) {
    BoundaryReading r;
    r.bus = bus;
    if (auto m = measured.find(bus); m != measured.end()) {
      r.angle = m->second;
      r.source = AngleSource::Measured;
    } else if (!stale_bound.count(bus)) {
      if (auto l = lse.find(bus); l != lse.end()) {
        r.angle = lse_neighbor_angle(l->second.v, l->second.i, l->second.z);
        r.source = AngleSource::Lse;
      } else if (const PacEntry* e = config_.pac.find(bus)) {
        if (auto ref = measured.find(e->reference); ref != measured.end()) {
          r.angle = ref->second + e->pac_deg;
          r.source = AngleSource::Pac;
        }
      }
    }
    if (!r.angle) available = false;
    tick.boundary.push_back(std::move(r));
  }

  std::optional<double> angle;
  if (available) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(boundary_.size()));
    for (std::size_t k = 0; k < boundary_.size(); ++k)
      theta[static_cast<Eigen::Index>(k)] = *tick.boundary[k].angle;
    angle = area_angle(config_.weights, theta);
  }
  alert_ = classify_status(alert_, angle, now_us, config_, &tick.transitions);
  tick.area_angle = angle;
  tick.status = alert_.status;
  return tick;
}

std::vector<TickResult> TickScheduler::push(const PhasorFrame& frame) {
  std::vector<TickResult> out;
  if (pending_ && frame.timestamp_us > *pending_) {
    out.push_back(monitor_->evaluate_tick(*pending_));
    pending_.reset();
  }
  if (monitor_->ingest_frame(frame) && !pending_) pending_ = frame.timestamp_us;
  return out;
}

std::vector<TickResult> TickScheduler::flush() {
  std::vector<TickResult> out;
  if (pending_) out.push_back(monitor_->evaluate_tick(*pending_));
  pending_.reset();
  return out;
}

}  // namespace aam
