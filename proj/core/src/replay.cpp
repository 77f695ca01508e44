#include "aam/replay.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "aam/error.hpp"
#include "aam/io.hpp"

namespace aam {

using nlohmann::json;

void Scenario::validate() const {
  if (!(frame_rate > 0.0)) throw Error(Errc::InvalidArgument, "frame_rate must be positive");
  if (!(duration >= 0.0)) throw Error(Errc::InvalidArgument, "duration must be non-negative");
  if (!(noise_std >= 0.0)) throw Error(Errc::InvalidArgument, "noise_std must be non-negative");
  if (!(lag >= 0.0)) throw Error(Errc::InvalidArgument, "lag must be non-negative");
  if (injections.size() != static_cast<Eigen::Index>(model.bus_count()))
    throw Error(Errc::DimensionMismatch, "scenario injections do not match the model");
  for (const auto& e : events)
    if (e.t < 0.0 || e.t > duration) throw Error(Errc::InvalidArgument, "event time outside the scenario");
}

Scenario parse_scenario(const std::string& text, const std::filesystem::path& dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::Io, std::string("bad scenario JSON: ") + e.what());
  }
  try {
    Scenario s;
    s.model = io::load_model(dir / j.at("model").get<std::string>());
    s.area = io::load_area(dir / j.at("area").get<std::string>());
    std::unordered_map<std::string, double> inj;
    if (j.contains("injections"))
      for (const auto& [k, v] : j["injections"].items()) inj[k] = v.get<double>();
    s.injections = s.model.injections(inj);
    s.stream_id = j.value<std::uint16_t>("stream", 0);
    if (j.contains("channels")) {
      const json& c = j["channels"];
      s.channels = io::parse_channels(c.is_string() ? io::read_text(dir / c.get<std::string>()) : c.dump());
    }
    s.duration = j.at("duration").get<double>();
    s.frame_rate = j.value("frame_rate", 30.0);
    s.noise_std = j.value("noise_std", 0.0);
    s.lag = j.value("lag", 0.5);
    s.seed = j.value<std::uint64_t>("seed", 1);
    s.start_time_us = j.value<std::uint64_t>("start_time_us", s.start_time_us);
    for (const auto& e : j.value("events", json::array())) {
      ScenarioEvent ev;
      ev.t = e.at("t").get<double>();
      const auto action = e.at("action").get<std::string>();
      if (action == "branch_outage") {
        ev.kind = ScenarioEvent::Kind::BranchOutage;
        for (const auto& b : e.at("branches")) ev.branches.push_back(b.get<std::string>());
      } else if (action == "injection_step") {
        ev.kind = ScenarioEvent::Kind::InjectionStep;
        ev.bus = e.at("bus").get<std::string>();
        ev.delta_mw = e.at("delta_mw").get<double>();
      } else {
        throw Error(Errc::InvalidArgument, "unknown scenario action " + action);
      }
      s.events.push_back(std::move(ev));
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(Errc::Io, std::string("bad scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(io::read_text(path), path.parent_path());
}

double wrap_degrees(double deg) { return deg - 360.0 * std::floor((deg + 180.0) / 360.0); }

std::vector<PhasorFrame> synthesize_scenario(const Scenario& sc) {
  sc.validate();
  const NetworkModel& model = sc.model;
  std::vector<ChannelBinding> channels = sc.channels;
  if (channels.empty()) {
    for (std::size_t k = 0; k < sc.area.boundary.size(); ++k)
      channels.push_back({sc.stream_id, static_cast<std::uint16_t>(k), sc.area.boundary[k]});
  }
  std::erase_if(channels, [&](const ChannelBinding& c) { return c.stream != sc.stream_id; });
  std::size_t nchan = 0;
  std::vector<std::size_t> bus_of;
  for (const auto& c : channels) {
    nchan = std::max<std::size_t>(nchan, c.channel + 1u);
    bus_of.push_back(model.bus_index(c.bus));
  }

  std::vector<ScenarioEvent> events = sc.events;
  std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  BranchSet out;
  Vector inj = sc.injections;
  auto target = [&] {
    const Vector theta = solve_dc(model, inj, out);
    std::vector<double> t(channels.size());
    for (std::size_t c = 0; c < channels.size(); ++c)
      t[c] = theta[static_cast<Eigen::Index>(bus_of[c])] * 180.0 / std::numbers::pi;
    return t;
  };

  std::mt19937_64 rng(sc.seed);
  std::normal_distribution<double> noise(0.0, sc.noise_std > 0.0 ? sc.noise_std : 1.0);
  const double dt = 1.0 / sc.frame_rate;
  const double alpha = sc.lag > 0.0 ? 1.0 - std::exp(-dt / sc.lag) : 1.0;
  const auto nframes = static_cast<std::size_t>(std::floor(sc.duration * sc.frame_rate + 1e-9)) + 1;

  std::vector<PhasorFrame> frames;
  frames.reserve(nframes);
  std::size_t next_event = 0;
  std::vector<double> goal, state;
  for (std::size_t k = 0; k < nframes; ++k) {
    const double t = static_cast<double>(k) * dt;
    bool changed = goal.empty();
    while (next_event < events.size() && events[next_event].t <= t + 1e-12) {
      const auto& e = events[next_event++];
      if (e.kind == ScenarioEvent::Kind::BranchOutage) {
        for (const auto& id : e.branches) out.insert(model.branch_index(id));
      } else {
        inj[static_cast<Eigen::Index>(model.bus_index(e.bus))] += e.delta_mw / model.base_mva();
      }
      changed = true;
    }
    if (changed) goal = target();
    if (state.empty()) {
      state = goal;
    } else {
      for (std::size_t c = 0; c < state.size(); ++c) {
        if (alpha >= 1.0) state[c] = goal[c];
        else state[c] += (goal[c] - state[c]) * alpha;
      }
    }

    PhasorFrame f;
    f.stream_id = sc.stream_id;
    f.timestamp_us = sc.start_time_us + static_cast<std::uint64_t>(std::llround(static_cast<double>(k) * 1e6 / sc.frame_rate));
    f.channels.assign(nchan, ChannelSample{0.0, Quality::Missing});
    for (std::size_t c = 0; c < channels.size(); ++c) {
      double a = state[c];
      if (sc.noise_std > 0.0) a += noise(rng);
      f.channels[channels[c].channel] = ChannelSample{wrap_degrees(a), Quality::Good};
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

std::string frames_to_csv(const std::vector<PhasorFrame>& frames) {
  std::size_t nchan = 0;
  for (const auto& f : frames) nchan = std::max(nchan, f.channels.size());
  std::string out = "timestamp_us";
  for (std::size_t c = 0; c < nchan; ++c) out += ",ch" + std::to_string(c) + ",ch" + std::to_string(c) + "_q";
  out += "\n";
  char buf[64];
  for (const auto& f : frames) {
    out += std::to_string(f.timestamp_us);
    for (std::size_t c = 0; c < nchan; ++c) {
      if (c < f.channels.size()) {
        std::snprintf(buf, sizeof buf, ",%.17g,%d", f.channels[c].angle, static_cast<int>(f.channels[c].quality));
        out += buf;
      } else {
        out += ",0,3";
      }
    }
    out += "\n";
  }
  return out;
}

namespace {

template <class T>
bool parse_num(std::string_view s, T& v) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  return ec == std::errc() && p == end;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

CsvFrames frames_from_csv(const std::string& text, std::uint16_t stream_id) {
  CsvFrames out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) return out;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.empty() || header[0] != "timestamp_us" || header.size() % 2 != 1)
    throw Error(Errc::MalformedRow, "bad replay header");
  const std::size_t nchan = (header.size() - 1) / 2;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line);
    PhasorFrame f;
    f.stream_id = stream_id;
    bool ok = cols.size() == header.size() && parse_num(cols[0], f.timestamp_us);
    for (std::size_t c = 0; ok && c < nchan; ++c) {
      ChannelSample s;
      int q = 0;
      ok = parse_num(cols[1 + 2 * c], s.angle) && parse_num(cols[2 + 2 * c], q) && q >= 0 && q <= 3;
      s.quality = static_cast<Quality>(q);
      f.channels.push_back(s);
    }
    if (!ok) {
      ++out.malformed;
      continue;
    }
    out.frames.push_back(std::move(f));
  }
  return out;
}

ReplayStats replay_frames(const std::vector<PhasorFrame>& input, double speed,
                          const std::function<void(const PhasorFrame&)>& sink) {
  if (!(speed > 0.0)) throw Error(Errc::InvalidArgument, "speed must be positive");
  std::vector<PhasorFrame> frames = input;
  std::stable_sort(frames.begin(), frames.end(),
                   [](const auto& a, const auto& b) { return a.timestamp_us < b.timestamp_us; });
  ReplayStats st;
  if (frames.empty()) return st;
  const auto t0 = frames.front().timestamp_us;
  const auto wall0 = std::chrono::steady_clock::now();
  for (const auto& f : frames) {
    if (std::isfinite(speed)) {
      const double offset_s = static_cast<double>(f.timestamp_us - t0) * 1e-6 / speed;
      std::this_thread::sleep_until(wall0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                std::chrono::duration<double>(offset_s)));
    }
    sink(f);
    ++st.delivered;
  }
  return st;
}

ReplayStats replay_file(const std::filesystem::path& path, double speed,
                        const std::function<void(const PhasorFrame&)>& sink) {
  const CsvFrames csv = frames_from_csv(io::read_text(path));
  ReplayStats st = replay_frames(csv.frames, speed, sink);
  st.malformed = csv.malformed;
  return st;
}

ReplayStats serve_stream(const std::vector<PhasorFrame>& frames, StreamServer& server, double speed) {
  return replay_frames(frames, speed, [&](const PhasorFrame& f) { server.publish(f); });
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& text, const std::string& default_host) {
  const auto pos = text.rfind(':');
  std::string host = pos == std::string::npos ? default_host : text.substr(0, pos);
  const std::string port_s = pos == std::string::npos ? text : text.substr(pos + 1);
  if (host.empty()) host = default_host;
  unsigned port = 0;
  if (!parse_num(std::string_view(port_s), port) || port > 65535)
    throw Error(Errc::InvalidArgument, "bad endpoint " + text);
  return {host, static_cast<std::uint16_t>(port)};
}

}  // namespace aam
