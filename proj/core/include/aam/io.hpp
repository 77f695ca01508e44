#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aam/area.hpp"
#include "aam/mitigation.hpp"
#include "aam/monitor.hpp"
#include "aam/netmodel.hpp"
#include "aam/pac.hpp"
#include "aam/study.hpp"
#include "aam/update.hpp"

namespace aam::io {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

NetworkModel parse_model(const std::string& json);
NetworkModel load_model(const std::filesystem::path& path);
std::string model_to_json(const NetworkModel& model);

AreaDefinition parse_area(const std::string& json);
AreaDefinition load_area(const std::filesystem::path& path);

// {"base": {bus: pu}, "direction": {bus: pu}}
TransferPattern parse_pattern(const std::string& json, const NetworkModel& model);
TransferPattern load_pattern(const std::filesystem::path& path, const NetworkModel& model);

// {"removed": [branch ids]}
TopologyChange parse_change(const std::string& json, const NetworkModel& model);
TopologyChange load_change(const std::filesystem::path& path, const NetworkModel& model);

std::string thresholds_to_json(const ThresholdSet& t);
ThresholdSet parse_thresholds(const std::string& json);

std::string pac_to_json(const PacTable& t);
PacTable parse_pac(const std::string& json);

// [{stream, channel, bus}]
std::vector<ChannelBinding> parse_channels(const std::string& json);
// [{bus, stream, v_channel, i_channel, z: {r, x}}]
std::vector<LseBinding> parse_lse(const std::string& json);

std::string plan_to_json(const MitigationPlan& plan);

// id,value
std::string angles_csv(const NetworkModel& model, const Vector& theta_rad);
std::string flows_csv(const NetworkModel& model, const std::vector<std::optional<double>>& flows);
std::string weights_csv(const Area& area, const BoundaryWeights& w);
// contingency_id,p_mod,theta_mod,islanding
std::string sweep_csv(const std::vector<ContingencyResult>& results);

// Everything the real-time side needs, read from one JSON file whose path
// entries are resolved against the file's directory.
struct MonitorSetup {
  NetworkModel model;
  AreaDefinition area;
  TransferPattern pattern;
  Vector injections;  // current operating point, per unit
  MonitorConfig config;
  ChannelMap channels;
  std::uint16_t stream_id = 0;
};

MonitorSetup load_monitor_setup(const std::filesystem::path& path);

}  // namespace aam::io
