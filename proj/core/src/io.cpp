#include "aam/io.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "aam/error.hpp"

namespace aam::io {

using nlohmann::json;

namespace {

// ids may be written as strings or integers
std::string id_of(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  throw Error(Errc::InvalidModel, "identifier must be a string or an integer");
}

std::vector<std::string> ids_of(const json& j) {
  std::vector<std::string> out;
  if (j.is_null()) return out;
  for (const auto& x : j) out.push_back(id_of(x));
  return out;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(Errc::Io, std::string("bad JSON: ") + e.what());
  }
}

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(Errc::Io, std::string("bad document: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// A field that is either inline JSON or a path to a JSON file.
json inline_or_file(const json& j, const std::filesystem::path& dir) {
  if (j.is_string()) return parse(read_text(dir / j.get<std::string>()));
  return j;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
}

NetworkModel parse_model(const std::string& text) {
  const json j = parse(text);
  return guarded([&] {
    std::vector<Bus> buses;
    for (const auto& b : j.at("buses")) {
      Bus bus;
      bus.id = id_of(b.at("id"));
      bus.name = b.value("name", bus.id);
      bus.kv = b.value("kv", 0.0);
      buses.push_back(std::move(bus));
    }
    std::vector<Branch> branches;
    for (const auto& b : j.at("branches")) {
      Branch br;
      br.id = id_of(b.at("id"));
      br.from = id_of(b.at("from"));
      br.to = id_of(b.at("to"));
      br.b = b.at("b").get<double>();
      if (b.contains("limit") && !b["limit"].is_null()) br.limit = b["limit"].get<double>();
      br.equivalenced = b.value("equivalenced", false);
      branches.push_back(std::move(br));
    }
    return NetworkModel(std::move(buses), std::move(branches), id_of(j.at("slack")),
                        j.value("base_mva", 100.0));
  });
}

NetworkModel load_model(const std::filesystem::path& path) { return parse_model(read_text(path)); }

std::string model_to_json(const NetworkModel& model) {
  json j;
  j["slack"] = model.slack_id();
  j["base_mva"] = model.base_mva();
  j["buses"] = json::array();
  for (const auto& b : model.buses()) j["buses"].push_back({{"id", b.id}, {"name", b.name}, {"kv", b.kv}});
  j["branches"] = json::array();
  for (const auto& b : model.branches()) {
    json e = {{"id", b.id}, {"from", b.from}, {"to", b.to}, {"b", b.b}, {"equivalenced", b.equivalenced}};
    if (b.limit) e["limit"] = *b.limit;
    j["branches"].push_back(std::move(e));
  }
  return j.dump(1);
}

AreaDefinition parse_area(const std::string& text) {
  const json j = parse(text);
  return guarded([&] {
    AreaDefinition a;
    a.boundary = ids_of(j.at("boundary"));
    a.sending = ids_of(j.at("sending"));
    a.receiving = ids_of(j.value("receiving", json()));
    a.interior = ids_of(j.value("interior", json()));
    return a;
  });
}

AreaDefinition load_area(const std::filesystem::path& path) { return parse_area(read_text(path)); }

namespace {

Vector bus_vector(const json& j, const NetworkModel& model) {
  std::unordered_map<std::string, double> m;
  if (j.is_object())
    for (const auto& [k, v] : j.items()) m[k] += v.get<double>();
  return model.injections(m);
}

}  // namespace

TransferPattern parse_pattern(const std::string& text, const NetworkModel& model) {
  const json j = parse(text);
  return guarded([&] {
    TransferPattern p;
    p.base = bus_vector(j.value("base", json::object()), model);
    p.direction = bus_vector(j.at("direction"), model);
    p.validate(model);
    return p;
  });
}

TransferPattern load_pattern(const std::filesystem::path& path, const NetworkModel& model) {
  return parse_pattern(read_text(path), model);
}

TopologyChange parse_change(const std::string& text, const NetworkModel& model) {
  const json j = parse(text);
  return guarded([&] {
    const json& ids = j.contains("removed") ? j.at("removed") : j.at("removed_branches");
    return TopologyChange{model.branch_set(ids_of(ids))};
  });
}

TopologyChange load_change(const std::filesystem::path& path, const NetworkModel& model) {
  return parse_change(read_text(path), model);
}

std::string thresholds_to_json(const ThresholdSet& t) {
  json j = {{"warning_model", t.warning_model}, {"emergency_model", t.emergency_model},
            {"delta_com", t.delta_com},         {"warning_ope", t.warning_ope},
            {"emergency_ope", t.emergency_ope}};
  return j.dump(1);
}

namespace {

ThresholdSet thresholds_from(const json& j) {
  return guarded([&] {
    ThresholdSet t = compensate_thresholds(j.at("warning_model").get<double>(),
                                           j.at("emergency_model").get<double>(),
                                           j.value("delta_com", 0.0));
    if (j.contains("warning_ope")) t.warning_ope = j["warning_ope"].get<double>();
    if (j.contains("emergency_ope")) t.emergency_ope = j["emergency_ope"].get<double>();
    return t;
  });
}

PacTable pac_from(const json& j) {
  return guarded([&] {
    PacTable t;
    for (const auto& e : j)
      t.entries.push_back({id_of(e.at("target")), id_of(e.at("reference")), e.at("pac_deg").get<double>()});
    return t;
  });
}

std::vector<ChannelBinding> channels_from(const json& j) {
  return guarded([&] {
    std::vector<ChannelBinding> out;
    for (const auto& e : j)
      out.push_back({e.value<std::uint16_t>("stream", 0), e.at("channel").get<std::uint16_t>(), id_of(e.at("bus"))});
    return out;
  });
}

std::vector<LseBinding> lse_from(const json& j) {
  return guarded([&] {
    std::vector<LseBinding> out;
    for (const auto& e : j) {
      LseBinding l;
      l.bus = id_of(e.at("bus"));
      l.stream = e.value<std::uint16_t>("stream", 0);
      l.v_channel = e.at("v_channel").get<std::uint16_t>();
      l.i_channel = e.at("i_channel").get<std::uint16_t>();
      l.z = {e.at("z").value("r", 0.0), e.at("z").value("x", 0.0)};
      out.push_back(std::move(l));
    }
    return out;
  });
}

}  // namespace

ThresholdSet parse_thresholds(const std::string& text) { return thresholds_from(parse(text)); }

std::string pac_to_json(const PacTable& t) {
  json j = json::array();
  for (const auto& e : t.entries) j.push_back({{"target", e.target}, {"reference", e.reference}, {"pac_deg", e.pac_deg}});
  return j.dump(1);
}

PacTable parse_pac(const std::string& text) { return pac_from(parse(text)); }

std::vector<ChannelBinding> parse_channels(const std::string& text) { return channels_from(parse(text)); }

std::vector<LseBinding> parse_lse(const std::string& text) { return lse_from(parse(text)); }

std::string plan_to_json(const MitigationPlan& plan) {
  json j;
  j["total_shed_mw"] = plan.total_shed_mw;
  j["predicted_delta_theta"] = plan.predicted_delta_theta;
  j["per_bus"] = json::array();
  for (const auto& s : plan.per_bus) j["per_bus"].push_back({{"bus", s.bus}, {"shed_mw", s.shed_mw}});
  return j.dump(1);
}

std::string angles_csv(const NetworkModel& model, const Vector& theta_rad) {
  std::string out = "id,value\n";
  for (std::size_t i = 0; i < model.bus_count(); ++i)
    out += model.buses()[i].id + "," + fmt(theta_rad[static_cast<Eigen::Index>(i)] * 180.0 / std::numbers::pi) + "\n";
  return out;
}

std::string flows_csv(const NetworkModel& model, const std::vector<std::optional<double>>& flows) {
  std::string out = "id,value\n";
  for (std::size_t k = 0; k < model.branch_count(); ++k)
    out += model.branches()[k].id + "," + (flows[k] ? fmt(*flows[k]) : std::string()) + "\n";
  return out;
}

std::string weights_csv(const Area& area, const BoundaryWeights& w) {
  std::string out = "bus_id,weight\n";
  const auto& ids = area.definition().boundary;
  for (std::size_t k = 0; k < ids.size(); ++k)
    out += ids[k] + "," + fmt(w.weights[static_cast<Eigen::Index>(k)]) + "\n";
  return out;
}

std::string sweep_csv(const std::vector<ContingencyResult>& results) {
  std::string out = "contingency_id,p_mod,theta_mod,islanding\n";
  for (const auto& r : results) {
    out += r.contingency_id + ",";
    out += r.islanding ? std::string() : fmt(r.p_mod);
    out += ",";
    out += r.islanding ? std::string() : fmt(r.theta_mod);
    out += r.islanding ? ",true\n" : ",false\n";
  }
  return out;
}

MonitorSetup load_monitor_setup(const std::filesystem::path& path) {
  const json j = parse(read_text(path));
  const auto dir = path.parent_path();
  return guarded([&] {
    MonitorSetup s{load_model(dir / j.at("model").get<std::string>()),
                   load_area(dir / j.at("area").get<std::string>()),
                   {}, {}, {}, {}, j.value<std::uint16_t>("stream", 0)};
    const Area area(s.model, s.area);
    if (j.contains("pattern")) {
      s.pattern = load_pattern(dir / j["pattern"].get<std::string>(), s.model);
    } else {
      s.pattern.base = Vector::Zero(static_cast<Eigen::Index>(s.model.bus_count()));
      s.pattern.direction = s.pattern.base;
    }
    s.injections = j.contains("injections") ? bus_vector(inline_or_file(j["injections"], dir), s.model)
                                            : s.pattern.base;
    s.config.thresholds = thresholds_from(inline_or_file(j.at("thresholds"), dir));
    s.config.t_area = j.value("t_area", 5.0);
    s.config.frame_rate = j.value("frame_rate", 30.0);
    s.config.stale_limit = j.value("stale_limit", 1.0);
    s.config.weights = area_weights(s.model, area);
    s.channels.bindings = channels_from(inline_or_file(j.at("channels"), dir));
    if (j.contains("lse")) s.channels.lse = lse_from(inline_or_file(j["lse"], dir));
    if (j.contains("pac")) {
      s.config.pac = pac_from(inline_or_file(j["pac"], dir));
    } else {
      std::set<std::string> pmus;
      for (const auto& b : s.channels.bindings) pmus.insert(b.bus);
      s.config.pac = compute_pac_table(s.model, area, pmus, s.injections);
    }
    s.config.validate();
    return s;
  });
}

}  // namespace aam::io
