#include "aam/service.hpp"

#include <charconv>
#include <limits>

#include <nlohmann/json.hpp>

#include "aam/error.hpp"

namespace aam {

using nlohmann::json;

namespace {

json angle_or_null(const std::optional<double>& a) { return a ? json(*a) : json(nullptr); }

json thresholds_obj(const ThresholdSet& t) {
  return {{"warning_model", t.warning_model}, {"emergency_model", t.emergency_model},
          {"delta_com", t.delta_com},         {"warning_ope", t.warning_ope},
          {"emergency_ope", t.emergency_ope}};
}

json transitions_arr(const std::vector<Transition>& ts) {
  json a = json::array();
  for (const auto& t : ts)
    a.push_back({{"timestamp", t.timestamp_us}, {"from", to_string(t.from)}, {"to", to_string(t.to)}});
  return a;
}

json event_obj(const StreamEvent& e) {
  return {{"type", "tick"},
          {"timestamp", e.timestamp_us},
          {"area_angle", angle_or_null(e.area_angle)},
          {"status", to_string(e.status)},
          {"transitions", transitions_arr(e.transitions)}};
}

json snapshot_obj(const Snapshot& s) {
  json b = json::object();
  for (const auto& r : s.boundary) b[r.bus] = {{"angle", angle_or_null(r.angle)}, {"source", to_string(r.source)}};
  return {{"type", "snapshot"},
          {"timestamp", s.timestamp_us},
          {"area_angle", angle_or_null(s.area_angle)},
          {"status", to_string(s.status)},
          {"thresholds", thresholds_obj(s.thresholds)},
          {"boundary_angles", b}};
}

HttpResponse error_response(int status, std::string_view code, const std::string& msg) {
  return {status, json{{"error", code}, {"message", msg}}.dump()};
}

std::optional<std::uint64_t> query_u64(std::string_view query, std::string_view key) {
  std::size_t pos = 0;
  while (pos <= query.size()) {
    const auto amp = query.find('&', pos);
    const auto part = query.substr(pos, amp == std::string_view::npos ? std::string_view::npos : amp - pos);
    const auto eq = part.find('=');
    if (eq != std::string_view::npos && part.substr(0, eq) == key) {
      std::uint64_t v = 0;
      const auto val = part.substr(eq + 1);
      auto [p, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
      if (ec != std::errc() || p != val.data() + val.size())
        throw Error(Errc::InvalidArgument, "bad query value for " + std::string(key));
      return v;
    }
    if (amp == std::string_view::npos) break;
    pos = amp + 1;
  }
  return std::nullopt;
}

}  // namespace

std::string snapshot_json(const Snapshot& s) { return snapshot_obj(s).dump(); }
std::string event_json(const StreamEvent& e) { return event_obj(e).dump(); }

void Subscription::push(StreamEvent e) {
  {
    std::lock_guard lk(mu_);
    if (pending_.size() >= max_pending_) {
      StreamEvent& back = pending_.back();
      back.timestamp_us = e.timestamp_us;
      back.area_angle = e.area_angle;
      back.status = e.status;
      back.transitions.insert(back.transitions.end(), e.transitions.begin(), e.transitions.end());
      ++coalesced_;
    } else {
      pending_.push_back(std::move(e));
    }
    // called under the lock so that set_notify({}) is a hard barrier
    if (notify_) notify_();
  }
  cv_.notify_all();
}

std::optional<StreamEvent> Subscription::try_pop() {
  std::lock_guard lk(mu_);
  if (pending_.empty()) return std::nullopt;
  StreamEvent e = std::move(pending_.front());
  pending_.pop_front();
  return e;
}

std::optional<StreamEvent> Subscription::pop_for(std::chrono::milliseconds timeout) {
  std::unique_lock lk(mu_);
  if (!cv_.wait_for(lk, timeout, [&] { return !pending_.empty(); })) return std::nullopt;
  StreamEvent e = std::move(pending_.front());
  pending_.pop_front();
  return e;
}

std::uint64_t Subscription::coalesced() const {
  std::lock_guard lk(mu_);
  return coalesced_;
}

void Subscription::set_notify(std::function<void()> fn) {
  std::lock_guard lk(mu_);
  notify_ = std::move(fn);
}

LiveState::LiveState(ThresholdSet thresholds, std::size_t history_capacity)
    : thresholds_(thresholds), history_(std::max<std::size_t>(history_capacity, 1)) {}

void LiveState::publish(const TickResult& tick) {
  auto snap = std::make_shared<Snapshot>();
  snap->timestamp_us = tick.timestamp_us;
  snap->area_angle = tick.area_angle;
  snap->status = tick.status;
  snap->thresholds = thresholds_;
  snap->boundary = tick.boundary;
  const StreamEvent ev{tick.timestamp_us, tick.area_angle, tick.status, tick.transitions};

  std::vector<std::shared_ptr<Subscription>> subs;
  {
    std::lock_guard lk(mu_);
    snapshot_ = std::move(snap);
    history_.push_back(ev);
    subs = subs_;
  }
  for (const auto& s : subs) s->push(ev);
}

std::shared_ptr<const Snapshot> LiveState::snapshot() const {
  std::lock_guard lk(mu_);
  return snapshot_;
}

std::vector<StreamEvent> LiveState::history(std::uint64_t from_us, std::uint64_t to_us) const {
  std::lock_guard lk(mu_);
  std::vector<StreamEvent> out;
  for (const auto& e : history_)
    if (e.timestamp_us >= from_us && e.timestamp_us <= to_us) out.push_back(e);
  return out;
}

std::shared_ptr<Subscription> LiveState::subscribe(std::size_t max_pending) {
  auto sub = std::make_shared<Subscription>(max_pending);
  std::lock_guard lk(mu_);
  // taken under the same lock as registration, so no tick falls between
  sub->initial = snapshot_;
  subs_.push_back(sub);
  return sub;
}

void LiveState::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lk(mu_);
  std::erase(subs_, sub);
}

std::size_t LiveState::subscriber_count() const {
  std::lock_guard lk(mu_);
  return subs_.size();
}

ServiceApi::ServiceApi(std::shared_ptr<const LiveState> live, std::shared_ptr<const WhatIfContext> ctx)
    : live_(std::move(live)), ctx_(std::move(ctx)) {
  if (ctx_) {
    area_ = std::make_shared<const Area>(ctx_->model, ctx_->area);
    weights_ = area_weights(ctx_->model, *area_, ctx_->outages);
  }
}

HttpResponse ServiceApi::get_snapshot() const {
  auto s = live_->snapshot();
  if (!s) return error_response(503, to_string(Errc::ServiceUnavailable), "no monitor tick yet");
  return {200, snapshot_json(*s)};
}

HttpResponse ServiceApi::get_thresholds() const { return {200, thresholds_obj(live_->thresholds()).dump()}; }

HttpResponse ServiceApi::get_history(std::optional<std::uint64_t> from_us, std::optional<std::uint64_t> to_us) const {
  json a = json::array();
  for (const auto& e : live_->history(from_us.value_or(0), to_us.value_or(std::numeric_limits<std::uint64_t>::max())))
    a.push_back(event_obj(e));
  return {200, a.dump()};
}

HttpResponse ServiceApi::post_whatif(const std::string& body) const {
  if (!ctx_) return error_response(503, to_string(Errc::ServiceUnavailable), "no model loaded");
  double total = 0.0;
  try {
    const json j = json::parse(body);
    total = j.at("total_mw").get<double>();
  } catch (const json::exception& e) {
    return error_response(400, to_string(Errc::InvalidArgument), e.what());
  }
  try {
    const MitigationPlan plan = allocate_load_shed(weights_, *area_, total, ctx_->model.base_mva());
    const MitigationOutcome o = simulate_mitigation(ctx_->model, *area_, weights_, ctx_->injections,
                                                    ctx_->pattern, plan, ctx_->outages);
    json per = json::array();
    for (const auto& s : plan.per_bus) per.push_back({{"bus", s.bus}, {"shed_mw", s.shed_mw}});
    json out = {{"plan",
                 {{"total_shed_mw", plan.total_shed_mw},
                  {"per_bus", per},
                  {"predicted_delta_theta", plan.predicted_delta_theta}}},
                {"theta_before", o.theta_before},
                {"theta_after", o.theta_after}};
    return {200, out.dump()};
  } catch (const Error& e) {
    const int status = e.code() == Errc::InvalidArgument ? 400
                       : e.code() == Errc::NoReceivingBuses || e.code() == Errc::IslandedNetwork ? 422
                                                                                                   : 500;
    return error_response(status, to_string(e.code()), e.what());
  }
}

HttpResponse ServiceApi::handle(const std::string& method, const std::string& target, const std::string& body) const {
  const auto q = target.find('?');
  const std::string path = target.substr(0, q);
  const std::string_view query = q == std::string::npos ? std::string_view() : std::string_view(target).substr(q + 1);
  try {
    if (path == "/api/snapshot" && method == "GET") return get_snapshot();
    if (path == "/api/thresholds" && method == "GET") return get_thresholds();
    if (path == "/api/history" && method == "GET")
      return get_history(query_u64(query, "from"), query_u64(query, "to"));
    if (path == "/api/whatif" && method == "POST") return post_whatif(body);
  } catch (const Error& e) {
    return error_response(400, to_string(e.code()), e.what());
  }
  if (path == "/api/snapshot" || path == "/api/thresholds" || path == "/api/history" || path == "/api/whatif")
    return error_response(405, "method_not_allowed", method);
  return error_response(404, "not_found", path);
}

}  // namespace aam
