#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <boost/circular_buffer.hpp>

#include "aam/mitigation.hpp"
#include "aam/monitor.hpp"

namespace aam {

struct Snapshot {
  std::uint64_t timestamp_us = 0;
  std::optional<double> area_angle;
  Status status = Status::Normal;
  ThresholdSet thresholds;
  std::vector<BoundaryReading> boundary;
};

struct StreamEvent {
  std::uint64_t timestamp_us = 0;
  std::optional<double> area_angle;
  Status status = Status::Normal;
  std::vector<Transition> transitions;
};

std::string snapshot_json(const Snapshot& s);
std::string event_json(const StreamEvent& e);

// Pending events of one stream subscriber. When more than `max_pending`
// events are waiting, the newest event absorbs the tail: its values win and
// the transition lists are concatenated, so order is never changed.
class Subscription {
 public:
  explicit Subscription(std::size_t max_pending) : max_pending_(std::max<std::size_t>(max_pending, 1)) {}

  std::shared_ptr<const Snapshot> initial;  // state at subscribe time, may be null

  void push(StreamEvent e);
  std::optional<StreamEvent> try_pop();
  std::optional<StreamEvent> pop_for(std::chrono::milliseconds timeout);
  std::uint64_t coalesced() const;
  // Called after each push on the publishing thread, with the subscription
  // lock held; it must not block.
  void set_notify(std::function<void()> fn);

 private:
  std::size_t max_pending_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<StreamEvent> pending_;
  std::uint64_t coalesced_ = 0;
  std::function<void()> notify_;
};

// Latest monitor output, tick history and subscriber fan-out. One writer
// (the monitor loop) and any number of readers.
class LiveState {
 public:
  LiveState(ThresholdSet thresholds, std::size_t history_capacity);

  void publish(const TickResult& tick);

  // Null before the first tick.
  std::shared_ptr<const Snapshot> snapshot() const;
  const ThresholdSet& thresholds() const { return thresholds_; }
  std::vector<StreamEvent> history(std::uint64_t from_us, std::uint64_t to_us) const;

  std::shared_ptr<Subscription> subscribe(std::size_t max_pending = 256);
  void unsubscribe(const std::shared_ptr<Subscription>& sub);
  std::size_t subscriber_count() const;

 private:
  ThresholdSet thresholds_;
  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> snapshot_;
  boost::circular_buffer<StreamEvent> history_;
  std::vector<std::shared_ptr<Subscription>> subs_;
};

// Read-only model context for what-if requests.
struct WhatIfContext {
  NetworkModel model;
  AreaDefinition area;
  TransferPattern pattern;
  Vector injections;
  BranchSet outages;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

// Transport-independent request handling; every body is JSON.
class ServiceApi {
 public:
  ServiceApi(std::shared_ptr<const LiveState> live, std::shared_ptr<const WhatIfContext> ctx);

  HttpResponse get_snapshot() const;
  HttpResponse get_thresholds() const;
  HttpResponse get_history(std::optional<std::uint64_t> from_us, std::optional<std::uint64_t> to_us) const;
  HttpResponse post_whatif(const std::string& body) const;

  // Routes GET/POST requests on `target` (path plus optional query).
  HttpResponse handle(const std::string& method, const std::string& target, const std::string& body) const;

 private:
  std::shared_ptr<const LiveState> live_;
  std::shared_ptr<const WhatIfContext> ctx_;
  std::shared_ptr<const Area> area_;
  BoundaryWeights weights_;
};

// HTTP/1.1 and WebSocket gateway. GET /api/snapshot, GET /api/thresholds,
// GET /api/history?from=&to=, POST /api/whatif, WS /api/stream.
class HttpServer {
 public:
  HttpServer(std::shared_ptr<ServiceApi> api, std::shared_ptr<LiveState> live, const std::string& host,
             std::uint16_t port, unsigned workers = 2);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  std::uint16_t port() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace aam
