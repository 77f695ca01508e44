// aam: command line front end for studies, threshold refresh, replay,
// monitoring and the HTTP gateway.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aam/error.hpp"
#include "aam/io.hpp"
#include "aam/mitigation.hpp"
#include "aam/monitor.hpp"
#include "aam/pac.hpp"
#include "aam/replay.hpp"
#include "aam/service.hpp"
#include "aam/study.hpp"
#include "aam/update.hpp"

using namespace aam;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

// "-" means stdout.
void emit(const std::string& path, const std::string& text) {
  const std::string body = text.empty() || text.back() == '\n' ? text : text + "\n";
  if (path == "-") {
    std::cout << body;
    return;
  }
  io::write_text(path, body);
  std::fprintf(stderr, "wrote %s\n", path.c_str());
}

Vector load_injections(const std::string& path, const NetworkModel& model) {
  if (path.empty()) return Vector::Zero(static_cast<Eigen::Index>(model.bus_count()));
  const auto j = nlohmann::json::parse(io::read_text(path));
  std::unordered_map<std::string, double> m;
  for (const auto& [k, v] : j.items()) m[k] = v.get<double>();
  return model.injections(m);
}

BranchSet load_outages(const std::string& path, const NetworkModel& model) {
  if (path.empty()) return {};
  return io::load_change(path, model).removed_branches;
}

struct ModelArgs {
  std::string model, area, pattern, outages;
};

void add_model_args(CLI::App* app, ModelArgs& a, bool need_area, bool need_pattern) {
  app->add_option("--model", a.model, "network model JSON")->required()->check(CLI::ExistingFile);
  auto* area = app->add_option("--area", a.area, "area definition JSON")->check(CLI::ExistingFile);
  if (need_area) area->required();
  auto* pat = app->add_option("--pattern", a.pattern, "transfer pattern JSON")->check(CLI::ExistingFile);
  if (need_pattern) pat->required();
}

ThresholdSet compensated(double warning, double emergency, std::optional<double> delta,
                         std::optional<double> theta_mod, std::optional<double> theta_ope) {
  if (theta_mod && theta_ope) return compensate_thresholds(warning, emergency, *theta_mod, *theta_ope);
  return compensate_thresholds(warning, emergency, delta.value_or(0.0));
}

void run_monitor_loop(const io::MonitorSetup& setup, const std::function<void(const std::function<void(const PhasorFrame&)>&)>& source,
                      const std::function<void(const TickResult&)>& on_tick) {
  Monitor monitor(setup.area.boundary, setup.config, setup.channels);
  TickScheduler sched(monitor);
  source([&](const PhasorFrame& f) {
    for (const auto& t : sched.push(f)) on_tick(t);
  });
  for (const auto& t : sched.flush()) on_tick(t);
  if (monitor.out_of_order()) std::fprintf(stderr, "dropped %llu out-of-order frames\n",
                                           static_cast<unsigned long long>(monitor.out_of_order()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Area angle monitoring tools"};
  app.require_subcommand(1);
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  // solve
  ModelArgs solve_a;
  std::string solve_inj, solve_angles = "angles.csv", solve_flows = "flows.csv";
  auto* solve = app.add_subcommand("solve", "DC power flow; writes bus angles and branch flows");
  add_model_args(solve, solve_a, false, false);
  solve->add_option("--injections", solve_inj, "bus injections JSON {bus: p.u.}")->check(CLI::ExistingFile);
  solve->add_option("--outages", solve_a.outages, "removed branches JSON")->check(CLI::ExistingFile);
  solve->add_option("--angles-out", solve_angles);
  solve->add_option("--flows-out", solve_flows);

  // weights
  ModelArgs w_a;
  std::string w_out = "-";
  auto* weights = app.add_subcommand("weights", "boundary-bus weights of an area");
  add_model_args(weights, w_a, true, false);
  weights->add_option("--outages", w_a.outages)->check(CLI::ExistingFile);
  weights->add_option("--out", w_out);

  // study
  ModelArgs st_a;
  double tau = 0.5;
  std::optional<double> delta, theta_mod, theta_ope;
  std::string st_sweep = "sweep.csv", st_thr = "thresholds.json";
  auto* study = app.add_subcommand("study", "N-1 sweep and model/operation thresholds");
  add_model_args(study, st_a, true, true);
  study->add_option("--tau", tau, "warning std-dev trigger, p.u. on the model base");
  study->add_option("--delta-com", delta, "operation minus model area angle, degrees");
  study->add_option("--theta-mod", theta_mod, "model area angle of the normal case, degrees");
  study->add_option("--theta-ope", theta_ope, "measured area angle of the normal case, degrees");
  study->add_option("--threads", threads);
  study->add_option("--sweep-out", st_sweep);
  study->add_option("--thresholds-out", st_thr);

  // update-thresholds
  ModelArgs up_a;
  std::string method = "fast", change_path, up_out = "thresholds.json";
  auto* update = app.add_subcommand("update-thresholds", "refresh thresholds after a topology change");
  add_model_args(update, up_a, true, true);
  update->add_option("--method", method)->check(CLI::IsMember({"fast", "original"}));
  update->add_option("--change", change_path, "removed branches JSON")->required()->check(CLI::ExistingFile);
  update->add_option("--tau", tau);
  update->add_option("--delta-com", delta);
  update->add_option("--threads", threads);
  update->add_option("--out", up_out);

  // pac
  ModelArgs pac_a;
  std::string pac_inj, pac_out = "-";
  std::vector<std::string> pmus;
  auto* pac = app.add_subcommand("pac", "phase angle compensation table for unmeasured boundary buses");
  add_model_args(pac, pac_a, true, false);
  pac->add_option("--pmu", pmus, "buses with measurements")->required();
  pac->add_option("--injections", pac_inj, "base case injections JSON")->check(CLI::ExistingFile);
  pac->add_option("--out", pac_out);

  // mitigate
  ModelArgs mi_a;
  double total_mw = 0.0;
  std::string mi_inj, mi_out = "-";
  auto* mitigate = app.add_subcommand("mitigate", "receiving-side load shed plan and its effect");
  add_model_args(mitigate, mi_a, true, false);
  mitigate->add_option("--total-mw", total_mw)->required();
  mitigate->add_option("--injections", mi_inj)->check(CLI::ExistingFile);
  mitigate->add_option("--outages", mi_a.outages)->check(CLI::ExistingFile);
  mitigate->add_option("--out", mi_out);

  // synthesize
  std::string scenario_path, syn_out = "-";
  auto* synth = app.add_subcommand("synthesize", "scenario to CSV frame file");
  synth->add_option("--scenario", scenario_path)->required()->check(CLI::ExistingFile);
  synth->add_option("--out", syn_out);

  // replay
  std::string rp_scenario, rp_file, listen = ":7733";
  double speed = 1.0;
  std::size_t wait_clients = 0;
  double wait_timeout = 30.0;
  auto* replay = app.add_subcommand("replay", "serve a scenario or CSV frame file over TCP");
  auto* rs = replay->add_option("--scenario", rp_scenario)->check(CLI::ExistingFile);
  auto* rf = replay->add_option("--file", rp_file)->check(CLI::ExistingFile);
  rs->excludes(rf);
  replay->add_option("--listen", listen);
  replay->add_option("--speed", speed, "time multiplier; 0 sends as fast as possible");
  replay->add_option("--wait-clients", wait_clients, "hold the stream until this many clients connect");
  replay->add_option("--wait-timeout", wait_timeout, "seconds");

  // monitor
  std::string mon_config, connect, mon_file, mon_out = "-";
  auto* monitor = app.add_subcommand("monitor", "run the alert state machine; writes the status log");
  monitor->add_option("--config", mon_config)->required()->check(CLI::ExistingFile);
  auto* mc = monitor->add_option("--connect", connect, "host:port of a frame stream");
  auto* mf = monitor->add_option("--file", mon_file, "CSV frame file")->check(CLI::ExistingFile);
  mc->excludes(mf);
  monitor->add_option("--out", mon_out);

  // serve
  std::string sv_config, sv_connect, sv_file, http = "127.0.0.1:8080";
  std::size_t history = 30 * 3600;
  double sv_speed = 1.0;
  auto* serve = app.add_subcommand("serve", "monitor a stream and expose it over HTTP/WebSocket");
  serve->add_option("--config", sv_config)->required()->check(CLI::ExistingFile);
  auto* sc = serve->add_option("--connect", sv_connect);
  auto* sf = serve->add_option("--file", sv_file)->check(CLI::ExistingFile);
  sc->excludes(sf);
  serve->add_option("--speed", sv_speed, "replay speed for --file");
  serve->add_option("--http", http);
  serve->add_option("--history", history, "ticks kept for /api/history");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      const auto model = io::load_model(solve_a.model);
      const auto out = load_outages(solve_a.outages, model);
      const Vector theta = solve_dc(model, load_injections(solve_inj, model), out);
      emit(solve_angles, io::angles_csv(model, theta));
      emit(solve_flows, io::flows_csv(model, line_flows(model, theta, out)));
    } else if (*weights) {
      const auto model = io::load_model(w_a.model);
      const Area area(model, io::load_area(w_a.area));
      const auto w = area_weights(model, area, load_outages(w_a.outages, model));
      emit(w_out, io::weights_csv(area, w));
      std::fprintf(stderr, "b_mod = %.12g\n", w.b_mod);
    } else if (*study) {
      const auto model = io::load_model(st_a.model);
      const Area area(model, io::load_area(st_a.area));
      const auto pattern = io::load_pattern(st_a.pattern, model);
      SweepOptions opts;
      opts.threads = threads;
      const auto results = contingency_sweep(model, area, pattern, default_candidates(model, area), opts);
      const ThresholdSet t = compensated(warning_threshold(results, tau), emergency_threshold(results), delta,
                                         theta_mod, theta_ope);
      emit(st_sweep, io::sweep_csv(results));
      emit(st_thr, io::thresholds_to_json(t));
    } else if (*update) {
      const auto model = io::load_model(up_a.model);
      const Area area(model, io::load_area(up_a.area));
      const auto pattern = io::load_pattern(up_a.pattern, model);
      const auto change = io::load_change(change_path, model);
      auto cands = default_candidates(model, area);
      std::erase_if(cands, [&](std::size_t k) { return change.removed_branches.count(k) != 0; });
      const UpdatedThresholds u = method == "fast"
                                      ? fast_thresholds(model, area, pattern, change, cands)
                                      : original_thresholds(model, area, pattern, change, cands, tau, threads);
      emit(up_out, io::thresholds_to_json(compensate_thresholds(u.warning, u.emergency, delta.value_or(0.0))));
    } else if (*pac) {
      const auto model = io::load_model(pac_a.model);
      const Area area(model, io::load_area(pac_a.area));
      const std::set<std::string> pmu_set(pmus.begin(), pmus.end());
      emit(pac_out, io::pac_to_json(compute_pac_table(model, area, pmu_set, load_injections(pac_inj, model))));
    } else if (*mitigate) {
      const auto model = io::load_model(mi_a.model);
      const Area area(model, io::load_area(mi_a.area));
      const auto out = load_outages(mi_a.outages, model);
      const auto w = area_weights(model, area, out);
      const auto plan = allocate_load_shed(w, area, total_mw, model.base_mva());
      auto j = nlohmann::json::parse(io::plan_to_json(plan));
      if (!mi_a.pattern.empty()) {
        const auto pattern = io::load_pattern(mi_a.pattern, model);
        const Vector inj = mi_inj.empty() ? pattern.base : load_injections(mi_inj, model);
        const auto o = simulate_mitigation(model, area, w, inj, pattern, plan, out);
        j = {{"plan", j}, {"theta_before", o.theta_before}, {"theta_after", o.theta_after}};
      }
      emit(mi_out, j.dump(2) + "\n");
    } else if (*synth) {
      emit(syn_out, frames_to_csv(synthesize_scenario(load_scenario(scenario_path))));
    } else if (*replay) {
      if (rp_scenario.empty() == rp_file.empty()) throw Error(Errc::InvalidArgument, "give --scenario or --file");
      const auto frames = rp_scenario.empty() ? frames_from_csv(io::read_text(rp_file)).frames
                                              : synthesize_scenario(load_scenario(rp_scenario));
      const auto [host, port] = parse_endpoint(listen);
      StreamServer server(host, port);
      std::fprintf(stderr, "listening on %s:%u, %zu frames\n", host.c_str(), server.port(), frames.size());
      if (wait_clients > 0 &&
          !server.wait_for_clients(wait_clients, std::chrono::milliseconds(static_cast<long>(wait_timeout * 1000))))
        throw Error(Errc::Io, "clients did not connect in time");
      serve_stream(frames, server, speed > 0.0 ? speed : kAsFastAsPossible);
      server.finish(std::chrono::seconds(30));
      if (server.dropped()) std::fprintf(stderr, "dropped %llu messages to slow clients\n",
                                         static_cast<unsigned long long>(server.dropped()));
    } else if (*monitor) {
      if (connect.empty() == mon_file.empty()) throw Error(Errc::InvalidArgument, "give --connect or --file");
      const auto setup = io::load_monitor_setup(mon_config);
      std::ofstream file;
      if (mon_out != "-") file.open(mon_out, std::ios::binary);
      std::ostream& os = mon_out == "-" ? std::cout : file;
      os << status_log_header() << "\n";
      auto source = [&](const std::function<void(const PhasorFrame&)>& sink) {
        if (!mon_file.empty()) {
          auto csv = frames_from_csv(io::read_text(mon_file), setup.stream_id);
          if (csv.malformed) std::fprintf(stderr, "skipped %zu malformed rows\n", csv.malformed);
          replay_frames(csv.frames, kAsFastAsPossible, sink);
        } else {
          const auto [host, port] = parse_endpoint(connect);
          const auto st = read_stream(host, port, sink);
          if (st.crc_errors || st.malformed)
            std::fprintf(stderr, "rejected %llu crc / %llu malformed messages\n",
                         static_cast<unsigned long long>(st.crc_errors), static_cast<unsigned long long>(st.malformed));
        }
      };
      run_monitor_loop(setup, source, [&](const TickResult& t) { os << status_log_line(t) << "\n"; });
      os.flush();
    } else if (*serve) {
      if (sv_connect.empty() == sv_file.empty()) throw Error(Errc::InvalidArgument, "give --connect or --file");
      const auto setup = io::load_monitor_setup(sv_config);
      auto live = std::make_shared<LiveState>(setup.config.thresholds, history);
      auto ctx = std::make_shared<WhatIfContext>(WhatIfContext{setup.model, setup.area, setup.pattern, setup.injections, {}});
      auto api = std::make_shared<ServiceApi>(live, ctx);
      const auto [host, port] = parse_endpoint(http);
      HttpServer server(api, live, host, port);
      std::fprintf(stderr, "http on %s:%u\n", host.c_str(), server.port());
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      auto source = [&](const std::function<void(const PhasorFrame&)>& sink) {
        if (!sv_file.empty()) {
          auto csv = frames_from_csv(io::read_text(sv_file), setup.stream_id);
          replay_frames(csv.frames, sv_speed > 0.0 ? sv_speed : kAsFastAsPossible, sink);
        } else {
          const auto [h, p] = parse_endpoint(sv_connect);
          read_stream(h, p, sink);
        }
      };
      run_monitor_loop(setup, source, [&](const TickResult& t) { live->publish(t); });
      std::fprintf(stderr, "stream ended; serving last state until interrupted\n");
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(200));
      server.stop();
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
