#pragma once

// Shared helpers for unit and acceptance tests: fixture loading, random
// cutset networks and dense reference computations that do not go through
// the sparse code paths under test.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aam/area.hpp"
#include "aam/monitor.hpp"
#include "aam/netmodel.hpp"
#include "aam/study.hpp"

namespace aam::testing {

std::filesystem::path data_path(const std::string& name);

struct Fixture {
  NetworkModel model;
  AreaDefinition area;
  TransferPattern pattern;
};

// "corridor39" or "grid36"
Fixture load_fixture(const std::string& prefix);

struct Synthetic {
  NetworkModel model;
  AreaDefinition area;
};

// Random connected area of `area_buses` buses whose boundary cuts every path
// between the sending and the receiving externals. Internal branches get
// limits in [1, 4] p.u.
Synthetic random_cutset(std::mt19937_64& rng, int area_buses);

// Random injections on every non-interior bus, per unit.
Vector random_injections(std::mt19937_64& rng, const NetworkModel& model, const Area& area);

// a -- b through `n` identical branches of susceptance `b`, optional limit.
// Bus "a" sends, "b" receives; externals "sa" and "rb" hang off each side.
NetworkModel parallel_lines(int n, double b, std::optional<double> limit);
AreaDefinition parallel_area();

// Dense oracles.
Eigen::MatrixXd dense_susceptance(const NetworkModel& model, const BranchSet& exclude = {});
Eigen::VectorXd dense_solve(const NetworkModel& model, const Eigen::VectorXd& p, const BranchSet& exclude = {});
// Laplacian over `buses` (model indices) built from branches with both ends inside.
Eigen::MatrixXd dense_area_laplacian(const NetworkModel& model, const std::vector<std::size_t>& buses,
                                     const BranchSet& exclude = {});
// Schur complement keeping the first nb rows/cols, via an explicit inverse.
Eigen::MatrixXd dense_schur(const Eigen::MatrixXd& b, Eigen::Index nb);
// Weights straight from the definition.
Eigen::VectorXd dense_weights(const Eigen::MatrixXd& b_eq, const Eigen::VectorXd& sigma, double* b_mod = nullptr);

// Through power from a full solution: sum of flows on branches leaving the
// sending set toward any other area bus.
double through_power(const NetworkModel& model, const Area& area, const Eigen::VectorXd& theta,
                     const BranchSet& exclude = {});

// Two-bus toy monitor: weights [1, -1], channel 0 -> "p", channel 1 -> "q".
MonitorConfig toy_config(double warning, double emergency, double t_area = 5.0);
ChannelMap toy_channels();
std::vector<std::string> toy_boundary();

// The trace behind dwell_status_golden.csv (see gen_dwell_golden.py).
std::vector<PhasorFrame> dwell_trace();

// Monitor + TickScheduler over `frames`, returning the status log text.
std::string run_status_log(Monitor& monitor, const std::vector<PhasorFrame>& frames);

double sample_std(const std::vector<double>& v);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

constexpr double kDeg = 180.0 / 3.14159265358979323846;

}  // namespace aam::testing
