#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aam/area.hpp"
#include "aam/netmodel.hpp"

namespace aam {

// Injections are base + lambda * direction, per unit.
struct TransferPattern {
  Vector base;
  Vector direction;

  void validate(const NetworkModel& model) const;
};

struct MaxTransfer {
  bool bounded = false;
  double lambda = 0.0;  // +inf when unbounded
  double p_mod = 0.0;   // entering power at lambda, +inf when unbounded
  std::optional<std::size_t> binding_branch;
};

MaxTransfer max_transfer(const NetworkModel& model, const Area& area, const TransferPattern& pattern,
                         const BranchSet& exclude = {});

struct ContingencyResult {
  std::string contingency_id;  // branch id, or "base"
  std::optional<std::size_t> branch;  // empty for the base entry
  double p_mod = 0.0;
  double theta_mod = 0.0;  // degrees
  double lambda = 0.0;
  bool islanding = false;

  bool is_base() const { return !branch.has_value(); }
};

struct SweepOptions {
  // Outages already in force (e.g. maintenance) before any candidate is removed.
  BranchSet pre_removed;
  // Worker threads for pass 1 and pass 2; results do not depend on it.
  unsigned threads = 1;
  bool include_base = true;
};

// p_mod is rounded to 1e-9 p.u. before sorting so that numerically equal
// transfers sort by branch order.
std::vector<ContingencyResult> contingency_sweep(const NetworkModel& model, const Area& area,
                                                 const TransferPattern& pattern,
                                                 const std::vector<std::size_t>& candidates,
                                                 const SweepOptions& opts = {});

// Internal branches that are not equivalenced.
std::vector<std::size_t> default_candidates(const NetworkModel& model, const Area& area);

// 1-based position k of the first window [k-2, k] whose sample standard
// deviation reaches tau, scanning a descending list.
std::optional<std::size_t> warning_index(std::span<const double> p_desc, double tau);

// Contingency entries usable for threshold math: not base, not islanding.
std::vector<ContingencyResult> ranked_contingencies(const std::vector<ContingencyResult>& results);

double warning_threshold(const std::vector<ContingencyResult>& results, double tau);
double emergency_threshold(const std::vector<ContingencyResult>& results);

struct ThresholdSet {
  double warning_model = 0.0;
  double emergency_model = 0.0;
  double delta_com = 0.0;
  double warning_ope = 0.0;
  double emergency_ope = 0.0;
};

ThresholdSet compensate_thresholds(double warning_model, double emergency_model,
                                   double theta_mod_normal, double theta_ope_normal);

// Same, with the offset given directly.
ThresholdSet compensate_thresholds(double warning_model, double emergency_model, double delta_com);

}  // namespace aam
