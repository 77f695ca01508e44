#pragma once

#include <string>
#include <vector>

#include "aam/area.hpp"
#include "aam/study.hpp"

namespace aam {

struct BusShed {
  std::string bus;
  double shed_mw = 0.0;
};

struct MitigationPlan {
  double total_shed_mw = 0.0;
  std::vector<BusShed> per_bus;
  double predicted_delta_theta = 0.0;  // degrees
};

// Shed at each receiving boundary bus in proportion to |w_j|.
MitigationPlan allocate_load_shed(const BoundaryWeights& weights, const Area& area, double total_mw,
                                  double base_mva = 100.0);

struct MitigationOutcome {
  double theta_before = 0.0;  // degrees
  double theta_after = 0.0;   // degrees
};

// Receiving-bus injections rise by the shed amounts; the sending-side sources
// of `pattern.direction` back off pro rata by the same total.
MitigationOutcome simulate_mitigation(const NetworkModel& model, const Area& area,
                                      const BoundaryWeights& weights, const Vector& current_injections,
                                      const TransferPattern& pattern, const MitigationPlan& plan,
                                      const BranchSet& exclude = {});

}  // namespace aam
