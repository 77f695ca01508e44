#pragma once

#include <functional>
#include <vector>

#include "aam/study.hpp"

namespace aam {

struct TopologyChange {
  BranchSet removed_branches;
};

using MaxTransferFn = std::function<MaxTransfer(const NetworkModel&, const Area&,
                                                const TransferPattern&, const BranchSet&)>;

struct CandidateAngle {
  std::size_t branch = 0;
  double b_mod = 0.0;
  double theta = 0.0;  // degrees
};

struct UpdatedThresholds {
  double warning = 0.0;    // degrees
  double emergency = 0.0;  // degrees
  double p_mod = 0.0;      // fast method only
  std::vector<CandidateAngle> per_candidate;  // fast method only
  std::vector<ContingencyResult> sweep;        // original method only
};

// Weights and bulk susceptance with `removed` out of service.
BoundaryWeights updated_weights(const NetworkModel& model, const Area& area, const BranchSet& removed);

// theta_k = P_mod / b_mod^k from a single max-transfer evaluation on the
// changed topology. `evaluator` defaults to max_transfer.
UpdatedThresholds fast_thresholds(const NetworkModel& model, const Area& area,
                                  const TransferPattern& pattern, const TopologyChange& change,
                                  const std::vector<std::size_t>& candidates,
                                  const MaxTransferFn& evaluator = {});

// Full sweep on the changed topology.
UpdatedThresholds original_thresholds(const NetworkModel& model, const Area& area,
                                      const TransferPattern& pattern, const TopologyChange& change,
                                      const std::vector<std::size_t>& candidates, double tau,
                                      unsigned threads = 1);

}  // namespace aam
