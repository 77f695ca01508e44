#include "aam/update.hpp"

#include <algorithm>
#include <numbers>

#include "aam/error.hpp"

namespace aam {

// A boundary bus cut off from the rest of the area keeps a zero weight; an
// isolated interior bus makes the reduction singular.
BoundaryWeights updated_weights(const NetworkModel& model, const Area& area, const BranchSet& removed) {
  return area_weights(model, area, removed);
}

UpdatedThresholds fast_thresholds(const NetworkModel& model, const Area& area,
                                  const TransferPattern& pattern, const TopologyChange& change,
                                  const std::vector<std::size_t>& candidates,
                                  const MaxTransferFn& evaluator) {
  const BranchSet& pre = change.removed_branches;
  if (is_islanding(model, pre).islanded || !area_connected(model, area, pre))
    throw Error(Errc::IslandedNetwork, "topology change islands the area");

  const MaxTransfer mt = evaluator ? evaluator(model, area, pattern, pre)
                                   : max_transfer(model, area, pattern, pre);
  if (!mt.bounded) throw Error(Errc::NoBindingConstraint, "no limited internal branch binds");

  UpdatedThresholds out;
  out.p_mod = mt.p_mod;
  for (auto k : candidates) {
    if (k >= model.branch_count()) throw Error(Errc::UnknownBranch, std::to_string(k));
    if (!area.is_internal(k))
      throw Error(Errc::InvalidArgument, "candidate " + model.branches()[k].id + " is not internal");
    if (model.branches()[k].equivalenced || pre.count(k)) continue;
    BranchSet ex = pre;
    ex.insert(k);
    if (is_islanding(model, ex).islanded || !area_connected(model, area, ex)) continue;
    CandidateAngle c;
    c.branch = k;
    c.b_mod = area_weights(model, area, ex).b_mod;
    c.theta = mt.p_mod / c.b_mod * 180.0 / std::numbers::pi;
    out.per_candidate.push_back(c);
  }
  if (out.per_candidate.empty()) throw Error(Errc::EmptyCandidateSet, "no non-islanding candidate");
  auto [lo, hi] = std::minmax_element(out.per_candidate.begin(), out.per_candidate.end(),
                                      [](const auto& a, const auto& b) { return a.theta < b.theta; });
  out.emergency = hi->theta;
  out.warning = 0.5 * (hi->theta + lo->theta);
  return out;
}

UpdatedThresholds original_thresholds(const NetworkModel& model, const Area& area,
                                      const TransferPattern& pattern, const TopologyChange& change,
                                      const std::vector<std::size_t>& candidates, double tau,
                                      unsigned threads) {
  SweepOptions opts;
  opts.pre_removed = change.removed_branches;
  opts.threads = threads;
  UpdatedThresholds out;
  out.sweep = contingency_sweep(model, area, pattern, candidates, opts);
  out.emergency = emergency_threshold(out.sweep);
  const auto ranked = ranked_contingencies(out.sweep);
  // a single usable contingency falls back to the emergency angle
  out.warning = ranked.size() < 3 ? out.emergency : warning_threshold(out.sweep, tau);
  return out;
}

}  // namespace aam
