#include "aam/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aam/error.hpp"

namespace aam {

MitigationPlan allocate_load_shed(const BoundaryWeights& weights, const Area& area, double total_mw,
                                  double base_mva) {
  if (!(total_mw >= 0.0) || !std::isfinite(total_mw))
    throw Error(Errc::InvalidArgument, "total shed must be a non-negative number");
  const auto& ids = area.definition().boundary;
  if (weights.weights.size() != static_cast<Eigen::Index>(ids.size()))
    throw Error(Errc::DimensionMismatch, "weights do not match the boundary");

  double norm = 0.0;
  std::vector<std::size_t> recv;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (area.is_sending(area.boundary()[k])) continue;
    recv.push_back(k);
    norm += std::abs(weights.weights[static_cast<Eigen::Index>(k)]);
  }
  if (recv.empty()) throw Error(Errc::NoReceivingBuses, "area has no receiving buses");

  MitigationPlan plan;
  plan.total_shed_mw = total_mw;
  for (auto k : recv) {
    const double w = std::abs(weights.weights[static_cast<Eigen::Index>(k)]);
    // receiving weights sum to -1 up to rounding; dividing by the sum keeps
    // the allocation summing to the requested total
    plan.per_bus.push_back({ids[k], norm > 0.0 ? w / norm * total_mw : total_mw / recv.size()});
  }
  if (weights.b_mod > 0.0)
    plan.predicted_delta_theta = -(total_mw / base_mva) / weights.b_mod * 180.0 / std::numbers::pi;
  return plan;
}

MitigationOutcome simulate_mitigation(const NetworkModel& model, const Area& area,
                                      const BoundaryWeights& weights, const Vector& current_injections,
                                      const TransferPattern& pattern, const MitigationPlan& plan,
                                      const BranchSet& exclude) {
  if (current_injections.size() != static_cast<Eigen::Index>(model.bus_count()))
    throw Error(Errc::DimensionMismatch, "injection vector has wrong length");
  Vector after = current_injections;
  double shed_pu = 0.0;
  for (const auto& s : plan.per_bus) {
    const std::size_t b = model.bus_index(s.bus);
    if (!area.contains(b) || area.is_sending(b) ||
        std::find(area.boundary().begin(), area.boundary().end(), b) == area.boundary().end())
      throw Error(Errc::InvalidArgument, "bus " + s.bus + " is not a receiving boundary bus");
    if (s.shed_mw < 0.0) throw Error(Errc::InvalidArgument, "negative shed at " + s.bus);
    after[static_cast<Eigen::Index>(b)] += s.shed_mw / model.base_mva();
    shed_pu += s.shed_mw / model.base_mva();
  }
  if (shed_pu > 0.0) {
    const Vector src = pattern.direction.cwiseMax(0.0);
    const double total = src.sum();
    if (!(total > 0.0)) throw Error(Errc::InvalidArgument, "transfer pattern has no sources");
    after -= shed_pu * src / total;
  }
  const DcSolver solver(model, exclude);
  MitigationOutcome out;
  out.theta_before = area_angle(weights, area.boundary_angles_deg(solver.solve(current_injections)));
  out.theta_after = area_angle(weights, area.boundary_angles_deg(solver.solve(after)));
  return out;
}

}  // namespace aam
