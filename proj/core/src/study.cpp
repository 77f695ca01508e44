#include "aam/study.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "aam/error.hpp"
#include "parallel.hpp"

namespace aam {

void TransferPattern::validate(const NetworkModel& model) const {
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  if (base.size() != n || direction.size() != n)
    throw Error(Errc::DimensionMismatch, "transfer pattern does not match the model");
  if (!base.allFinite() || !direction.allFinite())
    throw Error(Errc::InvalidArgument, "transfer pattern has non-finite entries");
  if (direction.cwiseAbs().maxCoeff() == 0.0)
    throw Error(Errc::InvalidArgument, "transfer direction is zero");
  if (std::abs(direction.sum()) > 1e-9)
    throw Error(Errc::InvalidArgument, "transfer direction must sum to zero");
}

MaxTransfer max_transfer(const NetworkModel& model, const Area& area, const TransferPattern& pattern,
                         const BranchSet& exclude) {
  pattern.validate(model);
  const DcSolver solver(model, exclude);
  const auto f0 = line_flows(model, solver.solve(pattern.base), exclude);
  const auto df = line_flows(model, solver.solve(pattern.direction), exclude);

  MaxTransfer out;
  out.lambda = std::numeric_limits<double>::infinity();
  for (auto k : area.internal_branches()) {
    const auto& lim = model.branches()[k].limit;
    if (!lim || !df[k] || std::abs(*df[k]) < 1e-12) continue;
    const double d = *df[k];
    double lam = d > 0.0 ? (*lim - *f0[k]) / d : (-*lim - *f0[k]) / d;
    lam = std::max(lam, 0.0);
    if (lam < out.lambda) {
      out.lambda = lam;
      out.binding_branch = k;
    }
  }
  if (!out.binding_branch) {
    out.p_mod = std::numeric_limits<double>::infinity();
    return out;
  }
  out.bounded = true;
  out.p_mod = area.entering_power(model, f0) + out.lambda * area.entering_power(model, df);
  return out;
}

std::vector<std::size_t> default_candidates(const NetworkModel& model, const Area& area) {
  std::vector<std::size_t> out;
  for (auto k : area.internal_branches())
    if (!model.branches()[k].equivalenced) out.push_back(k);
  return out;
}

namespace {

double round_p(double p) {
  if (!std::isfinite(p)) return p;
  return std::round(p * 1e9) / 1e9;
}

}  // namespace

std::vector<ContingencyResult> contingency_sweep(const NetworkModel& model, const Area& area,
                                                 const TransferPattern& pattern,
                                                 const std::vector<std::size_t>& candidates,
                                                 const SweepOptions& opts) {
  pattern.validate(model);
  std::vector<std::size_t> cands;
  for (auto k : candidates) {
    if (k >= model.branch_count()) throw Error(Errc::UnknownBranch, std::to_string(k));
    if (!area.is_internal(k))
      throw Error(Errc::InvalidArgument, "candidate " + model.branches()[k].id + " is not internal");
    if (model.branches()[k].equivalenced || opts.pre_removed.count(k)) continue;
    cands.push_back(k);
  }
  std::sort(cands.begin(), cands.end());
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());
  if (cands.empty()) throw Error(Errc::EmptyCandidateSet, "no eligible contingency candidates");

  std::vector<ContingencyResult> res;
  if (opts.include_base) {
    ContingencyResult base;
    base.contingency_id = "base";
    res.push_back(base);
  }
  for (auto k : cands) {
    ContingencyResult r;
    r.contingency_id = model.branches()[k].id;
    r.branch = k;
    res.push_back(r);
  }

  auto outage = [&](const ContingencyResult& r) {
    BranchSet ex = opts.pre_removed;
    if (r.branch) ex.insert(*r.branch);
    return ex;
  };

  // pass 1: maximum entering power per outage
  parallel_for(res.size(), opts.threads, [&](std::size_t i) {
    ContingencyResult& r = res[i];
    const BranchSet ex = outage(r);
    if (is_islanding(model, ex).islanded || !area_connected(model, area, ex)) {
      r.islanding = true;
      r.p_mod = 0.0;
      r.theta_mod = std::numeric_limits<double>::quiet_NaN();
      return;
    }
    const MaxTransfer mt = max_transfer(model, area, pattern, ex);
    r.lambda = mt.lambda;
    r.p_mod = round_p(mt.p_mod);
  });
  if (res.front().is_base() && res.front().islanding)
    throw Error(Errc::IslandedNetwork, "pre-removed branches disconnect the area");

  std::stable_sort(res.begin(), res.end(), [](const ContingencyResult& a, const ContingencyResult& b) {
    if (a.islanding != b.islanding) return !a.islanding;
    if (!a.islanding && a.p_mod != b.p_mod) return a.p_mod > b.p_mod;
    if (a.is_base() != b.is_base()) return a.is_base();
    return a.branch.value_or(0) < b.branch.value_or(0);
  });

  const ContingencyResult* worst = nullptr;
  for (const auto& r : res)
    if (!r.islanding && !r.is_base()) worst = &r;
  if (!worst) return res;
  if (!std::isfinite(worst->lambda))
    throw Error(Errc::NoBindingConstraint, "no limited internal branch binds");

  // pass 2: area angles at the limiting condition of the worst contingency,
  // using the weights from before each outage
  const Vector inj = pattern.base + worst->lambda * pattern.direction;
  const BoundaryWeights w = area_weights(model, area, opts.pre_removed);
  parallel_for(res.size(), opts.threads, [&](std::size_t i) {
    ContingencyResult& r = res[i];
    if (r.islanding) return;
    const Vector theta = solve_dc(model, inj, outage(r));
    r.theta_mod = area_angle(w, area.boundary_angles_deg(theta));
  });
  return res;
}

std::optional<std::size_t> warning_index(std::span<const double> p_desc, double tau) {
  if (!(tau > 0.0)) throw Error(Errc::InvalidArgument, "tau must be positive");
  if (p_desc.size() < 3) throw Error(Errc::TooFewContingencies, "need at least three results");
  for (std::size_t k = 3; k <= p_desc.size(); ++k) {
    const double a = p_desc[k - 3], b = p_desc[k - 2], c = p_desc[k - 1];
    const double mean = (a + b + c) / 3.0;
    const double var = ((a - mean) * (a - mean) + (b - mean) * (b - mean) + (c - mean) * (c - mean)) / 2.0;
    if (std::sqrt(var) >= tau) return k;
  }
  return std::nullopt;
}

std::vector<ContingencyResult> ranked_contingencies(const std::vector<ContingencyResult>& results) {
  std::vector<ContingencyResult> out;
  for (const auto& r : results)
    if (!r.islanding && !r.is_base()) out.push_back(r);
  return out;
}

double emergency_threshold(const std::vector<ContingencyResult>& results) {
  const auto ranked = ranked_contingencies(results);
  if (ranked.empty()) throw Error(Errc::EmptyResults, "no non-islanding contingency");
  return ranked.back().theta_mod;
}

double warning_threshold(const std::vector<ContingencyResult>& results, double tau) {
  const auto ranked = ranked_contingencies(results);
  if (ranked.size() < 3) throw Error(Errc::TooFewContingencies, "need at least three results");
  std::vector<double> p;
  for (const auto& r : ranked) p.push_back(r.p_mod);
  const double emergency = ranked.back().theta_mod;
  const auto k = warning_index(p, tau);
  if (!k) return emergency;
  // a meshed grid can put some theta above the last one; keep warning <= emergency
  return std::min(ranked[*k - 1].theta_mod, emergency);
}

ThresholdSet compensate_thresholds(double warning_model, double emergency_model, double delta_com) {
  ThresholdSet t;
  t.warning_model = warning_model;
  t.emergency_model = emergency_model;
  t.delta_com = delta_com;
  t.warning_ope = warning_model + delta_com;
  t.emergency_ope = emergency_model + delta_com;
  return t;
}

ThresholdSet compensate_thresholds(double warning_model, double emergency_model,
                                   double theta_mod_normal, double theta_ope_normal) {
  return compensate_thresholds(warning_model, emergency_model, theta_ope_normal - theta_mod_normal);
}

}  // namespace aam
