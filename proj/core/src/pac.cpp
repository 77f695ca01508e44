#include "aam/pac.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "aam/error.hpp"

namespace aam {

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

// Column i of the inverse of the slack-grounded Laplacian, zero at the slack.
Vector grounded_column(const NetworkModel& model, const DcSolver& solver, std::size_t i) {
  Vector e = Vector::Zero(static_cast<Eigen::Index>(model.bus_count()));
  if (i != model.slack()) e[static_cast<Eigen::Index>(i)] = 1.0;
  return solver.solve(e);
}

}  // namespace

const PacEntry* PacTable::find(const std::string& target) const {
  for (const auto& e : entries)
    if (e.target == target) return &e;
  return nullptr;
}

std::complex<double> Phasor::value() const { return std::polar(magnitude, angle / kDeg); }

const char* to_string(AngleSource s) {
  switch (s) {
    case AngleSource::Measured: return "MEASURED";
    case AngleSource::Pac: return "PAC";
    case AngleSource::Lse: return "LSE";
    case AngleSource::Stale: return "STALE";
  }
  return "STALE";
}

double electrical_distance(const NetworkModel& model, std::size_t i, std::size_t j) {
  if (i == j) return 0.0;
  const DcSolver solver(model);
  const Vector gi = grounded_column(model, solver, i);
  const Vector gj = grounded_column(model, solver, j);
  const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
  return gi[a] + gj[b] - 2.0 * gi[b];
}

PacTable compute_pac_table(const NetworkModel& model, const Area& area,
                           const std::set<std::string>& pmu_buses, const Vector& base_injections) {
  std::vector<std::size_t> pmus;
  for (const auto& id : pmu_buses) pmus.push_back(model.bus_index(id));
  const DcSolver solver(model);
  const Vector theta = solver.solve(base_injections);

  // Grounded-inverse diagonal entries of every PMU bus, computed once.
  std::vector<Vector> pmu_cols;
  for (auto j : pmus) pmu_cols.push_back(grounded_column(model, solver, j));

  PacTable table;
  for (auto i : area.boundary()) {
    const std::string& target = model.buses()[i].id;
    if (pmu_buses.count(target)) continue;
    if (pmus.empty()) throw Error(Errc::NoReachablePmu, "no PMU bus for " + target);
    const Vector gi = grounded_column(model, solver, i);
    const auto a = static_cast<Eigen::Index>(i);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < pmus.size(); ++p) {
      const auto b = static_cast<Eigen::Index>(pmus[p]);
      const double d = gi[a] + pmu_cols[p][b] - 2.0 * gi[b];
      const bool closer = d < best_d - 1e-12 * std::max(1.0, best_d);
      const bool tie = !closer && std::abs(d - best_d) <= 1e-12 * std::max(1.0, best_d);
      if (closer || (tie && model.buses()[pmus[p]].id < model.buses()[pmus[best]].id)) {
        best = p;
        best_d = d;
      }
    }
    const std::size_t j = pmus[best];
    table.entries.push_back({target, model.buses()[j].id,
                             (theta[a] - theta[static_cast<Eigen::Index>(j)]) * kDeg});
  }
  return table;
}

double lse_neighbor_angle(const Phasor& v1, const Phasor& i_line, std::complex<double> z_line) {
  const std::complex<double> vi = v1.value() - z_line * i_line.value();
  return std::arg(vi) * kDeg;
}

BoundaryEstimate estimate_boundary_angles(const Area& area, const std::map<std::string, double>& measured,
                                          const PacTable& table,
                                          const std::map<std::string, LseInput>& lse) {
  const auto& ids = area.definition().boundary;
  BoundaryEstimate out;
  out.angles.resize(static_cast<Eigen::Index>(ids.size()));
  out.sources.resize(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const auto idx = static_cast<Eigen::Index>(k);
    const std::string& bus = ids[k];
    if (auto m = measured.find(bus); m != measured.end()) {
      out.angles[idx] = m->second;
      out.sources[k] = AngleSource::Measured;
    } else if (auto l = lse.find(bus); l != lse.end()) {
      out.angles[idx] = lse_neighbor_angle(l->second.v, l->second.i, l->second.z);
      out.sources[k] = AngleSource::Lse;
    } else if (const PacEntry* e = table.find(bus)) {
      auto ref = measured.find(e->reference);
      if (ref == measured.end())
        throw Error(Errc::UnresolvableBus, bus + ": reference " + e->reference + " has no measurement");
      out.angles[idx] = ref->second + e->pac_deg;
      out.sources[k] = AngleSource::Pac;
    } else {
      throw Error(Errc::UnresolvableBus, bus);
    }
  }
  return out;
}

}  // namespace aam
