#pragma once

#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aam/area.hpp"
#include "aam/netmodel.hpp"

namespace aam {

struct PacEntry {
  std::string target;
  std::string reference;
  double pac_deg = 0.0;
};

struct PacTable {
  std::vector<PacEntry> entries;
  const PacEntry* find(const std::string& target) const;
};

struct Phasor {
  double magnitude = 0.0;  // per unit
  double angle = 0.0;      // degrees
  std::complex<double> value() const;
};

struct LseInput {
  Phasor v;
  Phasor i;  // oriented from the measured bus toward the estimated bus
  std::complex<double> z;
};

enum class AngleSource { Measured, Pac, Lse, Stale };

const char* to_string(AngleSource s);

// Effective resistance of the susceptance Laplacian between two buses.
double electrical_distance(const NetworkModel& model, std::size_t i, std::size_t j);

PacTable compute_pac_table(const NetworkModel& model, const Area& area,
                           const std::set<std::string>& pmu_buses, const Vector& base_injections);

double lse_neighbor_angle(const Phasor& v1, const Phasor& i_line, std::complex<double> z_line);

struct BoundaryEstimate {
  Eigen::VectorXd angles;  // degrees, boundary order
  std::vector<AngleSource> sources;
};

// Priority per bus: measured, then LSE, then PAC from a measured reference.
BoundaryEstimate estimate_boundary_angles(const Area& area, const std::map<std::string, double>& measured,
                                          const PacTable& table,
                                          const std::map<std::string, LseInput>& lse = {});

}  // namespace aam
