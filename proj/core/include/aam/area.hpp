#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "aam/netmodel.hpp"

namespace aam {

struct AreaDefinition {
  std::vector<std::string> interior;
  std::vector<std::string> boundary;  // ordering fixes the weight vector ordering
  std::vector<std::string> sending;
  std::vector<std::string> receiving;
};

// An AreaDefinition resolved against one model.
class Area {
 public:
  Area(const NetworkModel& model, AreaDefinition def);

  const AreaDefinition& definition() const { return def_; }
  const std::vector<std::size_t>& boundary() const { return boundary_; }
  const std::vector<std::size_t>& interior() const { return interior_; }
  // boundary first, then interior
  const std::vector<std::size_t>& buses() const { return buses_; }
  const std::vector<std::size_t>& internal_branches() const { return internal_; }
  const Eigen::VectorXd& sigma() const { return sigma_; }
  bool is_sending(std::size_t bus) const { return sending_mask_[bus]; }
  bool contains(std::size_t bus) const { return local_[bus] >= 0; }
  bool is_internal(std::size_t branch) const { return internal_mask_[branch]; }
  std::vector<std::size_t> receiving() const;

  // Laplacian of the internal branches over buses(); rows 0..nb-1 are boundary.
  SparseMatrix laplacian(const NetworkModel& model, const BranchSet& exclude = {}) const;

  // Power on internal branches leaving the sending side, per unit.
  double entering_power(const NetworkModel& model,
                        const std::vector<std::optional<double>>& flows) const;

  // Boundary angles in degrees taken from a full-network solution in radians.
  Eigen::VectorXd boundary_angles_deg(const Vector& theta) const;

 private:
  AreaDefinition def_;
  std::vector<std::size_t> boundary_, interior_, buses_, internal_;
  std::vector<int> local_;
  std::vector<bool> sending_mask_, internal_mask_;
  Eigen::VectorXd sigma_;
};

struct BoundaryWeights {
  Eigen::VectorXd weights;  // same order as the boundary list
  double b_mod = 0.0;
};

// Schur complement eliminating every index not listed in `boundary`.
Eigen::MatrixXd kron_reduce(const SparseMatrix& b_area, const std::vector<Eigen::Index>& boundary);

BoundaryWeights compute_weights(const Eigen::MatrixXd& b_eq, const Eigen::VectorXd& sigma);

// Degrees in, degrees out.
double area_angle(const BoundaryWeights& w, const Eigen::VectorXd& theta_deg);

// Kron reduction and weights of `area` with the given branches removed.
BoundaryWeights area_weights(const NetworkModel& model, const Area& area,
                             const BranchSet& exclude = {});

// True when the area's own subgraph stays connected.
bool area_connected(const NetworkModel& model, const Area& area, const BranchSet& exclude = {});

}  // namespace aam
