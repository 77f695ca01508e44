#include "aam/area.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Dense>

#include "aam/error.hpp"

namespace aam {

Area::Area(const NetworkModel& model, AreaDefinition def) : def_(std::move(def)) {
  const std::size_t n = model.bus_count();
  local_.assign(n, -1);
  sending_mask_.assign(n, false);
  if (def_.boundary.empty()) throw Error(Errc::InvalidArgument, "area has no boundary buses");

  auto add = [&](const std::string& id, std::vector<std::size_t>& dst) {
    const std::size_t i = model.bus_index(id);
    if (local_[i] >= 0) throw Error(Errc::InvalidArgument, "bus " + id + " listed twice in area");
    local_[i] = static_cast<int>(buses_.size());
    buses_.push_back(i);
    dst.push_back(i);
  };
  for (const auto& id : def_.boundary) add(id, boundary_);
  for (const auto& id : def_.interior) add(id, interior_);

  std::set<std::string> bset(def_.boundary.begin(), def_.boundary.end());
  for (const auto& id : def_.sending) {
    if (!bset.count(id)) throw Error(Errc::InvalidArgument, "sending bus " + id + " not on boundary");
    sending_mask_[model.bus_index(id)] = true;
  }
  if (def_.receiving.empty()) {
    for (const auto& id : def_.boundary)
      if (!sending_mask_[model.bus_index(id)]) def_.receiving.push_back(id);
  }
  for (const auto& id : def_.receiving) {
    if (!bset.count(id)) throw Error(Errc::InvalidArgument, "receiving bus " + id + " not on boundary");
    if (sending_mask_[model.bus_index(id)])
      throw Error(Errc::InvalidArgument, "bus " + id + " is both sending and receiving");
  }
  if (def_.sending.size() + def_.receiving.size() != def_.boundary.size())
    throw Error(Errc::InvalidArgument, "sending and receiving must partition the boundary");

  sigma_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(boundary_.size()));
  for (std::size_t k = 0; k < boundary_.size(); ++k)
    if (sending_mask_[boundary_[k]]) sigma_[static_cast<Eigen::Index>(k)] = 1.0;

  internal_mask_.assign(model.branch_count(), false);
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (local_[model.from(k)] >= 0 && local_[model.to(k)] >= 0) {
      internal_mask_[k] = true;
      internal_.push_back(k);
    }
  }
}

std::vector<std::size_t> Area::receiving() const {
  std::vector<std::size_t> out;
  for (auto b : boundary_)
    if (!sending_mask_[b]) out.push_back(b);
  return out;
}

SparseMatrix Area::laplacian(const NetworkModel& model, const BranchSet& exclude) const {
  const auto m = static_cast<Eigen::Index>(buses_.size());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(internal_.size() * 4);
  for (auto k : internal_) {
    if (exclude.count(k)) continue;
    const double b = model.branches()[k].b;
    const Eigen::Index i = local_[model.from(k)];
    const Eigen::Index j = local_[model.to(k)];
    trips.emplace_back(i, i, b);
    trips.emplace_back(j, j, b);
    trips.emplace_back(i, j, -b);
    trips.emplace_back(j, i, -b);
  }
  SparseMatrix B(m, m);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

double Area::entering_power(const NetworkModel& model,
                            const std::vector<std::optional<double>>& flows) const {
  double p = 0.0;
  for (auto k : internal_) {
    if (!flows[k]) continue;
    const bool fs = sending_mask_[model.from(k)];
    const bool ts = sending_mask_[model.to(k)];
    if (fs && !ts) p += *flows[k];
    else if (ts && !fs) p -= *flows[k];
  }
  return p;
}

Eigen::VectorXd Area::boundary_angles_deg(const Vector& theta) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(boundary_.size()));
  for (std::size_t k = 0; k < boundary_.size(); ++k)
    out[static_cast<Eigen::Index>(k)] =
        theta[static_cast<Eigen::Index>(boundary_[k])] * 180.0 / std::numbers::pi;
  return out;
}

Eigen::MatrixXd kron_reduce(const SparseMatrix& b_area, const std::vector<Eigen::Index>& boundary) {
  const Eigen::Index n = b_area.rows();
  if (b_area.cols() != n) throw Error(Errc::DimensionMismatch, "B_area must be square");
  std::vector<Eigen::Index> pos(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < boundary.size(); ++k) {
    if (boundary[k] < 0 || boundary[k] >= n || pos[boundary[k]] >= 0)
      throw Error(Errc::InvalidArgument, "bad boundary index");
    pos[boundary[k]] = static_cast<Eigen::Index>(k);
  }
  const auto nb = static_cast<Eigen::Index>(boundary.size());
  Eigen::Index ni = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (pos[i] < 0) pos[i] = nb + ni++;

  // Split into boundary and interior blocks under the new ordering.
  Eigen::MatrixXd bb = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::MatrixXd bi = Eigen::MatrixXd::Zero(nb, ni);
  std::vector<Eigen::Triplet<double>> ii;
  for (Eigen::Index c = 0; c < b_area.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(b_area, c); it; ++it) {
      const Eigen::Index r = pos[it.row()], q = pos[it.col()];
      if (r < nb && q < nb) bb(r, q) += it.value();
      else if (r < nb) bi(r, q - nb) += it.value();
      else if (q >= nb) ii.emplace_back(r - nb, q - nb, it.value());
    }
  }
  if (ni == 0) return bb;

  SparseMatrix bii(ni, ni);
  bii.setFromTriplets(ii.begin(), ii.end());
  const double scale = bii.diagonal().cwiseAbs().maxCoeff();
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(bii);
  if (ldlt.info() != Eigen::Success || !(scale > 0.0))
    throw Error(Errc::SingularInterior, "interior block could not be factored");
  if (ldlt.vectorD().cwiseAbs().minCoeff() < 1e-12 * scale)
    throw Error(Errc::SingularInterior, "interior block is singular (isolated interior bus?)");
  Eigen::MatrixXd x = ldlt.solve(Eigen::MatrixXd(bi.transpose()));
  Eigen::MatrixXd beq = bb - bi * x;
  return 0.5 * (beq + beq.transpose());
}

BoundaryWeights compute_weights(const Eigen::MatrixXd& b_eq, const Eigen::VectorXd& sigma) {
  if (b_eq.rows() != sigma.size() || b_eq.cols() != sigma.size())
    throw Error(Errc::DimensionMismatch, "sigma does not match B_eq");
  const double ones = sigma.sum();
  if (ones < 0.5 || ones > static_cast<double>(sigma.size()) - 0.5)
    throw Error(Errc::DegenerateArea, "sending side must be a proper non-empty subset");
  BoundaryWeights out;
  out.b_mod = sigma.dot(b_eq * sigma);
  if (!(out.b_mod >= 1e-12)) throw Error(Errc::DegenerateArea, "bulk susceptance is not positive");
  out.weights = (b_eq * sigma) / out.b_mod;  // B_eq is symmetric, so sigma*B_eq is its transpose
  return out;
}

double area_angle(const BoundaryWeights& w, const Eigen::VectorXd& theta_deg) {
  if (w.weights.size() != theta_deg.size())
    throw Error(Errc::DimensionMismatch, "weights and angles differ in length");
  return w.weights.dot(theta_deg);
}

BoundaryWeights area_weights(const NetworkModel& model, const Area& area, const BranchSet& exclude) {
  std::vector<Eigen::Index> bidx(area.boundary().size());
  for (std::size_t k = 0; k < bidx.size(); ++k) bidx[k] = static_cast<Eigen::Index>(k);
  return compute_weights(kron_reduce(area.laplacian(model, exclude), bidx), area.sigma());
}

bool area_connected(const NetworkModel& model, const Area& area, const BranchSet& exclude) {
  return is_connected(model, area.buses(), exclude);
}

}  // namespace aam
