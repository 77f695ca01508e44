#include "aam/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/pending/disjoint_sets.hpp>

#include "aam/error.hpp"

namespace aam {

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, std::string slack,
                           double base_mva)
    : buses_(std::move(buses)), branches_(std::move(branches)), base_mva_(base_mva) {
  if (buses_.empty()) throw Error(Errc::InvalidModel, "model has no buses");
  if (!(base_mva_ > 0.0)) throw Error(Errc::InvalidModel, "base_mva must be positive");
  for (std::size_t i = 0; i < buses_.size(); ++i) {
    if (!bus_pos_.emplace(buses_[i].id, i).second)
      throw Error(Errc::InvalidModel, "duplicate bus id " + buses_[i].id);
  }
  auto s = bus_pos_.find(slack);
  if (s == bus_pos_.end()) throw Error(Errc::InvalidModel, "slack bus " + slack + " not in model");
  slack_ = s->second;

  ends_.reserve(branches_.size());
  for (std::size_t k = 0; k < branches_.size(); ++k) {
    const Branch& br = branches_[k];
    if (!branch_pos_.emplace(br.id, k).second)
      throw Error(Errc::InvalidModel, "duplicate branch id " + br.id);
    auto f = bus_pos_.find(br.from);
    auto t = bus_pos_.find(br.to);
    if (f == bus_pos_.end() || t == bus_pos_.end())
      throw Error(Errc::InvalidModel, "branch " + br.id + " references an unknown bus");
    if (f->second == t->second) throw Error(Errc::InvalidModel, "branch " + br.id + " is a self loop");
    if (!(br.b > 0.0) || !std::isfinite(br.b))
      throw Error(Errc::InvalidModel, "branch " + br.id + " needs a positive susceptance");
    if (br.limit && !(*br.limit > 0.0))
      throw Error(Errc::InvalidModel, "branch " + br.id + " has a non-positive limit");
    ends_.emplace_back(f->second, t->second);
  }
}

std::size_t NetworkModel::bus_index(const std::string& id) const {
  auto it = bus_pos_.find(id);
  if (it == bus_pos_.end()) throw Error(Errc::UnknownBus, id);
  return it->second;
}

std::size_t NetworkModel::branch_index(const std::string& id) const {
  auto it = branch_pos_.find(id);
  if (it == branch_pos_.end()) throw Error(Errc::UnknownBranch, id);
  return it->second;
}

BranchSet NetworkModel::branch_set(const std::vector<std::string>& ids) const {
  BranchSet out;
  for (const auto& id : ids) out.insert(branch_index(id));
  return out;
}

Vector NetworkModel::injections(const std::unordered_map<std::string, double>& by_bus) const {
  Vector p = Vector::Zero(static_cast<Eigen::Index>(buses_.size()));
  for (const auto& [id, v] : by_bus) {
    if (!std::isfinite(v)) throw Error(Errc::InvalidArgument, "non-finite injection at " + id);
    p[static_cast<Eigen::Index>(bus_index(id))] += v;
  }
  return p;
}

namespace {

void check_exclusions(const NetworkModel& model, const BranchSet& exclude) {
  if (!exclude.empty() && *exclude.rbegin() >= model.branch_count())
    throw Error(Errc::UnknownBranch, "excluded branch index " + std::to_string(*exclude.rbegin()));
}

}  // namespace

SparseMatrix build_susceptance(const NetworkModel& model, const BranchSet& exclude) {
  check_exclusions(model, exclude);
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(model.branch_count() * 4);
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (exclude.count(k)) continue;
    const double b = model.branches()[k].b;
    const auto i = static_cast<Eigen::Index>(model.from(k));
    const auto j = static_cast<Eigen::Index>(model.to(k));
    trips.emplace_back(i, i, b);
    trips.emplace_back(j, j, b);
    trips.emplace_back(i, j, -b);
    trips.emplace_back(j, i, -b);
  }
  SparseMatrix B(n, n);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

DcSolver::DcSolver(const NetworkModel& model, const BranchSet& exclude) : model_(&model) {
  if (is_islanding(model, exclude).islanded)
    throw Error(Errc::IslandedNetwork, "exclusions disconnect the network");
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  const auto s = static_cast<Eigen::Index>(model.slack());
  // drop the slack row and column
  std::vector<Eigen::Triplet<double>> trips;
  SparseMatrix B = build_susceptance(model, exclude);
  for (Eigen::Index c = 0; c < B.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(B, c); it; ++it) {
      if (it.row() == s || it.col() == s) continue;
      trips.emplace_back(it.row() - (it.row() > s), it.col() - (it.col() > s), it.value());
    }
  }
  reduced_.resize(n - 1, n - 1);
  reduced_.setFromTriplets(trips.begin(), trips.end());
  if (n > 1) {
    ldlt_.compute(reduced_);
    if (ldlt_.info() != Eigen::Success) throw Error(Errc::SingularSystem, "factorization failed");
  }
}

Vector DcSolver::solve(const Vector& injections) const {
  const auto n = static_cast<Eigen::Index>(model_->bus_count());
  if (injections.size() != n)
    throw Error(Errc::DimensionMismatch, "injection vector has wrong length");
  if (!injections.allFinite()) throw Error(Errc::InvalidArgument, "non-finite injection");
  Vector theta = Vector::Zero(n);
  if (n == 1) return theta;
  const auto s = static_cast<Eigen::Index>(model_->slack());
  Vector rhs(n - 1);
  rhs.head(s) = injections.head(s);
  rhs.tail(n - 1 - s) = injections.tail(n - 1 - s);
  Vector x = ldlt_.solve(rhs);
  if (ldlt_.info() != Eigen::Success || !x.allFinite())
    throw Error(Errc::SingularSystem, "solve failed");
  const double resid = (reduced_ * x - rhs).lpNorm<Eigen::Infinity>();
  if (resid > 1e-8 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()))
    throw Error(Errc::SingularSystem, "residual " + std::to_string(resid));
  theta.head(s) = x.head(s);
  theta.tail(n - 1 - s) = x.tail(n - 1 - s);
  return theta;
}

Vector solve_dc(const NetworkModel& model, const Vector& injections, const BranchSet& exclude) {
  return DcSolver(model, exclude).solve(injections);
}

std::vector<std::optional<double>> line_flows(const NetworkModel& model, const Vector& angles,
                                              const BranchSet& exclude) {
  if (angles.size() != static_cast<Eigen::Index>(model.bus_count()))
    throw Error(Errc::DimensionMismatch, "angle vector has wrong length");
  std::vector<std::optional<double>> out(model.branch_count());
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (exclude.count(k)) continue;
    out[k] = model.branches()[k].b * (angles[static_cast<Eigen::Index>(model.from(k))] -
                                      angles[static_cast<Eigen::Index>(model.to(k))]);
  }
  return out;
}

namespace {

// Component label per bus for the subgraph on `member` buses.
std::vector<std::size_t> components(const NetworkModel& model, const std::vector<bool>& member,
                                    const BranchSet& exclude) {
  const std::size_t n = model.bus_count();
  std::vector<std::size_t> rank(n), parent(n);
  boost::disjoint_sets<std::size_t*, std::size_t*> ds(rank.data(), parent.data());
  for (std::size_t i = 0; i < n; ++i) ds.make_set(i);
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (exclude.count(k)) continue;
    if (member[model.from(k)] && member[model.to(k)]) ds.union_set(model.from(k), model.to(k));
  }
  std::vector<std::size_t> root(n);
  for (std::size_t i = 0; i < n; ++i) root[i] = ds.find_set(i);
  return root;
}

}  // namespace

Islanding is_islanding(const NetworkModel& model, const BranchSet& exclude) {
  const auto root = components(model, std::vector<bool>(model.bus_count(), true), exclude);
  Islanding out;
  std::unordered_map<std::size_t, std::size_t> slot;
  for (std::size_t i = 0; i < model.bus_count(); ++i) {
    auto [it, fresh] = slot.emplace(root[i], out.components.size());
    if (fresh) out.components.emplace_back();
    out.components[it->second].push_back(model.buses()[i].id);
  }
  out.islanded = out.components.size() > 1;
  return out;
}

bool is_connected(const NetworkModel& model, const std::vector<std::size_t>& buses,
                  const BranchSet& exclude) {
  if (buses.empty()) return true;
  std::vector<bool> member(model.bus_count(), false);
  for (auto b : buses) member.at(b) = true;
  const auto root = components(model, member, exclude);
  return std::all_of(buses.begin(), buses.end(),
                     [&](std::size_t b) { return root[b] == root[buses.front()]; });
}

}  // namespace aam
