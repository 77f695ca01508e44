#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>

namespace aam {

struct Bus {
  std::string id;
  std::string name;
  double kv = 0.0;
};

// b is the series susceptance magnitude (1/x, per unit). A missing limit
// means the branch is never a binding constraint.
struct Branch {
  std::string id;
  std::string from;
  std::string to;
  double b = 0.0;
  std::optional<double> limit;
  bool equivalenced = false;
};

// Branch outages are passed around as sets of branch indices.
using BranchSet = std::set<std::size_t>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

class NetworkModel {
 public:
  NetworkModel() = default;
  NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, std::string slack,
               double base_mva = 100.0);

  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t bus_count() const { return buses_.size(); }
  std::size_t branch_count() const { return branches_.size(); }
  std::size_t slack() const { return slack_; }
  const std::string& slack_id() const { return buses_[slack_].id; }
  double base_mva() const { return base_mva_; }

  std::size_t bus_index(const std::string& id) const;
  std::size_t branch_index(const std::string& id) const;
  bool has_bus(const std::string& id) const { return bus_pos_.count(id) != 0; }

  // endpoints as bus indices
  std::size_t from(std::size_t k) const { return ends_[k].first; }
  std::size_t to(std::size_t k) const { return ends_[k].second; }

  BranchSet branch_set(const std::vector<std::string>& ids) const;
  Vector injections(const std::unordered_map<std::string, double>& by_bus) const;

 private:
  std::vector<Bus> buses_;
  std::vector<Branch> branches_;
  std::size_t slack_ = 0;
  double base_mva_ = 100.0;
  std::unordered_map<std::string, std::size_t> bus_pos_;
  std::unordered_map<std::string, std::size_t> branch_pos_;
  std::vector<std::pair<std::size_t, std::size_t>> ends_;
};

SparseMatrix build_susceptance(const NetworkModel& model, const BranchSet& exclude = {});

// Factorization of the slack-reduced susceptance matrix. Reuse it when
// several right-hand sides share one topology.
class DcSolver {
 public:
  DcSolver(const NetworkModel& model, const BranchSet& exclude = {});
  Vector solve(const Vector& injections) const;

 private:
  const NetworkModel* model_;
  SparseMatrix reduced_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
};

Vector solve_dc(const NetworkModel& model, const Vector& injections, const BranchSet& exclude = {});

// Signed from->to flows. Excluded branches have no value.
std::vector<std::optional<double>> line_flows(const NetworkModel& model, const Vector& angles,
                                              const BranchSet& exclude = {});

struct Islanding {
  bool islanded = false;
  std::vector<std::vector<std::string>> components;
};

Islanding is_islanding(const NetworkModel& model, const BranchSet& exclude = {});

// Connectivity of the subgraph induced by `buses` (indices).
bool is_connected(const NetworkModel& model, const std::vector<std::size_t>& buses,
                  const BranchSet& exclude = {});

}  // namespace aam
