#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aam/io.hpp"

namespace aam::testing {

std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(AAM_TEST_DATA_DIR) / name; }

Fixture load_fixture(const std::string& prefix) {
  Fixture f;
  f.model = io::load_model(data_path(prefix + "_model.json"));
  f.area = io::load_area(data_path(prefix + "_area.json"));
  f.pattern = io::load_pattern(data_path(prefix + "_pattern.json"), f.model);
  return f;
}

Synthetic random_cutset(std::mt19937_64& rng, int area_buses) {
  std::uniform_real_distribution<double> bdist(2.0, 20.0), limdist(1.0, 4.0);
  const int m = area_buses;
  const int nb = std::uniform_int_distribution<int>(2, std::min(12, m / 2))(rng);
  const int ns = std::uniform_int_distribution<int>(1, nb - 1)(rng);

  std::vector<Bus> buses;
  std::vector<Branch> branches;
  auto name = [](const std::string& p, int i) { return p + std::to_string(i); };
  auto add = [&](const std::string& a, const std::string& b, double s, std::optional<double> lim) {
    branches.push_back({"L" + std::to_string(branches.size()), a, b, s, lim, false});
  };
  for (int i = 0; i < m; ++i) buses.push_back({name("A", i), "", 230.0});
  for (int i = 0; i < 3; ++i) buses.push_back({name("S", i), "", 230.0});
  for (int i = 0; i < 3; ++i) buses.push_back({name("R", i), "", 230.0});

  // random tree plus chords inside the area
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 1; i < m; ++i) {
    const int j = std::uniform_int_distribution<int>(0, i - 1)(rng);
    add(name("A", order[static_cast<std::size_t>(i)]), name("A", order[static_cast<std::size_t>(j)]), bdist(rng),
        limdist(rng));
  }
  for (int c = 0; c < m / 3; ++c) {
    const int a = std::uniform_int_distribution<int>(0, m - 1)(rng);
    int b = std::uniform_int_distribution<int>(0, m - 2)(rng);
    if (b >= a) ++b;
    add(name("A", a), name("A", b), bdist(rng), limdist(rng));
  }
  // external meshes on each side
  for (const char* side : {"S", "R"}) {
    add(name(side, 0), name(side, 1), bdist(rng), std::nullopt);
    add(name(side, 1), name(side, 2), bdist(rng), std::nullopt);
    add(name(side, 2), name(side, 0), bdist(rng), std::nullopt);
  }

  // boundary buses are a random subset of the area
  std::shuffle(order.begin(), order.end(), rng);
  Synthetic s;
  for (int k = 0; k < m; ++k) {
    const std::string id = name("A", order[static_cast<std::size_t>(k)]);
    if (k < nb) {
      s.area.boundary.push_back(id);
      (k < ns ? s.area.sending : s.area.receiving).push_back(id);
      const std::string ext = name(k < ns ? "S" : "R", std::uniform_int_distribution<int>(0, 2)(rng));
      add(ext, id, bdist(rng), std::nullopt);
    } else {
      s.area.interior.push_back(id);
    }
  }
  s.model = NetworkModel(std::move(buses), std::move(branches), "R0");
  return s;
}

Vector random_injections(std::mt19937_64& rng, const NetworkModel& model, const Area& area) {
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  Vector p = Vector::Zero(static_cast<Eigen::Index>(model.bus_count()));
  std::vector<bool> interior(model.bus_count(), false);
  for (auto i : area.interior()) interior[i] = true;
  for (std::size_t i = 0; i < model.bus_count(); ++i)
    if (!interior[i]) p[static_cast<Eigen::Index>(i)] = d(rng);
  return p;
}

NetworkModel parallel_lines(int n, double b, std::optional<double> limit) {
  std::vector<Bus> buses{{"sa", "", 500}, {"a", "", 500}, {"b", "", 500}, {"rb", "", 500}};
  std::vector<Branch> branches;
  branches.push_back({"ext_s", "sa", "a", 100.0, std::nullopt, false});
  for (int k = 0; k < n; ++k) branches.push_back({"ab" + std::to_string(k + 1), "a", "b", b, limit, false});
  branches.push_back({"ext_r", "b", "rb", 100.0, std::nullopt, false});
  return NetworkModel(std::move(buses), std::move(branches), "rb");
}

AreaDefinition parallel_area() { return {{}, {"a", "b"}, {"a"}, {"b"}}; }

Eigen::MatrixXd dense_susceptance(const NetworkModel& model, const BranchSet& exclude) {
  const auto n = static_cast<Eigen::Index>(model.bus_count());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (exclude.count(k)) continue;
    const auto i = static_cast<Eigen::Index>(model.bus_index(model.branches()[k].from));
    const auto j = static_cast<Eigen::Index>(model.bus_index(model.branches()[k].to));
    const double s = model.branches()[k].b;
    b(i, i) += s;
    b(j, j) += s;
    b(i, j) -= s;
    b(j, i) -= s;
  }
  return b;
}

Eigen::VectorXd dense_solve(const NetworkModel& model, const Eigen::VectorXd& p, const BranchSet& exclude) {
  const Eigen::MatrixXd b = dense_susceptance(model, exclude);
  const auto n = b.rows();
  const auto s = static_cast<Eigen::Index>(model.slack());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != s) keep.push_back(i);
  const auto m = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd r(m, m);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    rhs[a] = p[keep[static_cast<std::size_t>(a)]];
    for (Eigen::Index c = 0; c < m; ++c) r(a, c) = b(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(c)]);
  }
  const Eigen::VectorXd x = r.fullPivLu().solve(rhs);
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = 0; a < m; ++a) theta[keep[static_cast<std::size_t>(a)]] = x[a];
  return theta;
}

Eigen::MatrixXd dense_area_laplacian(const NetworkModel& model, const std::vector<std::size_t>& buses,
                                     const BranchSet& exclude) {
  const auto n = static_cast<Eigen::Index>(buses.size());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  auto pos = [&](std::size_t bus) -> Eigen::Index {
    const auto it = std::find(buses.begin(), buses.end(), bus);
    return it == buses.end() ? -1 : static_cast<Eigen::Index>(it - buses.begin());
  };
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (exclude.count(k)) continue;
    const auto i = pos(model.bus_index(model.branches()[k].from));
    const auto j = pos(model.bus_index(model.branches()[k].to));
    if (i < 0 || j < 0) continue;
    const double s = model.branches()[k].b;
    l(i, i) += s;
    l(j, j) += s;
    l(i, j) -= s;
    l(j, i) -= s;
  }
  return l;
}

Eigen::MatrixXd dense_schur(const Eigen::MatrixXd& b, Eigen::Index nb) {
  const Eigen::Index ni = b.rows() - nb;
  if (ni == 0) return b;
  const Eigen::MatrixXd inv = b.bottomRightCorner(ni, ni).inverse();
  return b.topLeftCorner(nb, nb) - b.topRightCorner(nb, ni) * inv * b.bottomLeftCorner(ni, nb);
}

Eigen::VectorXd dense_weights(const Eigen::MatrixXd& b_eq, const Eigen::VectorXd& sigma, double* b_mod) {
  const double bm = sigma.dot(b_eq * sigma);
  if (b_mod) *b_mod = bm;
  return (b_eq * sigma) / bm;
}

double through_power(const NetworkModel& model, const Area& area, const Eigen::VectorXd& theta,
                     const BranchSet& exclude) {
  double p = 0.0;
  for (std::size_t k = 0; k < model.branch_count(); ++k) {
    if (exclude.count(k)) continue;
    const auto i = model.bus_index(model.branches()[k].from);
    const auto j = model.bus_index(model.branches()[k].to);
    if (!area.contains(i) || !area.contains(j)) continue;
    const double f = model.branches()[k].b * (theta[static_cast<Eigen::Index>(i)] - theta[static_cast<Eigen::Index>(j)]);
    if (area.is_sending(i) && !area.is_sending(j)) p += f;
    if (area.is_sending(j) && !area.is_sending(i)) p -= f;
  }
  return p;
}

MonitorConfig toy_config(double warning, double emergency, double t_area) {
  MonitorConfig c;
  c.thresholds = compensate_thresholds(warning, emergency, 0.0);
  c.t_area = t_area;
  c.weights.weights = Eigen::Vector2d(1.0, -1.0);
  c.weights.b_mod = 1.0;
  return c;
}

ChannelMap toy_channels() { return {{{0, 0, "p"}, {0, 1, "q"}}, {}}; }

std::vector<std::string> toy_boundary() { return {"p", "q"}; }

std::vector<PhasorFrame> dwell_trace() {
  const std::pair<double, int> segments[] = {{19.0, 2}, {24.0, 3}, {19.0, 4}, {24.0, 6}, {19.0, 7}};
  std::vector<PhasorFrame> out;
  long k = 0;
  for (const auto& [angle, seconds] : segments)
    for (int i = 0; i < seconds * 30; ++i, ++k) {
      PhasorFrame f;
      f.timestamp_us = 1'700'000'000'000'000ULL + static_cast<std::uint64_t>(std::llround(static_cast<double>(k) * 1e6 / 30.0));
      f.channels = {{angle, Quality::Good}, {0.0, Quality::Good}};
      out.push_back(std::move(f));
    }
  return out;
}

std::string run_status_log(Monitor& monitor, const std::vector<PhasorFrame>& frames) {
  TickScheduler sched(monitor);
  std::string log = status_log_header() + "\n";
  auto emit = [&](const std::vector<TickResult>& ticks) {
    for (const auto& t : ticks) log += status_log_line(t) + "\n";
  };
  for (const auto& f : frames) emit(sched.push(f));
  emit(sched.flush());
  return log;
}

double sample_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

namespace {

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks(x), ry = ranks(y);
  const Eigen::Map<const Eigen::VectorXd> a(rx.data(), static_cast<Eigen::Index>(rx.size()));
  const Eigen::Map<const Eigen::VectorXd> b(ry.data(), static_cast<Eigen::Index>(ry.size()));
  const Eigen::VectorXd da = a.array() - a.mean(), db = b.array() - b.mean();
  return da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
}

}  // namespace aam::testing
