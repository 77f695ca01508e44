#include <gtest/gtest.h>

#include "aam/area.hpp"
#include "aam/error.hpp"
#include "support.hpp"

using namespace aam;
namespace t = aam::testing;

namespace {

SparseMatrix sparse(const Eigen::MatrixXd& d) { return d.sparseView(); }

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::Io;
}

}  // namespace

TEST(KronReduce, NoInteriorReturnsInput) {
  Eigen::MatrixXd b(2, 2);
  b << 3, -3, -3, 3;
  EXPECT_EQ(kron_reduce(sparse(b), {0, 1}), b);
}

TEST(KronReduce, ChainSeriesCombination) {
  // a - m - b with m interior, listed in the order a, m, b
  Eigen::MatrixXd b(3, 3);
  b << 1, -1, 0, -1, 2, -1, 0, -1, 1;
  const Eigen::MatrixXd beq = kron_reduce(sparse(b), {0, 2});
  Eigen::MatrixXd expect(2, 2);
  expect << 0.5, -0.5, -0.5, 0.5;
  EXPECT_LE((beq - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(KronReduce, StarToDelta) {
  // centre c (index 3) tied to three boundary buses with b = 1: delta legs 1/3
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 3; ++i) {
    b(i, i) = 1;
    b(i, 3) = b(3, i) = -1;
  }
  b(3, 3) = 3;
  const Eigen::MatrixXd beq = kron_reduce(sparse(b), {0, 1, 2});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(beq(i, j), i == j ? 2.0 / 3.0 : -1.0 / 3.0, 1e-15);
}

TEST(KronReduce, IsolatedInteriorIsSingular) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(3, 3);
  b << 1, -1, 0, -1, 1, 0, 0, 0, 0;
  EXPECT_EQ(code_of([&] { kron_reduce(sparse(b), {0, 1}); }), Errc::SingularInterior);
}

TEST(KronReduce, RandomAreasMatchDenseSchurComplement) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = t::random_cutset(rng, 10 + 2 * trial);
    const Area area(s.model, s.area);
    const Eigen::MatrixXd full = t::dense_area_laplacian(s.model, area.buses());
    const auto nb = static_cast<Eigen::Index>(area.boundary().size());
    std::vector<Eigen::Index> bidx;
    for (Eigen::Index k = 0; k < nb; ++k) bidx.push_back(k);
    const Eigen::MatrixXd beq = kron_reduce(area.laplacian(s.model), bidx);
    const Eigen::MatrixXd ref = t::dense_schur(full, nb);
    EXPECT_LE((beq - ref).cwiseAbs().maxCoeff(), 1e-9 * ref.cwiseAbs().maxCoeff());
    EXPECT_LE(beq.rowwise().sum().cwiseAbs().maxCoeff(), 1e-9 * ref.cwiseAbs().maxCoeff());
  }
}

TEST(KronReduce, BoundaryInjectionsReproduced) {
  // with no interior injections the reduced system reproduces boundary injections
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = t::random_cutset(rng, 15 + 3 * trial);
    const Area area(s.model, s.area);
    const Eigen::MatrixXd full = t::dense_area_laplacian(s.model, area.buses());
    const auto nb = static_cast<Eigen::Index>(area.boundary().size());
    const auto n = full.rows();
    // ground the last boundary bus and solve the area alone
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (Eigen::Index k = 0; k + 1 < nb; ++k) p[k] = d(rng);
    p[nb - 1] = -p.head(nb - 1).sum();
    Eigen::MatrixXd g = full;
    g.row(nb - 1).setZero();
    g.col(nb - 1).setZero();
    g(nb - 1, nb - 1) = 1.0;
    Eigen::VectorXd rhs = p;
    rhs[nb - 1] = 0.0;
    const Eigen::VectorXd theta = g.fullPivLu().solve(rhs);
    std::vector<Eigen::Index> bidx;
    for (Eigen::Index k = 0; k < nb; ++k) bidx.push_back(k);
    const Eigen::MatrixXd beq = kron_reduce(area.laplacian(s.model), bidx);
    EXPECT_LE((beq * theta.head(nb) - p.head(nb)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(ComputeWeights, SingleBranch) {
  Eigen::MatrixXd beq(2, 2);
  beq << 10, -10, -10, 10;
  const auto w = compute_weights(beq, Eigen::Vector2d(1, 0));
  EXPECT_DOUBLE_EQ(w.b_mod, 10.0);
  EXPECT_DOUBLE_EQ(w.weights[0], 1.0);
  EXPECT_DOUBLE_EQ(w.weights[1], -1.0);
}

TEST(ComputeWeights, TwoSendingOneReceiving) {
  // buses 1, 2 each tied to 3 with b = 1
  Eigen::MatrixXd beq(3, 3);
  beq << 1, 0, -1, 0, 1, -1, -1, -1, 2;
  const Eigen::Vector3d sigma(1, 1, 0);
  double bm = 0.0;
  const Eigen::VectorXd ref = t::dense_weights(beq, sigma, &bm);
  const auto w = compute_weights(beq, sigma);
  EXPECT_DOUBLE_EQ(w.b_mod, 2.0);
  EXPECT_DOUBLE_EQ(bm, 2.0);
  EXPECT_LE((w.weights - Eigen::Vector3d(0.5, 0.5, -1.0)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((w.weights - ref).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ComputeWeights, DegenerateInputs) {
  Eigen::MatrixXd beq(2, 2);
  beq << 1, -1, -1, 1;
  EXPECT_EQ(code_of([&] { compute_weights(beq, Eigen::Vector2d(1, 1)); }), Errc::DegenerateArea);
  EXPECT_EQ(code_of([&] { compute_weights(beq, Eigen::Vector2d(0, 0)); }), Errc::DegenerateArea);
  EXPECT_EQ(code_of([&] { compute_weights(Eigen::MatrixXd::Zero(2, 2), Eigen::Vector2d(1, 0)); }),
            Errc::DegenerateArea);
  EXPECT_EQ(code_of([&] { compute_weights(beq, Eigen::Vector3d(1, 0, 0)); }), Errc::DimensionMismatch);
}

TEST(ComputeWeights, PublishedWeightsSumToOne) {
  // sending and receiving weights of a 14-bus boundary, four decimals
  const std::vector<double> sending{0.1271, 0.5303, 0.2616, 0.0396, 0.0385, 0.0005, 0.0023};
  const std::vector<double> receiving{-0.1269, -0.0958, -0.0017, -0.1615, -0.2979, -0.2766, -0.0395};
  double s = 0.0, r = 0.0;
  for (double x : sending) s += x;
  for (double x : receiving) r += x;
  EXPECT_NEAR(s, 0.9999, 1e-12);
  EXPECT_NEAR(r, -0.9999, 1e-12);
}

TEST(AreaAngle, Examples) {
  BoundaryWeights w{Eigen::Vector2d(1, -1), 1.0};
  EXPECT_DOUBLE_EQ(area_angle(w, Eigen::Vector2d(10, 4)), 6.0);
  BoundaryWeights w3{Eigen::Vector3d(0.5, 0.5, -1.0), 2.0};
  EXPECT_DOUBLE_EQ(area_angle(w3, Eigen::Vector3d(10, 6, 0)), 8.0);
  EXPECT_DOUBLE_EQ(area_angle(w3, Eigen::Vector3d::Constant(42.0)), 0.0);
  EXPECT_THROW(area_angle(w3, Eigen::Vector2d(1, 2)), Error);
}

TEST(Area, ValidatesDefinition) {
  const auto m = t::parallel_lines(2, 1.0, std::nullopt);
  EXPECT_EQ(code_of([&] { Area(m, {{}, {}, {}, {}}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { Area(m, {{}, {"a", "b"}, {"c"}, {}}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { Area(m, {{}, {"a", "b"}, {"a"}, {"a"}}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { Area(m, {{"a"}, {"a", "b"}, {"a"}, {"b"}}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { Area(m, {{}, {"a", "zz"}, {"a"}, {}}); }), Errc::UnknownBus);
  // receiving side derived when omitted
  const Area a(m, {{}, {"a", "b"}, {"a"}, {}});
  ASSERT_EQ(a.receiving().size(), 1u);
  EXPECT_EQ(a.receiving()[0], m.bus_index("b"));
  EXPECT_EQ(a.internal_branches().size(), 2u);
}

TEST(AreaWeights, RandomCutsetsSumToPlusMinusOne) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = t::random_cutset(rng, 10 + trial);
    const Area area(s.model, s.area);
    const auto w = area_weights(s.model, area);
    double sum_s = 0.0, sum_r = 0.0;
    for (std::size_t k = 0; k < area.boundary().size(); ++k)
      (area.is_sending(area.boundary()[k]) ? sum_s : sum_r) += w.weights[static_cast<Eigen::Index>(k)];
    EXPECT_NEAR(sum_s, 1.0, 1e-9);
    EXPECT_NEAR(sum_r, -1.0, 1e-9);
    EXPECT_GT(w.b_mod, 0.0);
  }
}

TEST(AreaWeights, ShiftInvariance) {
  std::mt19937_64 rng(32);
  const auto s = t::random_cutset(rng, 25);
  const Area area(s.model, s.area);
  const auto w = area_weights(s.model, area);
  Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(w.weights.size(), -20.0, 35.0);
  EXPECT_NEAR(area_angle(w, theta), area_angle(w, (theta.array() + 17.25).matrix()), 1e-9);
}

TEST(AreaWeights, OhmsLawOnCutsets) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = t::random_cutset(rng, 12 + 4 * trial);
    const Area area(s.model, s.area);
    const auto w = area_weights(s.model, area);
    for (int r = 0; r < 5; ++r) {
      const Vector p = t::random_injections(rng, s.model, area);
      const Vector theta = t::dense_solve(s.model, p);
      const double theta_area = area_angle(w, area.boundary_angles_deg(theta)) / t::kDeg;
      EXPECT_NEAR(w.b_mod * theta_area, t::through_power(s.model, area, theta), 1e-6);
      EXPECT_NEAR(area.entering_power(s.model, line_flows(s.model, theta)), t::through_power(s.model, area, theta),
                  1e-12);
    }
  }
}

TEST(AreaWeights, ParallelOutageHalvesBulkSusceptance) {
  const auto m = t::parallel_lines(2, 1.0, std::nullopt);
  const Area a(m, t::parallel_area());
  EXPECT_DOUBLE_EQ(area_weights(m, a).b_mod, 2.0);
  EXPECT_DOUBLE_EQ(area_weights(m, a, {1}).b_mod, 1.0);
  EXPECT_TRUE(area_connected(m, a, {1}));
  EXPECT_FALSE(area_connected(m, a, {1, 2}));
}
