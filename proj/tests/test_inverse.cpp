#include <cmath>

#include "doctest.h"
#include "oed/errors.hpp"
#include "oed/inverse.hpp"
#include "oed/rng.hpp"

namespace {

oed::FRFMatrix make_frf(const Eigen::MatrixXd& t) {
  oed::FRFMatrix frf;
  frf.entries = t;
  frf.sensor_labels.resize(t.rows());
  return frf;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i)
      m(i, j) = 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
  return m;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
  return v;
}

double std_normal(std::mt19937_64& rng) {
  const double u1 = ((rng() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = (rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace

TEST_SUITE_BEGIN("inverse");

TEST_CASE("information matrix equals the dense weighted Gram") {
  auto rng = oed::make_engine(7, "inverse", 0);
  auto frf = make_frf(random_matrix(rng, 12, 4));
  Eigen::VectorXd u = random_vector(rng, 12).cwiseAbs();
  Eigen::MatrixXd direct =
      frf.entries.transpose() * u.asDiagonal() * frf.entries;
  Eigen::MatrixXd fast = oed::information_matrix(frf, u);
  CHECK((direct - fast).norm() < 1e-12 * direct.norm());
}

TEST_CASE("wls matches the normal equations") {
  auto rng = oed::make_engine(7, "inverse", 1);
  auto frf = make_frf(random_matrix(rng, 15, 3));
  oed::Design d;
  d.weights = random_vector(rng, 15).cwiseAbs();
  d.costs = Eigen::VectorXd::Ones(15);
  d.budget = 15.0;
  Eigen::VectorXd y = random_vector(rng, 15);
  Eigen::VectorXd theta = oed::wls_estimate(frf, y, d);
  Eigen::MatrixXd m = frf.entries.transpose() * d.weights.asDiagonal() * frf.entries;
  Eigen::VectorXd rhs = frf.entries.transpose() * d.weights.asDiagonal() * y;
  Eigen::VectorXd oracle = m.ldlt().solve(rhs);
  CHECK((theta - oracle).norm() < 1e-10 * (1.0 + oracle.norm()));
}

TEST_CASE("wls recovers exact parameters from noiseless data") {
  auto rng = oed::make_engine(7, "inverse", 2);
  auto frf = make_frf(random_matrix(rng, 10, 3));
  Eigen::VectorXd theta0 = random_vector(rng, 3);
  oed::Design d;
  d.weights = Eigen::VectorXd::Ones(10);
  d.costs = Eigen::VectorXd::Ones(10);
  d.budget = 10.0;
  Eigen::VectorXd theta = oed::wls_estimate(frf, frf.entries * theta0, d);
  CHECK((theta - theta0).norm() < 1e-10);
}

TEST_CASE("rank-deficient support throws with the observed rank") {
  auto rng = oed::make_engine(7, "inverse", 3);
  auto frf = make_frf(random_matrix(rng, 8, 4));
  oed::Design d;
  d.weights = Eigen::VectorXd::Zero(8);
  d.weights(0) = d.weights(1) = 1.0;  // only two rows active, p = 4
  d.costs = Eigen::VectorXd::Ones(8);
  d.budget = 8.0;
  Eigen::VectorXd y = random_vector(rng, 8);
  try {
    oed::wls_estimate(frf, y, d);
    FAIL("expected IllPosedError");
  } catch (const oed::IllPosedError& e) {
    CHECK(e.rank == 2);
  }
}

TEST_CASE("covariance equals sigma^2 times the inverse Gram") {
  auto rng = oed::make_engine(7, "inverse", 4);
  auto frf = make_frf(random_matrix(rng, 20, 4));
  oed::Design d;
  d.weights = random_vector(rng, 20).cwiseAbs().array() + 0.1;
  d.costs = Eigen::VectorXd::Ones(20);
  d.budget = 30.0;
  oed::NoiseModel noise{1.7};
  Eigen::MatrixXd cov = oed::covariance(frf, d, noise);
  Eigen::MatrixXd m = frf.entries.transpose() * d.weights.asDiagonal() * frf.entries;
  Eigen::MatrixXd oracle = noise.sigma * noise.sigma * m.inverse();
  CHECK((cov - oracle).norm() < 1e-10 * oracle.norm());

  // A 0/1 survival mask must reproduce the covariance of the reduced design.
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(20);
  mask(3) = mask(11) = 0.0;
  Eigen::MatrixXd dropped = oed::dropout_covariance(frf, d, mask, noise);
  oed::Design reduced = d;
  reduced.weights(3) = reduced.weights(11) = 0.0;
  CHECK((dropped - oed::covariance(frf, reduced, noise)).norm() < 1e-12);
}

TEST_CASE("covariance matches a monte carlo estimate") {
  auto rng = oed::make_engine(7, "inverse", 5);
  auto frf = make_frf(random_matrix(rng, 12, 2));
  oed::Design d;
  d.weights = Eigen::VectorXd::Ones(12);
  d.costs = Eigen::VectorXd::Ones(12);
  d.budget = 12.0;
  oed::NoiseModel noise{0.3};
  Eigen::VectorXd theta0 = random_vector(rng, 2);
  Eigen::VectorXd y0 = frf.entries * theta0;

  const int n_rep = 20000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
  for (int r = 0; r < n_rep; ++r) {
    Eigen::VectorXd y = y0;
    for (int i = 0; i < 12; ++i) y(i) += noise.sigma * std_normal(rng);
    Eigen::VectorXd err = oed::wls_estimate(frf, y, d) - theta0;
    acc += err * err.transpose();
  }
  acc /= n_rep;
  Eigen::MatrixXd cov = oed::covariance(frf, d, noise);
  // MC error ~ 1/sqrt(n_rep); 5% relative tolerance is comfortable.
  CHECK((acc - cov).norm() < 0.05 * cov.norm());
}

TEST_CASE("noise variance estimate matches the weighted residual formula") {
  auto rng = oed::make_engine(7, "inverse", 6);
  auto frf = make_frf(random_matrix(rng, 9, 3));
  oed::Design d;
  d.weights = Eigen::VectorXd::Ones(9);
  d.costs = Eigen::VectorXd::Ones(9);
  d.budget = 9.0;
  Eigen::VectorXd survival = Eigen::VectorXd::Ones(9);
  survival(4) = 0.0;
  Eigen::VectorXd y = random_vector(rng, 9);
  Eigen::VectorXd theta =
      oed::wls_estimate(frf, y, d, survival);
  const double s2 =
      oed::estimate_noise_variance(frf, y, d, survival, theta);
  Eigen::VectorXd r = y - frf.entries * theta;
  double oracle = 0.0;
  for (int i = 0; i < 9; ++i) oracle += survival(i) * r(i) * r(i);
  oracle /= (8 - 3);  // n_eff - p
  CHECK(s2 == doctest::Approx(oracle));

  // Too few surviving rows leaves no residual degrees of freedom.
  Eigen::VectorXd tiny = Eigen::VectorXd::Zero(9);
  tiny.head(3) = Eigen::VectorXd::Ones(3);
  Eigen::VectorXd theta3 = oed::wls_estimate(frf, y, d, tiny);
  CHECK_THROWS_AS(oed::estimate_noise_variance(frf, y, d, tiny, theta3),
                  oed::InsufficientDataError);
}

TEST_CASE("logdet agrees with the determinant for small spd matrices") {
  auto rng = oed::make_engine(7, "inverse", 8);
  Eigen::MatrixXd a = random_matrix(rng, 5, 5);
  Eigen::MatrixXd spd = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(5, 5);
  CHECK(oed::logdet_spd(spd) == doctest::Approx(std::log(spd.determinant())));
  Eigen::MatrixXd singular = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(oed::logdet_spd(singular), oed::IllPosedError);
}

TEST_CASE("design feasibility bookkeeping") {
  Eigen::VectorXd costs = Eigen::VectorXd::Ones(4);
  oed::Design d = oed::Design::uniform_feasible(4, costs, 2.0);
  CHECK(d.feasible());
  CHECK(d.total_cost() == doctest::Approx(2.0));
  CHECK_FALSE(d.is_binary());
  d.weights << 1.0, 1.0, 0.0, 0.0;
  CHECK(d.is_binary());
  CHECK(d.feasible());
  d.weights(2) = 1.0;
  CHECK_FALSE(d.feasible());
}

TEST_SUITE_END();
