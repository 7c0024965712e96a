#include <cmath>

#include "doctest.h"
#include "oed/criteria.hpp"
#include "oed/errors.hpp"
#include "oed/postproc.hpp"
#include "oed/rng.hpp"
#include "oed/scenarios.hpp"

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

oed::Design full_design(int n) {
  oed::Design d;
  d.weights = Eigen::VectorXd::Ones(n);
  d.costs = Eigen::VectorXd::Ones(n);
  d.budget = static_cast<double>(n);
  return d;
}

}  // namespace

TEST_SUITE_BEGIN("postproc");

TEST_CASE("per-scenario logdet matches per-mask criterion evaluation") {
  auto rng = oed::make_engine(31, "postproc", 0);
  auto frf = make_frf(random_matrix(rng, 10, 3));
  auto d = full_design(10);
  oed::NoiseModel noise{1.3};
  auto set = oed::one_out_scenarios(10);
  auto report = oed::logdet_over_scenarios(frf, d, set, noise);
  REQUIRE(report.per_scenario.size() == 10);
  for (int j = 0; j < 10; ++j) {
    const double oracle = oed::evaluate(
        oed::Criterion::pof(set.entries[j], noise), frf, d);
    CHECK(report.per_scenario[j] == doctest::Approx(oracle));
  }
  CHECK(report.no_failure_value ==
        doctest::Approx(oed::evaluate(oed::Criterion::classical(noise), frf, d)));
  CHECK(report.worst >= report.median);
  CHECK(report.excluded_count == 0);
}

TEST_CASE("ill-posed policies") {
  // 3 sensors, 2 params, need both surviving groups; dropping sensor 0
  // leaves rank 1.
  Eigen::MatrixXd t(3, 2);
  t << 1.0, 0.0, 0.0, 1.0, 0.0, 2.0;
  auto frf = make_frf(t);
  auto d = full_design(3);
  auto set = oed::one_out_scenarios(3);

  auto ex = oed::logdet_over_scenarios(frf, d, set, {}, false,
                                       oed::IllPosedPolicy::exclude);
  CHECK(ex.excluded_count == 1);
  CHECK(std::isnan(ex.per_scenario[0]));
  CHECK_FALSE(std::isnan(ex.mean));

  auto ze = oed::logdet_over_scenarios(frf, d, set, {}, false,
                                       oed::IllPosedPolicy::zero);
  CHECK(ze.excluded_count == 0);
  CHECK(ze.per_scenario[0] == 0.0);

  CHECK_THROWS_AS(oed::logdet_over_scenarios(frf, d, set, {}, false,
                                             oed::IllPosedPolicy::error),
                  oed::IllPosedError);
}

TEST_CASE("fractional renormalization restores the weight total") {
  auto rng = oed::make_engine(31, "postproc", 1);
  auto frf = make_frf(random_matrix(rng, 8, 2));
  oed::Design d = full_design(8);
  d.weights *= 0.5;
  auto set = oed::one_out_scenarios(8);
  auto plain = oed::logdet_over_scenarios(frf, d, set, {}, false);
  auto renorm = oed::logdet_over_scenarios(frf, d, set, {}, true);
  // Renormalized designs carry more total weight per scenario, so more
  // information: smaller logdet everywhere.
  for (int j = 0; j < 8; ++j)
    CHECK(renorm.per_scenario[j] < plain.per_scenario[j]);
}

TEST_CASE("empirical mse converges to the covariance trace") {
  auto rng = oed::make_engine(31, "postproc", 2);
  auto frf = make_frf(random_matrix(rng, 12, 2));
  auto d = full_design(12);
  oed::NoiseModel noise{0.5};
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(2);
  const double mse =
      oed::empirical_mse(frf, d, theta0, noise, 40000, 12345);
  Eigen::MatrixXd cov = oed::covariance(frf, d, noise);
  CHECK(mse == doctest::Approx(cov.trace()).epsilon(0.03));

  const double pmse =
      oed::empirical_pmse(frf, d, theta0, noise, 40000, 12345);
  const double pmse_oracle = (frf.entries * cov * frf.entries.transpose()).trace();
  CHECK(pmse == doctest::Approx(pmse_oracle).epsilon(0.03));

  // The identity holds for fractional weights too: a weight is a fraction of
  // repeated measurements, scaling the effective precision.
  oed::Design frac = d;
  for (int i = 0; i < 12; ++i) frac.weights(i) = 0.3 + 0.05 * i;
  const double frac_mse =
      oed::empirical_mse(frf, frac, theta0, noise, 40000, 777);
  CHECK(frac_mse ==
        doctest::Approx(oed::covariance(frf, frac, noise).trace()).epsilon(0.03));
}

TEST_CASE("masked empirical mse equals the reduced-design value") {
  auto rng = oed::make_engine(31, "postproc", 3);
  auto frf = make_frf(random_matrix(rng, 10, 3));
  auto d = full_design(10);
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(10);
  mask(2) = mask(6) = 0.0;
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(3);
  const double masked =
      oed::empirical_mse(frf, d, theta0, {}, 50, 99, mask);
  oed::Design reduced = d;
  reduced.weights(2) = reduced.weights(6) = 0.0;
  const double direct = oed::empirical_mse(frf, reduced, theta0, {}, 50, 99);
  CHECK(masked == doctest::Approx(direct));
}

TEST_CASE("duplicate masks get identical mse values") {
  auto rng = oed::make_engine(31, "postproc", 4);
  auto frf = make_frf(random_matrix(rng, 9, 2));
  auto d = full_design(9);
  oed::ScenarioSet set;
  Eigen::VectorXd mask = Eigen::VectorXd::Ones(9);
  mask(4) = 0.0;
  set.entries = {mask, Eigen::VectorXd::Ones(9), mask};
  oed::NominalParameterDistribution dist;
  dist.mean = Eigen::VectorXd::Zero(2);
  dist.covariance = Eigen::MatrixXd::Identity(2, 2);
  dist.n_draws = 3;
  auto rep = oed::mse_over_failures(frf, d, set, dist, {}, 4, 7);
  CHECK(rep.mse.per_scenario[0] == rep.mse.per_scenario[2]);
  CHECK(rep.pmse.per_scenario[0] == rep.pmse.per_scenario[2]);
  CHECK(rep.mse.per_scenario[0] != rep.mse.per_scenario[1]);
}

TEST_CASE("random designs respect support, feasibility, determinism") {
  Eigen::VectorXd costs = Eigen::VectorXd::Ones(20);
  auto frac = oed::random_designs(20, 8, 25, 5, oed::RandomDesignKind::fractional,
                                  costs, 8.0);
  REQUIRE(frac.size() == 25);
  for (const auto& d : frac) {
    int support = 0;
    for (int i = 0; i < 20; ++i) support += d.weights(i) > 0.0;
    CHECK(support == 8);
    CHECK(d.feasible());
  }
  auto bin = oed::random_designs(20, 8, 10, 5, oed::RandomDesignKind::binary,
                                 costs, 8.0);
  for (const auto& d : bin) {
    CHECK(d.is_binary());
    CHECK(d.weights.sum() == doctest::Approx(8.0));
  }
  auto again = oed::random_designs(20, 8, 25, 5,
                                   oed::RandomDesignKind::fractional, costs, 8.0);
  CHECK((frac[13].weights - again[13].weights).norm() == 0.0);
}

TEST_SUITE_END();
