#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oed/inverse.hpp"

namespace oed {

enum class IllPosedPolicy { exclude, zero, error };
enum class Metric { logdet, empirical_mse, empirical_pmse };

std::string to_string(Metric m);
std::string to_string(IllPosedPolicy p);
IllPosedPolicy illposed_policy_from_string(const std::string& s);

struct PerformanceReport {
  Metric metric = Metric::logdet;
  std::vector<double> per_scenario;  // NaN marks an excluded scenario
  int excluded_count = 0;
  IllPosedPolicy policy = IllPosedPolicy::exclude;
  double mean = 0.0;
  double median = 0.0;
  double worst = 0.0;  // max over included values
  double no_failure_value = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  void finalize();  // computes mean/median/worst from per_scenario
};

// Per-scenario logdet of the dropout covariance. With fractional_renorm the
// surviving weights are rescaled so their sum matches the pre-failure sum.
PerformanceReport logdet_over_scenarios(const FRFMatrix& frf,
                                        const Design& design,
                                        const ScenarioSet& scenarios,
                                        const NoiseModel& noise,
                                        bool fractional_renorm = false,
                                        IllPosedPolicy policy =
                                            IllPosedPolicy::exclude);

// Monte Carlo estimate of E||theta_hat - theta0||^2 over n_test noise draws;
// exact-solve path, reproducible given seed. A fractional weight w_i scales
// the effective measurement precision at sensor i (fraction of repeated
// measurements), so the expected value is trace of the design covariance for
// any feasible weights.
double empirical_mse(const FRFMatrix& frf, const Design& design,
                     const Eigen::VectorXd& theta0, const NoiseModel& noise,
                     int n_test, std::uint64_t seed,
                     const std::optional<Eigen::VectorXd>& mask = {});

double empirical_pmse(const FRFMatrix& frf, const Design& design,
                      const Eigen::VectorXd& theta0, const NoiseModel& noise,
                      int n_test, std::uint64_t seed,
                      const std::optional<Eigen::VectorXd>& mask = {});

struct NominalParameterDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;  // SPD
  int n_draws = 100;
  std::uint64_t seed = 0;
};

struct MseFailureReport {
  PerformanceReport mse;
  PerformanceReport pmse;
};

// For each scenario, averages empirical MSE/PMSE over n_draws nominal
// parameter samples; noise streams are derived from the scenario content so
// duplicate masks give identical values.
MseFailureReport mse_over_failures(const FRFMatrix& frf, const Design& design,
                                   const ScenarioSet& scenarios,
                                   const NominalParameterDistribution& dist,
                                   const NoiseModel& noise, int n_test,
                                   std::uint64_t seed,
                                   IllPosedPolicy policy =
                                       IllPosedPolicy::exclude);

enum class RandomDesignKind { fractional, binary };

// Random baseline designs on a random support of the given size. Fractional
// weights are uniform draws rescaled so the weight sum equals
// support_size * budget / total_cost; binary designs get unit weights.
std::vector<Design> random_designs(int n_y, int support_size, int count,
                                   std::uint64_t seed, RandomDesignKind kind,
                                   const Eigen::VectorXd& costs,
                                   double budget);

std::uint64_t mask_content_hash(const Eigen::VectorXd& mask);

// Report export: full JSON, per-scenario CSV `scenario_id,metric,value`, and
// a summary CSV with mean/median/worst/no-failure rows.
void write_report_json(const PerformanceReport& report, std::ostream& out);
void write_report_csv(const PerformanceReport& report, std::ostream& out);
void write_report_summary_csv(const PerformanceReport& report,
                              std::ostream& out);

}  // namespace oed
