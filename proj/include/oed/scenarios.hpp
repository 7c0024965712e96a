#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <random>

#include "oed/inverse.hpp"

namespace oed {

struct PoFMap {
  Eigen::VectorXd q;  // per-sensor failure probability, in [0,1]

  Eigen::VectorXd survival() const {
    return Eigen::VectorXd::Ones(q.size()) - q;
  }
};

struct ClippingConfig {
  double threshold = 0.0;  // acceleration units
  Eigen::VectorXd force_mean;
  Eigen::MatrixXd force_covariance;  // PSD
  int n_realizations = 100;
  std::uint64_t seed = 0;
};

// n_y deterministic masks, mask j zeroing sensor j.
ScenarioSet one_out_scenarios(int n_y);

// All masks with exactly k zeros, lexicographic order; guard C(n_y,k) <= 1e6.
ScenarioSet k_out_scenarios(int n_y, int k);

// n_samps Bernoulli masks, entry i zero with probability q_i. Scenario j
// draws from its own stream derived from (seed, j), so the set is identical
// regardless of parallelism.
ScenarioSet bernoulli_scenarios(const PoFMap& pof, int n_samps,
                                std::uint64_t seed);

// Per-sensor failure probability from the tier level of the sensor's node.
PoFMap tiered_pof(const StructuralModel& model, const FRFMatrix& frf,
                  const std::map<int, double>& level_rule);

struct ClippingResult {
  ScenarioSet scenarios;
  Eigen::VectorXd occurrence;  // per-sensor dropout fraction over realizations
};

// Steady-state harmonic clipping: for each force draw theta ~ N(mean, cov),
// sensor i drops out iff |T_i^T theta| > threshold.
ClippingResult clipping_scenarios(const FRFMatrix& frf,
                                  const ClippingConfig& clip);

// Scales an isotropic force covariance by bisection until sensors at
// `target_level` clip in at least `target_rate` of the realizations.
double tune_force_scale(const FRFMatrix& frf, const StructuralModel& model,
                        const ClippingConfig& clip, int target_level,
                        double target_rate);

// Draw from N(mean, cov) with a PSD covariance (eigendecomposition square
// root); deterministic given the engine state.
Eigen::VectorXd mvnormal_draw(const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& cov_sqrt,
                              std::mt19937_64& rng);
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov);

// Compact CSV `scenario_id,sensor_id,value` and a JSON summary.
void write_scenarios_csv(const ScenarioSet& set, std::ostream& out);
void write_scenarios_summary_json(const ScenarioSet& set, std::ostream& out);

}  // namespace oed
