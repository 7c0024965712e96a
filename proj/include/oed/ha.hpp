#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "oed/inverse.hpp"

namespace oed {

struct HAConfig {
  double q = 0.0;            // scalar failure probability, in [0,1)
  int truncation_order = 0;  // <= n_active - n_theta
  int mc_samples = 10000;
  std::uint64_t seed = 0;
};

struct MonteCarloCovariance {
  Eigen::MatrixXd mean;
  Eigen::MatrixXd standard_error;  // per-entry MC standard error
  int accepted = 0;
  int rejected = 0;  // ill-posed mask draws
};

// (sigma^2/N) sum_n (T^T W Xi_n T)^{-1} over accepted Bernoulli mask draws;
// errors out if the acceptance rate falls below 1%.
MonteCarloCovariance non_asymptotic_covariance_mc(
    const FRFMatrix& frf, const Design& design,
    const Eigen::VectorXd& survival, const NoiseModel& noise, int n_mc,
    std::uint64_t seed);

// Truncated series for E[det(T^T D T)^{1/n_theta}] under a uniform failure
// probability q, enumerating observation-row deletions of the design's
// binary support. Rank-deficient subsets contribute zero.
double ha_criterion_truncated(const FRFMatrix& frf, const Design& design,
                              const HAConfig& ha);

struct HaMcResult {
  double value = 0.0;
  double standard_error = 0.0;
};

// Monte Carlo mean of det(T^T D T)^{1/n_theta} over Bernoulli diagonal
// draws; rank-deficient draws contribute zero.
HaMcResult ha_criterion_mc(const FRFMatrix& frf, const Design& design,
                           const HAConfig& ha);

}  // namespace oed
