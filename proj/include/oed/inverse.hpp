#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "oed/model.hpp"

namespace oed {

struct NoiseModel {
  double sigma = 1.0;  // noise std dev, covariance sigma^2 I
};

struct Design {
  Eigen::VectorXd weights;  // in [0,1]
  Eigen::VectorXd costs;    // > 0
  double budget = 0.0;

  static Design uniform_feasible(int n_y, const Eigen::VectorXd& costs,
                                 double budget);

  int size() const { return static_cast<int>(weights.size()); }
  bool is_binary(double tol = 1e-6) const;
  bool feasible() const;
  double total_cost() const { return costs.dot(weights); }
};

enum class ScenarioKind { survival_probabilities, deterministic_masks };

struct ScenarioSet {
  ScenarioKind kind = ScenarioKind::deterministic_masks;
  std::vector<Eigen::VectorXd> entries;  // each length n_y, values in [0,1]
  std::uint64_t seed = 0;
  std::string provenance;

  int size() const { return static_cast<int>(entries.size()); }
};

// Weighted Gram (information) matrix M = sum_i u_i T_i T_i^T with
// u = survival .* weights (survival defaults to all-ones). This is the hot
// loop of the whole library; it runs on the kernels layer.
Eigen::MatrixXd information_matrix(const FRFMatrix& frf,
                                   const Eigen::VectorXd& combined_weights);

// Numerical rank of a symmetric PSD matrix, singular values below
// eps_rank * s_max count as zero.
int numerical_rank(const Eigen::MatrixXd& sym, double eps_rank = 1e-10);

// argmin_theta sum_i m_i w_i (y_i - T_i^T theta)^2, rank-revealing solve.
// Throws IllPosedError when the effective information matrix is rank
// deficient.
Eigen::VectorXd wls_estimate(const FRFMatrix& frf, const Eigen::VectorXd& data,
                             const Design& design,
                             const std::optional<Eigen::VectorXd>& mask = {});

// sigma^2 (T^T W T)^{-1}
Eigen::MatrixXd covariance(const FRFMatrix& frf, const Design& design,
                           const NoiseModel& noise);

// sigma^2 (sum_i s_i w_i T_i T_i^T)^{-1}; s = survival probabilities or a
// realized 0/1 mask.
Eigen::MatrixXd dropout_covariance(const FRFMatrix& frf, const Design& design,
                                   const Eigen::VectorXd& survival,
                                   const NoiseModel& noise);

// Weighted residual mean square with divisor n_eff - n_theta, where n_eff
// counts indices with survival_i * w_i > 0.
double estimate_noise_variance(const FRFMatrix& frf,
                               const Eigen::VectorXd& data,
                               const Design& design,
                               const Eigen::VectorXd& survival,
                               const Eigen::VectorXd& theta_hat);

// log det of an SPD matrix via Cholesky; throws IllPosedError on failure.
double logdet_spd(const Eigen::MatrixXd& m);

}  // namespace oed
