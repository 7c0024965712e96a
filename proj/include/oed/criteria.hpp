#pragma once

#include <Eigen/Dense>
#include <optional>

#include "oed/inverse.hpp"

namespace oed {

enum class CriterionKind { classical_logdet, pof_logdet, scenario_avg_logdet };

// Scalar OED criterion: log det of the (dropout) parameter covariance,
// either for a single survival vector or averaged over a scenario set.
struct Criterion {
  CriterionKind kind = CriterionKind::classical_logdet;
  std::optional<Eigen::VectorXd> survival;   // pof_logdet only
  std::optional<ScenarioSet> scenarios;      // scenario_avg_logdet only
  NoiseModel noise;

  static Criterion classical(NoiseModel n = {});
  static Criterion pof(Eigen::VectorXd survival, NoiseModel n = {});
  static Criterion scenario_avg(ScenarioSet scenarios, NoiseModel n = {});

  void validate(int n_y) const;
};

// logdet C = n_theta log sigma^2 - logdet M, from the Cholesky factor of the
// information matrix; scenario_avg averages over scenarios in index order.
double evaluate(const Criterion& criterion, const FRFMatrix& frf,
                const Design& design);

// d/dw_i logdet(sigma^2 M(s)^{-1}) = -s_i T_i^T M(s)^{-1} T_i.
Eigen::VectorXd gradient(const Criterion& criterion, const FRFMatrix& frf,
                         const Design& design);

double double_well(const Design& design);
Eigen::VectorXd double_well_gradient(const Design& design);

}  // namespace oed
