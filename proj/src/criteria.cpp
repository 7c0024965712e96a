#include "oed/criteria.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "oed/errors.hpp"
#include "oed/kernels.hpp"

namespace oed {

Criterion Criterion::classical(NoiseModel n) {
  Criterion c;
  c.kind = CriterionKind::classical_logdet;
  c.noise = n;
  return c;
}

Criterion Criterion::pof(Eigen::VectorXd survival, NoiseModel n) {
  Criterion c;
  c.kind = CriterionKind::pof_logdet;
  c.survival = std::move(survival);
  c.noise = n;
  return c;
}

Criterion Criterion::scenario_avg(ScenarioSet scenarios, NoiseModel n) {
  Criterion c;
  c.kind = CriterionKind::scenario_avg_logdet;
  c.scenarios = std::move(scenarios);
  c.noise = n;
  return c;
}

void Criterion::validate(int n_y) const {
  if ((kind == CriterionKind::pof_logdet) != survival.has_value())
    throw ConfigError("criterion: survival vector present iff kind is pof");
  if ((kind == CriterionKind::scenario_avg_logdet) != scenarios.has_value())
    throw ConfigError("criterion: scenarios present iff kind is scenario_avg");
  if (survival && survival->size() != n_y)
    throw ConfigError("criterion: survival vector length mismatch");
  if (scenarios) {
    if (scenarios->entries.empty())
      throw ConfigError("criterion: empty scenario set");
    for (const auto& s : scenarios->entries)
      if (s.size() != n_y)
        throw ConfigError("criterion: scenario length mismatch");
  }
}

namespace {

// logdet of sigma^2 M^{-1} for one survival vector.
double logdet_term(const FRFMatrix& frf, const Eigen::VectorXd& u,
                   double sigma) {
  const Eigen::MatrixXd M = information_matrix(frf, u);
  const int p = frf.n_params();
  if (numerical_rank(M) < p)
    throw IllPosedError("criterion: information matrix rank deficient",
                        numerical_rank(M));
  return 2.0 * p * std::log(sigma) - logdet_spd(M);
}

// Accumulates -s_i T_i^T M^{-1} T_i into grad (quadratic form over rows,
// expanded over column pairs of T on the kernels layer).
void accumulate_grad_term(const FRFMatrix& frf, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& s, double scale,
                          Eigen::VectorXd& grad) {
  const Eigen::MatrixXd M = information_matrix(frf, u);
  const int p = frf.n_params();
  if (numerical_rank(M) < p)
    throw IllPosedError("criterion gradient: information matrix rank deficient",
                        numerical_rank(M));
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw IllPosedError("criterion gradient: information matrix not SPD", 0);
  const Eigen::MatrixXd B = llt.solve(Eigen::MatrixXd::Identity(p, p));

  const auto& ops = kernels::active();
  const auto n = static_cast<std::size_t>(frf.n_sensors());
  const Eigen::MatrixXd& T = frf.entries;
  Eigen::VectorXd quad = Eigen::VectorXd::Zero(frf.n_sensors());
  for (int a = 0; a < p; ++a) {
    ops.had_fma(B(a, a), T.col(a).data(), T.col(a).data(), quad.data(), n);
    for (int b = a + 1; b < p; ++b)
      ops.had_fma(2.0 * B(a, b), T.col(a).data(), T.col(b).data(), quad.data(),
                  n);
  }
  grad.noalias() += (-scale) * s.cwiseProduct(quad);
}

}  // namespace

double evaluate(const Criterion& criterion, const FRFMatrix& frf,
                const Design& design) {
  criterion.validate(frf.n_sensors());
  const double sigma = criterion.noise.sigma;
  switch (criterion.kind) {
    case CriterionKind::classical_logdet:
      return logdet_term(frf, design.weights, sigma);
    case CriterionKind::pof_logdet:
      return logdet_term(frf, design.weights.cwiseProduct(*criterion.survival),
                         sigma);
    case CriterionKind::scenario_avg_logdet: {
      double acc = 0.0;
      for (const auto& mask : criterion.scenarios->entries)
        acc += logdet_term(frf, design.weights.cwiseProduct(mask), sigma);
      return acc / criterion.scenarios->size();
    }
  }
  return 0.0;
}

Eigen::VectorXd gradient(const Criterion& criterion, const FRFMatrix& frf,
                         const Design& design) {
  criterion.validate(frf.n_sensors());
  const int n_y = frf.n_sensors();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_y);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n_y);
  switch (criterion.kind) {
    case CriterionKind::classical_logdet:
      accumulate_grad_term(frf, design.weights, ones, 1.0, grad);
      break;
    case CriterionKind::pof_logdet:
      accumulate_grad_term(frf,
                           design.weights.cwiseProduct(*criterion.survival),
                           *criterion.survival, 1.0, grad);
      break;
    case CriterionKind::scenario_avg_logdet: {
      const double scale = 1.0 / criterion.scenarios->size();
      for (const auto& mask : criterion.scenarios->entries)
        accumulate_grad_term(frf, design.weights.cwiseProduct(mask), mask,
                             scale, grad);
      break;
    }
  }
  return grad;
}

double double_well(const Design& design) {
  return kernels::active().double_well(
      design.weights.data(), static_cast<std::size_t>(design.size()));
}

Eigen::VectorXd double_well_gradient(const Design& design) {
  return Eigen::VectorXd::Ones(design.size()) - 2.0 * design.weights;
}

}  // namespace oed
