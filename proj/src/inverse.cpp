#include "oed/inverse.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>

#include "oed/errors.hpp"
#include "oed/kernels.hpp"

namespace oed {

Design Design::uniform_feasible(int n_y, const Eigen::VectorXd& costs,
                                double budget) {
  Design d;
  d.costs = costs;
  d.budget = budget;
  const double total = costs.sum();
  const double w = std::min(1.0, budget / total);
  d.weights = Eigen::VectorXd::Constant(n_y, w);
  return d;
}

bool Design::is_binary(double tol) const {
  for (int i = 0; i < weights.size(); ++i) {
    const double w = weights(i);
    if (std::min(std::abs(w), std::abs(1.0 - w)) > tol) return false;
  }
  return true;
}

bool Design::feasible() const {
  for (int i = 0; i < weights.size(); ++i)
    if (weights(i) < -1e-12 || weights(i) > 1.0 + 1e-12) return false;
  return total_cost() <= budget + 1e-12;
}

Eigen::MatrixXd information_matrix(const FRFMatrix& frf,
                                   const Eigen::VectorXd& u) {
  const auto& ops = kernels::active();
  const int p = frf.n_params();
  const auto n = static_cast<std::size_t>(frf.n_sensors());
  const Eigen::MatrixXd& T = frf.entries;  // column-major
  Eigen::MatrixXd M(p, p);
  for (int a = 0; a < p; ++a) {
    for (int b = a; b < p; ++b) {
      const double v = ops.dot3(u.data(), T.col(a).data(), T.col(b).data(), n);
      M(a, b) = v;
      M(b, a) = v;
    }
  }
  return M;
}

int numerical_rank(const Eigen::MatrixXd& sym, double eps_rank) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sym);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  int rank = 0;
  for (int k = 0; k < s.size(); ++k)
    if (s(k) > eps_rank * s(0)) ++rank;
  return rank;
}

Eigen::VectorXd wls_estimate(const FRFMatrix& frf, const Eigen::VectorXd& data,
                             const Design& design,
                             const std::optional<Eigen::VectorXd>& mask) {
  const int n = frf.n_sensors();
  const int p = frf.n_params();
  if (data.size() != n)
    throw std::invalid_argument("wls_estimate: data length mismatch");

  Eigen::VectorXd u = design.weights;
  if (mask) u = u.cwiseProduct(*mask);

  // Rank-revealing solve of the row-scaled system.
  Eigen::VectorXd su = u.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd B = su.asDiagonal() * frf.entries;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  qr.setThreshold(1e-10);
  if (qr.rank() < p)
    throw IllPosedError("wls_estimate: effective information matrix rank " +
                            std::to_string(qr.rank()) + " < " +
                            std::to_string(p),
                        static_cast<int>(qr.rank()));
  return qr.solve(su.cwiseProduct(data));
}

namespace {

Eigen::MatrixXd spd_inverse_scaled(const Eigen::MatrixXd& M, double sigma2) {
  const int p = static_cast<int>(M.rows());
  if (numerical_rank(M) < p)
    throw IllPosedError("information matrix rank deficient",
                        numerical_rank(M));
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw IllPosedError("information matrix not positive definite", 0);
  return sigma2 * llt.solve(Eigen::MatrixXd::Identity(p, p));
}

}  // namespace

Eigen::MatrixXd covariance(const FRFMatrix& frf, const Design& design,
                           const NoiseModel& noise) {
  return spd_inverse_scaled(information_matrix(frf, design.weights),
                            noise.sigma * noise.sigma);
}

Eigen::MatrixXd dropout_covariance(const FRFMatrix& frf, const Design& design,
                                   const Eigen::VectorXd& survival,
                                   const NoiseModel& noise) {
  return spd_inverse_scaled(
      information_matrix(frf, design.weights.cwiseProduct(survival)),
      noise.sigma * noise.sigma);
}

double estimate_noise_variance(const FRFMatrix& frf,
                               const Eigen::VectorXd& data,
                               const Design& design,
                               const Eigen::VectorXd& survival,
                               const Eigen::VectorXd& theta_hat) {
  const int n = frf.n_sensors();
  const int p = frf.n_params();
  const Eigen::VectorXd u = design.weights.cwiseProduct(survival);
  int n_eff = 0;
  for (int i = 0; i < n; ++i)
    if (u(i) > 0.0) ++n_eff;
  if (n_eff <= p)
    throw InsufficientDataError(
        "noise variance estimate needs more than n_theta active "
        "observations (n_eff = " +
        std::to_string(n_eff) + ")");
  const Eigen::VectorXd r = data - frf.entries * theta_hat;
  const double wrss = kernels::active().wrss(u.data(), r.data(),
                                             static_cast<std::size_t>(n));
  return wrss / static_cast<double>(n_eff - p);
}

double logdet_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success)
    throw IllPosedError("logdet: matrix not positive definite", 0);
  const auto& L = llt.matrixLLT();
  double acc = 0.0;
  for (int i = 0; i < L.rows(); ++i) acc += std::log(L(i, i));
  return 2.0 * acc;
}

}  // namespace oed
