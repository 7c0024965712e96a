#include "oed/ha.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <vector>

#include "oed/errors.hpp"
#include "oed/rng.hpp"

namespace oed {

namespace {

inline double unit_uniform(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53;
}

// det(M)^{1/p} for a PSD Gram matrix; rank deficiency maps to zero.
double det_root(const Eigen::MatrixXd& M, int p) {
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) return 0.0;
  double logdet = 0.0;
  for (int i = 0; i < p; ++i) {
    const double d = llt.matrixLLT()(i, i);
    if (!(d > 0.0)) return 0.0;
    logdet += 2.0 * std::log(d);
  }
  return std::exp(logdet / p);
}

}  // namespace

MonteCarloCovariance non_asymptotic_covariance_mc(
    const FRFMatrix& frf, const Design& design,
    const Eigen::VectorXd& survival, const NoiseModel& noise, int n_mc,
    std::uint64_t seed) {
  const int n = frf.n_sensors();
  const int p = frf.n_params();
  const double sigma2 = noise.sigma * noise.sigma;

  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(p, p);
  int accepted = 0, rejected = 0;

  for (int s = 0; s < n_mc; ++s) {
    auto rng = make_engine(seed, "nonasym_mask", static_cast<std::uint64_t>(s));
    Eigen::VectorXd u(n);
    for (int i = 0; i < n; ++i)
      u(i) = unit_uniform(rng) < survival(i) ? design.weights(i) : 0.0;
    const Eigen::MatrixXd M = information_matrix(frf, u);
    if (numerical_rank(M) < p) {
      ++rejected;
      continue;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    const Eigen::MatrixXd C =
        sigma2 * llt.solve(Eigen::MatrixXd::Identity(p, p));
    sum += C;
    sumsq += C.cwiseProduct(C);
    ++accepted;
  }

  if (accepted < std::max(1, n_mc / 100))
    throw ConfigError(
        "non_asymptotic_covariance_mc: acceptance rate below 1%; use larger "
        "survival probabilities");

  MonteCarloCovariance out;
  out.accepted = accepted;
  out.rejected = rejected;
  out.mean = sum / accepted;
  const Eigen::MatrixXd var =
      (sumsq / accepted - out.mean.cwiseProduct(out.mean))
          .cwiseMax(0.0);
  out.standard_error = (var / accepted).cwiseSqrt();
  return out;
}

namespace {

std::vector<int> binary_support(const Design& design) {
  std::vector<int> rows;
  for (int i = 0; i < design.size(); ++i)
    if (design.weights(i) >= 0.5) rows.push_back(i);
  return rows;
}

}  // namespace

double ha_criterion_truncated(const FRFMatrix& frf, const Design& design,
                              const HAConfig& ha) {
  if (ha.q < 0.0 || ha.q >= 1.0)
    throw ConfigError("ha_criterion: q must be in [0,1)");
  const int p = frf.n_params();
  const std::vector<int> rows = binary_support(design);
  const int n = static_cast<int>(rows.size());
  const int order = std::min(ha.truncation_order, n);
  if (order < 0) throw ConfigError("ha_criterion: negative truncation order");

  double subsets = 0.0, binom = 1.0;
  for (int k = 0; k <= order; ++k) {
    subsets += binom;
    binom *= double(n - k) / double(k + 1);
    if (subsets > 1e6)
      throw GuardError("ha_criterion_truncated: subset count exceeds 1e6");
  }

  Eigen::MatrixXd M0 = Eigen::MatrixXd::Zero(p, p);
  for (int i : rows)
    M0 += frf.entries.row(i).transpose() * frf.entries.row(i);

  double total = 0.0;
  // Enumerate deletion subsets of each size k via rank-k Gram downdates.
  std::vector<int> comb;
  auto subset_sum = [&](int k) {
    double acc = 0.0;
    comb.assign(k, 0);
    for (int i = 0; i < k; ++i) comb[i] = i;
    if (k == 0) return det_root(M0, p);
    while (true) {
      Eigen::MatrixXd M = M0;
      for (int ci : comb)
        M -= frf.entries.row(rows[ci]).transpose() * frf.entries.row(rows[ci]);
      acc += det_root(M, p);
      int i = k - 1;
      while (i >= 0 && comb[i] == n - k + i) --i;
      if (i < 0) break;
      ++comb[i];
      for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
    return acc;
  };

  for (int k = 0; k <= order; ++k)
    total += std::pow(ha.q, k) * std::pow(1.0 - ha.q, n - k) * subset_sum(k);
  return total;
}

HaMcResult ha_criterion_mc(const FRFMatrix& frf, const Design& design,
                           const HAConfig& ha) {
  if (ha.mc_samples < 1) throw ConfigError("ha_criterion_mc: mc_samples >= 1");
  const int p = frf.n_params();
  const std::vector<int> rows = binary_support(design);

  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < ha.mc_samples; ++s) {
    auto rng = make_engine(ha.seed, "ha_mask", static_cast<std::uint64_t>(s));
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(p, p);
    for (int i : rows)
      if (unit_uniform(rng) >= ha.q)
        M += frf.entries.row(i).transpose() * frf.entries.row(i);
    const double v = det_root(M, p);
    sum += v;
    sumsq += v * v;
  }
  HaMcResult out;
  out.value = sum / ha.mc_samples;
  const double var =
      std::max(0.0, sumsq / ha.mc_samples - out.value * out.value);
  out.standard_error = std::sqrt(var / ha.mc_samples);
  return out;
}

}  // namespace oed
