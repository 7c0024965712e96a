#include "oed/postproc.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <ostream>

#include "nlohmann/json.hpp"
#include "oed/errors.hpp"
#include "oed/parallel.hpp"
#include "oed/rng.hpp"
#include "oed/scenarios.hpp"

namespace oed {

std::string to_string(Metric m) {
  switch (m) {
    case Metric::logdet: return "logdet";
    case Metric::empirical_mse: return "empirical_mse";
    case Metric::empirical_pmse: return "empirical_pmse";
  }
  return "logdet";
}

std::string to_string(IllPosedPolicy p) {
  switch (p) {
    case IllPosedPolicy::exclude: return "exclude";
    case IllPosedPolicy::zero: return "zero";
    case IllPosedPolicy::error: return "error";
  }
  return "exclude";
}

IllPosedPolicy illposed_policy_from_string(const std::string& s) {
  if (s == "exclude") return IllPosedPolicy::exclude;
  if (s == "zero") return IllPosedPolicy::zero;
  if (s == "error") return IllPosedPolicy::error;
  throw ConfigError("unknown ill-posed policy: " + s);
}

void PerformanceReport::finalize() {
  std::vector<double> included;
  included.reserve(per_scenario.size());
  for (double v : per_scenario)
    if (!std::isnan(v)) included.push_back(v);
  if (included.empty()) {
    mean = median = worst = std::numeric_limits<double>::quiet_NaN();
    return;
  }
  mean = std::accumulate(included.begin(), included.end(), 0.0) /
         included.size();
  worst = *std::max_element(included.begin(), included.end());
  std::sort(included.begin(), included.end());
  const std::size_t n = included.size();
  median = n % 2 ? included[n / 2]
                 : 0.5 * (included[n / 2 - 1] + included[n / 2]);
}

std::uint64_t mask_content_hash(const Eigen::VectorXd& mask) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int i = 0; i < mask.size(); ++i) {
    std::uint64_t bits;
    const double v = mask(i);
    std::memcpy(&bits, &v, sizeof(bits));
    h = (h ^ bits) * 0x100000001b3ULL;
  }
  return h;
}

PerformanceReport logdet_over_scenarios(const FRFMatrix& frf,
                                        const Design& design,
                                        const ScenarioSet& scenarios,
                                        const NoiseModel& noise,
                                        bool fractional_renorm,
                                        IllPosedPolicy policy) {
  if (scenarios.entries.empty())
    throw ConfigError("logdet_over_scenarios: empty scenario set");
  const int p = frf.n_params();
  const double sigma2 = noise.sigma * noise.sigma;
  const double pre_sum = design.weights.sum();

  PerformanceReport report;
  report.metric = Metric::logdet;
  report.policy = policy;
  report.seed = scenarios.seed;
  report.per_scenario.assign(scenarios.size(), 0.0);

  parallel_for(scenarios.size(), [&](int j) {
    Eigen::VectorXd u = design.weights.cwiseProduct(scenarios.entries[j]);
    if (fractional_renorm && u.sum() > 0.0) u *= pre_sum / u.sum();
    const Eigen::MatrixXd M = information_matrix(frf, u);
    if (numerical_rank(M) < p) {
      switch (policy) {
        case IllPosedPolicy::error:
          throw IllPosedError("scenario " + std::to_string(j) +
                                  " makes the inverse problem ill-posed",
                              numerical_rank(M));
        case IllPosedPolicy::zero:
          report.per_scenario[j] = 0.0;
          break;
        case IllPosedPolicy::exclude:
        default:
          report.per_scenario[j] = std::numeric_limits<double>::quiet_NaN();
          break;
      }
    } else {
      report.per_scenario[j] = p * std::log(sigma2) - logdet_spd(M);
    }
  });
  for (double v : report.per_scenario)
    if (std::isnan(v)) ++report.excluded_count;

  report.no_failure_value =
      p * std::log(sigma2) - logdet_spd(information_matrix(frf, design.weights));
  report.finalize();
  return report;
}

namespace {

// Shared core: mean of ||theta_hat - theta0||^2 (and optionally the
// prediction analogue) over noise draws. Fractional weights act as a
// fraction of repeated measurements, so the effective noise std at sensor i
// is sigma/sqrt(u_i) and the weighted residual contribution has std
// sigma*sqrt(u_i); this keeps the simulated estimator covariance equal to
// sigma^2 (T^T U T)^{-1}. For the linear model the estimator error is
// M^{-1} T^T (sqrt(u) .* eps), independent of theta0.
struct MseAccumulator {
  double mse = 0.0;
  double pmse = 0.0;
};

MseAccumulator empirical_core(const FRFMatrix& frf, const Eigen::VectorXd& u,
                              const NoiseModel& noise, int n_test,
                              std::uint64_t stream_seed) {
  const int n = frf.n_sensors();
  const int p = frf.n_params();
  const Eigen::MatrixXd M = information_matrix(frf, u);
  if (numerical_rank(M) < p)
    throw IllPosedError("empirical MSE: design (with mask) ill-posed",
                        numerical_rank(M));
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  const Eigen::VectorXd sqrt_u = u.cwiseSqrt();

  MseAccumulator acc;
  for (int t = 0; t < n_test; ++t) {
    auto rng = make_engine(stream_seed, "noise", static_cast<std::uint64_t>(t));
    Eigen::VectorXd eps(n);
    for (int i = 0; i < n; ++i) {
      const double u1 = std::max(
          double(rng() >> 11) * 0x1.0p-53, 1e-300);
      const double u2 = double(rng() >> 11) * 0x1.0p-53;
      eps(i) = noise.sigma * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * M_PI * u2);
    }
    const Eigen::VectorXd rhs =
        frf.entries.transpose() * sqrt_u.cwiseProduct(eps);
    const Eigen::VectorXd err = llt.solve(rhs);
    acc.mse += err.squaredNorm();
    acc.pmse += (frf.entries * err).squaredNorm();
  }
  acc.mse /= n_test;
  acc.pmse /= n_test;
  return acc;
}

}  // namespace

double empirical_mse(const FRFMatrix& frf, const Design& design,
                     const Eigen::VectorXd& theta0, const NoiseModel& noise,
                     int n_test, std::uint64_t seed,
                     const std::optional<Eigen::VectorXd>& mask) {
  if (n_test < 1) throw ConfigError("empirical_mse: n_test must be >= 1");
  (void)theta0;  // estimator error is theta0-independent for the linear model
  Eigen::VectorXd u = design.weights;
  if (mask) u = u.cwiseProduct(*mask);
  return empirical_core(frf, u, noise, n_test, derive_seed(seed, "mse")).mse;
}

double empirical_pmse(const FRFMatrix& frf, const Design& design,
                      const Eigen::VectorXd& theta0, const NoiseModel& noise,
                      int n_test, std::uint64_t seed,
                      const std::optional<Eigen::VectorXd>& mask) {
  if (n_test < 1) throw ConfigError("empirical_pmse: n_test must be >= 1");
  (void)theta0;
  Eigen::VectorXd u = design.weights;
  if (mask) u = u.cwiseProduct(*mask);
  return empirical_core(frf, u, noise, n_test, derive_seed(seed, "mse")).pmse;
}

MseFailureReport mse_over_failures(const FRFMatrix& frf, const Design& design,
                                   const ScenarioSet& scenarios,
                                   const NominalParameterDistribution& dist,
                                   const NoiseModel& noise, int n_test,
                                   std::uint64_t seed, IllPosedPolicy policy) {
  if (scenarios.entries.empty())
    throw ConfigError("mse_over_failures: empty scenario set");
  MseFailureReport out;
  out.mse.metric = Metric::empirical_mse;
  out.pmse.metric = Metric::empirical_pmse;
  out.mse.policy = out.pmse.policy = policy;
  out.mse.seed = out.pmse.seed = seed;
  out.mse.per_scenario.assign(scenarios.size(), 0.0);
  out.pmse.per_scenario.assign(scenarios.size(), 0.0);

  parallel_for(scenarios.size(), [&](int j) {
    const Eigen::VectorXd& mask = scenarios.entries[j];
    const Eigen::VectorXd u = design.weights.cwiseProduct(mask);
    const Eigen::MatrixXd M = information_matrix(frf, u);
    if (numerical_rank(M) < frf.n_params()) {
      double v;
      switch (policy) {
        case IllPosedPolicy::error:
          throw IllPosedError("scenario " + std::to_string(j) +
                                  " makes the inverse problem ill-posed",
                              numerical_rank(M));
        case IllPosedPolicy::zero:
          v = 0.0;
          break;
        case IllPosedPolicy::exclude:
        default:
          v = std::numeric_limits<double>::quiet_NaN();
          break;
      }
      out.mse.per_scenario[j] = v;
      out.pmse.per_scenario[j] = v;
      return;
    }

    // Noise streams keyed on the mask content, so duplicate scenarios yield
    // identical values no matter where they sit in the set.
    const std::uint64_t scen_seed =
        derive_seed(seed, "mse_scenario", mask_content_hash(mask));
    double mse_acc = 0.0, pmse_acc = 0.0;
    for (int didx = 0; didx < dist.n_draws; ++didx) {
      const auto acc = empirical_core(
          frf, u, noise, n_test,
          derive_seed(scen_seed, "theta0_draw", didx));
      mse_acc += acc.mse;
      pmse_acc += acc.pmse;
    }
    out.mse.per_scenario[j] = mse_acc / dist.n_draws;
    out.pmse.per_scenario[j] = pmse_acc / dist.n_draws;
  });
  for (double v : out.mse.per_scenario)
    if (std::isnan(v)) {
      ++out.mse.excluded_count;
      ++out.pmse.excluded_count;
    }

  const auto base =
      empirical_core(frf, design.weights, noise,
                     std::max(n_test, 1000), derive_seed(seed, "no_failure"));
  out.mse.no_failure_value = base.mse;
  out.pmse.no_failure_value = base.pmse;
  out.mse.finalize();
  out.pmse.finalize();
  return out;
}

std::vector<Design> random_designs(int n_y, int support_size, int count,
                                   std::uint64_t seed, RandomDesignKind kind,
                                   const Eigen::VectorXd& costs,
                                   double budget) {
  if (support_size > n_y)
    throw ConfigError("random_designs: support_size > n_y");
  std::vector<Design> designs;
  designs.reserve(count);
  for (int k = 0; k < count; ++k) {
    auto rng = make_engine(seed, "random_design", static_cast<std::uint64_t>(k));
    // Support drawn without replacement (partial Fisher-Yates).
    std::vector<int> idx(n_y);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = 0; i < support_size; ++i) {
      const int j = i + static_cast<int>(rng() % (n_y - i));
      std::swap(idx[i], idx[j]);
    }
    Design d;
    d.costs = costs;
    d.budget = budget;
    d.weights = Eigen::VectorXd::Zero(n_y);
    if (kind == RandomDesignKind::binary) {
      for (int i = 0; i < support_size; ++i) d.weights(idx[i]) = 1.0;
    } else {
      double sum = 0.0;
      for (int i = 0; i < support_size; ++i) {
        const double w = double(rng() >> 11) * 0x1.0p-53;
        d.weights(idx[i]) = w;
        sum += w;
      }
      const double target = support_size * budget / costs.sum();
      if (sum > 0.0)
        for (int i = 0; i < support_size; ++i)
          d.weights(idx[i]) = std::min(1.0, d.weights(idx[i]) * target / sum);
    }
    designs.push_back(std::move(d));
  }
  return designs;
}

void write_report_json(const PerformanceReport& report, std::ostream& out) {
  nlohmann::json j;
  j["metric"] = to_string(report.metric);
  j["policy"] = to_string(report.policy);
  j["excluded_count"] = report.excluded_count;
  j["mean"] = report.mean;
  j["median"] = report.median;
  j["worst"] = report.worst;
  j["no_failure_value"] = report.no_failure_value;
  j["seed"] = report.seed;
  j["config_hash"] = report.config_hash;
  j["per_scenario"] = nlohmann::json::array();
  for (double v : report.per_scenario)
    j["per_scenario"].push_back(std::isnan(v) ? nlohmann::json() : nlohmann::json(v));
  out << j.dump(2) << "\n";
}

void write_report_csv(const PerformanceReport& report, std::ostream& out) {
  out << "scenario_id,metric,value\n";
  out.precision(17);
  const std::string name = to_string(report.metric);
  for (std::size_t j = 0; j < report.per_scenario.size(); ++j) {
    out << j << "," << name << ",";
    if (std::isnan(report.per_scenario[j]))
      out << "excluded";
    else
      out << report.per_scenario[j];
    out << "\n";
  }
}

void write_report_summary_csv(const PerformanceReport& report,
                              std::ostream& out) {
  out << "statistic,value\n";
  out.precision(17);
  out << "mean," << report.mean << "\n";
  out << "median," << report.median << "\n";
  out << "worst," << report.worst << "\n";
  out << "no_failure," << report.no_failure_value << "\n";
  out << "excluded_count," << report.excluded_count << "\n";
}

}  // namespace oed
