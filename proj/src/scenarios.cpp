#include "oed/scenarios.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstring>
#include <ostream>

#include "nlohmann/json.hpp"
#include "oed/errors.hpp"
#include "oed/rng.hpp"

namespace oed {

ScenarioSet one_out_scenarios(int n_y) {
  if (n_y < 1) throw ConfigError("one_out_scenarios: n_y must be >= 1");
  ScenarioSet set;
  set.kind = ScenarioKind::deterministic_masks;
  set.provenance = "one_out";
  set.entries.reserve(n_y);
  for (int j = 0; j < n_y; ++j) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(n_y);
    mask(j) = 0.0;
    set.entries.push_back(std::move(mask));
  }
  return set;
}

ScenarioSet k_out_scenarios(int n_y, int k) {
  if (k < 0 || k > n_y) throw ConfigError("k_out_scenarios: bad k");
  double count = 1.0;
  for (int i = 0; i < k; ++i) count *= double(n_y - i) / double(i + 1);
  if (count > 1e6)
    throw GuardError("k_out_scenarios: C(n_y,k) exceeds 1e6; sample instead");

  ScenarioSet set;
  set.kind = ScenarioKind::deterministic_masks;
  set.provenance = "k_out(k=" + std::to_string(k) + ")";
  std::vector<int> comb(k);
  for (int i = 0; i < k; ++i) comb[i] = i;
  while (true) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(n_y);
    for (int i : comb) mask(i) = 0.0;
    set.entries.push_back(std::move(mask));
    if (k == 0) break;
    // next lexicographic combination
    int i = k - 1;
    while (i >= 0 && comb[i] == n_y - k + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
  }
  return set;
}

namespace {

inline double unit_uniform(std::mt19937_64& rng) {
  // 53-bit mantissa draw; avoids distribution objects so the stream is
  // identical across standard library implementations.
  return double(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

ScenarioSet bernoulli_scenarios(const PoFMap& pof, int n_samps,
                                std::uint64_t seed) {
  if (n_samps < 1) throw ConfigError("bernoulli_scenarios: n_samps >= 1");
  const int n_y = static_cast<int>(pof.q.size());
  for (int i = 0; i < n_y; ++i)
    if (pof.q(i) < 0.0 || pof.q(i) > 1.0)
      throw ConfigError("bernoulli_scenarios: q outside [0,1]");

  ScenarioSet set;
  set.kind = ScenarioKind::deterministic_masks;
  set.seed = seed;
  set.provenance = "bernoulli";
  set.entries.resize(n_samps);
  for (int j = 0; j < n_samps; ++j) {
    auto rng = make_engine(seed, "bernoulli", static_cast<std::uint64_t>(j));
    Eigen::VectorXd mask(n_y);
    for (int i = 0; i < n_y; ++i)
      mask(i) = unit_uniform(rng) < pof.q(i) ? 0.0 : 1.0;
    set.entries[j] = std::move(mask);
  }
  return set;
}

PoFMap tiered_pof(const StructuralModel& model, const FRFMatrix& frf,
                  const std::map<int, double>& level_rule) {
  const int n_y = frf.n_sensors();
  PoFMap pof;
  pof.q.resize(n_y);
  for (int i = 0; i < n_y; ++i) {
    const int level = model.node_level[frf.sensor_labels[i].node];
    auto it = level_rule.find(level);
    if (it == level_rule.end())
      throw ConfigError("tiered_pof: no rule for level " +
                        std::to_string(level));
    if (it->second < 0.0 || it->second > 1.0)
      throw ConfigError("tiered_pof: q outside [0,1]");
    pof.q(i) = it->second;
  }
  return pof;
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw ConfigError("psd_sqrt: eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues();
  const double tol = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) < -tol)
      throw ConfigError("force covariance is not positive semidefinite");
    lam(i) = std::max(0.0, lam(i));
  }
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

Eigen::VectorXd mvnormal_draw(const Eigen::VectorXd& mean,
                              const Eigen::MatrixXd& cov_sqrt,
                              std::mt19937_64& rng) {
  Eigen::VectorXd z(cov_sqrt.cols());
  for (int i = 0; i < z.size(); ++i) {
    // Box-Muller on explicit 53-bit uniforms, one pair per normal, for a
    // stream that does not depend on the standard library.
    const double u1 = std::max(unit_uniform(rng), 1e-300);
    const double u2 = unit_uniform(rng);
    z(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return mean + cov_sqrt * z;
}

ClippingResult clipping_scenarios(const FRFMatrix& frf,
                                  const ClippingConfig& clip) {
  if (!(clip.threshold > 0.0))
    throw ConfigError("clipping: threshold must be > 0");
  if (clip.n_realizations < 1)
    throw ConfigError("clipping: n_realizations must be >= 1");
  const int n_y = frf.n_sensors();
  const Eigen::MatrixXd A = psd_sqrt(clip.force_covariance);

  ClippingResult out;
  out.scenarios.kind = ScenarioKind::deterministic_masks;
  out.scenarios.seed = clip.seed;
  out.scenarios.provenance = "clipping";
  out.scenarios.entries.resize(clip.n_realizations);
  out.occurrence = Eigen::VectorXd::Zero(n_y);

  for (int j = 0; j < clip.n_realizations; ++j) {
    auto rng = make_engine(clip.seed, "clipping_force",
                           static_cast<std::uint64_t>(j));
    const Eigen::VectorXd theta = mvnormal_draw(clip.force_mean, A, rng);
    const Eigen::VectorXd resp = frf.entries * theta;
    Eigen::VectorXd mask(n_y);
    for (int i = 0; i < n_y; ++i) {
      const bool clipped = std::abs(resp(i)) > clip.threshold;
      mask(i) = clipped ? 0.0 : 1.0;
      if (clipped) out.occurrence(i) += 1.0;
    }
    out.scenarios.entries[j] = std::move(mask);
  }
  out.occurrence /= double(clip.n_realizations);
  return out;
}

double tune_force_scale(const FRFMatrix& frf, const StructuralModel& model,
                        const ClippingConfig& clip, int target_level,
                        double target_rate) {
  std::vector<int> level_sensors;
  for (int i = 0; i < frf.n_sensors(); ++i)
    if (model.node_level[frf.sensor_labels[i].node] == target_level)
      level_sensors.push_back(i);
  if (level_sensors.empty())
    throw ConfigError("tune_force_scale: no sensors at target level");

  auto rate_at = [&](double scale) {
    ClippingConfig c = clip;
    c.force_covariance = scale * scale * clip.force_covariance;
    const ClippingResult r = clipping_scenarios(frf, c);
    double acc = 0.0;
    for (int i : level_sensors) acc += r.occurrence(i);
    return acc / level_sensors.size();
  };

  double lo = 1e-6, hi = 1e-6;
  while (rate_at(hi) < target_rate) {
    hi *= 2.0;
    if (hi > 1e18)
      throw ConfigError("tune_force_scale: cannot reach target clip rate");
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (rate_at(mid) >= target_rate)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

void write_scenarios_csv(const ScenarioSet& set, std::ostream& out) {
  out << "scenario_id,sensor_id,value\n";
  out.precision(17);
  for (int j = 0; j < set.size(); ++j)
    for (int i = 0; i < set.entries[j].size(); ++i)
      out << j << "," << i << "," << set.entries[j](i) << "\n";
}

void write_scenarios_summary_json(const ScenarioSet& set, std::ostream& out) {
  nlohmann::json j;
  j["count"] = set.size();
  j["kind"] = set.kind == ScenarioKind::deterministic_masks
                  ? "deterministic_masks"
                  : "survival_probabilities";
  j["seed"] = set.seed;
  j["provenance"] = set.provenance;
  if (set.size() > 0) {
    const int n_y = static_cast<int>(set.entries[0].size());
    std::vector<double> occurrence(n_y, 0.0);
    for (const auto& m : set.entries)
      for (int i = 0; i < n_y; ++i)
        if (m(i) == 0.0) occurrence[i] += 1.0;
    for (auto& o : occurrence) o /= set.size();
    j["n_sensors"] = n_y;
    j["zero_fraction_per_sensor"] = occurrence;
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& m : set.entries)
    for (int i = 0; i < m.size(); ++i) {
      std::uint64_t bits;
      const double v = m(i);
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      h = (h ^ bits) * 0x100000001b3ULL;
    }
  j["content_hash"] = h;
  out << j.dump(2) << "\n";
}

}  // namespace oed
