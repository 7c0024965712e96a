#include "oed/model.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <complex>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "nlohmann/json.hpp"
#include "oed/errors.hpp"

namespace oed {

using json = nlohmann::json;

ExtractionMode extraction_mode_from_string(const std::string& s) {
  if (s == "real_part") return ExtractionMode::real_part;
  if (s == "imaginary_part") return ExtractionMode::imaginary_part;
  if (s == "magnitude") return ExtractionMode::magnitude;
  if (s == "stacked_real_imag") return ExtractionMode::stacked_real_imag;
  throw ConfigError("unknown extraction_mode: " + s);
}

std::string to_string(ExtractionMode m) {
  switch (m) {
    case ExtractionMode::real_part: return "real_part";
    case ExtractionMode::imaginary_part: return "imaginary_part";
    case ExtractionMode::magnitude: return "magnitude";
    case ExtractionMode::stacked_real_imag: return "stacked_real_imag";
  }
  return "real_part";
}

TieredTowerConfig TieredTowerConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  TieredTowerConfig c;
  try {
    c.dofs_per_node = j.value("dofs_per_node", 3);
    for (const auto& t : j.at("tiers")) {
      c.tiers.push_back({t.at("nodes").get<int>(), t.at("mass").get<double>(),
                         t.at("level").get<int>()});
    }
    for (const auto& s : j.at("springs")) {
      c.springs.push_back({s.at("i").get<int>(), s.value("j", -1),
                           s.at("stiffness").get<double>()});
    }
    if (j.contains("rayleigh")) {
      c.rayleigh_alpha = j["rayleigh"].value("alpha", 0.0);
      c.rayleigh_beta = j["rayleigh"].value("beta", 0.0);
    }
    if (j.contains("observed_dofs") && !j["observed_dofs"].is_string()) {
      c.observed_dofs = j["observed_dofs"].get<std::vector<int>>();
    }
    c.loaded_dofs = j.at("loaded_dofs").get<std::vector<int>>();
    c.frequency = j.value("frequency", 1.0);
    c.extraction =
        extraction_mode_from_string(j.value("extraction_mode", "real_part"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  return c;
}

TieredTowerConfig TieredTowerConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_string(ss.str());
}

std::string TieredTowerConfig::to_json_string() const {
  json j;
  j["dofs_per_node"] = dofs_per_node;
  j["tiers"] = json::array();
  for (const auto& t : tiers)
    j["tiers"].push_back({{"nodes", t.nodes}, {"mass", t.mass}, {"level", t.level}});
  j["springs"] = json::array();
  for (const auto& s : springs)
    j["springs"].push_back({{"i", s.i}, {"j", s.j}, {"stiffness", s.stiffness}});
  j["rayleigh"] = {{"alpha", rayleigh_alpha}, {"beta", rayleigh_beta}};
  if (observed_dofs.empty())
    j["observed_dofs"] = "all";
  else
    j["observed_dofs"] = observed_dofs;
  j["loaded_dofs"] = loaded_dofs;
  j["frequency"] = frequency;
  j["extraction_mode"] = to_string(extraction);
  return j.dump(2);
}

StructuralModel assemble_tiered_model(const TieredTowerConfig& config) {
  if (config.dofs_per_node < 1)
    throw ConfigError("dofs_per_node must be >= 1");
  if (config.tiers.empty()) throw ConfigError("config has no tiers");

  int n_nodes = 0;
  std::vector<int> node_level;
  std::vector<double> node_mass;
  for (const auto& t : config.tiers) {
    if (t.nodes < 1) throw ConfigError("tier node count must be >= 1");
    if (!(t.mass > 0.0)) throw ConfigError("tier mass must be > 0");
    for (int i = 0; i < t.nodes; ++i) {
      node_level.push_back(t.level);
      node_mass.push_back(t.mass);
    }
    n_nodes += t.nodes;
  }
  const int d = config.dofs_per_node;
  const int N = n_nodes * d;

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (const auto& s : config.springs) {
    if (!(s.stiffness > 0.0))
      throw ConfigError("spring stiffness must be > 0");
    if (s.i < 0 || s.i >= n_nodes || s.j < -1 || s.j >= n_nodes || s.i == s.j)
      throw ConfigError("spring node index out of range");
    for (int a = 0; a < d; ++a) {
      const int ia = s.i * d + a;
      K(ia, ia) += s.stiffness;
      if (s.j >= 0) {
        const int ja = s.j * d + a;
        K(ja, ja) += s.stiffness;
        K(ia, ja) -= s.stiffness;
        K(ja, ia) -= s.stiffness;
      }
    }
  }

  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(N, N);
  for (int n = 0; n < n_nodes; ++n)
    for (int a = 0; a < d; ++a) M(n * d + a, n * d + a) = node_mass[n];

  if (config.rayleigh_alpha < 0.0 || config.rayleigh_beta < 0.0)
    throw ConfigError("Rayleigh coefficients must be >= 0");
  Eigen::MatrixXd C =
      config.rayleigh_alpha * M + config.rayleigh_beta * K;

  // K must be SPD; fails if the structure is not anchored to ground.
  Eigen::LLT<Eigen::MatrixXd> llt(K);
  if (llt.info() != Eigen::Success)
    throw ConfigError("stiffness matrix is not positive definite "
                      "(is the structure anchored to ground?)");

  StructuralModel model;
  model.mass = std::move(M);
  model.damping = std::move(C);
  model.stiffness = std::move(K);
  model.dofs_per_node = d;
  model.node_level = std::move(node_level);

  if (config.observed_dofs.empty()) {
    model.observed_dofs.resize(N);
    for (int i = 0; i < N; ++i) model.observed_dofs[i] = i;
  } else {
    std::set<int> seen;
    for (int dof : config.observed_dofs) {
      if (dof < 0 || dof >= N)
        throw ConfigError("observed DoF out of range: " + std::to_string(dof));
      if (!seen.insert(dof).second)
        throw ConfigError("duplicate observed DoF: " + std::to_string(dof));
    }
    model.observed_dofs = config.observed_dofs;
  }
  for (int dof : config.loaded_dofs) {
    if (dof < 0 || dof >= N)
      throw ConfigError("loaded DoF out of range: " + std::to_string(dof));
  }
  if (config.loaded_dofs.empty()) throw ConfigError("no loaded DoFs");
  model.loaded_dofs = config.loaded_dofs;
  return model;
}

FRFMatrix compute_frf(const StructuralModel& model, double frequency,
                      ExtractionMode mode) {
  using cd = std::complex<double>;
  const int N = model.n_dofs();
  const int n_obs = model.n_obs();
  const int n_theta = model.n_loads();
  const double w = frequency;

  // System matrix A = K - j w C + w^2 M, factored once and reused for the
  // n_theta right-hand sides.
  Eigen::MatrixXcd A =
      model.stiffness.cast<cd>() - cd(0.0, w) * model.damping.cast<cd>() +
      (w * w) * model.mass.cast<cd>();

  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  if (!lu.isInvertible())
    throw ResonanceError(
        "system matrix singular at frequency " + std::to_string(w), w);

  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(N, n_theta);
  for (int k = 0; k < n_theta; ++k) rhs(model.loaded_dofs[k], k) = 1.0;
  const Eigen::MatrixXcd HP = lu.solve(rhs);

  Eigen::MatrixXcd Tc(n_obs, n_theta);
  for (int i = 0; i < n_obs; ++i)
    Tc.row(i) = -(w * w) * HP.row(model.observed_dofs[i]);

  FRFMatrix frf;
  frf.frequency = frequency;
  frf.extraction = mode;
  auto label_of = [&](int sensor) {
    const int dof = model.observed_dofs[sensor];
    return SensorLabel{model.dof_node(dof), model.dof_axis(dof)};
  };
  switch (mode) {
    case ExtractionMode::real_part:
      frf.entries = Tc.real();
      break;
    case ExtractionMode::imaginary_part:
      frf.entries = Tc.imag();
      break;
    case ExtractionMode::magnitude:
      frf.entries = Tc.cwiseAbs();
      break;
    case ExtractionMode::stacked_real_imag:
      frf.entries.resize(2 * n_obs, n_theta);
      frf.entries.topRows(n_obs) = Tc.real();
      frf.entries.bottomRows(n_obs) = Tc.imag();
      break;
  }
  const int n_rows = static_cast<int>(frf.entries.rows());
  frf.sensor_labels.reserve(n_rows);
  for (int i = 0; i < n_rows; ++i) frf.sensor_labels.push_back(label_of(i % n_obs));

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(frf.entries);
  const double smax = svd.singularValues()(0);
  int rank = 0;
  for (int k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > 1e-10 * smax) ++rank;
  if (rank < n_theta)
    throw IllPosedError("FRF matrix is rank-deficient (rank " +
                            std::to_string(rank) + " < " +
                            std::to_string(n_theta) + ")",
                        rank);
  return frf;
}

Eigen::VectorXd predict_response(const FRFMatrix& frf,
                                 const Eigen::VectorXd& theta) {
  if (theta.size() != frf.n_params())
    throw std::invalid_argument("predict_response: parameter dimension " +
                                std::to_string(theta.size()) + " != " +
                                std::to_string(frf.n_params()));
  return frf.entries * theta;
}

void write_frf_csv(const FRFMatrix& frf, std::ostream& out) {
  out << "sensor_id,node,axis";
  for (int k = 0; k < frf.n_params(); ++k) out << ",t_" << (k + 1);
  out << "\n";
  out.precision(17);
  for (int i = 0; i < frf.n_sensors(); ++i) {
    out << i << "," << frf.sensor_labels[i].node << ","
        << frf.sensor_labels[i].axis;
    for (int k = 0; k < frf.n_params(); ++k) out << "," << frf.entries(i, k);
    out << "\n";
  }
}

}  // namespace oed
