#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace oed {

// How the complex transfer matrix is reduced to the real map used by the
// inverse problem. With zero damping the system matrix is real and all
// modes except imaginary_part coincide.
enum class ExtractionMode { real_part, imaginary_part, magnitude, stacked_real_imag };

ExtractionMode extraction_mode_from_string(const std::string& s);
std::string to_string(ExtractionMode m);

struct TierSpec {
  int nodes = 0;
  double mass = 0.0;  // lumped mass per node, kg
  int level = 0;      // base = 0
};

struct SpringSpec {
  int i = 0;           // node index
  int j = -1;          // node index, or -1 for ground
  double stiffness = 0.0;
};

struct TieredTowerConfig {
  int dofs_per_node = 3;
  std::vector<TierSpec> tiers;
  std::vector<SpringSpec> springs;
  double rayleigh_alpha = 0.0;
  double rayleigh_beta = 0.0;
  std::vector<int> observed_dofs;  // empty = observe every DoF
  std::vector<int> loaded_dofs;
  double frequency = 1.0;  // rad/s
  ExtractionMode extraction = ExtractionMode::real_part;

  static TieredTowerConfig from_json_file(const std::string& path);
  static TieredTowerConfig from_json_string(const std::string& text);
  std::string to_json_string() const;
};

struct StructuralModel {
  Eigen::MatrixXd mass;       // N x N, SPD
  Eigen::MatrixXd damping;    // N x N, PSD
  Eigen::MatrixXd stiffness;  // N x N, SPD
  std::vector<int> observed_dofs;  // row i of the observation operator
  std::vector<int> loaded_dofs;    // column k of the load-injection operator
  int dofs_per_node = 3;
  std::vector<int> node_level;  // per node, base = 0

  int n_dofs() const { return static_cast<int>(mass.rows()); }
  int n_nodes() const { return n_dofs() / dofs_per_node; }
  int n_obs() const { return static_cast<int>(observed_dofs.size()); }
  int n_loads() const { return static_cast<int>(loaded_dofs.size()); }
  int dof_node(int dof) const { return dof / dofs_per_node; }
  int dof_axis(int dof) const { return dof % dofs_per_node; }
  // Tier level of the node observed by sensor row i.
  int sensor_level(int sensor) const {
    return node_level[dof_node(observed_dofs[sensor])];
  }
};

struct SensorLabel {
  int node = 0;
  int axis = 0;
};

struct FRFMatrix {
  Eigen::MatrixXd entries;  // n_y x n_theta, column-major
  double frequency = 0.0;
  ExtractionMode extraction = ExtractionMode::real_part;
  std::vector<SensorLabel> sensor_labels;  // one per row

  int n_sensors() const { return static_cast<int>(entries.rows()); }
  int n_params() const { return static_cast<int>(entries.cols()); }
};

StructuralModel assemble_tiered_model(const TieredTowerConfig& config);

// T = extraction(-w^2 Q H(w) P), H(w) = (K - jwC + w^2 M)^{-1}, one complex
// solve per load column. Rejects singular system matrices and rank-deficient
// results.
FRFMatrix compute_frf(const StructuralModel& model, double frequency,
                      ExtractionMode mode);

Eigen::VectorXd predict_response(const FRFMatrix& frf,
                                 const Eigen::VectorXd& theta);

// CSV with header `sensor_id,node,axis,t_1..t_ntheta`.
void write_frf_csv(const FRFMatrix& frf, std::ostream& out);

// The reference tiered-tower demonstration problem: 267 candidate sensor
// DoFs over four tiers, 6 load components at two unobserved base hubs.
TieredTowerConfig make_demo_config();

}  // namespace oed
