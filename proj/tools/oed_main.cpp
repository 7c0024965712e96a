// oed: sensor-placement design toolkit command line.
//
// Subcommands: build-model, scenarios, optimize, evaluate. Every command
// reads a JSON config, writes machine-readable outputs plus a run manifest,
// and is deterministic given (--config, --seed, --threads).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "nlohmann/json.hpp"
#include "oed/criteria.hpp"
#include "oed/errors.hpp"
#include "oed/ha.hpp"
#include "oed/inverse.hpp"
#include "oed/kernels.hpp"
#include "oed/model.hpp"
#include "oed/optimizer.hpp"
#include "oed/parallel.hpp"
#include "oed/postproc.hpp"
#include "oed/rng.hpp"
#include "oed/scenarios.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string illposed_policy = "exclude";
  bool dry_run = false;
};

struct Manifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t master_seed = 0;
  std::vector<std::string> outputs;

  void write(const fs::path& out_dir) const {
    json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["master_seed"] = master_seed;
    j["artifact_version"] = kVersion;
    j["timestamp"] = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    j["outputs"] = outputs;
    std::ofstream out(out_dir / "manifest.json");
    out << j.dump(2) << "\n";
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw oed::ConfigError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t content_hash(const std::string& text) {
  return oed::hash_name(text);
}

json parse_config(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw oed::ConfigError("config " + path + ": " + e.what());
  }
}

template <typename WriteFn>
void emit(Manifest& manifest, const fs::path& out_dir, const std::string& name,
          WriteFn&& write_fn) {
  fs::create_directories(out_dir);
  const fs::path path = out_dir / name;
  std::ofstream out(path);
  if (!out) throw oed::ConfigError("cannot write " + path.string());
  write_fn(out);
  manifest.outputs.push_back(path.string());
}

struct ModelBundle {
  oed::TieredTowerConfig config;
  oed::StructuralModel model;
  oed::FRFMatrix frf;
};

ModelBundle load_model(const std::string& model_config_path) {
  ModelBundle b;
  b.config = oed::TieredTowerConfig::from_json_file(model_config_path);
  b.model = oed::assemble_tiered_model(b.config);
  b.frf = oed::compute_frf(b.model, b.config.frequency, b.config.extraction);
  return b;
}

std::map<int, double> parse_level_rule(const json& j) {
  std::map<int, double> rule;
  for (auto it = j.begin(); it != j.end(); ++it)
    rule[std::stoi(it.key())] = it.value().get<double>();
  return rule;
}

oed::ScenarioSet load_scenarios_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw oed::ConfigError("cannot open scenario file: " + path);
  std::string line;
  std::getline(in, line);  // header
  std::map<int, std::vector<std::pair<int, double>>> rows;
  int max_sensor = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    int sid, sensor;
    double value;
    char comma;
    ss >> sid >> comma >> sensor >> comma >> value;
    rows[sid].push_back({sensor, value});
    max_sensor = std::max(max_sensor, sensor);
  }
  if (rows.empty()) throw oed::ConfigError("scenario file is empty: " + path);
  oed::ScenarioSet set;
  set.provenance = "file:" + path;
  for (auto& [sid, entries] : rows) {
    Eigen::VectorXd mask = Eigen::VectorXd::Ones(max_sensor + 1);
    for (auto& [sensor, value] : entries) mask(sensor) = value;
    set.entries.push_back(std::move(mask));
  }
  return set;
}

// Scenario spec shared by the scenarios/optimize/evaluate commands.
oed::ScenarioSet build_scenarios(const json& spec, const ModelBundle& b,
                                 std::uint64_t seed,
                                 Eigen::VectorXd* occurrence = nullptr) {
  const std::string type = spec.at("type").get<std::string>();
  const int n_y = b.frf.n_sensors();
  if (type == "one_out") return oed::one_out_scenarios(n_y);
  if (type == "k_out")
    return oed::k_out_scenarios(n_y, spec.at("k").get<int>());
  if (type == "bernoulli") {
    oed::PoFMap pof;
    if (spec.contains("level_rule"))
      pof = oed::tiered_pof(b.model, b.frf, parse_level_rule(spec["level_rule"]));
    else
      pof.q = Eigen::VectorXd::Constant(n_y, spec.at("q").get<double>());
    return oed::bernoulli_scenarios(pof, spec.at("n_samps").get<int>(), seed);
  }
  if (type == "clipping") {
    oed::ClippingConfig clip;
    clip.threshold = spec.at("threshold").get<double>();
    clip.n_realizations = spec.value("n_realizations", 100);
    clip.seed = seed;
    const int p = b.frf.n_params();
    clip.force_mean = Eigen::VectorXd::Zero(p);
    if (spec.contains("force_mean"))
      clip.force_mean = Eigen::Map<const Eigen::VectorXd>(
          spec["force_mean"].get<std::vector<double>>().data(), p);
    clip.force_covariance =
        Eigen::MatrixXd::Identity(p, p) * spec.value("force_variance", 1.0);
    if (spec.value("force_scale", json()) == "auto") {
      const double scale = oed::tune_force_scale(
          b.frf, b.model, clip, spec.value("target_level", 3),
          spec.value("target_rate", 0.8));
      clip.force_covariance *= scale * scale;
    }
    auto result = oed::clipping_scenarios(b.frf, clip);
    if (occurrence) *occurrence = result.occurrence;
    return std::move(result.scenarios);
  }
  if (type == "file") return load_scenarios_csv(spec.at("path").get<std::string>());
  throw oed::ConfigError("unknown scenario type: " + type);
}

json design_to_json(const oed::Design& d, double criterion_value, double gamma,
                    std::uint64_t seed, const std::string& mode) {
  json j;
  j["weights"] = std::vector<double>(d.weights.data(),
                                     d.weights.data() + d.weights.size());
  j["costs"] =
      std::vector<double>(d.costs.data(), d.costs.data() + d.costs.size());
  j["budget"] = d.budget;
  j["binary"] = d.is_binary(1e-6);
  j["criterion_value"] = criterion_value;
  j["gamma"] = gamma;
  j["seed"] = seed;
  j["mode"] = mode;
  return j;
}

oed::Design design_from_json_file(const std::string& path) {
  const json j = parse_config(path);
  oed::Design d;
  const auto w = j.at("weights").get<std::vector<double>>();
  const auto c = j.at("costs").get<std::vector<double>>();
  d.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), w.size());
  d.costs = Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
  d.budget = j.at("budget").get<double>();
  return d;
}

// ---------------------------------------------------------------- commands

int cmd_build_model(const CommonOpts& opts) {
  const json cfg = parse_config(opts.config_path);
  const std::string model_path = cfg.contains("model_config")
                                     ? cfg["model_config"].get<std::string>()
                                     : opts.config_path;
  if (opts.dry_run) {
    oed::TieredTowerConfig::from_json_file(model_path);
    std::cout << "config ok\n";
    return 0;
  }
  ModelBundle b = load_model(model_path);

  Manifest manifest;
  manifest.command = "build-model";
  manifest.config_hash = content_hash(slurp(opts.config_path));
  manifest.master_seed = opts.seed;
  const fs::path out_dir(opts.out_dir);
  emit(manifest, out_dir, "model.json",
       [&](std::ostream& out) { out << b.config.to_json_string() << "\n"; });
  emit(manifest, out_dir, "frf.csv",
       [&](std::ostream& out) { oed::write_frf_csv(b.frf, out); });
  manifest.write(out_dir);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b.frf.entries);
  const auto& s = svd.singularValues();
  std::cout << "n_y=" << b.frf.n_sensors() << " n_theta=" << b.frf.n_params()
            << " sigma_max=" << s(0) << " sigma_min=" << s(s.size() - 1)
            << " cond=" << s(0) / s(s.size() - 1) << "\n";
  return 0;
}

int cmd_scenarios(const CommonOpts& opts) {
  const json cfg = parse_config(opts.config_path);
  ModelBundle b = load_model(cfg.at("model_config").get<std::string>());
  if (opts.dry_run) {
    std::cout << "config ok\n";
    return 0;
  }
  Eigen::VectorXd occurrence;
  oed::ScenarioSet set =
      build_scenarios(cfg.at("scenarios"), b, opts.seed, &occurrence);
  set.seed = opts.seed;

  Manifest manifest;
  manifest.command = "scenarios";
  manifest.config_hash = content_hash(slurp(opts.config_path));
  manifest.master_seed = opts.seed;
  const fs::path out_dir(opts.out_dir);
  emit(manifest, out_dir, "scenarios.csv",
       [&](std::ostream& out) { oed::write_scenarios_csv(set, out); });
  emit(manifest, out_dir, "scenarios_summary.json",
       [&](std::ostream& out) { oed::write_scenarios_summary_json(set, out); });
  if (occurrence.size() > 0) {
    emit(manifest, out_dir, "clipping_occurrence.csv", [&](std::ostream& out) {
      out << "sensor_id,occurrence\n";
      for (int i = 0; i < occurrence.size(); ++i)
        out << i << "," << occurrence(i) << "\n";
    });
  }
  manifest.write(out_dir);
  std::cout << "scenarios=" << set.size() << "\n";
  return 0;
}

int cmd_optimize(const CommonOpts& opts) {
  const json cfg = parse_config(opts.config_path);
  ModelBundle b = load_model(cfg.at("model_config").get<std::string>());
  const std::string mode = cfg.at("mode").get<std::string>();
  const int n_y = b.frf.n_sensors();

  const double budget = cfg.at("budget").get<double>();
  if (!(budget > 0.0)) throw oed::ConfigError("budget must be > 0");
  Eigen::VectorXd costs = Eigen::VectorXd::Constant(n_y, cfg.value("cost", 1.0));
  if (cfg.contains("costs")) {
    const auto c = cfg["costs"].get<std::vector<double>>();
    costs = Eigen::Map<const Eigen::VectorXd>(c.data(), c.size());
  }
  oed::NoiseModel noise{cfg.value("sigma", 1.0)};

  oed::Criterion criterion;
  if (mode == "classical") {
    criterion = oed::Criterion::classical(noise);
  } else if (mode == "robust-oneout") {
    criterion = oed::Criterion::scenario_avg(oed::one_out_scenarios(n_y), noise);
  } else if (mode == "robust-pof") {
    const auto pof = oed::tiered_pof(
        b.model, b.frf, parse_level_rule(cfg.at("pof_level_rule")));
    criterion = oed::Criterion::pof(pof.survival(), noise);
  } else if (mode == "robust-clipping") {
    json spec = cfg.at("clipping");
    spec["type"] = "clipping";
    auto set = build_scenarios(spec, b, opts.seed);
    set.seed = opts.seed;
    criterion = oed::Criterion::scenario_avg(std::move(set), noise);
  } else {
    throw oed::ConfigError("unknown optimize mode: " + mode);
  }

  if (opts.dry_run) {
    std::cout << "config ok\n";
    return 0;
  }

  oed::OptimizerConfig oc;
  if (cfg.contains("optimizer")) {
    oc.max_iters = cfg["optimizer"].value("max_iters", oc.max_iters);
    oc.grad_tol = cfg["optimizer"].value("grad_tol", oc.grad_tol);
  }
  oc.seed = opts.seed;
  const oed::Design d0 = oed::Design::uniform_feasible(n_y, costs, budget);

  Manifest manifest;
  manifest.command = "optimize";
  manifest.config_hash = content_hash(slurp(opts.config_path));
  manifest.master_seed = opts.seed;
  const fs::path out_dir(opts.out_dir);

  if (cfg.contains("sweep")) {
    oed::GammaSweepConfig sc;
    sc.gamma_min = cfg["sweep"].value("gamma_min", sc.gamma_min);
    sc.gamma_max = cfg["sweep"].value("gamma_max", sc.gamma_max);
    sc.count = cfg["sweep"].value("count", sc.count);
    sc.binary_tol = cfg["sweep"].value("binary_tol", sc.binary_tol);
    const auto result = oed::gamma_sweep(b.frf, criterion, d0, sc, oc);
    emit(manifest, out_dir, "design.json", [&](std::ostream& out) {
      out << design_to_json(result.design, result.criterion_value,
                            result.gamma, opts.seed, mode)
                 .dump(2)
          << "\n";
    });
    emit(manifest, out_dir, "sweep.csv", [&](std::ostream& out) {
      out << "gamma,objective,criterion,binary_distance,binary,feasible\n";
      out.precision(17);
      for (const auto& e : result.report)
        out << e.gamma << "," << e.objective << "," << e.criterion << ","
            << e.binary_distance << "," << e.binary << "," << e.feasible
            << "\n";
    });
    std::cout << "mode=" << mode << " gamma=" << result.gamma
              << " criterion=" << result.criterion_value
              << " binary=" << result.binary
              << " fallback=" << result.fallback << "\n";
  } else {
    const double gamma = cfg.value("gamma", 0.0);
    const auto result = oed::solve_relaxed(b.frf, criterion, d0, gamma, oc);
    emit(manifest, out_dir, "design.json", [&](std::ostream& out) {
      out << design_to_json(result.design, result.criterion_value, gamma,
                            opts.seed, mode)
                 .dump(2)
          << "\n";
    });
    emit(manifest, out_dir, "trace.csv", [&](std::ostream& out) {
      oed::write_trace_csv(result.trace, out);
    });
    std::cout << "mode=" << mode << " gamma=" << gamma
              << " criterion=" << result.criterion_value
              << " converged=" << result.converged
              << " iters=" << result.trace.size() << "\n";
  }
  manifest.write(out_dir);
  return 0;
}

int cmd_evaluate(const CommonOpts& opts) {
  const json cfg = parse_config(opts.config_path);
  ModelBundle b = load_model(cfg.at("model_config").get<std::string>());
  const auto policy = oed::illposed_policy_from_string(opts.illposed_policy);
  oed::NoiseModel noise{cfg.value("sigma", 1.0)};
  const bool renorm = cfg.value("renormalize", false);

  std::vector<std::pair<std::string, oed::Design>> designs;
  std::set<std::string> used_names;
  for (const auto& path : cfg.at("designs").get<std::vector<std::string>>()) {
    std::string name = fs::path(path).stem().string();
    if (!used_names.insert(name).second) {
      int k = 2;
      while (!used_names.insert(name + "_" + std::to_string(k)).second) ++k;
      name += "_" + std::to_string(k);
    }
    designs.push_back({name, design_from_json_file(path)});
  }

  if (opts.dry_run) {
    std::cout << "config ok\n";
    return 0;
  }

  oed::ScenarioSet set = build_scenarios(cfg.at("scenarios"), b, opts.seed);
  set.seed = opts.seed;

  std::vector<std::string> metrics =
      cfg.value("metrics", std::vector<std::string>{"logdet"});

  Manifest manifest;
  manifest.command = "evaluate";
  manifest.config_hash = content_hash(slurp(opts.config_path));
  manifest.master_seed = opts.seed;
  const fs::path out_dir(opts.out_dir);

  for (const auto& [name, design] : designs) {
    for (const auto& metric : metrics) {
      if (metric == "logdet") {
        auto report =
            oed::logdet_over_scenarios(b.frf, design, set, noise, renorm, policy);
        report.config_hash = manifest.config_hash;
        emit(manifest, out_dir, name + "_logdet.csv",
             [&](std::ostream& out) { oed::write_report_csv(report, out); });
        emit(manifest, out_dir, name + "_logdet_summary.csv",
             [&](std::ostream& out) {
               oed::write_report_summary_csv(report, out);
             });
        emit(manifest, out_dir, name + "_logdet.json",
             [&](std::ostream& out) { oed::write_report_json(report, out); });
        std::cout << name << " logdet mean=" << report.mean
                  << " worst=" << report.worst
                  << " no_failure=" << report.no_failure_value
                  << " excluded=" << report.excluded_count << "\n";
      } else if (metric == "empirical_mse" || metric == "empirical_pmse") {
        oed::NominalParameterDistribution dist;
        const json& tj = cfg.at("theta0");
        const auto mean = tj.at("mean").get<std::vector<double>>();
        dist.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
        dist.covariance = Eigen::MatrixXd::Identity(mean.size(), mean.size()) *
                          tj.value("variance", 36.0);
        dist.n_draws = tj.value("n_draws", 100);
        dist.seed = opts.seed;
        const auto reports = oed::mse_over_failures(
            b.frf, design, set, dist, noise, cfg.value("n_test", 2), opts.seed,
            policy);
        const auto& report = metric == "empirical_mse" ? reports.mse
                                                       : reports.pmse;
        const std::string tag =
            metric == "empirical_mse" ? "_mse" : "_pmse";
        emit(manifest, out_dir, name + tag + ".csv",
             [&](std::ostream& out) { oed::write_report_csv(report, out); });
        emit(manifest, out_dir, name + tag + "_summary.csv",
             [&](std::ostream& out) {
               oed::write_report_summary_csv(report, out);
             });
        std::cout << name << " " << metric << " mean=" << report.mean
                  << " median=" << report.median << "\n";
      } else {
        throw oed::ConfigError("unknown metric: " + metric);
      }
    }
  }

  if (cfg.contains("random_baselines")) {
    const json& rb = cfg["random_baselines"];
    const auto kind = rb.value("kind", std::string("fractional")) == "binary"
                          ? oed::RandomDesignKind::binary
                          : oed::RandomDesignKind::fractional;
    const auto& ref = designs.at(0).second;
    const auto baselines = oed::random_designs(
        b.frf.n_sensors(), rb.at("support_size").get<int>(),
        rb.value("count", 100), opts.seed, kind, ref.costs, ref.budget);
    emit(manifest, out_dir, "random_baselines.csv", [&](std::ostream& out) {
      out << "design_id,classical_logdet,scenario_mean_logdet\n";
      out.precision(17);
      const auto classical = oed::Criterion::classical(noise);
      for (std::size_t k = 0; k < baselines.size(); ++k) {
        double c0 = std::numeric_limits<double>::quiet_NaN();
        double cs = std::numeric_limits<double>::quiet_NaN();
        try {
          c0 = oed::evaluate(classical, b.frf, baselines[k]);
          cs = oed::logdet_over_scenarios(b.frf, baselines[k], set, noise,
                                          renorm, oed::IllPosedPolicy::exclude)
                   .mean;
        } catch (const oed::IllPosedError&) {
        }
        out << k << "," << c0 << "," << cs << "\n";
      }
    });
  }
  manifest.write(out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust sensor-placement design toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CommonOpts opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "JSON config file")
        ->required();
    sub->add_option("--seed", opts.seed, "master seed");
    sub->add_option("--out-dir", opts.out_dir, "output directory");
    sub->add_option("--threads", opts.threads, "worker cap");
    sub->add_option("--illposed-policy", opts.illposed_policy,
                    "exclude|zero|error");
    sub->add_flag("--dry-run", opts.dry_run, "validate config only");
  };

  auto* build = app.add_subcommand("build-model", "assemble model, export FRF");
  auto* scen = app.add_subcommand("scenarios", "generate failure scenarios");
  auto* opt = app.add_subcommand("optimize", "solve a relaxed OED problem");
  auto* eval = app.add_subcommand("evaluate", "evaluate designs over scenarios");
  for (auto* sub : {build, scen, opt, eval}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  oed::set_max_threads(opts.threads);

  try {
    if (build->parsed()) return cmd_build_model(opts);
    if (scen->parsed()) return cmd_scenarios(opts);
    if (opt->parsed()) return cmd_optimize(opts);
    if (eval->parsed()) return cmd_evaluate(opts);
  } catch (const oed::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const oed::IllPosedError& e) {
    std::cerr << "ill-posed: " << e.what() << "\n";
    return 3;
  } catch (const oed::ResonanceError& e) {
    std::cerr << "resonance: " << e.what() << "\n";
    return 3;
  } catch (const oed::GuardError& e) {
    std::cerr << "guard: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
