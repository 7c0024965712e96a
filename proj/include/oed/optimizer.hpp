#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "oed/criteria.hpp"

namespace oed {

struct ArmijoConfig {
  double c1 = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
};

struct OptimizerConfig {
  int max_iters = 2000;
  double grad_tol = 1e-8;  // on the projected-gradient norm
  ArmijoConfig armijo;
  std::uint64_t seed = 0;
};

struct IterRecord {
  int iter = 0;
  double objective = 0.0;
  double criterion = 0.0;
  double penalty = 0.0;
  double step = 0.0;
  double proj_grad_norm = 0.0;
};

struct SolveResult {
  Design design;
  std::vector<IterRecord> trace;
  bool converged = false;
  bool warning = false;  // backtracking exhausted before convergence
  double objective = 0.0;
  double criterion_value = 0.0;
  double penalty_value = 0.0;
};

struct GammaSweepConfig {
  double gamma_min = 1e-1;
  double gamma_max = 1e5;
  int count = 100;
  double binary_tol = 1e-3;
};

struct GammaSweepEntry {
  double gamma = 0.0;
  double objective = 0.0;
  double criterion = 0.0;
  double binary_distance = 0.0;  // max_i min(w_i, 1-w_i)
  bool binary = false;
  bool feasible = false;
};

struct GammaSweepResult {
  Design design;
  double gamma = 0.0;
  double criterion_value = 0.0;
  bool binary = false;
  bool fallback = false;  // no binary feasible result; greedy-rounded design
  std::vector<GammaSweepEntry> report;
};

// Euclidean projection onto {w in [0,1]^n : c^T w <= b}; bisection on the
// budget multiplier when the box clip is over budget.
Eigen::VectorXd project_feasible(const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& costs, double budget);

// Projected gradient descent with Barzilai-Borwein initial steps and Armijo
// backtracking on evaluate(criterion) + gamma * double_well.
SolveResult solve_relaxed(const FRFMatrix& frf, const Criterion& criterion,
                          const Design& design0, double gamma,
                          const OptimizerConfig& config);

std::vector<double> log_spaced(double lo, double hi, int count);

// Warm-started solve_relaxed continuation over the log-spaced gamma grid;
// returns the
// binary feasible result with the smallest unpenalized criterion, or a
// greedy-rounded fallback when no run lands binary.
GammaSweepResult gamma_sweep(const FRFMatrix& frf, const Criterion& criterion,
                             const Design& design0,
                             const GammaSweepConfig& sweep,
                             const OptimizerConfig& config);

// Greedy rounding: sort weights descending (ties to the lower index), set to
// one while the budget allows.
Design round_design(const Design& design);

struct ExhaustiveResult {
  Design design;
  double criterion_value = 0.0;
  long n_evaluated = 0;
};

// Enumerates every binary feasible design (guard: <= 1e6 supports);
// ill-posed designs are skipped. Desk-scale oracle only.
ExhaustiveResult exhaustive_binary(const FRFMatrix& frf,
                                   const Criterion& criterion,
                                   const Eigen::VectorXd& costs,
                                   double budget);

// CSV `iter,objective,criterion,penalty,step,proj_grad_norm`.
void write_trace_csv(const std::vector<IterRecord>& trace, std::ostream& out);

}  // namespace oed
