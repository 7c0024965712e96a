#include "oed/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "oed/errors.hpp"

namespace oed {

Eigen::VectorXd project_feasible(const Eigen::VectorXd& v,
                                 const Eigen::VectorXd& costs, double budget) {
  if (!(budget > 0.0)) throw ConfigError("projection: budget must be > 0");
  if ((costs.array() <= 0.0).any())
    throw ConfigError("projection: costs must be > 0");

  auto clip01 = [&](const Eigen::VectorXd& x) {
    return x.cwiseMax(0.0).cwiseMin(1.0).eval();
  };
  Eigen::VectorXd w = clip01(v);
  if (costs.dot(w) <= budget) return w;

  // c^T clip(v - lambda c) is continuous and nonincreasing in lambda.
  auto spent = [&](double lambda) {
    return costs.dot(clip01(v - lambda * costs));
  };
  double lo = 0.0;
  double hi = 0.0;
  for (int i = 0; i < v.size(); ++i)
    hi = std::max(hi, v(i) / costs(i));
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (spent(mid) > budget)
      lo = mid;
    else
      hi = mid;
    if (std::abs(spent(hi) - budget) <= 1e-10 * budget) break;
  }
  // hi side keeps the result feasible.
  return clip01(v - hi * costs);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Objective value; ill-posed iterates map to +inf so the line search backs
// away from them.
double safe_objective(const FRFMatrix& frf, const Criterion& criterion,
                      const Design& d, double gamma, double* crit_out) {
  try {
    const double c = evaluate(criterion, frf, d);
    if (crit_out) *crit_out = c;
    return c + gamma * double_well(d);
  } catch (const IllPosedError&) {
    if (crit_out) *crit_out = kInf;
    return kInf;
  }
}

}  // namespace

SolveResult solve_relaxed(const FRFMatrix& frf, const Criterion& criterion,
                          const Design& design0, double gamma,
                          const OptimizerConfig& config) {
  criterion.validate(frf.n_sensors());
  if (!design0.feasible())
    throw ConfigError("solve_relaxed: initial design infeasible");

  SolveResult res;
  Design d = design0;
  d.weights = project_feasible(d.weights, d.costs, d.budget);

  double crit = 0.0;
  double f = safe_objective(frf, criterion, d, gamma, &crit);
  if (!std::isfinite(f))
    throw IllPosedError("solve_relaxed: criterion ill-posed at design0", 0);

  Eigen::VectorXd g =
      gradient(criterion, frf, d) + gamma * double_well_gradient(d);

  Eigen::VectorXd prev_w, prev_g;
  double step = 1.0 / std::max(1e-12, g.norm());

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const Eigen::VectorXd pg =
        d.weights - project_feasible(d.weights - g, d.costs, d.budget);
    const double pg_norm = pg.norm();
    res.trace.push_back({iter, f, crit, double_well(d), step, pg_norm});
    if (pg_norm <= config.grad_tol) {
      res.converged = true;
      break;
    }

    // BB1 step from the previous accepted pair.
    if (iter > 0) {
      const Eigen::VectorXd s = d.weights - prev_w;
      const Eigen::VectorXd y = g - prev_g;
      const double sy = s.dot(y);
      if (sy > 1e-16) step = s.squaredNorm() / sy;
      step = std::clamp(step, 1e-12, 1e12);
    }

    double alpha = step;
    Design trial = d;
    double f_trial = kInf, crit_trial = 0.0;
    bool accepted = false;
    for (int bt = 0; bt <= config.armijo.max_backtracks; ++bt) {
      trial.weights =
          project_feasible(d.weights - alpha * g, d.costs, d.budget);
      f_trial = safe_objective(frf, criterion, trial, gamma, &crit_trial);
      const double decrease = g.dot(trial.weights - d.weights);
      if (std::isfinite(f_trial) &&
          f_trial <= f + config.armijo.c1 * decrease) {
        accepted = true;
        break;
      }
      alpha *= config.armijo.shrink;
    }
    if (!accepted) {
      res.warning = true;  // best feasible iterate so far is returned
      break;
    }

    prev_w = d.weights;
    prev_g = g;
    d = trial;
    f = f_trial;
    crit = crit_trial;
    step = alpha;
    g = gradient(criterion, frf, d) + gamma * double_well_gradient(d);
  }

  res.design = d;
  res.objective = f;
  res.criterion_value = crit;
  res.penalty_value = double_well(d);
  return res;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    throw ConfigError("log_spaced: need 0 < lo < hi and count >= 2");
  std::vector<double> grid(count);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int k = 0; k < count; ++k)
    grid[k] = std::exp(llo + (lhi - llo) * k / (count - 1));
  return grid;
}

GammaSweepResult gamma_sweep(const FRFMatrix& frf, const Criterion& criterion,
                             const Design& design0,
                             const GammaSweepConfig& sweep,
                             const OptimizerConfig& config) {
  const auto grid = log_spaced(sweep.gamma_min, sweep.gamma_max, sweep.count);

  GammaSweepResult out;
  double best_binary_crit = kInf;
  double best_frac_crit = kInf;
  Design best_frac;

  // Continuation: each gamma warm-starts from the previous solution, so the
  // iterates walk gradually from the fractional optimum toward a binary one
  // instead of collapsing under a large penalty from a cold start.
  Design warm = design0;
  for (double gamma : grid) {
    SolveResult r = solve_relaxed(frf, criterion, warm, gamma, config);
    warm = r.design;
    GammaSweepEntry e;
    e.gamma = gamma;
    e.objective = r.objective;
    e.criterion = r.criterion_value;
    double dist = 0.0;
    for (int i = 0; i < r.design.size(); ++i) {
      const double w = r.design.weights(i);
      dist = std::max(dist, std::min(std::abs(w), std::abs(1.0 - w)));
    }
    e.binary_distance = dist;
    e.binary = dist <= sweep.binary_tol;
    e.feasible = r.design.feasible();

    if (e.binary && e.feasible) {
      // Snap to exact binary; if snapping up breaks the budget, fall back to
      // greedy rounding of the snapped weights.
      Design snapped = r.design;
      for (int i = 0; i < snapped.size(); ++i)
        snapped.weights(i) = snapped.weights(i) >= 0.5 ? 1.0 : 0.0;
      if (!snapped.feasible()) snapped = round_design(snapped);
      try {
        const double c = evaluate(criterion, frf, snapped);
        e.criterion = c;
        if (c < best_binary_crit) {
          best_binary_crit = c;
          out.design = snapped;
          out.gamma = gamma;
          out.criterion_value = c;
          out.binary = true;
        }
      } catch (const IllPosedError&) {
        e.binary = false;  // binary snap lost identifiability
      }
    }
    if (std::isfinite(r.criterion_value) && r.criterion_value < best_frac_crit) {
      best_frac_crit = r.criterion_value;
      best_frac = r.design;
    }
    out.report.push_back(e);
  }

  if (!out.binary) {
    out.fallback = true;
    out.design = round_design(best_frac);
    out.gamma = 0.0;
    try {
      out.criterion_value = evaluate(criterion, frf, out.design);
    } catch (const IllPosedError&) {
      out.criterion_value = kInf;
    }
  }
  return out;
}

Design round_design(const Design& design) {
  Design out = design;
  std::vector<int> idx(design.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return design.weights(a) > design.weights(b);
  });
  out.weights.setZero();
  double spent = 0.0;
  for (int i : idx) {
    if (spent + design.costs(i) <= design.budget + 1e-12) {
      out.weights(i) = 1.0;
      spent += design.costs(i);
    }
  }
  return out;
}

ExhaustiveResult exhaustive_binary(const FRFMatrix& frf,
                                   const Criterion& criterion,
                                   const Eigen::VectorXd& costs,
                                   double budget) {
  const int n = frf.n_sensors();
  constexpr long kGuard = 1'000'000;

  ExhaustiveResult best;
  best.criterion_value = kInf;
  best.design.costs = costs;
  best.design.budget = budget;
  best.design.weights = Eigen::VectorXd::Zero(n);

  Design current;
  current.costs = costs;
  current.budget = budget;
  current.weights = Eigen::VectorXd::Zero(n);
  long count = 0;

  // Include-first DFS visits supports in lexicographic order, so strict
  // improvement keeps the lexicographically smallest optimum.
  auto visit = [&](auto&& self, int i, double spent) -> void {
    if (++count > kGuard)
      throw GuardError(
          "exhaustive_binary: more than 1e6 feasible supports; use the "
          "relaxed optimizer");
    try {
      const double c = evaluate(criterion, frf, current);
      ++best.n_evaluated;
      if (c < best.criterion_value) {
        best.criterion_value = c;
        best.design = current;
      }
    } catch (const IllPosedError&) {
    }
    for (int k = i; k < n; ++k) {
      if (spent + costs(k) > budget + 1e-12) continue;
      current.weights(k) = 1.0;
      self(self, k + 1, spent + costs(k));
      current.weights(k) = 0.0;
    }
  };
  visit(visit, 0, 0.0);

  if (!std::isfinite(best.criterion_value))
    throw IllPosedError(
        "exhaustive_binary: every feasible binary design is ill-posed "
        "(budget too small for identifiability)",
        0);
  return best;
}

void write_trace_csv(const std::vector<IterRecord>& trace, std::ostream& out) {
  out << "iter,objective,criterion,penalty,step,proj_grad_norm\n";
  out.precision(17);
  for (const auto& r : trace)
    out << r.iter << "," << r.objective << "," << r.criterion << ","
        << r.penalty << "," << r.step << "," << r.proj_grad_norm << "\n";
}

}  // namespace oed
