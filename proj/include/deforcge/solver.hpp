#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "deforcge/model.hpp"

namespace deforcge {

enum class JacobianMode { FiniteDifference, AnalyticWhereAvailable };

struct SolverConfig {
  double tolerance = 1e-9;  // max-norm of the residual vector
  int max_iterations = 200;
  double damping = 1.0;       // initial step factor in (0, 1]
  double max_log_step = 1.0;  // cap on any single log-unknown change per step
  JacobianMode jacobian_mode = JacobianMode::AnalyticWhereAvailable;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double residual_norm = 0.0;
  double step = 0.0;
};

// Newton's method in the logs of the unknowns with backtracking. A
// converged point is re-verified with a fresh residual evaluation.
// Throws NotConverged or SingularJacobian (with equation labels).
PeriodEquilibrium solve_period(const ModelParameters& params, const PeriodExogenous& exo,
                               const SolverConfig& config,
                               const std::optional<PeriodUnknowns>& warm_start = std::nullopt,
                               std::vector<IterationRecord>* trace = nullptr);

// Forward-difference Jacobian in log space, with analytic columns spliced in
// when the config asks for them.
Eigen::MatrixXd jacobian(const ModelParameters& params, const PeriodExogenous& exo,
                         const UnknownLayout& layout, const Eigen::VectorXd& logx,
                         const PeriodUnknowns& fill, JacobianMode mode);

// Bracketed scalar root search: bisection on a sign-changing bracket,
// accelerated by secant steps that stay inside it.
struct RootResult {
  double x = 0.0;
  double f = 0.0;
  int evaluations = 0;
};
RootResult find_root(const std::function<double(double)>& f, double lo, double hi, double ftol,
                     int max_evaluations, std::string_view what);

}  // namespace deforcge
