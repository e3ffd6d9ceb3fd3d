#include "deforcge/solver.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <sstream>

#include "deforcge/error.hpp"

namespace deforcge {

void SolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidConfig, "solver tolerance must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidConfig, "max_iterations must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw Error(ErrorCode::InvalidConfig, "damping must lie in (0,1]");
  if (!(max_log_step > 0.0)) throw Error(ErrorCode::InvalidConfig, "max_log_step must be positive");
}

namespace {

struct Evaluation {
  Eigen::VectorXd residual;
  bool ok = false;
};

Evaluation try_residual(const ModelParameters& p, const PeriodExogenous& exo, const UnknownLayout& layout,
                        const Eigen::VectorXd& v, const PeriodUnknowns& fill) {
  Evaluation e;
  if (!v.allFinite()) return e;
  try {
    const auto x = layout.unpack(v, fill);
    e.residual = assemble_residuals(p, exo, layout, evaluate(p, exo, x));
    e.ok = e.residual.allFinite();
  } catch (const Error&) {
    // Trial points far from the solution may leave the model's domain
    // (e.g. negative disposable income); the line search backs off.
    e.ok = false;
  }
  return e;
}

std::string singular_message(const UnknownLayout& layout, const Eigen::MatrixXd& J) {
  Eigen::FullPivLU<Eigen::MatrixXd> lut(J.transpose());
  const Eigen::MatrixXd kernel = lut.kernel();
  std::ostringstream msg;
  msg << "Jacobian rank " << lut.rank() << " of " << J.rows() << "; dependent equations:";
  for (Eigen::Index i = 0; i < kernel.rows(); ++i) {
    if (kernel.row(i).cwiseAbs().maxCoeff() > 1e-8) msg << ' ' << layout.equation_labels()[i];
  }
  return msg.str();
}

}  // namespace

Eigen::MatrixXd jacobian(const ModelParameters& p, const PeriodExogenous& exo, const UnknownLayout& layout,
                         const Eigen::VectorXd& v, const PeriodUnknowns& fill, JacobianMode mode) {
  const auto n = static_cast<Eigen::Index>(layout.size());
  const auto x0 = layout.unpack(v, fill);
  const auto s0 = evaluate(p, exo, x0);
  const Eigen::VectorXd f0 = assemble_residuals(p, exo, layout, s0);
  Eigen::MatrixXd J(n, n);
  const double h = 1e-7;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (mode == JacobianMode::AnalyticWhereAvailable) {
      if (auto col = analytic_column(p, exo, layout, s0, static_cast<std::size_t>(j))) {
        J.col(j) = *col;
        continue;
      }
    }
    Eigen::VectorXd vp = v;
    vp[j] += h;
    const auto fp = assemble_residuals(p, exo, layout, evaluate(p, exo, layout.unpack(vp, fill)));
    J.col(j) = (fp - f0) / h;
  }
  return J;
}

PeriodEquilibrium solve_period(const ModelParameters& p, const PeriodExogenous& exo, const SolverConfig& cfg,
                               const std::optional<PeriodUnknowns>& warm_start,
                               std::vector<IterationRecord>* trace) {
  cfg.validate();
  const UnknownLayout layout(p);
  const PeriodUnknowns fill = warm_start ? *warm_start : PeriodUnknowns::base(p);
  Eigen::VectorXd v = layout.pack(fill);
  auto ev = try_residual(p, exo, layout, v, fill);
  if (!ev.ok) throw Error(ErrorCode::NotConverged, "residuals are not finite at the starting point");

  std::vector<IterationRecord> local;
  auto& log = trace ? *trace : local;
  double norm = ev.residual.lpNorm<Eigen::Infinity>();
  log.push_back({0, norm, 0.0});
  int it = 0;
  bool polished = false;
  while (true) {
    if (norm <= cfg.tolerance && (polished || it >= cfg.max_iterations)) break;
    if (it >= cfg.max_iterations) {
      std::ostringstream msg;
      msg << "no convergence after " << it << " iterations; best residual " << norm << "; trace:";
      for (std::size_t k = log.size() > 5 ? log.size() - 5 : 0; k < log.size(); ++k) {
        msg << " [" << log[k].iteration << ' ' << log[k].residual_norm << ' ' << log[k].step << ']';
      }
      throw Error(ErrorCode::NotConverged, msg.str());
    }
    ++it;
    const auto J = jacobian(p, exo, layout, v, fill, cfg.jacobian_mode);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (lu.rank() < J.rows()) throw Error(ErrorCode::SingularJacobian, singular_message(layout, J));
    Eigen::VectorXd dx = lu.solve(-ev.residual);
    const double biggest = dx.lpNorm<Eigen::Infinity>();
    if (biggest > cfg.max_log_step) dx *= cfg.max_log_step / biggest;

    // A converged point gets one extra full Newton step, kept only if it
    // does not make things worse.
    const bool polishing = norm <= cfg.tolerance;
    double t = polishing ? 1.0 : cfg.damping;
    const double norm2 = ev.residual.norm();
    bool accepted = false;
    for (int halvings = 0; halvings < 40; ++halvings, t *= 0.5) {
      auto trial = try_residual(p, exo, layout, v + t * dx, fill);
      if (trial.ok && (trial.residual.norm() < norm2 || (polishing && trial.residual.norm() <= norm2))) {
        v += t * dx;
        ev = std::move(trial);
        accepted = true;
        break;
      }
      if (polishing) break;
    }
    if (polishing) {
      polished = true;
      if (accepted) norm = ev.residual.lpNorm<Eigen::Infinity>();
      log.push_back({it, norm, accepted ? t : 0.0});
      continue;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "line search failed at iteration " << it << "; residual " << norm;
      throw Error(ErrorCode::NotConverged, msg.str());
    }
    norm = ev.residual.lpNorm<Eigen::Infinity>();
    log.push_back({it, norm, t});
    spdlog::trace("newton iteration {} residual {:.3e} step {:.3g}", it, norm, t);
  }

  PeriodEquilibrium eq;
  eq.unknowns = layout.unpack(v, fill);
  eq.state = evaluate(p, exo, eq.unknowns);
  const auto check = assemble_residuals(p, exo, layout, eq.state);
  eq.residual_norm = check.lpNorm<Eigen::Infinity>();
  if (!(eq.residual_norm <= cfg.tolerance)) {
    throw Error(ErrorCode::NotConverged, "verification residual " + std::to_string(eq.residual_norm));
  }
  eq.walras = walras_residual(eq.state);
  eq.iterations = it;
  spdlog::debug("solved in {} iterations, residual {:.3e}, walras {:.3e}", it, eq.residual_norm, eq.walras);
  return eq;
}

RootResult find_root(const std::function<double(double)>& f, double lo, double hi, double ftol,
                     int max_evaluations, std::string_view what) {
  RootResult r;
  double flo = f(lo), fhi = f(hi);
  r.evaluations = 2;
  if (flo == 0.0) return {lo, 0.0, r.evaluations};
  if (fhi == 0.0) return {hi, 0.0, r.evaluations};
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw Error(ErrorCode::TargetInfeasible, std::string(what) + ": no sign change on [" +
                                                 std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
  // Illinois variant of regula falsi: superlinear, never leaves the bracket.
  int side = 0;
  while (r.evaluations < max_evaluations) {
    double x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > std::min(lo, hi) && x < std::max(lo, hi))) x = 0.5 * (lo + hi);
    const double fx = f(x);
    ++r.evaluations;
    if (std::abs(fx) <= ftol || hi - lo == 0.0) return {x, fx, r.evaluations};
    if ((fx > 0.0) == (fhi > 0.0)) {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    } else {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    }
  }
  throw Error(ErrorCode::NotConverged, std::string(what) + ": root search exhausted " +
                                           std::to_string(max_evaluations) + " evaluations");
}

}  // namespace deforcge
