#include "deforcge/scenario.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>
#include <thread>

#include "deforcge/error.hpp"

namespace deforcge {

double Projections::gdp(int year) const {
  auto it = gdp_growth.find(year);
  if (it == gdp_growth.end()) {
    throw Error(ErrorCode::InvalidConfig, "no GDP growth projection for " + std::to_string(year));
  }
  return it->second;
}

double Projections::population(int year) const {
  auto it = population_growth.find(year);
  return it == population_growth.end() ? 0.0 : it->second;
}

void PriceWedge::validate() const {
  if (!(wedge >= 0.0 && wedge < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "wedge on '" + commodity + "' must lie in [0,1)");
  }
  if (mode == WedgeMode::SolveForQuantityCap && !(cap > 0.0 && cap <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "cap on '" + commodity + "' must lie in (0,1]");
  }
}

void ScenarioSpec::validate() const {
  if (!(start_year < end_year)) throw Error(ErrorCode::InvalidConfig, "horizon start must precede its end");
  for (const auto& w : shocks) w.validate();
  for (const auto& [group, factor] : overrides) {
    if (!(factor > 0.0)) throw Error(ErrorCode::InvalidConfig, "override '" + group + "' must be positive");
  }
  solver.validate();
}

ModelParameters apply_overrides(const ModelParameters& params, const Overrides& overrides) {
  static const std::set<std::string> groups{"land_supply", "land_wage_curve", "labor_wage_curve", "cet_top",
                                            "cet_destination", "armington", "value_added"};
  ModelParameters p = params;
  for (const auto& [group, f] : overrides) {
    if (!groups.count(group)) throw Error(ErrorCode::InvalidConfig, "unknown override group '" + group + "'");
    if (!(f > 0.0)) throw Error(ErrorCode::InvalidConfig, "override '" + group + "' must be positive");
    if (f == 1.0) continue;
    if (group == "land_supply" || group == "land_wage_curve" || group == "labor_wage_curve") {
      for (auto& fp : p.factors) {
        if (group == "land_supply" && fp.type == FactorType::Land) fp.land_supply_elasticity *= f;
        if (group == "land_wage_curve" && fp.type == FactorType::Land) fp.wage_curve_elasticity *= f;
        if (group == "labor_wage_curve" && fp.type == FactorType::Labor) fp.wage_curve_elasticity *= f;
      }
    } else if (group == "value_added") {
      for (auto& a : p.activities) a.value_added = a.value_added.with_sigma(a.value_added.sigma() * f);
    } else {
      for (auto& c : p.commodities) {
        if (group == "cet_top") c.cet_top = c.cet_top.with_sigma(c.cet_top.sigma() * f);
        if (group == "cet_destination") c.cet_destination = c.cet_destination.with_sigma(c.cet_destination.sigma() * f);
        if (group == "armington") c.armington = c.armington.with_sigma(c.armington.sigma() * f);
      }
    }
  }
  return p;
}

std::vector<int> TrajectoryRecord::years() const {
  std::vector<int> out;
  for (const auto& p : periods) out.push_back(p.year);
  return out;
}

const PeriodRecord& TrajectoryRecord::at_year(int year) const {
  for (const auto& p : periods) {
    if (p.year == year) return p;
  }
  throw Error(ErrorCode::WindowOutOfRange, "trajectory '" + name + "' has no year " + std::to_string(year));
}

double TrajectoryRecord::indicator(int year, const std::string& key) const {
  const auto& p = at_year(year);
  auto it = p.indicators.find(key);
  if (it == p.indicators.end()) {
    throw Error(ErrorCode::MismatchedTrajectories, "trajectory '" + name + "' lacks indicator '" + key + "'");
  }
  return it->second;
}

std::map<std::string, double> period_indicators(const ModelParameters& p, const PeriodExogenous& exo,
                                                const PeriodEquilibrium& eq, const LandAccount& land,
                                                const EmissionsLedger& emissions) {
  const auto& s = eq.state;
  std::map<std::string, double> out;
  double exports_eu = 0.0, exports_rest = 0.0, imports = 0.0, production = 0.0, domestic = 0.0;
  double consumption = 0.0, investment = 0.0;
  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    const auto& name = p.commodities[c].name;
    const double pq0 = 1.0 + p.commodities[c].sales_tax;
    exports_eu += s.qe_eu[c];
    exports_rest += s.qe_rest[c];
    imports += s.qm[c];
    production += s.qx[c];
    domestic += s.qd_supply[c];
    consumption += pq0 * s.qh_total[c];
    investment += pq0 * s.qinv[c];
    out["production:" + name] = s.qx[c];
    out["domestic:" + name] = s.qd_supply[c];
    out["exports:" + name] = s.qe_eu[c] + s.qe_rest[c];
    out["exports_eu:" + name] = s.qe_eu[c];
    out["exports_rest:" + name] = s.qe_rest[c];
    out["imports:" + name] = s.qm[c];
    out["wedge_eu:" + name] = exo.export_wedge[c][kEU];
  }
  out["gdp"] = s.gdp_real;
  out["gdp_nominal"] = s.gdp_nominal;
  out["consumption"] = consumption;
  out["investment"] = investment;
  out["exports"] = exports_eu + exports_rest;
  out["exports_eu"] = exports_eu;
  out["exports_rest"] = exports_rest;
  out["imports"] = imports;
  out["production"] = production;
  out["domestic_sales"] = domestic;
  out["cpi"] = s.cpi;
  out["exr"] = eq.unknowns.exr;
  out["rer"] = eq.unknowns.exr / s.cpi;
  out["gov_savings"] = s.gov_savings;
  out["walras"] = eq.walras;
  out["residual"] = eq.residual_norm;
  for (std::size_t f = 0; f < p.factors.size(); ++f) {
    if (p.factors[f].type == FactorType::Labor) {
      out["real_wage"] = eq.unknowns.wf[f] / s.cpi;
      out["unemployment"] = eq.unknowns.ur[f];
      out["employment"] = s.factor_employed[f];
      break;
    }
  }
  for (std::size_t a = 0; a < p.activities.size(); ++a) out["va:" + p.activities[a].name] = s.qva[a];
  for (std::size_t i = 0; i < land.size(); ++i) {
    const auto f = land.factors[i];
    const auto& name = p.factors[f].name;
    out["land:" + name] = s.factor_employed[f];
    out["land_ur:" + name] = eq.unknowns.ur[f];
    out["land_rent:" + name] = land.wfavg[i] / s.cpi;
  }
  out["deforestation"] = land.deforestation_total;
  out["forest"] = land.forest;
  out["deforestation_rate"] = land.forest > 0.0 ? land.deforestation_total / land.forest : 0.0;
  out["ghg"] = emissions.total();
  return out;
}

namespace {

struct ResolvedWedge {
  std::size_t commodity;
  std::size_t partner;
  PriceWedge spec;
  double current;
  bool pinned = false;
};

std::vector<ResolvedWedge> resolve_wedges(const ModelParameters& p, const std::vector<PriceWedge>& shocks) {
  std::vector<ResolvedWedge> out;
  for (const auto& w : shocks) {
    const auto c = p.find_commodity(w.commodity);
    if (!c) throw Error(ErrorCode::InvalidConfig, "shock on unknown commodity '" + w.commodity + "'");
    out.push_back({*c, w.destination == Partner::EU ? kEU : kRest, w, w.wedge});
  }
  return out;
}

void apply_wedges(PeriodExogenous& exo, const std::vector<ResolvedWedge>& wedges) {
  for (auto& w : exo.export_wedge) w = {0.0, 0.0};
  for (const auto& w : wedges) exo.export_wedge[w.commodity][w.partner] = w.current;
}

double exports_to(const ModelState& s, const ResolvedWedge& w) {
  return w.partner == kEU ? s.qe_eu[w.commodity] : s.qe_rest[w.commodity];
}

constexpr double kMinRetained = 1e-6;  // largest wedge is 1 - kMinRetained
constexpr double kCapTolerance = 1e-3;  // on log exports relative to the aim

std::string year_context(int year) { return " (year " + std::to_string(year) + ")"; }

// Adjusts cap wedges until each capped export flow sits at its aim.
PeriodEquilibrium solve_with_caps(const ModelParameters& p, PeriodExogenous& exo, const SolverConfig& solver,
                                  std::vector<ResolvedWedge>& wedges, const std::vector<double>& aims,
                                  PeriodEquilibrium eq, int year, std::vector<std::string>& warnings) {
  std::vector<double> prev_lw(wedges.size(), NAN), prev_lq(wedges.size(), NAN);
  for (int round = 0; round < 60; ++round) {
    bool done = true;
    for (std::size_t k = 0; k < wedges.size(); ++k) {
      auto& w = wedges[k];
      if (w.spec.mode != WedgeMode::SolveForQuantityCap || !(aims[k] > 0.0) || w.pinned) continue;
      const double q = exports_to(eq.state, w);
      const double err = std::log(q / aims[k]);
      if (std::abs(err) <= kCapTolerance) continue;
      done = false;
      const double lw = std::log(1.0 - w.current);
      const double sigma = std::max(0.1, -p.commodities[w.commodity].cet_destination.sigma());
      double slope = sigma;
      if (std::isfinite(prev_lw[k]) && std::abs(lw - prev_lw[k]) > 1e-12) {
        slope = std::clamp((std::log(q) - prev_lq[k]) / (lw - prev_lw[k]), 0.25 * sigma, 20.0 * sigma);
      }
      prev_lw[k] = lw;
      prev_lq[k] = std::log(q);
      const double floor = std::log(kMinRetained);
      double next = lw - err / slope;
      if (next <= floor) {
        next = floor;
        if (lw <= floor + 1e-12) {
          w.pinned = true;
          const std::string msg = "CapUnreachable: '" + w.spec.commodity + "' stays above its cap at the "
                                  "maximum wedge" + year_context(year);
          spdlog::warn("{}", msg);
          warnings.push_back(msg);
        }
      }
      w.current = 1.0 - std::exp(next);
    }
    if (done) return eq;
    apply_wedges(exo, wedges);
    eq = solve_period(p, exo, solver, eq.unknowns);
  }
  throw Error(ErrorCode::NotConverged, "export caps not met after 60 rounds" + year_context(year));
}

}  // namespace

Trajectory run_trajectory(const ModelContext& ctx, const ScenarioSpec& spec, const RunOptions& opt) {
  spec.validate();
  const auto p = apply_overrides(ctx.params, spec.overrides);
  const int n = spec.end_year - spec.start_year + 1;
  const bool calibrate = spec.mode == ScenarioMode::Baseline && opt.tfp_path == nullptr;
  if (spec.mode == ScenarioMode::Counterfactual && opt.tfp_path == nullptr) {
    throw Error(ErrorCode::InvalidConfig, "counterfactual '" + spec.name + "' needs a baseline TFP path");
  }
  if (opt.tfp_path && static_cast<int>(opt.tfp_path->size()) != n) {
    throw Error(ErrorCode::InvalidConfig, "TFP path does not cover the horizon");
  }
  auto wedges = resolve_wedges(p, spec.shocks);
  const bool has_caps = std::any_of(wedges.begin(), wedges.end(), [](const ResolvedWedge& w) {
    return w.spec.mode == WedgeMode::SolveForQuantityCap;
  });
  if (has_caps && opt.baseline == nullptr) {
    throw Error(ErrorCode::InvalidConfig, "quantity caps in '" + spec.name + "' need a baseline trajectory");
  }

  Trajectory traj;
  traj.record.name = spec.name;
  auto land = LandAccount::initial(p, ctx.dynamics.forest_stock);
  auto capital = CapitalAccount::initial(p, ctx.dynamics);
  auto exo = PeriodExogenous::base(p);
  PeriodUnknowns prev = PeriodUnknowns::base(p);
  double prev_gdp = 0.0;
  double level = 1.0;

  for (int k = 0; k < n; ++k) {
    const int year = spec.start_year + k;
    for (std::size_t i = 0; i < land.size(); ++i) exo.factor_supply[land.factors[i]] = land.qfs[i];
    exo.capital = capital.services();
    const bool shocked = spec.mode == ScenarioMode::Counterfactual && year >= spec.shock_start;
    if (shocked) {
      apply_wedges(exo, wedges);
    } else {
      for (auto& w : exo.export_wedge) w = {0.0, 0.0};
    }

    try {
      if (calibrate && k > 0) {
        const double target = prev_gdp * (1.0 + ctx.projections.gdp(year));
        auto gap = [&](double tfp) {
          exo.tfp.assign(p.activities.size(), tfp);
          return std::log(solve_period(p, exo, spec.solver, prev).state.gdp_real / target);
        };
        level = find_root(gap, level * 0.8, level * 1.25, 1e-12, 80, "TFP for " + std::to_string(year)).x;
      } else if (opt.tfp_path) {
        level = (*opt.tfp_path)[k];
      }
      exo.tfp.assign(p.activities.size(), level);
      auto eq = solve_period(p, exo, spec.solver, prev);

      if (shocked && has_caps) {
        std::vector<double> aims(wedges.size(), 0.0);
        for (std::size_t w = 0; w < wedges.size(); ++w) {
          if (wedges[w].spec.mode != WedgeMode::SolveForQuantityCap) continue;
          const auto key = std::string(wedges[w].partner == kEU ? "exports_eu:" : "exports_rest:") +
                           wedges[w].spec.commodity;
          aims[w] = wedges[w].spec.cap * (1.0 - spec.cap_margin) * opt.baseline->indicator(year, key);
        }
        eq = solve_with_caps(p, exo, spec.solver, wedges, aims, std::move(eq), year, traj.warnings);
      }

      for (std::size_t i = 0; i < land.size(); ++i) {
        const auto f = land.factors[i];
        land.ur[i] = eq.unknowns.ur[f];
        land.wfavg[i] = eq.state.factor_employed[f] > 0.0 ? eq.state.factor_price_avg[f] : eq.unknowns.wf[f];
      }
      land.qdefor = deforestation_supply(land, eq.state.cpi);
      land.deforestation_total = 0.0;
      for (double d : land.qdefor) land.deforestation_total += d;

      PeriodRecord rec;
      rec.year = year;
      rec.emissions = compute_emissions(drivers_from_state(p, eq.state, land.forest, land.deforestation_total),
                                        ctx.coefficients);
      rec.indicators = period_indicators(p, exo, eq, land, rec.emissions);
      rec.indicators["tfp"] = level;
      for (std::size_t i = 0; i < land.size(); ++i) {
        rec.land.push_back({p.factors[land.factors[i]].name, land.qfs[i], land.qfinit[i], land.qdefor[i],
                            land.ur[i], land.wfavg[i]});
      }
      traj.record.periods.push_back(std::move(rec));
      traj.tfp.push_back(level);
      prev = eq.unknowns;
      prev_gdp = eq.state.gdp_real;

      if (k + 1 < n) {
        const double investment = real_investment(p, eq.state);
        land = advance_land(land, &traj.warnings);
        migrate_all(land, ctx.dynamics.mobility);
        const double growth = ctx.projections.population(year + 1);
        auto next = advance_capital_labor(capital, investment, 1.0, growth);
        capital = next.capital;
        for (std::size_t f = 0; f < p.factors.size(); ++f) {
          if (p.factors[f].type == FactorType::Labor) exo.factor_supply[f] *= next.labor_supply;
        }
      }
      traj.equilibria.push_back(std::move(eq));
    } catch (const Error& e) {
      throw Error(e.code(), std::string(e.what()) + " [" + spec.name + ", year " + std::to_string(year) + "]");
    }
  }
  return traj;
}

std::vector<PriceWedge> build_eudr_shock(const ModelContext& ctx, const std::vector<std::string>& covered,
                                         double compliant_wedge, double noncompliant_cap,
                                         const SolverConfig& solver, double cap_margin,
                                         std::vector<std::string>* warnings) {
  const auto& p = ctx.params;
  std::vector<PriceWedge> out;
  for (const auto& name : covered) {
    const auto c = name + std::string(kCompliantSuffix);
    const auto nc = name + std::string(kNonCompliantSuffix);
    if (!p.find_commodity(c) || !p.find_commodity(nc)) {
      throw Error(ErrorCode::InvalidConfig, "covered commodity '" + name + "' lacks compliance variants");
    }
    out.push_back({c, Partner::EU, compliant_wedge, WedgeMode::Fixed, 1.0});
    out.push_back({nc, Partner::EU, 0.0, WedgeMode::SolveForQuantityCap, noncompliant_cap});
  }
  for (const auto& w : out) w.validate();
  if (out.empty()) return out;

  // Initial cap wedges on base-year solves, one commodity at a time.
  auto wedges = resolve_wedges(p, out);
  auto exo = PeriodExogenous::base(p);
  const auto start = PeriodUnknowns::base(p);
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (auto& w : wedges) {
      if (w.spec.mode != WedgeMode::SolveForQuantityCap || w.pinned) continue;
      const auto& cp = p.commodities[w.commodity];
      const double aim = w.spec.cap * (1.0 - cap_margin) * cp.exports0[w.partner];
      if (!(aim > 0.0)) continue;
      auto gap = [&](double lw) {
        w.current = 1.0 - std::exp(lw);
        apply_wedges(exo, wedges);
        return std::log(exports_to(solve_period(p, exo, solver, start).state, w) / aim);
      };
      const double floor = std::log(kMinRetained);
      if (gap(floor) > 0.0) {
        w.current = 1.0 - kMinRetained;
        w.pinned = true;
        const std::string msg = "CapUnreachable: '" + w.spec.commodity + "' exceeds its cap at the maximum wedge";
        spdlog::warn("{}", msg);
        if (warnings) warnings->push_back(msg);
        continue;
      }
      w.current = 1.0 - std::exp(find_root(gap, floor, 0.0, 1e-4, 80, "cap wedge for " + w.spec.commodity).x);
    }
  }
  for (std::size_t k = 0; k < out.size(); ++k) out[k].wedge = wedges[k].current;
  return out;
}

std::vector<double> calibrate_tfp_path(const ModelContext& ctx, const ScenarioSpec& baseline) {
  auto spec = baseline;
  spec.mode = ScenarioMode::Baseline;
  return run_trajectory(ctx, spec).tfp;
}

double average_deforestation_rate(const TrajectoryRecord& record) {
  if (record.periods.size() < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t k = 1; k < record.periods.size(); ++k) {
    sum += record.periods[k].indicators.at("deforestation_rate");
  }
  return sum / static_cast<double>(record.periods.size() - 1);
}

ModelContext with_land_supply_elasticity(ModelContext ctx, double mu) {
  for (auto& f : ctx.params.factors) {
    if (f.type == FactorType::Land) f.land_supply_elasticity = mu;
  }
  return ctx;
}

LandElasticityResult calibrate_land_elasticity(const ModelContext& ctx, const ScenarioSpec& baseline,
                                               const CalibrationTargets& targets) {
  if (!(targets.deforestation_rate >= 0.0 && targets.deforestation_rate < 0.1)) {
    throw Error(ErrorCode::InvalidConfig, "deforestation-rate target must lie in [0, 0.1)");
  }
  auto spec = baseline;
  spec.mode = ScenarioMode::Baseline;
  LandElasticityResult result;
  auto rate = [&](double mu) {
    ++result.runs;
    return average_deforestation_rate(run_trajectory(with_land_supply_elasticity(ctx, mu), spec).record);
  };
  if (targets.deforestation_rate == 0.0) {
    result.mu = 0.0;
    result.achieved_rate = rate(0.0);
    return result;
  }
  auto gap = [&](double mu) { return rate(mu) - targets.deforestation_rate; };
  double hi = 0.05;
  while (gap(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e4) {
      throw Error(ErrorCode::NotConverged, "no land supply elasticity reaches the deforestation target");
    }
  }
  const auto root = find_root(gap, 0.0, hi, targets.rate_tolerance, 80, "land supply elasticity");
  result.mu = root.x;
  result.achieved_rate = root.f + targets.deforestation_rate;
  spdlog::info("land supply elasticity {:.6g} gives average deforestation rate {:.6g} ({} runs)", result.mu,
               result.achieved_rate, result.runs);
  return result;
}

CoverageSummary coverage_summary(const SocialAccountingMatrix& sam) {
  std::optional<std::size_t> eu;
  std::vector<std::size_t> rows;
  for (auto r : sam.of_kind(AccountKind::RestOfWorld)) {
    rows.push_back(r);
    if (sam.account(r).partner == Partner::EU) eu = r;
  }
  if (!eu) throw Error(ErrorCode::NotDisaggregated, "SAM has no EU rest-of-world account");
  std::map<std::string, CoverageRow> by_base;
  std::map<std::string, double> exports, demand;
  std::vector<std::string> order;
  for (auto c : sam.of_kind(AccountKind::Commodity)) {
    const auto& id = sam.account(c);
    if (id.compliance == Compliance::NotApplicable) continue;
    const auto base = base_name(id);
    if (!by_base.count(base)) order.push_back(base);
    auto& row = by_base[base];
    row.commodity = base;
    const double eu_value = sam.flow(c, *eu);
    (id.compliance == Compliance::Compliant ? row.eu_compliant : row.eu_noncompliant) += eu_value;
    for (auto r : rows) exports[base] += sam.flow(c, r);
    demand[base] += sam.row_sum(c);
  }
  if (order.empty()) throw Error(ErrorCode::NotDisaggregated, "SAM has no compliance-split commodities");
  CoverageSummary out;
  out.total.commodity = "total";
  double total_exports = 0.0, total_demand = 0.0;
  for (const auto& base : order) {
    auto row = by_base[base];
    const double eu_value = row.eu_compliant + row.eu_noncompliant;
    row.eu_export_share = exports[base] > 0.0 ? 100.0 * eu_value / exports[base] : 0.0;
    row.export_share_demand = demand[base] > 0.0 ? 100.0 * exports[base] / demand[base] : 0.0;
    out.total.eu_compliant += row.eu_compliant;
    out.total.eu_noncompliant += row.eu_noncompliant;
    total_exports += exports[base];
    total_demand += demand[base];
    out.rows.push_back(row);
  }
  const double eu_total = out.total.eu_compliant + out.total.eu_noncompliant;
  out.total.eu_export_share = total_exports > 0.0 ? 100.0 * eu_total / total_exports : 0.0;
  out.total.export_share_demand = total_demand > 0.0 ? 100.0 * total_exports / total_demand : 0.0;
  out.noncompliant_pct = eu_total > 0.0 ? 100.0 * out.total.eu_noncompliant / eu_total : 0.0;
  return out;
}

std::vector<SensitivityCase> sensitivity_cases() {
  return {{"S1", "land_supply", 0.5},     {"S2", "land_supply", 1.5},     {"S3", "land_wage_curve", 0.5},
          {"S4", "land_wage_curve", 1.5}, {"S5", "cet_top", 0.5},         {"S6", "cet_top", 1.5},
          {"S7", "cet_destination", 0.5}, {"S8", "cet_destination", 1.5}};
}

ScenarioPair run_pair(const ModelContext& ctx, const ScenarioSpec& baseline, const ScenarioSpec& counterfactual,
                      const EudrSettings& eudr, const std::vector<double>* tfp_path) {
  ScenarioPair pair;
  pair.name = counterfactual.name;
  ModelContext local = ctx;
  local.params = apply_overrides(ctx.params, baseline.overrides);
  auto base_spec = baseline;
  base_spec.mode = ScenarioMode::Baseline;
  base_spec.overrides.clear();
  pair.baseline = run_trajectory(local, base_spec, {tfp_path, nullptr});

  auto cf = counterfactual;
  cf.mode = ScenarioMode::Counterfactual;
  cf.overrides.clear();
  auto shocks = build_eudr_shock(local, eudr.covered, eudr.compliant_wedge, eudr.noncompliant_cap, cf.solver,
                                 cf.cap_margin, &pair.scenario.warnings);
  cf.shocks.insert(cf.shocks.begin(), shocks.begin(), shocks.end());
  auto warnings = std::move(pair.scenario.warnings);
  pair.scenario = run_trajectory(local, cf, {&pair.baseline.tfp, &pair.baseline.record});
  pair.scenario.warnings.insert(pair.scenario.warnings.begin(), warnings.begin(), warnings.end());
  pair.ok = true;
  return pair;
}

SensitivityResult sensitivity_suite(const ModelContext& ctx, const ScenarioSpec& baseline,
                                    const ScenarioSpec& counterfactual, const EudrSettings& eudr,
                                    const std::vector<SensitivityCase>& cases, int jobs) {
  SensitivityResult result;
  result.central = run_pair(ctx, baseline, counterfactual, eudr, nullptr);
  result.central.name = "central";

  result.cases.resize(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      const auto& sc = cases[i];
      auto& slot = result.cases[i];
      try {
        auto b = baseline;
        auto c = counterfactual;
        b.overrides[sc.group] = sc.factor;
        b.name = sc.name + "_baseline";
        c.name = sc.name + "_" + counterfactual.name;
        slot = run_pair(ctx, b, c, eudr, nullptr);
      } catch (const Error& e) {
        slot.ok = false;
        slot.error = e.what();
        spdlog::error("sensitivity case {} failed: {}", sc.name, e.what());
      }
      slot.name = sc.name;
      slot.group = sc.group;
      slot.factor = sc.factor;
    }
  };
  const int threads = std::max(1, std::min<int>(jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency()),
                                                static_cast<int>(cases.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return result;
}

}  // namespace deforcge
