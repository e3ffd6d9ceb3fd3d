#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deforcge/dynamics.hpp"
#include "deforcge/emissions.hpp"
#include "deforcge/model.hpp"
#include "deforcge/sam.hpp"
#include "deforcge/solver.hpp"

namespace deforcge {

struct Projections {
  std::map<int, double> gdp_growth;
  std::map<int, double> population_growth;

  double gdp(int year) const;         // throws InvalidConfig when missing
  double population(int year) const;  // zero when missing
};

// Calibrated model plus everything a trajectory needs besides the scenario.
struct ModelContext {
  ModelParameters params;
  DynamicsConfig dynamics;
  EmissionCoefficients coefficients;
  Projections projections;
};

enum class WedgeMode { Fixed, SolveForQuantityCap };

struct PriceWedge {
  std::string commodity;
  Partner destination = Partner::EU;
  double wedge = 0.0;  // fraction of the world price removed (initial guess for caps)
  WedgeMode mode = WedgeMode::Fixed;
  double cap = 1.0;  // residual export share, SolveForQuantityCap only

  void validate() const;
};

// Multiplicative factors on calibrated elasticities. Recognised groups:
// land_supply, land_wage_curve, labor_wage_curve, cet_top,
// cet_destination, armington, value_added.
using Overrides = std::map<std::string, double>;
ModelParameters apply_overrides(const ModelParameters& params, const Overrides& overrides);

enum class ScenarioMode { Baseline, Counterfactual };

struct ScenarioSpec {
  std::string name;
  int start_year = 0;
  int end_year = 0;
  ScenarioMode mode = ScenarioMode::Baseline;
  int shock_start = 0;
  std::vector<PriceWedge> shocks;
  Overrides overrides;
  SolverConfig solver;
  double cap_margin = 0.005;  // caps are aimed this far below their limit

  void validate() const;
};

struct LandRow {
  std::string factor;
  double qfs = 0.0, qfinit = 0.0, qdefor = 0.0, ur = 0.0, wfavg = 0.0;
};

// What a period leaves behind: enough to rebuild every report.
struct PeriodRecord {
  int year = 0;
  std::map<std::string, double> indicators;
  std::vector<LandRow> land;
  EmissionsLedger emissions;
};

struct TrajectoryRecord {
  std::string name;
  std::vector<PeriodRecord> periods;

  std::vector<int> years() const;
  const PeriodRecord& at_year(int year) const;
  double indicator(int year, const std::string& key) const;
};

struct Trajectory {
  TrajectoryRecord record;
  std::vector<PeriodEquilibrium> equilibria;
  std::vector<double> tfp;  // uniform TFP level per year
  std::vector<std::string> warnings;
};

// Indicators of one solved period.
std::map<std::string, double> period_indicators(const ModelParameters& params, const PeriodExogenous& exo,
                                                const PeriodEquilibrium& eq, const LandAccount& land,
                                                const EmissionsLedger& emissions);

struct RunOptions {
  const std::vector<double>* tfp_path = nullptr;  // required for counterfactuals
  const TrajectoryRecord* baseline = nullptr;     // reference for quantity caps
};

// Baseline mode without a TFP path calibrates TFP year by year to the GDP
// growth projections; otherwise the given path is applied.
Trajectory run_trajectory(const ModelContext& ctx, const ScenarioSpec& spec, const RunOptions& options = {});

// Wedges for covered commodities (unsplit names). Compliant twins get a fixed
// EU wedge; non-compliant twins get a cap, with initial wedges bracketed on
// base-year solves.
std::vector<PriceWedge> build_eudr_shock(const ModelContext& ctx, const std::vector<std::string>& covered,
                                         double compliant_wedge, double noncompliant_cap,
                                         const SolverConfig& solver, double cap_margin = 0.005,
                                         std::vector<std::string>* warnings = nullptr);

struct CalibrationTargets {
  double deforestation_rate = 0.008;
  double rate_tolerance = 1e-7;
};

std::vector<double> calibrate_tfp_path(const ModelContext& ctx, const ScenarioSpec& baseline);

// Average baseline deforestation rate over the years after the base year.
double average_deforestation_rate(const TrajectoryRecord& record);

struct LandElasticityResult {
  double mu = 0.0;
  double achieved_rate = 0.0;
  int runs = 0;
};

// Uniform mu across non-compliant land types hitting the target rate.
LandElasticityResult calibrate_land_elasticity(const ModelContext& ctx, const ScenarioSpec& baseline,
                                               const CalibrationTargets& targets);

ModelContext with_land_supply_elasticity(ModelContext ctx, double mu);

// Coverage of EU exports by compliance.
struct CoverageRow {
  std::string commodity;
  double eu_export_share = 0.0;      // % of exports going to the EU
  double export_share_demand = 0.0;  // % of total supply exported
  double eu_compliant = 0.0;
  double eu_noncompliant = 0.0;
};

struct CoverageSummary {
  std::vector<CoverageRow> rows;
  CoverageRow total;
  double noncompliant_pct = 0.0;  // of EU exports of covered products
};

CoverageSummary coverage_summary(const SocialAccountingMatrix& sam);

struct SensitivityCase {
  std::string name;
  std::string group;
  double factor = 1.0;
};

// S1..S8: land supply, land wage curve, top CET, destination CET at 0.5 and 1.5.
std::vector<SensitivityCase> sensitivity_cases();

struct ScenarioPair {
  std::string name;
  std::string group;
  double factor = 1.0;
  bool ok = false;
  std::string error;
  Trajectory baseline;
  Trajectory scenario;
};

struct SensitivityResult {
  ScenarioPair central;
  std::vector<ScenarioPair> cases;
};

struct EudrSettings {
  std::vector<std::string> covered;
  double compliant_wedge = 0.06;
  double noncompliant_cap = 0.01;
};

// Baseline (TFP-calibrated unless a path is given) and EUDR run on one
// parameter set.
ScenarioPair run_pair(const ModelContext& ctx, const ScenarioSpec& baseline, const ScenarioSpec& counterfactual,
                      const EudrSettings& eudr, const std::vector<double>* tfp_path);

// Central pair plus every case, with up to `jobs` cases in flight. Each case
// re-runs its baseline with TFP re-calibrated to the same GDP projections.
// Failed cases are marked and the suite carries on.
SensitivityResult sensitivity_suite(const ModelContext& ctx, const ScenarioSpec& baseline,
                                    const ScenarioSpec& counterfactual, const EudrSettings& eudr,
                                    const std::vector<SensitivityCase>& cases, int jobs);

}  // namespace deforcge
