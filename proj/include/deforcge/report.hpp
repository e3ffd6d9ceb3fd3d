#pragma once

#include <filesystem>
#include <optional>
#include <utility>
#include <string>
#include <vector>

#include "deforcge/emissions.hpp"
#include "deforcge/scenario.hpp"

namespace deforcge {

// Levels are compared in percent, rates in percentage points.
enum class IndicatorKind { Level, Rate };
IndicatorKind indicator_kind(const std::string& key);

// Mean deviation of scen from base over [first, last].
double average_deviation(const TrajectoryRecord& base, const TrajectoryRecord& scen, const std::string& key,
                         int first, int last);

struct DeviationRow {
  std::string key;
  std::string group;  // macro | labor | environment | value_added | land
  IndicatorKind kind = IndicatorKind::Level;
  double value = 0.0;
};

struct CommodityDeviation {
  std::string commodity;
  double production = 0.0;
  double domestic_sales = 0.0;
  double exports = 0.0;
  double exports_eu = 0.0;
  double exports_rest = 0.0;
  double imports = 0.0;
};

struct DeviationReport {
  int first_year = 0;
  int last_year = 0;
  std::vector<DeviationRow> rows;
  std::vector<CommodityDeviation> commodities;

  // Throws MismatchedTrajectories for an unknown key.
  double value(const std::string& key) const;
};

DeviationReport deviation_report(const TrajectoryRecord& base, const TrajectoryRecord& scen, int first, int last);

EmissionsDeviation emissions_deviation(const TrajectoryRecord& base, const TrajectoryRecord& scen, int first,
                                       int last);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
  // A failed ordering whose mechanism the detail explains from the run itself.
  bool diverges = false;
};

// Expected directions of the EUDR shock on the central run.
std::vector<Check> sign_suite(const DeviationReport& report);

struct SensitivityReports {
  DeviationReport central;
  std::string reference;  // "central_baseline" or "own_baseline"
  std::vector<std::string> names;  // S1..S8
  std::vector<bool> ok;
  std::vector<DeviationReport> reports;  // empty report when !ok
};

// Stored trajectories of a sensitivity suite; failed cases have no pair.
struct SensitivityRecords {
  TrajectoryRecord central_baseline;
  TrajectoryRecord central_scenario;
  std::vector<std::string> names;
  std::vector<std::optional<std::pair<TrajectoryRecord, TrajectoryRecord>>> cases;  // baseline, scenario
};

SensitivityRecords sensitivity_records(const SensitivityResult& result);

// CentralBaseline measures every case's scenario against the one
// business-as-usual baseline; OwnBaseline against the case's re-run baseline.
enum class SensitivityReference { CentralBaseline, OwnBaseline };

SensitivityReports sensitivity_reports(const SensitivityRecords& records, int first, int last,
                                       SensitivityReference reference);

std::vector<Check> sensitivity_checks(const SensitivityReports& suite);

// CSV renderers; output is deterministic for identical inputs.
std::string macro_csv(const DeviationReport& report);
std::string commodity_csv(const DeviationReport& report);
std::string sensitivity_csv(const SensitivityReports& suite);
std::string coverage_csv(const CoverageSummary& summary);
std::string emissions_csv(const EmissionsDeviation& deviation);
std::string checks_csv(const std::vector<Check>& checks);

// Trajectory directory: manifest.json, indicators.csv, land.csv, emissions.csv.
void save_trajectory(const TrajectoryRecord& record, const std::filesystem::path& dir);
TrajectoryRecord load_trajectory(const std::filesystem::path& dir);

}  // namespace deforcge
