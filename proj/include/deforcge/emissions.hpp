#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "deforcge/model.hpp"

namespace deforcge {

// Emission intensities. Activity and product keys may be unsplit names,
// which then apply to both compliance twins.
struct EmissionCoefficients {
  std::map<std::string, double> activity;  // MtCO2e per unit of activity level
  double sequestration = 0.0;              // per ha of standing forest, <= 0
  double land_use_change = 0.0;            // per ha deforested, >= 0
  // product -> emitter ("*" for any) -> MtCO2e per unit consumed
  std::map<std::string, std::map<std::string, double>> product;
};

EmissionCoefficients read_coefficients(const std::filesystem::path& path);

// Everything the ledger depends on, detached from the model state so it
// can be built by hand in tests.
struct EmissionDrivers {
  std::vector<std::string> activities;
  std::vector<double> activity_level;
  std::vector<bool> land_using;  // activities that must carry an AFOLU coefficient
  // product -> emitter -> quantity consumed
  std::map<std::string, std::map<std::string, double>> consumption;
  double forest = 0.0;
  double deforestation = 0.0;
};

EmissionDrivers drivers_from_state(const ModelParameters& params, const ModelState& state, double forest,
                                   double deforestation);

// One emitter's emissions through one driver: intensity * total * share.
struct EmissionEntry {
  std::string emitter;
  std::string driver;
  double intensity = 0.0;
  double total = 0.0;  // driver total across emitters
  double share = 0.0;  // this emitter's share of it
  bool sink = false;

  double value() const { return intensity * total * share; }
};

struct EmissionsLedger {
  std::vector<EmissionEntry> entries;

  double total() const;
  std::map<std::string, double> by_emitter() const;
};

inline constexpr std::string_view kForestSink = "forest_sink";
inline constexpr std::string_view kLandUseChange = "land_use_change";

EmissionsLedger compute_emissions(const EmissionDrivers& drivers, const EmissionCoefficients& coeffs);

struct Decomposition {
  double scale = 0.0;
  double composition = 0.0;
  double total = 0.0;
  bool sink = false;
};

// Per emitter: scale = sum eps * share0 * dT, composition = sum eps * T1 * dshare.
std::map<std::string, Decomposition> decompose_emissions(const EmissionsLedger& base,
                                                         const EmissionsLedger& scen);

struct EmissionsDeviation {
  int first_year = 0;
  int last_year = 0;
  double total_pct = 0.0;
  std::map<std::string, double> emitter_pct;
  std::map<std::string, Decomposition> decomposition;  // window averages
};

// Ledgers per year for both trajectories (same years in the same order).
EmissionsDeviation emissions_deviation(const std::vector<int>& years, const std::vector<EmissionsLedger>& base,
                                       const std::vector<EmissionsLedger>& scen, int first_year, int last_year);

}  // namespace deforcge
