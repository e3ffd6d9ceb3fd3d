#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "deforcge/calibrate.hpp"
#include "deforcge/dynamics.hpp"
#include "deforcge/scenario.hpp"

namespace deforcge {

// CSV with columns year,gdp_growth,population_growth (growth as fractions).
Projections read_projections(const std::filesystem::path& path);

// Behavioural parameters that the SAM does not carry (model.json).
struct ModelConfig {
  CalibrationInputs calibration;
  DynamicsConfig dynamics;
};

ModelConfig read_model_config(const std::filesystem::path& path);

// A scenario file describes one baseline/EUDR pair. Input paths are
// resolved relative to the file.
struct ScenarioFile {
  std::filesystem::path source;
  std::filesystem::path sam, model, coefficients, projections;
  ScenarioSpec baseline;
  ScenarioSpec counterfactual;
  std::optional<EudrSettings> eudr;
  int report_first = 0;
  int report_last = 0;
  std::optional<double> land_supply_elasticity;  // empty: calibrate to the target rate
  CalibrationTargets targets;
};

ScenarioFile read_scenario(const std::filesystem::path& path);

// SAM + model.json + coefficients + projections, calibrated and ready to run.
ModelContext load_context(const ScenarioFile& scenario);

}  // namespace deforcge
