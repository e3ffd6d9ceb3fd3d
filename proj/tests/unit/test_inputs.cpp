#include <doctest.h>

#include <fstream>

#include "deforcge/inputs.hpp"
#include "support/support.hpp"

using namespace deforcge;
using testing::code_of;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("projections") {
  const auto dir = testing::scratch("proj");
  write(dir / "p.csv", "year,gdp_growth,population_growth\n2020,0.02,0.01\n2021,0.03,0.005\n");
  const auto p = read_projections(dir / "p.csv");
  CHECK(p.gdp(2021) == 0.03);
  CHECK(p.population(2020) == 0.01);
  CHECK(p.population(2040) == 0.0);
  CHECK(code_of([&] { p.gdp(2040); }) == ErrorCode::InvalidConfig);
  write(dir / "dup.csv", "year,gdp_growth,population_growth\n2020,0.02,0.01\n2020,0.03,0.005\n");
  CHECK(code_of([&] { read_projections(dir / "dup.csv"); }) == ErrorCode::MalformedRecord);
}

TEST_CASE("bundled model configuration") {
  const auto cfg = read_model_config(testing::data_dir() / "model.json");
  CHECK(cfg.calibration.factors.at("lab").type == FactorType::Labor);
  CHECK(cfg.calibration.factors.at("lab").wage_curve_elasticity == -0.1);
  CHECK(cfg.calibration.factors.at("land_crop").wage_curve_elasticity == -0.4);
  CHECK(cfg.dynamics.depreciation == 0.05);
  CHECK(cfg.dynamics.rental_rate == 0.10);
  const auto dir = testing::scratch("model");
  write(dir / "bad.json", "{\"elasticities\": {}}");
  CHECK(code_of([&] { read_model_config(dir / "bad.json"); }) == ErrorCode::InvalidConfig);
  write(dir / "broken.json", "{");
  CHECK(code_of([&] { read_model_config(dir / "broken.json"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("scenario files") {
  const auto s = read_scenario(testing::data_dir() / "scenarios" / "eudr.json");
  CHECK(s.baseline.start_year == 2019);
  CHECK(s.baseline.end_year == 2030);
  CHECK(s.counterfactual.mode == ScenarioMode::Counterfactual);
  CHECK(s.counterfactual.shock_start == 2025);
  REQUIRE(s.eudr);
  CHECK(s.eudr->covered.size() == 5);
  CHECK(s.eudr->compliant_wedge == 0.06);
  CHECK(s.eudr->noncompliant_cap == 0.01);
  CHECK_FALSE(s.land_supply_elasticity);
  CHECK(s.targets.deforestation_rate == 0.008);
  CHECK(std::filesystem::exists(s.sam));

  const auto dir = testing::scratch("scen");
  write(dir / "min.json",
        "{\"inputs\": {\"sam\": \"s.csv\", \"model\": \"m.json\", \"coefficients\": \"c.csv\", "
        "\"projections\": \"p.csv\"}, \"horizon\": {\"start\": 2019, \"end\": 2032},"
        "\"shocks\": {\"wedges\": [{\"commodity\": \"c_x\", \"wedge\": 0.1, \"destination\": \"rest\"},"
        "{\"commodity\": \"c_y\", \"cap\": 0.5}]},"
        "\"calibration\": {\"land_supply_elasticity\": 0.3}}");
  const auto m = read_scenario(dir / "min.json");
  CHECK(m.baseline.shock_start == 2025);
  CHECK(m.report_first == 2025);
  CHECK(m.report_last == 2032);
  CHECK(m.sam == dir / "s.csv");
  CHECK(m.land_supply_elasticity == 0.3);
  REQUIRE(m.counterfactual.shocks.size() == 2);
  CHECK(m.counterfactual.shocks[0].destination == Partner::Rest);
  CHECK(m.counterfactual.shocks[1].mode == WedgeMode::SolveForQuantityCap);
  CHECK(m.baseline.shocks.empty());

  write(dir / "mu.json",
        "{\"inputs\": {\"sam\": \"s\", \"model\": \"m\", \"coefficients\": \"c\", \"projections\": \"p\"},"
        "\"horizon\": {\"start\": 2019, \"end\": 2020}, \"calibration\": {\"land_supply_elasticity\": \"x\"}}");
  CHECK(code_of([&] { read_scenario(dir / "mu.json"); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("load_context") {
  const auto ctx = load_context(read_scenario(testing::data_dir() / "scenarios" / "baseline.json"));
  CHECK(ctx.params.activities.size() == 14);
  CHECK(ctx.projections.gdp(2020) == 0.02);
  CHECK(ctx.coefficients.sequestration < 0.0);
  CHECK(ctx.dynamics.forest_stock > 0.0);
}
