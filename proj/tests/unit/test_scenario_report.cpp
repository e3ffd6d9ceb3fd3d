#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "deforcge/inputs.hpp"
#include "deforcge/report.hpp"
#include "support/support.hpp"

using namespace deforcge;
using testing::code_of;

namespace {

const ModelContext& bundled() {
  static const ModelContext ctx = with_land_supply_elasticity(
      load_context(read_scenario(testing::data_dir() / "scenarios" / "eudr.json")), 0.75);
  return ctx;
}

ScenarioSpec short_baseline() {
  ScenarioSpec s;
  s.name = "baseline";
  s.start_year = 2019;
  s.end_year = 2022;
  s.shock_start = 2021;
  return s;
}

ScenarioSpec counterfactual_of(const ScenarioSpec& b) {
  auto s = b;
  s.name = "eudr";
  s.mode = ScenarioMode::Counterfactual;
  return s;
}

const Trajectory& short_run() {
  static const Trajectory t = run_trajectory(bundled(), short_baseline());
  return t;
}

TrajectoryRecord toy_record(const std::string& name, std::vector<double> gdp, std::vector<double> ur) {
  TrajectoryRecord r;
  r.name = name;
  for (std::size_t k = 0; k < gdp.size(); ++k) {
    PeriodRecord p;
    p.year = 2025 + static_cast<int>(k);
    p.indicators["gdp"] = gdp[k];
    p.indicators["unemployment"] = ur[k];
    r.periods.push_back(p);
  }
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("counterfactual without shocks reproduces the baseline") {
  const auto& base = short_run();
  const auto cf = run_trajectory(bundled(), counterfactual_of(short_baseline()), {&base.tfp, nullptr});
  REQUIRE(cf.record.periods.size() == base.record.periods.size());
  for (std::size_t k = 0; k < cf.record.periods.size(); ++k) {
    for (const auto& [key, v] : base.record.periods[k].indicators) {
      const double w = cf.record.periods[k].indicators.at(key);
      if (key == "walras" || key == "residual") continue;
      CHECK(std::abs(w - v) <= 1e-9 * std::max(1.0, std::abs(v)));
    }
  }
  const auto rep = deviation_report(base.record, cf.record, 2021, 2022);
  for (const auto& row : rep.rows) CHECK(std::abs(row.value) <= 1e-7);
}

TEST_CASE("baseline calibration follows the GDP projections") {
  const auto& t = short_run();
  const auto& proj = bundled().projections;
  for (int year = 2020; year <= 2022; ++year) {
    const double g = t.record.indicator(year, "gdp") / t.record.indicator(year - 1, "gdp") - 1.0;
    CHECK(g == doctest::Approx(proj.gdp(year)).epsilon(1e-9));
  }
  for (const auto& eq : t.equilibria) CHECK(std::abs(eq.walras) <= 1e-8);
}

TEST_CASE("TFP recovers a path generated with constant productivity") {
  // Growth produced by TFP held at one becomes the target; calibration must return ones.
  auto ctx = bundled();
  auto spec = short_baseline();
  const std::vector<double> ones(4, 1.0);
  const auto flat = run_trajectory(ctx, spec, {&ones, nullptr});
  for (int year = 2020; year <= 2022; ++year) {
    ctx.projections.gdp_growth[year] =
        flat.record.indicator(year, "gdp") / flat.record.indicator(year - 1, "gdp") - 1.0;
  }
  const auto tfp = calibrate_tfp_path(ctx, spec);
  for (double v : tfp) CHECK(v == doctest::Approx(1.0).epsilon(1e-8));

  ctx.projections.gdp_growth[2020] = 0.5;
  CHECK(code_of([&] { calibrate_tfp_path(ctx, spec); }) == ErrorCode::TargetInfeasible);
}

TEST_CASE("EUDR shock") {
  const auto& base = short_run();
  const std::vector<std::string> covered{"c_crop", "c_meat"};
  const auto shocks = build_eudr_shock(bundled(), covered, 0.06, 0.01, SolverConfig{});
  REQUIRE(shocks.size() == 4);
  auto spec = counterfactual_of(short_baseline());
  spec.shocks = shocks;
  const auto cf = run_trajectory(bundled(), spec, {&base.tfp, &base.record});

  SUBCASE("years before the shock are untouched") {
    for (int year : {2019, 2020})
      for (const auto& [key, v] : base.record.at_year(year).indicators) {
        if (key == "walras" || key == "residual") continue;
        CHECK(std::abs(cf.record.indicator(year, key) - v) <= 1e-9 * std::max(1.0, std::abs(v)));
      }
  }
  SUBCASE("caps and fixed wedges hold in every shocked year") {
    for (int year : {2021, 2022}) {
      for (const auto& c : covered) {
        const double limit = 0.01 * base.record.indicator(year, "exports_eu:" + c + "_nc");
        CHECK(cf.record.indicator(year, "exports_eu:" + c + "_nc") <= limit * (1.0 + 1e-9));
        CHECK(cf.record.indicator(year, "wedge_eu:" + c + "_c") == 0.06);
      }
    }
  }
  SUBCASE("no covered products means no wedges") {
    CHECK(build_eudr_shock(bundled(), {}, 0.06, 0.01, SolverConfig{}).empty());
    CHECK(code_of([&] { build_eudr_shock(bundled(), {"c_manu"}, 0.06, 0.01, SolverConfig{}); }) ==
          ErrorCode::InvalidConfig);
  }
  SUBCASE("caps need a baseline") {
    CHECK(code_of([&] { run_trajectory(bundled(), spec, {&base.tfp, nullptr}); }) == ErrorCode::InvalidConfig);
  }
}

TEST_CASE("deviation reports") {
  SUBCASE("identical trajectories") {
    const auto& r = short_run().record;
    for (const auto& row : deviation_report(r, r, 2020, 2022).rows) CHECK(row.value == 0.0);
  }
  SUBCASE("levels in percent, rates in points") {
    const auto b = toy_record("b", {100, 100}, {0.10, 0.10});
    const auto s = toy_record("s", {99.9, 99.7}, {0.11, 0.12});
    const auto rep = deviation_report(b, s, 2025, 2026);
    CHECK(rep.value("gdp") == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK(rep.value("unemployment") == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(code_of([&] { deviation_report(b, s, 2024, 2026); }) == ErrorCode::WindowOutOfRange);
    CHECK(code_of([&] { deviation_report(b, toy_record("x", {1}, {0}), 2025, 2025); }) ==
          ErrorCode::MismatchedTrajectories);
    CHECK(code_of([&] { rep.value("nothing"); }) == ErrorCode::MismatchedTrajectories);
  }
}

TEST_CASE("elasticity overrides") {
  const auto& p = bundled().params;
  const auto same = apply_overrides(p, {{"cet_top", 1.0}, {"land_supply", 1.0}});
  for (std::size_t c = 0; c < p.commodities.size(); ++c)
    CHECK(same.commodities[c].cet_top.sigma() == p.commodities[c].cet_top.sigma());
  const auto half = apply_overrides(p, {{"land_supply", 0.5}});
  for (std::size_t f = 0; f < p.factors.size(); ++f)
    CHECK(half.factors[f].land_supply_elasticity == 0.5 * p.factors[f].land_supply_elasticity);
  CHECK(code_of([&] { apply_overrides(p, {{"bogus", 2.0}}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("trajectory persistence round trip") {
  const auto& r = short_run().record;
  const auto dir = testing::scratch("traj");
  save_trajectory(r, dir / "a");
  const auto back = load_trajectory(dir / "a");
  CHECK(back.years() == r.years());
  save_trajectory(back, dir / "b");
  for (const char* f : {"indicators.csv", "land.csv", "emissions.csv"})
    CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
  CHECK(macro_csv(deviation_report(r, back, 2019, 2022)) == macro_csv(deviation_report(r, r, 2019, 2022)));
}

TEST_CASE("coverage summary") {
  const auto sam = load_sam(testing::data_dir() / "sam.csv");
  const auto cov = coverage_summary(sam);
  // Direct sums over the EU column.
  double c = 0, nc = 0;
  std::size_t eu = 0;
  for (auto r : sam.of_kind(AccountKind::RestOfWorld))
    if (sam.account(r).partner == Partner::EU) eu = r;
  for (auto k : sam.of_kind(AccountKind::Commodity)) {
    const auto& id = sam.account(k);
    if (id.compliance == Compliance::Compliant) c += sam.flow(k, eu);
    if (id.compliance == Compliance::NonCompliant) nc += sam.flow(k, eu);
  }
  CHECK(cov.total.eu_compliant == doctest::Approx(c).epsilon(1e-12));
  CHECK(cov.total.eu_noncompliant == doctest::Approx(nc).epsilon(1e-12));
  CHECK(cov.noncompliant_pct == doctest::Approx(100 * nc / (c + nc)).epsilon(1e-12));
  CHECK(coverage_csv(cov).find("total") != std::string::npos);

  const auto plain = read_sam(
      "#account,kind,compliance,partner\n#a_x,activity,,\n#c_x,commodity,,\n#row_eu,rest_of_world,,eu\n"
      "#row_rest,rest_of_world,,rest\nrow_account,col_account,value\na_x,c_x,1\nc_x,row_eu,1\nrow_eu,a_x,1\n");
  CHECK(code_of([&] { coverage_summary(plain); }) == ErrorCode::NotDisaggregated);
  const auto no_eu = read_sam(
      "#account,kind,compliance,partner\n#c_x_c,commodity,compliant,\n#c_x_nc,commodity,noncompliant,\n"
      "#row_eu,rest_of_world,,eu\n#row_rest,rest_of_world,,rest\n"
      "row_account,col_account,value\nc_x_c,row_rest,5\nc_x_nc,row_rest,1\nrow_rest,c_x_c,5\nrow_rest,c_x_nc,1\n");
  const auto zero = coverage_summary(no_eu);
  CHECK(zero.total.eu_export_share == 0.0);
  CHECK(zero.noncompliant_pct == 0.0);
  for (const auto& row : zero.rows) CHECK(row.eu_export_share == 0.0);
}

TEST_CASE("sensitivity checks") {
  auto report = [](double defor, double gdp, double exports, double rest, double rer) {
    DeviationReport r;
    r.rows = {{"deforestation", "environment", IndicatorKind::Level, defor},
              {"gdp", "macro", IndicatorKind::Level, gdp},
              {"exports", "macro", IndicatorKind::Level, exports},
              {"exports_rest", "macro", IndicatorKind::Level, rest},
              {"imports", "macro", IndicatorKind::Level, -1.0},
              {"rer", "macro", IndicatorKind::Level, rer}};
    return r;
  };
  SensitivityReports s;
  s.central = report(-60, -0.3, -0.5, 3, 1);
  s.names = {"S1", "S2", "S5", "S6", "S7", "S8"};
  s.ok.assign(6, true);
  s.reports = {report(-63, 0, 0, 0, 0),         report(-58, 0, 0, 0, 0),       report(0, 0, -0.4, 2, 1.5),
               report(0, 0, -0.6, 4, 1.0),      report(0, -0.4, 0, 0, 0),      report(0, -0.2, 0, 0, 0)};
  auto find = [](const std::vector<Check>& cs, const std::string& prefix) {
    for (const auto& c : cs)
      if (c.name.rfind(prefix, 0) == 0) return c;
    FAIL("missing check " << prefix);
    return Check{};
  };
  auto checks = sensitivity_checks(s);
  CHECK(checks.size() == 3);
  for (const auto& c : checks) CHECK(c.pass);

  // S5 worse than S6, with the depreciation channel visible.
  s.reports[2] = report(0, 0, -0.8, 1, 2.0);
  auto c = find(sensitivity_checks(s), "exports_less_negative");
  CHECK_FALSE(c.pass);
  CHECK(c.diverges);
  CHECK(c.detail.find("depreciation") != std::string::npos);
  // Same ordering failure without the mechanism is a plain failure.
  s.reports[2] = report(0, 0, -0.8, 5, 0.5);
  c = find(sensitivity_checks(s), "exports_less_negative");
  CHECK_FALSE(c.pass);
  CHECK_FALSE(c.diverges);
  CHECK(checks_csv({c}).find("fail") != std::string::npos);

  s.ok[0] = false;
  CHECK(sensitivity_checks(s).size() == 2);
}
