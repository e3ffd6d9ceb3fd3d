#include "deforcge/inputs.hpp"

#include <json.hpp>

#include "deforcge/csv.hpp"
#include "deforcge/error.hpp"

namespace deforcge {

using nlohmann::json;

Projections read_projections(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto src = path.string();
  const auto cy = csv::column(t, "year", src), cg = csv::column(t, "gdp_growth", src),
             cp = csv::column(t, "population_growth", src);
  Projections p;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto ctx = src + ":" + std::to_string(t.line_numbers[i]);
    const int year = csv::parse_int(t.rows[i][cy], ctx);
    if (p.gdp_growth.count(year)) throw Error(ErrorCode::MalformedRecord, ctx + ": duplicate year");
    p.gdp_growth[year] = csv::parse_double(t.rows[i][cg], ctx);
    p.population_growth[year] = csv::parse_double(t.rows[i][cp], ctx);
  }
  return p;
}

namespace {

json parse_json(const std::filesystem::path& path) {
  try {
    return json::parse(csv::read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
}

std::map<std::string, double> number_map(const json& j, const std::string& what) {
  std::map<std::string, double> out;
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, what + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, what + "." + k + " must be a number");
    out[k] = v.get<double>();
  }
  return out;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

SolverConfig read_solver(const json& j, SolverConfig cfg) {
  cfg.tolerance = get_or(j, "tolerance", cfg.tolerance);
  cfg.max_iterations = get_or(j, "max_iterations", cfg.max_iterations);
  cfg.damping = get_or(j, "damping", cfg.damping);
  cfg.max_log_step = get_or(j, "max_log_step", cfg.max_log_step);
  if (j.contains("jacobian")) {
    const auto mode = j.at("jacobian").get<std::string>();
    if (mode == "finite_difference") {
      cfg.jacobian_mode = JacobianMode::FiniteDifference;
    } else if (mode == "analytic") {
      cfg.jacobian_mode = JacobianMode::AnalyticWhereAvailable;
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown jacobian mode '" + mode + "'");
    }
  }
  cfg.validate();
  return cfg;
}

Partner parse_destination(const std::string& text) {
  const auto p = parse_partner(text);
  if (!p) throw Error(ErrorCode::InvalidConfig, "unknown destination '" + text + "'");
  return *p;
}

}  // namespace

ModelConfig read_model_config(const std::filesystem::path& path) {
  const auto j = parse_json(path);
  ModelConfig cfg;
  try {
    const auto& el = j.at("elasticities");
    auto& es = cfg.calibration.elasticities;
    es.armington = number_map(el.at("armington"), "elasticities.armington");
    es.cet = number_map(el.at("cet"), "elasticities.cet");
    es.value_added = number_map(el.at("value_added"), "elasticities.value_added");
    es.destination_multiplier = get_or(el, "destination_multiplier", es.destination_multiplier);
    for (const auto& [name, f] : j.at("factors").items()) {
      FactorData d;
      d.type = parse_factor_type(f.at("type").get<std::string>());
      d.hectares = get_or(f, "hectares", 0.0);
      d.unemployment = get_or(f, "unemployment", 0.0);
      d.wage_curve_elasticity = get_or(f, "wage_curve_elasticity", 0.0);
      d.land_supply_elasticity = get_or(f, "land_supply_elasticity", 0.0);
      d.land_use = get_or<std::string>(f, "land_use", "");
      cfg.calibration.factors[name] = d;
    }
    cfg.calibration.balance_tolerance = get_or(j, "balance_tolerance", cfg.calibration.balance_tolerance);
    if (j.contains("dynamics")) {
      const auto& d = j.at("dynamics");
      cfg.dynamics.forest_stock = get_or(d, "forest_stock", cfg.dynamics.forest_stock);
      cfg.dynamics.mobility = get_or(d, "mobility", cfg.dynamics.mobility);
      cfg.dynamics.depreciation = get_or(d, "depreciation", cfg.dynamics.depreciation);
      cfg.dynamics.rental_rate = get_or(d, "rental_rate", cfg.dynamics.rental_rate);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return cfg;
}

ScenarioFile read_scenario(const std::filesystem::path& path) {
  const auto j = parse_json(path);
  ScenarioFile s;
  s.source = path;
  const auto dir = path.parent_path();
  try {
    const auto& in = j.at("inputs");
    s.sam = dir / in.at("sam").get<std::string>();
    s.model = dir / in.at("model").get<std::string>();
    s.coefficients = dir / in.at("coefficients").get<std::string>();
    s.projections = dir / in.at("projections").get<std::string>();

    const std::string name = get_or<std::string>(j, "name", "eudr");
    ScenarioSpec base;
    base.name = "baseline";
    base.start_year = j.at("horizon").at("start").get<int>();
    base.end_year = j.at("horizon").at("end").get<int>();
    base.mode = ScenarioMode::Baseline;
    base.shock_start = get_or(j, "shock_start", 2025);
    if (j.contains("solver")) base.solver = read_solver(j.at("solver"), base.solver);
    base.cap_margin = get_or(j, "cap_margin", base.cap_margin);

    ScenarioSpec cf = base;
    cf.name = name;
    cf.mode = ScenarioMode::Counterfactual;
    if (j.contains("overrides")) {
      const auto ov = number_map(j.at("overrides"), "overrides");
      base.overrides = ov;
      cf.overrides = ov;
    }
    if (j.contains("shocks")) {
      const auto& sh = j.at("shocks");
      if (sh.contains("eudr")) {
        const auto& e = sh.at("eudr");
        EudrSettings eudr;
        eudr.covered = e.at("covered").get<std::vector<std::string>>();
        eudr.compliant_wedge = get_or(e, "compliant_wedge", eudr.compliant_wedge);
        eudr.noncompliant_cap = get_or(e, "noncompliant_cap", eudr.noncompliant_cap);
        s.eudr = eudr;
      }
      if (sh.contains("wedges")) {
        for (const auto& w : sh.at("wedges")) {
          PriceWedge pw;
          pw.commodity = w.at("commodity").get<std::string>();
          pw.destination = parse_destination(get_or<std::string>(w, "destination", "eu"));
          if (w.contains("cap")) {
            pw.mode = WedgeMode::SolveForQuantityCap;
            pw.cap = w.at("cap").get<double>();
            pw.wedge = get_or(w, "wedge", 0.0);
          } else {
            pw.wedge = w.at("wedge").get<double>();
          }
          pw.validate();
          cf.shocks.push_back(pw);
        }
      }
    }
    s.baseline = base;
    s.counterfactual = cf;
    s.baseline.validate();

    s.report_first = base.shock_start;
    s.report_last = base.end_year;
    if (j.contains("report_window")) {
      s.report_first = j.at("report_window").at("start").get<int>();
      s.report_last = j.at("report_window").at("end").get<int>();
    }
    if (j.contains("calibration")) {
      const auto& c = j.at("calibration");
      s.targets.deforestation_rate = get_or(c, "deforestation_rate", s.targets.deforestation_rate);
      if (c.contains("land_supply_elasticity")) {
        const auto& mu = c.at("land_supply_elasticity");
        if (mu.is_number()) {
          s.land_supply_elasticity = mu.get<double>();
        } else if (!(mu.is_string() && mu.get<std::string>() == "calibrate")) {
          throw Error(ErrorCode::InvalidConfig, "land_supply_elasticity must be a number or \"calibrate\"");
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
  }
  return s;
}

ModelContext load_context(const ScenarioFile& scenario) {
  const auto sam = load_sam(scenario.sam);
  const auto cfg = read_model_config(scenario.model);
  ModelContext ctx;
  ctx.params = calibrate(sam, cfg.calibration);
  ctx.dynamics = cfg.dynamics;
  ctx.coefficients = read_coefficients(scenario.coefficients);
  ctx.projections = read_projections(scenario.projections);
  return ctx;
}

}  // namespace deforcge
