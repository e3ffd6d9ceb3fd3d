#include "deforcge/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "deforcge/csv.hpp"
#include "deforcge/error.hpp"

namespace deforcge {

IndicatorKind indicator_kind(const std::string& key) {
  if (key == "unemployment" || key == "deforestation_rate" || key.rfind("land_ur:", 0) == 0) {
    return IndicatorKind::Rate;
  }
  return IndicatorKind::Level;
}

namespace {

void check_window(const TrajectoryRecord& base, const TrajectoryRecord& scen, int first, int last) {
  if (base.years() != scen.years()) {
    throw Error(ErrorCode::MismatchedTrajectories,
                "trajectories '" + base.name + "' and '" + scen.name + "' cover different years");
  }
  const auto years = base.years();
  if (years.empty() || first > last || first < years.front() || last > years.back()) {
    throw Error(ErrorCode::WindowOutOfRange,
                "window " + std::to_string(first) + ":" + std::to_string(last) + " outside the horizon");
  }
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  return csv::format_double(v);
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

double average_deviation(const TrajectoryRecord& base, const TrajectoryRecord& scen, const std::string& key,
                         int first, int last) {
  check_window(base, scen, first, last);
  const auto kind = indicator_kind(key);
  double sum = 0.0;
  int n = 0;
  bool scen_nonzero = false;
  for (int year = first; year <= last; ++year) {
    const double b = base.indicator(year, key);
    const double s = scen.indicator(year, key);
    if (kind == IndicatorKind::Rate) {
      sum += 100.0 * (s - b);
      ++n;
    } else if (b != 0.0) {
      sum += 100.0 * (s - b) / std::abs(b);
      ++n;
    } else if (s != 0.0) {
      scen_nonzero = true;
    }
  }
  if (n == 0) return scen_nonzero ? NAN : 0.0;
  return sum / n;
}

double DeviationReport::value(const std::string& key) const {
  for (const auto& r : rows) {
    if (r.key == key) return r.value;
  }
  throw Error(ErrorCode::MismatchedTrajectories, "deviation report has no indicator '" + key + "'");
}

DeviationReport deviation_report(const TrajectoryRecord& base, const TrajectoryRecord& scen, int first, int last) {
  check_window(base, scen, first, last);
  DeviationReport rep;
  rep.first_year = first;
  rep.last_year = last;
  const auto& sample = base.at_year(first).indicators;
  auto add = [&](const std::string& key, const std::string& group) {
    if (!sample.count(key)) return;
    rep.rows.push_back({key, group, indicator_kind(key), average_deviation(base, scen, key, first, last)});
  };
  for (const char* key : {"gdp", "consumption", "investment", "exports", "exports_eu", "exports_rest", "imports",
                          "production", "domestic_sales", "rer"}) {
    add(key, "macro");
  }
  for (const char* key : {"real_wage", "unemployment", "employment"}) add(key, "labor");
  for (const char* key : {"deforestation", "deforestation_rate", "forest", "ghg"}) add(key, "environment");
  for (const auto& [key, v] : sample) {
    if (key.rfind("va:", 0) == 0) add(key, "value_added");
  }
  for (const auto& [key, v] : sample) {
    if (key.rfind("land:", 0) == 0 || key.rfind("land_ur:", 0) == 0 || key.rfind("land_rent:", 0) == 0) {
      add(key, "land");
    }
  }
  for (const auto& [key, v] : sample) {
    if (key.rfind("production:", 0) != 0) continue;
    const auto c = key.substr(11);
    CommodityDeviation d;
    d.commodity = c;
    d.production = average_deviation(base, scen, "production:" + c, first, last);
    d.domestic_sales = average_deviation(base, scen, "domestic:" + c, first, last);
    d.exports = average_deviation(base, scen, "exports:" + c, first, last);
    d.exports_eu = average_deviation(base, scen, "exports_eu:" + c, first, last);
    d.exports_rest = average_deviation(base, scen, "exports_rest:" + c, first, last);
    d.imports = average_deviation(base, scen, "imports:" + c, first, last);
    rep.commodities.push_back(d);
  }
  return rep;
}

EmissionsDeviation emissions_deviation(const TrajectoryRecord& base, const TrajectoryRecord& scen, int first,
                                       int last) {
  check_window(base, scen, first, last);
  std::vector<EmissionsLedger> b, s;
  for (const auto& p : base.periods) b.push_back(p.emissions);
  for (const auto& p : scen.periods) s.push_back(p.emissions);
  return emissions_deviation(base.years(), b, s, first, last);
}

std::vector<Check> sign_suite(const DeviationReport& r) {
  std::vector<Check> out;
  auto check = [&](const std::string& name, const std::string& key, bool pass_if_negative, bool strict) {
    const double v = r.value(key);
    const bool pass = pass_if_negative ? (strict ? v < 0.0 : v <= 0.0) : (strict ? v > 0.0 : v >= 0.0);
    out.push_back({name, pass, key + " = " + fmt(v)});
  };
  check("gdp_falls", "gdp", true, true);
  check("exports_fall", "exports", true, true);
  check("eu_exports_fall", "exports_eu", true, true);
  check("rest_exports_do_not_fall", "exports_rest", false, false);
  check("real_exchange_rate_depreciates", "rer", false, true);
  check("deforestation_falls", "deforestation", true, true);
  check("ghg_falls", "ghg", true, true);
  for (const auto& row : r.rows) {
    const std::string suffix(kNonCompliantSuffix);
    if (row.group != "value_added" || row.key.size() <= suffix.size() ||
        row.key.compare(row.key.size() - suffix.size(), suffix.size(), suffix) != 0) {
      continue;
    }
    const auto twin = row.key.substr(0, row.key.size() - suffix.size()) + std::string(kCompliantSuffix);
    const double c = r.value(twin);
    out.push_back({"noncompliant_hit_harder:" + row.key.substr(3), row.value < c,
                   row.key + " = " + fmt(row.value) + ", " + twin + " = " + fmt(c)});
  }
  return out;
}

SensitivityRecords sensitivity_records(const SensitivityResult& result) {
  SensitivityRecords r;
  r.central_baseline = result.central.baseline.record;
  r.central_scenario = result.central.scenario.record;
  for (const auto& c : result.cases) {
    r.names.push_back(c.name);
    if (c.ok) {
      r.cases.emplace_back(std::make_pair(c.baseline.record, c.scenario.record));
    } else {
      r.cases.emplace_back(std::nullopt);
    }
  }
  return r;
}

SensitivityReports sensitivity_reports(const SensitivityRecords& records, int first, int last,
                                       SensitivityReference reference) {
  SensitivityReports s;
  s.reference = reference == SensitivityReference::CentralBaseline ? "central_baseline" : "own_baseline";
  s.central = deviation_report(records.central_baseline, records.central_scenario, first, last);
  for (std::size_t i = 0; i < records.names.size(); ++i) {
    const auto& pair = records.cases[i];
    s.names.push_back(records.names[i]);
    s.ok.push_back(pair.has_value());
    if (!pair) {
      s.reports.emplace_back();
      continue;
    }
    const auto& base = reference == SensitivityReference::CentralBaseline ? records.central_baseline : pair->first;
    s.reports.push_back(deviation_report(base, pair->second, first, last));
  }
  return s;
}

std::vector<Check> sensitivity_checks(const SensitivityReports& suite) {
  std::vector<Check> out;
  auto get = [&](const std::string& name) -> const DeviationReport* {
    for (std::size_t i = 0; i < suite.names.size(); ++i) {
      if (suite.names[i] == name && suite.ok[i]) return &suite.reports[i];
    }
    return nullptr;
  };
  const auto* s1 = get("S1");
  const auto* s2 = get("S2");
  if (s1 && s2) {
    const double a = s1->value("deforestation"), b = suite.central.value("deforestation"),
                 c = s2->value("deforestation");
    out.push_back({"deforestation_monotone_in_mu", a < b && b < c,
                   "S1 = " + fmt(a) + ", central = " + fmt(b) + ", S2 = " + fmt(c)});
  }
  const auto* s7 = get("S7");
  const auto* s8 = get("S8");
  if (s7 && s8) {
    const double a = s7->value("gdp"), b = s8->value("gdp");
    out.push_back({"gdp_lower_under_S7_than_S8", a <= b, "S7 = " + fmt(a) + ", S8 = " + fmt(b)});
  }
  const auto* s5 = get("S5");
  const auto* s6 = get("S6");
  if (s5 && s6) {
    const double a = s5->value("exports"), b = s6->value("exports");
    Check c{"exports_less_negative_under_S5_than_S6", a > b, "S5 = " + fmt(a) + ", S6 = " + fmt(b), false};
    if (!c.pass) {
      // With a stiffer domestic/export frontier the EU loss is absorbed less by
      // diversion to other destinations; the external balance then closes through
      // a larger depreciation and import compression.
      const double rer5 = s5->value("rer"), rer6 = s6->value("rer");
      const double rest5 = s5->value("exports_rest"), rest6 = s6->value("exports_rest");
      const double imp5 = s5->value("imports"), imp6 = s6->value("imports");
      c.diverges = rest5 < rest6 && rer5 > rer6;
      c.detail += "; rest exports S5 = " + fmt(rest5) + ", S6 = " + fmt(rest6) + "; rer S5 = " + fmt(rer5) +
                  ", S6 = " + fmt(rer6) + "; imports S5 = " + fmt(imp5) + ", S6 = " + fmt(imp6);
      if (c.diverges)
        c.detail += "; lower top-level CET dampens diversion to non-EU markets so the adjustment runs through "
                    "a larger real depreciation and lower imports";
    }
    out.push_back(c);
  }
  return out;
}

std::string macro_csv(const DeviationReport& r) {
  std::ostringstream out;
  out << "indicator,group,unit,deviation\n";
  for (const auto& row : r.rows) {
    out << row.key << ',' << row.group << ',' << (row.kind == IndicatorKind::Rate ? "pp" : "pct") << ','
        << fmt(row.value) << '\n';
  }
  return out.str();
}

std::string commodity_csv(const DeviationReport& r) {
  std::ostringstream out;
  out << "commodity,production,domestic_sales,exports,exports_eu,exports_rest,imports\n";
  for (const auto& c : r.commodities) {
    out << c.commodity << ',' << fmt(c.production) << ',' << fmt(c.domestic_sales) << ',' << fmt(c.exports)
        << ',' << fmt(c.exports_eu) << ',' << fmt(c.exports_rest) << ',' << fmt(c.imports) << '\n';
  }
  return out.str();
}

std::string sensitivity_csv(const SensitivityReports& suite) {
  std::ostringstream out;
  out << "indicator,unit,central";
  for (const auto& n : suite.names) out << ',' << n;
  out << '\n';
  for (const auto& row : suite.central.rows) {
    if (row.group == "land") continue;
    out << row.key << ',' << (row.kind == IndicatorKind::Rate ? "pp" : "pct") << ',' << fmt(row.value);
    for (std::size_t i = 0; i < suite.names.size(); ++i) {
      out << ',' << (suite.ok[i] ? fmt(suite.reports[i].value(row.key)) : std::string("failed"));
    }
    out << '\n';
  }
  return out.str();
}

std::string coverage_csv(const CoverageSummary& s) {
  std::ostringstream out;
  out << "commodity,eu_export_share_pct,export_share_of_demand_pct,eu_exports_compliant,eu_exports_noncompliant\n";
  auto line = [&](const CoverageRow& r) {
    out << r.commodity << ',' << fixed2(r.eu_export_share) << ',' << fixed2(r.export_share_demand) << ','
        << fixed2(r.eu_compliant) << ',' << fixed2(r.eu_noncompliant) << '\n';
  };
  for (const auto& r : s.rows) line(r);
  line(s.total);
  out << "noncompliant_share_pct,,,," << fixed2(s.noncompliant_pct) << '\n';
  return out.str();
}

std::string emissions_csv(const EmissionsDeviation& d) {
  std::ostringstream out;
  out << "emitter,scale,composition,total,deviation_pct\n";
  for (const auto& [emitter, dec] : d.decomposition) {
    // Sinks are reported so that a positive change means more sequestration.
    const double sign = dec.sink ? -1.0 : 1.0;
    auto it = d.emitter_pct.find(emitter);
    out << emitter << ',' << fmt(sign * dec.scale) << ',' << fmt(sign * dec.composition) << ','
        << fmt(sign * dec.total) << ',' << fmt(it == d.emitter_pct.end() ? 0.0 : it->second) << '\n';
  }
  out << "total,,,," << fmt(d.total_pct) << '\n';
  return out.str();
}

std::string checks_csv(const std::vector<Check>& checks) {
  std::ostringstream out;
  out << "check,result,detail\n";
  for (const auto& c : checks) {
    std::string detail = c.detail;
    std::replace(detail.begin(), detail.end(), ',', ' ');
    out << c.name << ',' << (c.pass ? "pass" : c.diverges ? "diverges" : "fail") << ',' << detail << '\n';
  }
  return out.str();
}

void save_trajectory(const TrajectoryRecord& rec, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
  std::ostringstream ind, land, em;
  ind << "year,key,value\n";
  land << "period,factor,QFS,QFINIT,QDEFOR,UR,WFAVG\n";
  em << "year,emitter,driver,intensity,total,share,sink\n";
  for (const auto& p : rec.periods) {
    for (const auto& [k, v] : p.indicators) ind << p.year << ',' << k << ',' << fmt(v) << '\n';
    for (const auto& l : p.land) {
      land << p.year << ',' << l.factor << ',' << fmt(l.qfs) << ',' << fmt(l.qfinit) << ',' << fmt(l.qdefor)
           << ',' << fmt(l.ur) << ',' << fmt(l.wfavg) << '\n';
    }
    for (const auto& e : p.emissions.entries) {
      em << p.year << ',' << e.emitter << ',' << e.driver << ',' << fmt(e.intensity) << ',' << fmt(e.total) << ','
         << fmt(e.share) << ',' << (e.sink ? 1 : 0) << '\n';
    }
  }
  nlohmann::ordered_json manifest;
  manifest["name"] = rec.name;
  manifest["years"] = rec.years();
  manifest["files"] = {"indicators.csv", "land.csv", "emissions.csv"};
  csv::write_text_atomic(dir / "indicators.csv", ind.str());
  csv::write_text_atomic(dir / "land.csv", land.str());
  csv::write_text_atomic(dir / "emissions.csv", em.str());
  csv::write_text_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

TrajectoryRecord load_trajectory(const std::filesystem::path& dir) {
  TrajectoryRecord rec;
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(csv::read_text(dir / "manifest.json"));
    rec.name = manifest.at("name").get<std::string>();
    for (int y : manifest.at("years").get<std::vector<int>>()) rec.periods.push_back({y, {}, {}, {}});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, (dir / "manifest.json").string() + ": " + e.what());
  }
  auto period = [&](int year, const std::string& ctx) -> PeriodRecord& {
    for (auto& p : rec.periods) {
      if (p.year == year) return p;
    }
    throw Error(ErrorCode::MalformedRecord, ctx + ": year " + std::to_string(year) + " not in manifest");
  };
  {
    const auto t = csv::read(dir / "indicators.csv");
    const auto src = (dir / "indicators.csv").string();
    const auto cy = csv::column(t, "year", src), ck = csv::column(t, "key", src), cv = csv::column(t, "value", src);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto ctx = src + ":" + std::to_string(t.line_numbers[i]);
      const auto& v = t.rows[i][cv];
      period(csv::parse_int(t.rows[i][cy], ctx), ctx).indicators[t.rows[i][ck]] =
          v == "nan" ? NAN : csv::parse_double(v, ctx);
    }
  }
  {
    const auto t = csv::read(dir / "land.csv");
    const auto src = (dir / "land.csv").string();
    const auto cy = csv::column(t, "period", src), cf = csv::column(t, "factor", src);
    const auto c1 = csv::column(t, "QFS", src), c2 = csv::column(t, "QFINIT", src), c3 = csv::column(t, "QDEFOR", src),
               c4 = csv::column(t, "UR", src), c5 = csv::column(t, "WFAVG", src);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto ctx = src + ":" + std::to_string(t.line_numbers[i]);
      const auto& r = t.rows[i];
      period(csv::parse_int(r[cy], ctx), ctx)
          .land.push_back({r[cf], csv::parse_double(r[c1], ctx), csv::parse_double(r[c2], ctx),
                           csv::parse_double(r[c3], ctx), csv::parse_double(r[c4], ctx), csv::parse_double(r[c5], ctx)});
    }
  }
  {
    const auto t = csv::read(dir / "emissions.csv");
    const auto src = (dir / "emissions.csv").string();
    const auto cy = csv::column(t, "year", src), ce = csv::column(t, "emitter", src), cd = csv::column(t, "driver", src);
    const auto ci = csv::column(t, "intensity", src), ct = csv::column(t, "total", src),
               cs = csv::column(t, "share", src), ck = csv::column(t, "sink", src);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const auto ctx = src + ":" + std::to_string(t.line_numbers[i]);
      const auto& r = t.rows[i];
      period(csv::parse_int(r[cy], ctx), ctx)
          .emissions.entries.push_back({r[ce], r[cd], csv::parse_double(r[ci], ctx), csv::parse_double(r[ct], ctx),
                                        csv::parse_double(r[cs], ctx), r[ck] == "1"});
    }
  }
  return rec;
}

}  // namespace deforcge
