#include "deforcge/emissions.hpp"

#include <cmath>
#include <set>

#include "deforcge/csv.hpp"
#include "deforcge/error.hpp"

namespace deforcge {

EmissionCoefficients read_coefficients(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto src = path.string();
  const auto ck = csv::column(table, "emitter_or_product", src);
  const auto cc = csv::column(table, "counterpart", src);
  const auto cv = csv::column(table, "intensity", src);
  EmissionCoefficients out;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const auto& row = table.rows[k];
    const auto ctx = src + ":" + std::to_string(table.line_numbers[k]);
    const double v = csv::parse_double(row[cv], ctx);
    const auto& key = row[ck];
    const auto& counterpart = row[cc];
    if (counterpart == "activity") {
      out.activity[key] = v;
    } else if (counterpart == "sequestration") {
      if (v > 0.0) throw Error(ErrorCode::InvalidConfig, ctx + ": sequestration intensity must be <= 0");
      out.sequestration = v;
    } else if (counterpart == "deforestation") {
      if (v < 0.0) throw Error(ErrorCode::InvalidConfig, ctx + ": land-use-change intensity must be >= 0");
      out.land_use_change = v;
    } else {
      if (v < 0.0) throw Error(ErrorCode::InvalidConfig, ctx + ": product intensities must be >= 0");
      out.product[key][counterpart] = v;
    }
  }
  return out;
}

EmissionDrivers drivers_from_state(const ModelParameters& p, const ModelState& s, double forest,
                                   double deforestation) {
  EmissionDrivers d;
  for (std::size_t a = 0; a < p.activities.size(); ++a) {
    const auto& ap = p.activities[a];
    d.activities.push_back(ap.name);
    d.activity_level.push_back(s.x.qa[a]);
    bool land = false;
    for (auto f : ap.factors) land = land || p.factors[f].type == FactorType::Land;
    d.land_using.push_back(land);
  }
  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    auto& row = d.consumption[p.commodities[c].name];
    for (std::size_t a = 0; a < p.activities.size(); ++a) {
      if (s.qint[c][a] > 0.0) row[p.activities[a].name] = s.qint[c][a];
    }
    for (std::size_t h = 0; h < p.households.size(); ++h) {
      if (s.qh[c][h] > 0.0) row[p.households[h].name] = s.qh[c][h];
    }
    if (s.qg[c] > 0.0) row["gov"] = s.qg[c];
  }
  d.forest = forest;
  d.deforestation = deforestation;
  return d;
}

double EmissionsLedger::total() const {
  double t = 0.0;
  for (const auto& e : entries) t += e.value();
  return t;
}

std::map<std::string, double> EmissionsLedger::by_emitter() const {
  std::map<std::string, double> out;
  for (const auto& e : entries) out[e.emitter] += e.value();
  return out;
}

namespace {

// Strips a compliance suffix so "a_crop_nc" finds a coefficient for "a_crop".
std::string unsplit(const std::string& name) {
  for (std::string_view suffix : {std::string_view("_nc"), std::string_view("_c")}) {
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      return name.substr(0, name.size() - suffix.size());
    }
  }
  return name;
}

template <class Map>
auto find_either(const Map& m, const std::string& name) {
  auto it = m.find(name);
  return it != m.end() ? it : m.find(unsplit(name));
}

}  // namespace

EmissionsLedger compute_emissions(const EmissionDrivers& d, const EmissionCoefficients& coeffs) {
  EmissionsLedger ledger;
  // AFOLU: activities grouped into classes of compliance twins.
  std::map<std::string, double> class_total;
  std::vector<std::pair<std::size_t, double>> covered;
  for (std::size_t a = 0; a < d.activities.size(); ++a) {
    auto it = find_either(coeffs.activity, d.activities[a]);
    if (it == coeffs.activity.end()) {
      if (d.land_using[a]) {
        throw Error(ErrorCode::MissingCoefficient, "no AFOLU intensity for activity '" + d.activities[a] + "'");
      }
      continue;
    }
    covered.emplace_back(a, it->second);
    class_total[unsplit(d.activities[a])] += d.activity_level[a];
  }
  for (const auto& [a, eps] : covered) {
    const auto cls = unsplit(d.activities[a]);
    const double T = class_total[cls];
    ledger.entries.push_back({d.activities[a], cls, eps, T, T > 0.0 ? d.activity_level[a] / T : 0.0, false});
  }
  if (coeffs.sequestration != 0.0) {
    ledger.entries.push_back({std::string(kForestSink), "forest", coeffs.sequestration, d.forest, 1.0, true});
  }
  if (coeffs.land_use_change != 0.0) {
    ledger.entries.push_back(
        {std::string(kLandUseChange), "deforestation", coeffs.land_use_change, d.deforestation, 1.0, false});
  }
  // Non-AFOLU: emitting products, shared among their consumers.
  for (const auto& [product, users] : d.consumption) {
    auto pit = find_either(coeffs.product, product);
    if (pit == coeffs.product.end()) continue;
    double T = 0.0;
    for (const auto& [emitter, q] : users) T += q;
    for (const auto& [emitter, q] : users) {
      const auto& per = pit->second;
      auto e = per.find(emitter);
      if (e == per.end()) e = per.find(unsplit(emitter));
      if (e == per.end()) e = per.find("*");
      if (e == per.end()) continue;
      ledger.entries.push_back({emitter, product, e->second, T, T > 0.0 ? q / T : 0.0, false});
    }
  }
  return ledger;
}

std::map<std::string, Decomposition> decompose_emissions(const EmissionsLedger& base, const EmissionsLedger& scen) {
  if (base.entries.size() != scen.entries.size()) {
    throw Error(ErrorCode::InconsistentDrivers, "ledgers have different entries");
  }
  std::map<std::string, Decomposition> out;
  for (std::size_t k = 0; k < base.entries.size(); ++k) {
    const auto& b = base.entries[k];
    const auto& s = scen.entries[k];
    if (b.emitter != s.emitter || b.driver != s.driver || b.intensity != s.intensity) {
      throw Error(ErrorCode::InconsistentDrivers, "entry " + std::to_string(k) + " (" + b.emitter + ", " +
                                                      b.driver + ") does not match (" + s.emitter + ", " +
                                                      s.driver + ")");
    }
    auto& d = out[b.emitter];
    d.sink = d.sink || b.sink;
    d.scale += b.intensity * b.share * (s.total - b.total);
    d.composition += b.intensity * s.total * (s.share - b.share);
    d.total += s.value() - b.value();
  }
  return out;
}

EmissionsDeviation emissions_deviation(const std::vector<int>& years, const std::vector<EmissionsLedger>& base,
                                       const std::vector<EmissionsLedger>& scen, int first_year, int last_year) {
  if (base.size() != years.size() || scen.size() != years.size()) {
    throw Error(ErrorCode::MismatchedTrajectories, "emission ledgers do not cover the same years");
  }
  if (years.empty() || first_year > last_year || first_year < years.front() || last_year > years.back()) {
    throw Error(ErrorCode::WindowOutOfRange, "window " + std::to_string(first_year) + ":" +
                                                 std::to_string(last_year) + " outside the horizon");
  }
  EmissionsDeviation out;
  out.first_year = first_year;
  out.last_year = last_year;
  int n = 0;
  std::map<std::string, int> counts;
  for (std::size_t t = 0; t < years.size(); ++t) {
    if (years[t] < first_year || years[t] > last_year) continue;
    ++n;
    const double eb = base[t].total(), es = scen[t].total();
    out.total_pct += 100.0 * (es - eb) / eb;
    const auto bb = base[t].by_emitter();
    const auto ss = scen[t].by_emitter();
    for (const auto& [emitter, v] : bb) {
      if (v == 0.0) continue;
      auto it = ss.find(emitter);
      out.emitter_pct[emitter] += 100.0 * ((it == ss.end() ? 0.0 : it->second) - v) / std::abs(v);
      ++counts[emitter];
    }
    for (const auto& [emitter, d] : decompose_emissions(base[t], scen[t])) {
      auto& acc = out.decomposition[emitter];
      acc.sink = d.sink;
      acc.scale += d.scale;
      acc.composition += d.composition;
      acc.total += d.total;
    }
  }
  out.total_pct /= n;
  for (auto& [emitter, v] : out.emitter_pct) v /= counts[emitter];
  for (auto& [emitter, d] : out.decomposition) {
    d.scale /= n;
    d.composition /= n;
    d.total /= n;
  }
  return out;
}

}  // namespace deforcge
