#include "deforcge/dynamics.hpp"

#include <spdlog/spdlog.h>

#include <cmath>

#include "deforcge/error.hpp"

namespace deforcge {

LandAccount LandAccount::initial(const ModelParameters& p, double forest_stock) {
  if (!(forest_stock >= 0.0)) throw Error(ErrorCode::InvalidConfig, "forest stock must be non-negative");
  LandAccount land;
  for (std::size_t f = 0; f < p.factors.size(); ++f) {
    const auto& fp = p.factors[f];
    if (fp.type != FactorType::Land) continue;
    land.factors.push_back(f);
    land.compliance.push_back(fp.compliance);
    land.use.push_back(fp.land_use);
    land.qfs.push_back(fp.supply0);
    land.qfinit.push_back(fp.supply0);
    land.qdefor.push_back(0.0);
    land.ur.push_back(fp.unemployment0);
    land.wfavg.push_back(fp.price0);
    land.qfs00.push_back(fp.supply0);
    land.wfavg00.push_back(fp.price0);
    land.mu.push_back(fp.compliance == Compliance::NonCompliant ? fp.land_supply_elasticity : 0.0);
  }
  land.forest = forest_stock;
  return land;
}

double deforestation_supply(double qfs00, double wfavg, double cpi, double wfavg00, double cpi00, double mu) {
  if (!(wfavg > 0.0 && cpi > 0.0 && wfavg00 > 0.0 && cpi00 > 0.0)) {
    throw Error(ErrorCode::NonPositivePrice, "land rents and CPI must be positive");
  }
  if (!(mu >= 0.0)) throw Error(ErrorCode::DomainError, "land supply elasticity must be non-negative");
  const double ratio = (wfavg / cpi) / (wfavg00 / cpi00);
  return std::max(0.0, qfs00 * (std::pow(ratio, mu) - 1.0));
}

std::vector<double> deforestation_supply(const LandAccount& land, double cpi) {
  std::vector<double> out(land.size(), 0.0);
  for (std::size_t i = 0; i < land.size(); ++i) {
    if (land.compliance[i] != Compliance::NonCompliant) continue;
    out[i] = deforestation_supply(land.qfs00[i], land.wfavg[i], cpi, land.wfavg00[i], land.cpi00, land.mu[i]);
  }
  return out;
}

LandAccount advance_land(const LandAccount& land, std::vector<std::string>* warnings) {
  LandAccount next = land;
  double total = 0.0;
  for (double d : land.qdefor) total += d;
  double scale = 1.0;
  if (total > land.forest) {
    scale = total > 0.0 ? land.forest / total : 0.0;
    const std::string msg = "ForestExhausted: deforestation " + std::to_string(total) +
                            " ha capped at remaining forest " + std::to_string(land.forest) + " ha";
    spdlog::warn("{}", msg);
    if (warnings) warnings->push_back(msg);
  }
  double removed = 0.0;
  for (std::size_t i = 0; i < land.size(); ++i) {
    const double d = land.qdefor[i] * scale;
    next.qdefor[i] = 0.0;
    next.qfinit[i] = land.qfs[i] + (land.compliance[i] == Compliance::NonCompliant ? d : 0.0);
    next.qfs[i] = next.qfinit[i];
    removed += d;
  }
  next.forest = scale < 1.0 ? 0.0 : land.forest - removed;
  next.deforestation_total = 0.0;
  return next;
}

std::vector<double> migrate_land(const std::vector<double>& qfinit, const std::vector<double>& returns,
                                 double mobility) {
  const auto n = qfinit.size();
  if (returns.size() != n) throw Error(ErrorCode::DimensionMismatch, "land uses vs returns");
  if (!(mobility >= 0.0)) throw Error(ErrorCode::InvalidConfig, "mobility must be non-negative");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(returns[i] > 0.0)) throw Error(ErrorCode::NonPositivePrice, "land returns must be positive");
    if (!(qfinit[i] >= 0.0)) throw Error(ErrorCode::DomainError, "land stock must be non-negative");
  }
  std::vector<std::vector<double>> flow(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double out = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      flow[i][j] = mobility * qfinit[i] * std::max(0.0, (returns[j] - returns[i]) / returns[i]);
      out += flow[i][j];
    }
    if (out > qfinit[i]) {
      for (std::size_t j = 0; j < n; ++j) flow[i][j] *= qfinit[i] / out;
    }
  }
  std::vector<double> next(qfinit);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      next[i] -= flow[i][j];
      next[j] += flow[i][j];
    }
  }
  for (auto& v : next) v = std::max(0.0, v);
  return next;
}

void migrate_all(LandAccount& land, double mobility) {
  for (auto cls : {Compliance::Compliant, Compliance::NonCompliant, Compliance::NotApplicable}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < land.size(); ++i) {
      if (land.compliance[i] == cls && land.qfinit[i] > 0.0) members.push_back(i);
    }
    if (members.size() < 2) {
      for (auto i : members) land.qfs[i] = land.qfinit[i];
      continue;
    }
    std::vector<double> q, r;
    for (auto i : members) {
      q.push_back(land.qfinit[i]);
      r.push_back(land.wfavg[i] / land.wfavg00[i]);
    }
    const auto moved = migrate_land(q, r, mobility);
    for (std::size_t k = 0; k < members.size(); ++k) land.qfs[members[k]] = moved[k];
  }
}

CapitalAccount CapitalAccount::initial(const ModelParameters& p, const DynamicsConfig& cfg) {
  if (!(cfg.depreciation >= 0.0 && cfg.depreciation <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "depreciation must lie in [0,1]");
  }
  if (!(cfg.rental_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "rental rate must be positive");
  CapitalAccount k;
  k.depreciation = cfg.depreciation;
  k.rental_rate = cfg.rental_rate;
  double total = 0.0;
  for (const auto& a : p.activities) total += a.capital0;
  for (const auto& a : p.activities) {
    k.stock.push_back(a.capital0 / cfg.rental_rate);
    k.allocation.push_back(total > 0.0 ? a.capital0 / total : 0.0);
  }
  return k;
}

std::vector<double> CapitalAccount::services() const {
  std::vector<double> out;
  out.reserve(stock.size());
  for (double s : stock) out.push_back(s * rental_rate);
  return out;
}

NextStocks advance_capital_labor(const CapitalAccount& capital, double investment, double labor_supply,
                                 double population_growth) {
  if (!(capital.depreciation >= 0.0 && capital.depreciation <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "depreciation must lie in [0,1]");
  }
  NextStocks next{capital, labor_supply * (1.0 + population_growth)};
  for (std::size_t a = 0; a < capital.stock.size(); ++a) {
    next.capital.stock[a] =
        (1.0 - capital.depreciation) * capital.stock[a] + capital.allocation[a] * std::max(0.0, investment);
  }
  return next;
}

double real_investment(const ModelParameters& p, const ModelState& s) {
  double v = 0.0;
  for (std::size_t c = 0; c < p.commodities.size(); ++c) v += (1.0 + p.commodities[c].sales_tax) * s.qinv[c];
  return v;
}

}  // namespace deforcge
