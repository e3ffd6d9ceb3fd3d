#include "deforcge/model.hpp"

#include <cmath>
#include <sstream>

#include "deforcge/csv.hpp"
#include "deforcge/error.hpp"

namespace deforcge {

std::string_view to_string(FactorType type) {
  switch (type) {
    case FactorType::Labor: return "labor";
    case FactorType::Capital: return "capital";
    case FactorType::Land: return "land";
  }
  return "?";
}

FactorType parse_factor_type(std::string_view t) {
  if (t == "labor") return FactorType::Labor;
  if (t == "capital") return FactorType::Capital;
  if (t == "land") return FactorType::Land;
  throw Error(ErrorCode::InvalidConfig, "unknown factor type '" + std::string(t) + "'");
}

namespace {

template <class T>
std::optional<std::size_t> find_by_name(const std::vector<T>& v, std::string_view name) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i].name == name) return i;
  }
  return std::nullopt;
}

bool has_unknown_price(const FactorParams& f) {
  return f.type != FactorType::Capital && f.employed0 > 0.0;
}

double import_base(const ModelParameters& p) {
  double s = 0.0;
  for (const auto& c : p.commodities) s += c.imports0;
  return s;
}

}  // namespace

std::optional<std::size_t> ModelParameters::find_activity(std::string_view name) const {
  return find_by_name(activities, name);
}
std::optional<std::size_t> ModelParameters::find_commodity(std::string_view name) const {
  return find_by_name(commodities, name);
}
std::optional<std::size_t> ModelParameters::find_factor(std::string_view name) const {
  return find_by_name(factors, name);
}
std::optional<std::size_t> ModelParameters::capital_factor() const {
  for (std::size_t f = 0; f < factors.size(); ++f) {
    if (factors[f].type == FactorType::Capital) return f;
  }
  return std::nullopt;
}

PeriodExogenous PeriodExogenous::base(const ModelParameters& p) {
  PeriodExogenous e;
  for (const auto& f : p.factors) e.factor_supply.push_back(f.supply0);
  for (const auto& a : p.activities) {
    e.capital.push_back(a.capital0);
    e.tfp.push_back(1.0);
  }
  e.world_export_price.assign(p.commodities.size(), {1.0, 1.0});
  e.export_wedge.assign(p.commodities.size(), {0.0, 0.0});
  e.world_import_price.assign(p.commodities.size(), 1.0);
  e.foreign_savings = p.foreign_savings0;
  e.cpi = 1.0;
  return e;
}

PeriodUnknowns PeriodUnknowns::base(const ModelParameters& p) {
  PeriodUnknowns x;
  x.pdd.assign(p.commodities.size(), 1.0);
  for (const auto& a : p.activities) {
    x.qa.push_back(a.output0);
    x.wk.push_back(1.0);
  }
  for (const auto& f : p.factors) {
    x.wf.push_back(f.price0);
    x.ur.push_back(f.unemployment0);
  }
  x.exr = 1.0;
  x.iadj = 1.0;
  return x;
}

UnknownLayout::UnknownLayout(const ModelParameters& p) {
  int n = 0;
  auto add = [&](std::string label) {
    labels_.push_back(std::move(label));
    return n++;
  };
  for (const auto& c : p.commodities) {
    pdd_.push_back(c.domestic0 > 0.0 ? add("PDD:" + c.name) : -1);
    if (pdd_.back() >= 0) equations_.push_back("market:" + c.name);
  }
  for (const auto& a : p.activities) {
    qa_.push_back(add("QA:" + a.name));
    equations_.push_back("zero_profit:" + a.name);
  }
  for (const auto& a : p.activities) {
    wk_.push_back(a.capital0 > 0.0 ? add("WK:" + a.name) : -1);
    if (wk_.back() >= 0) equations_.push_back("capital:" + a.name);
  }
  for (const auto& f : p.factors) {
    wf_.push_back(has_unknown_price(f) ? add("WF:" + f.name) : -1);
    if (wf_.back() >= 0) equations_.push_back("factor_market:" + f.name);
  }
  for (const auto& f : p.factors) {
    ur_.push_back(has_unknown_price(f) && f.unemployment0 > 0.0 ? add("UR:" + f.name) : -1);
    if (ur_.back() >= 0) equations_.push_back("wage_curve:" + f.name);
  }
  exr_ = add("EXR");
  equations_.push_back("cpi");
  iadj_ = add("IADJ");
  equations_.push_back("balance_of_payments");
  if (equations_.size() != labels_.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(labels_.size()) + " unknowns but " +
                                                  std::to_string(equations_.size()) + " equations");
  }
}

Eigen::VectorXd UnknownLayout::pack(const PeriodUnknowns& x) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(size()));
  auto put = [&](int i, double value, const char* what) {
    if (i < 0) return;
    if (!(value > 0.0)) {
      throw Error(ErrorCode::NonPositivePrice, std::string(what) + " " + labels_[i] + " is not positive");
    }
    v[i] = std::log(value);
  };
  for (std::size_t c = 0; c < pdd_.size(); ++c) put(pdd_[c], x.pdd[c], "unknown");
  for (std::size_t a = 0; a < qa_.size(); ++a) {
    put(qa_[a], x.qa[a], "unknown");
    put(wk_[a], x.wk[a], "unknown");
  }
  for (std::size_t f = 0; f < wf_.size(); ++f) {
    put(wf_[f], x.wf[f], "unknown");
    put(ur_[f], x.ur[f], "unknown");
  }
  put(exr_, x.exr, "unknown");
  put(iadj_, x.iadj, "unknown");
  return v;
}

PeriodUnknowns UnknownLayout::unpack(const Eigen::VectorXd& v, PeriodUnknowns x) const {
  auto get = [&](int i, double& target) {
    if (i >= 0) target = std::exp(v[i]);
  };
  for (std::size_t c = 0; c < pdd_.size(); ++c) get(pdd_[c], x.pdd[c]);
  for (std::size_t a = 0; a < qa_.size(); ++a) {
    get(qa_[a], x.qa[a]);
    get(wk_[a], x.wk[a]);
  }
  for (std::size_t f = 0; f < wf_.size(); ++f) {
    get(wf_[f], x.wf[f]);
    get(ur_[f], x.ur[f]);
  }
  get(exr_, x.exr);
  get(iadj_, x.iadj);
  return x;
}

ModelState evaluate(const ModelParameters& p, const PeriodExogenous& exo, const PeriodUnknowns& x) {
  const auto nc = p.commodities.size();
  const auto na = p.activities.size();
  const auto nf = p.factors.size();
  const auto nh = p.households.size();
  const auto cap = p.capital_factor();

  ModelState s;
  s.x = x;
  s.pm.resize(nc);
  s.pe_eu.resize(nc);
  s.pe_rest.resize(nc);
  s.pe.resize(nc);
  s.px.resize(nc);
  s.pq_pre.resize(nc);
  s.pq.resize(nc);
  s.qx.assign(nc, 0.0);
  s.qd_supply.assign(nc, 0.0);
  s.qe_eu.assign(nc, 0.0);
  s.qe_rest.assign(nc, 0.0);
  s.qq.assign(nc, 0.0);
  s.qd_demand.assign(nc, 0.0);
  s.qm.assign(nc, 0.0);
  s.qint_total.assign(nc, 0.0);
  s.qh_total.assign(nc, 0.0);
  s.qg.assign(nc, 0.0);
  s.qinv.assign(nc, 0.0);
  s.qint.assign(nc, std::vector<double>(na, 0.0));
  s.qh.assign(nc, std::vector<double>(nh, 0.0));

  for (std::size_t c = 0; c < nc; ++c) {
    const auto& cp = p.commodities[c];
    s.pm[c] = x.exr * exo.world_import_price[c] * (1.0 + cp.tariff);
    s.pe_eu[c] = x.exr * exo.world_export_price[c][kEU] * (1.0 - exo.export_wedge[c][kEU]);
    s.pe_rest[c] = x.exr * exo.world_export_price[c][kRest] * (1.0 - exo.export_wedge[c][kRest]);
    const double pe2[2] = {s.pe_eu[c], s.pe_rest[c]};
    s.pe[c] = cp.cet_destination.empty() ? 1.0 : cp.cet_destination.unit_value(pe2);
    const double pt[2] = {x.pdd[c], s.pe[c]};
    s.px[c] = cp.cet_top.empty() ? 1.0 : cp.cet_top.unit_value(pt);
    const double pa2[2] = {x.pdd[c], s.pm[c]};
    s.pq_pre[c] = cp.armington.empty() ? 1.0 : cp.armington.unit_value(pa2);
    s.pq[c] = s.pq_pre[c] * (1.0 + cp.sales_tax);
  }
  s.cpi = 0.0;
  for (std::size_t c = 0; c < nc; ++c) s.cpi += p.commodities[c].cpi_weight * s.pq[c];

  s.pa.resize(na);
  s.pva.resize(na);
  s.qva.resize(na);
  s.qf.assign(na, std::vector<double>(nf, 0.0));
  for (std::size_t a = 0; a < na; ++a) {
    const auto& ap = p.activities[a];
    s.pa[a] = s.px[ap.commodity];
    std::vector<double> w(ap.factors.size());
    for (std::size_t k = 0; k < ap.factors.size(); ++k) {
      const auto f = ap.factors[k];
      w[k] = (cap && f == *cap) ? x.wk[a] : x.wf[f];
    }
    s.pva[a] = ap.value_added.unit_value(w, exo.tfp[a]);
    s.qva[a] = ap.iva * x.qa[a];
    const auto d = ap.value_added.demands(s.qva[a], w, exo.tfp[a]);
    for (std::size_t k = 0; k < ap.factors.size(); ++k) s.qf[a][ap.factors[k]] = d[k];
    for (std::size_t c = 0; c < nc; ++c) {
      s.qint[c][a] = ap.ica[c] * x.qa[a];
      s.qint_total[c] += s.qint[c][a];
    }
    s.qx[ap.commodity] += x.qa[a];
  }

  for (std::size_t c = 0; c < nc; ++c) {
    if (!(s.qx[c] > 0.0)) continue;
    const auto& cp = p.commodities[c];
    const auto cet = cet_two_level(s.qx[c], x.pdd[c], s.pe_eu[c], s.pe_rest[c], cp.cet_top,
                                   cp.cet_destination);
    s.qd_supply[c] = cet.domestic;
    s.qe_eu[c] = cet.exports_eu;
    s.qe_rest[c] = cet.exports_rest;
  }

  s.factor_employed.assign(nf, 0.0);
  s.factor_income.assign(nf, 0.0);
  s.factor_price_avg.assign(nf, 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    for (std::size_t a = 0; a < na; ++a) {
      const double q = s.qf[a][f];
      if (q == 0.0) continue;
      s.factor_employed[f] += q;
      s.factor_income[f] += ((cap && f == *cap) ? x.wk[a] : x.wf[f]) * q;
    }
    s.factor_price_avg[f] =
        s.factor_employed[f] > 0.0 ? s.factor_income[f] / s.factor_employed[f] : x.wf[f];
  }

  s.yh.assign(nh, 0.0);
  s.eh.assign(nh, 0.0);
  s.hh_savings.assign(nh, 0.0);
  s.hh_direct_tax.assign(nh, 0.0);
  double hh_to_gov = 0.0, hh_to_row = 0.0;
  for (std::size_t h = 0; h < nh; ++h) {
    const auto& hp = p.households[h];
    double y = s.cpi * hp.transfer_from_government +
               x.exr * (hp.transfer_from_row[kEU] + hp.transfer_from_row[kRest]);
    for (std::size_t f = 0; f < nf; ++f) y += p.factors[f].to_household[h] * s.factor_income[f];
    const auto hb = household_block(y, hp.budget, s.pq);
    s.yh[h] = y;
    s.eh[h] = hb.disposable;
    s.hh_savings[h] = hb.savings;
    s.hh_direct_tax[h] = hb.direct_tax;
    hh_to_gov += hp.to_government_rate * y;
    hh_to_row += (hp.to_row_rate[kEU] + hp.to_row_rate[kRest]) * y;
    for (std::size_t c = 0; c < nc; ++c) {
      s.qh[c][h] = hb.demand[c];
      s.qh_total[c] += hb.demand[c];
    }
  }

  for (std::size_t c = 0; c < nc; ++c) {
    const auto& cp = p.commodities[c];
    s.qg[c] = cp.government0;
    s.qinv[c] = x.iadj * cp.investment0;
    s.qq[c] = s.qint_total[c] + s.qh_total[c] + s.qg[c] + s.qinv[c];
    if (s.qq[c] > 0.0 && !cp.armington.empty()) {
      const auto arm = armington_compose(x.pdd[c], s.pm[c], cp.armington, s.qq[c]);
      s.qd_demand[c] = arm.domestic;
      s.qm[c] = arm.imports;
    }
  }

  double revenue = x.exr * (p.row_to_government[kEU] + p.row_to_government[kRest]) + hh_to_gov;
  for (std::size_t a = 0; a < na; ++a) revenue += p.activities[a].output_tax * s.pa[a] * x.qa[a];
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& cp = p.commodities[c];
    revenue += cp.sales_tax * s.pq_pre[c] * s.qq[c];
    revenue += cp.tariff * x.exr * exo.world_import_price[c] * s.qm[c];
  }
  for (std::size_t h = 0; h < nh; ++h) revenue += s.hh_direct_tax[h];
  double factor_to_row = 0.0;
  for (std::size_t f = 0; f < nf; ++f) {
    revenue += p.factors[f].to_government * s.factor_income[f];
    factor_to_row += (p.factors[f].to_row[kEU] + p.factors[f].to_row[kRest]) * s.factor_income[f];
  }
  s.gov_revenue = revenue;
  s.gov_spending = 0.0;
  for (std::size_t c = 0; c < nc; ++c) s.gov_spending += s.pq[c] * s.qg[c];
  for (const auto& hp : p.households) s.gov_spending += s.cpi * hp.transfer_from_government;
  s.gov_savings = s.gov_revenue - s.gov_spending;

  s.total_savings = s.gov_savings + x.exr * exo.foreign_savings;
  for (double v : s.hh_savings) s.total_savings += v;
  s.investment_value = 0.0;
  for (std::size_t c = 0; c < nc; ++c) s.investment_value += s.pq[c] * s.qinv[c];

  s.exports_fx = 0.0;
  s.imports_fx = 0.0;
  double absorption_nominal = 0.0, absorption_real = 0.0, net_exports_real = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& cp = p.commodities[c];
    s.exports_fx += exo.world_export_price[c][kEU] * (1.0 - exo.export_wedge[c][kEU]) * s.qe_eu[c] +
                    exo.world_export_price[c][kRest] * (1.0 - exo.export_wedge[c][kRest]) * s.qe_rest[c];
    s.imports_fx += exo.world_import_price[c] * s.qm[c];
    const double final_demand = s.qh_total[c] + s.qg[c] + s.qinv[c];
    absorption_nominal += s.pq[c] * final_demand;
    absorption_real += (1.0 + cp.sales_tax) * final_demand;
    net_exports_real += s.qe_eu[c] + s.qe_rest[c] - s.qm[c];
  }
  s.gdp_nominal = absorption_nominal + x.exr * (s.exports_fx - s.imports_fx);
  s.gdp_real = absorption_real + net_exports_real;
  // Outflows of factor income and household transfers are paid in local
  // currency; keep them in foreign currency for the balance of payments.
  s.imports_fx += (factor_to_row + hh_to_row) / x.exr;
  return s;
}

Eigen::VectorXd assemble_residuals(const ModelParameters& p, const PeriodExogenous& exo,
                                   const UnknownLayout& layout, const ModelState& s) {
  const auto& x = s.x;
  Eigen::VectorXd r(static_cast<Eigen::Index>(layout.size()));
  const auto cap = p.capital_factor();
  int k = 0;
  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    if (layout.pdd(c) < 0) continue;
    r[k++] = (s.qd_supply[c] - s.qd_demand[c]) / p.commodities[c].domestic0;
  }
  for (std::size_t a = 0; a < p.activities.size(); ++a) {
    const auto& ap = p.activities[a];
    double cost = ap.iva * s.pva[a];
    for (std::size_t c = 0; c < p.commodities.size(); ++c) cost += s.pq[c] * ap.ica[c];
    r[k++] = s.pa[a] * (1.0 - ap.output_tax) - cost;
  }
  for (std::size_t a = 0; a < p.activities.size(); ++a) {
    if (layout.wk(a) < 0) continue;
    r[k++] = (s.qf[a][*cap] - exo.capital[a]) / p.activities[a].capital0;
  }
  for (std::size_t f = 0; f < p.factors.size(); ++f) {
    if (layout.wf(f) < 0) continue;
    const double employed_supply = exo.factor_supply[f] * (1.0 - (layout.ur(f) >= 0 ? x.ur[f] : 0.0));
    r[k++] = (s.factor_employed[f] - employed_supply) / p.factors[f].supply0;
  }
  for (std::size_t f = 0; f < p.factors.size(); ++f) {
    if (layout.ur(f) < 0) continue;
    const auto& fp = p.factors[f];
    r[k++] = std::log(x.wf[f] / s.cpi) - std::log(fp.price0) -
             fp.wage_curve_elasticity * std::log(x.ur[f] / fp.unemployment0);
  }
  r[k++] = s.cpi / exo.cpi - 1.0;
  double inflow = s.exports_fx + exo.foreign_savings + p.row_to_government[kEU] + p.row_to_government[kRest];
  for (const auto& hp : p.households) inflow += hp.transfer_from_row[kEU] + hp.transfer_from_row[kRest];
  r[k++] = inflow - s.imports_fx;
  return r;
}

Eigen::VectorXd assemble_residuals(const ModelParameters& params, const PeriodExogenous& exo,
                                   const PeriodUnknowns& x) {
  const UnknownLayout layout(params);
  return assemble_residuals(params, exo, layout, evaluate(params, exo, x));
}

double walras_residual(const ModelState& s) {
  return (s.total_savings - s.investment_value) / std::max(1.0, std::abs(s.investment_value));
}

std::optional<Eigen::VectorXd> analytic_column(const ModelParameters& p, const PeriodExogenous& exo,
                                               const UnknownLayout& layout, const ModelState& s,
                                               std::size_t j) {
  Eigen::VectorXd col = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size()));
  const int jj = static_cast<int>(j);
  // Equation rows share the unknown ordering of the blocks they close.
  std::vector<int> market_row(p.commodities.size(), -1), factor_row(p.factors.size(), -1),
      wage_row(p.factors.size(), -1);
  int k = 0;
  for (std::size_t c = 0; c < p.commodities.size(); ++c) {
    if (layout.pdd(c) >= 0) market_row[c] = k++;
  }
  k += static_cast<int>(p.activities.size());
  for (std::size_t a = 0; a < p.activities.size(); ++a) {
    if (layout.wk(a) >= 0) ++k;
  }
  for (std::size_t f = 0; f < p.factors.size(); ++f) {
    if (layout.wf(f) >= 0) factor_row[f] = k++;
  }
  for (std::size_t f = 0; f < p.factors.size(); ++f) {
    if (layout.ur(f) >= 0) wage_row[f] = k++;
  }
  const int bop_row = k + 1;

  for (std::size_t f = 0; f < p.factors.size(); ++f) {
    if (layout.ur(f) != jj) continue;
    col[factor_row[f]] = exo.factor_supply[f] * s.x.ur[f] / p.factors[f].supply0;
    col[wage_row[f]] = -p.factors[f].wage_curve_elasticity;
    return col;
  }
  if (layout.iadj() == jj) {
    double imports = 0.0;
    for (std::size_t c = 0; c < p.commodities.size(); ++c) {
      if (!(s.qq[c] > 0.0)) continue;
      const double dshare = s.qinv[c] / s.qq[c];
      if (market_row[c] >= 0) col[market_row[c]] = -s.qd_demand[c] * dshare / p.commodities[c].domestic0;
      imports += exo.world_import_price[c] * s.qm[c] * dshare;
    }
    col[bop_row] = -imports;
    return col;
  }
  return std::nullopt;
}

std::string residual_dump(const UnknownLayout& layout, const Eigen::VectorXd& residuals) {
  std::ostringstream out;
  out << "equation,residual\n";
  for (std::size_t i = 0; i < layout.size(); ++i) {
    out << layout.equation_labels()[i] << ',' << csv::format_double(residuals[static_cast<Eigen::Index>(i)])
        << '\n';
  }
  return out.str();
}

}  // namespace deforcge
