#include "deforcge/calibrate.hpp"

#include <cmath>

#include "deforcge/error.hpp"

namespace deforcge {

double lookup_elasticity(const std::map<std::string, double>& table, const AccountId& account,
                         std::string_view group) {
  for (const auto& key : {account.name, base_name(account), std::string("*")}) {
    auto it = table.find(key);
    if (it == table.end()) continue;
    if (!(it->second > 0.0) || !std::isfinite(it->second)) {
      throw Error(ErrorCode::MissingElasticity, std::string(group) + " elasticity for '" +
                                                    account.name + "' must be positive");
    }
    return it->second;
  }
  throw Error(ErrorCode::MissingElasticity,
              "no " + std::string(group) + " elasticity for '" + account.name + "'");
}

TaxRole classify_tax(const AccountId& payer, const AccountId& tax) {
  switch (payer.kind) {
    case AccountKind::Activity: return TaxRole::OutputTax;
    case AccountKind::Household: return TaxRole::DirectTax;
    case AccountKind::Commodity:
      return tax.name.find("imp") != std::string::npos ? TaxRole::Tariff : TaxRole::SalesTax;
    default: break;
  }
  throw Error(ErrorCode::UnsupportedStructure,
              "tax account '" + tax.name + "' collects from " + std::string(to_string(payer.kind)) +
                  " account '" + payer.name + "'");
}

namespace {

std::size_t partner_index(const AccountId& a) { return *a.partner == Partner::EU ? kEU : kRest; }

[[noreturn]] void unsupported(const SocialAccountingMatrix& sam, std::size_t r, std::size_t c) {
  throw Error(ErrorCode::UnsupportedStructure, "flow from '" + sam.account(c).name + "' to '" +
                                                   sam.account(r).name + "' has no place in the model");
}

const FactorData* find_factor_data(const CalibrationInputs& in, const AccountId& f) {
  for (const auto& key : {f.name, base_name(f)}) {
    auto it = in.factors.find(key);
    if (it != in.factors.end()) return &it->second;
  }
  return nullptr;
}

}  // namespace

ModelParameters calibrate(const SocialAccountingMatrix& sam, const CalibrationInputs& in) {
  const auto balance = check_balance(sam, in.balance_tolerance);
  if (!balance.balanced) {
    throw Error(ErrorCode::UnbalancedSAM, "max relative imbalance " +
                                              std::to_string(balance.max_relative_imbalance) +
                                              " exceeds " + std::to_string(in.balance_tolerance));
  }
  if (!(in.elasticities.destination_multiplier > 0.0)) {
    throw Error(ErrorCode::MissingElasticity, "destination multiplier must be positive");
  }

  const auto act = sam.of_kind(AccountKind::Activity);
  const auto com = sam.of_kind(AccountKind::Commodity);
  const auto fac = sam.of_kind(AccountKind::Factor);
  const auto hhs = sam.of_kind(AccountKind::Household);
  const auto govs = sam.of_kind(AccountKind::Government);
  const auto sis = sam.of_kind(AccountKind::SavingsInvestment);
  const auto rows = sam.of_kind(AccountKind::RestOfWorld);
  if (govs.size() != 1 || sis.size() != 1) {
    throw Error(ErrorCode::UnsupportedStructure,
                "model needs exactly one government and one savings-investment account");
  }
  if (rows.empty()) throw Error(ErrorCode::UnsupportedStructure, "model needs rest-of-world accounts");
  const auto gov = govs.front();
  const auto si = sis.front();

  std::vector<int> pos(sam.size(), -1);
  for (auto* group : {&act, &com, &fac, &hhs}) {
    for (std::size_t k = 0; k < group->size(); ++k) pos[(*group)[k]] = static_cast<int>(k);
  }

  ModelParameters p;
  p.base_year = sam.base_year();
  p.commodities.resize(com.size());
  p.activities.resize(act.size());
  p.factors.resize(fac.size());
  p.households.resize(hhs.size());

  // Pass over every cell, assigning it to its role in the model.
  std::vector<double> sales_tax(com.size(), 0.0), tariff(com.size(), 0.0);
  std::vector<double> output_tax(act.size(), 0.0), direct_tax(hhs.size(), 0.0);
  std::vector<double> make(act.size(), 0.0);
  std::vector<std::vector<double>> factor_pay(fac.size(), std::vector<double>(act.size(), 0.0));
  std::vector<std::vector<double>> inter(com.size(), std::vector<double>(act.size(), 0.0));
  std::vector<std::vector<double>> cons(com.size(), std::vector<double>(hhs.size(), 0.0));
  for (std::size_t i = 0; i < act.size(); ++i) p.activities[i].commodity = com.size();

  for (std::size_t r = 0; r < sam.size(); ++r) {
    for (std::size_t c = 0; c < sam.size(); ++c) {
      const double v = sam.flow(r, c);
      if (v == 0.0) continue;
      const auto& R = sam.account(r);
      const auto& C = sam.account(c);
      switch (R.kind) {
        case AccountKind::Activity:
          if (C.kind != AccountKind::Commodity) unsupported(sam, r, c);
          if (p.activities[pos[r]].commodity != com.size()) {
            throw Error(ErrorCode::UnsupportedStructure, "activity '" + R.name + "' makes more than one commodity");
          }
          if (p.commodities[pos[c]].activity) {
            throw Error(ErrorCode::UnsupportedStructure, "commodity '" + C.name + "' has more than one producer");
          }
          p.activities[pos[r]].commodity = pos[c];
          p.commodities[pos[c]].activity = pos[r];
          make[pos[r]] = v;
          break;
        case AccountKind::Commodity:
          if (C.kind == AccountKind::Activity) inter[pos[r]][pos[c]] = v;
          else if (C.kind == AccountKind::Household) cons[pos[r]][pos[c]] = v;
          else if (C.kind == AccountKind::Government) p.commodities[pos[r]].government0 = v;
          else if (C.kind == AccountKind::SavingsInvestment) p.commodities[pos[r]].investment0 = v;
          else if (C.kind == AccountKind::RestOfWorld) p.commodities[pos[r]].exports0[partner_index(C)] = v;
          else unsupported(sam, r, c);
          break;
        case AccountKind::Factor:
          if (C.kind != AccountKind::Activity) unsupported(sam, r, c);
          factor_pay[pos[r]][pos[c]] = v;
          break;
        case AccountKind::TaxInstrument:
          if (C.kind == AccountKind::TaxInstrument) unsupported(sam, r, c);
          switch (classify_tax(C, R)) {
            case TaxRole::OutputTax: output_tax[pos[c]] += v; break;
            case TaxRole::DirectTax: direct_tax[pos[c]] += v; break;
            case TaxRole::SalesTax: sales_tax[pos[c]] += v; break;
            case TaxRole::Tariff: tariff[pos[c]] += v; break;
          }
          break;
        case AccountKind::Household: {
          auto& h = p.households[pos[r]];
          if (C.kind == AccountKind::Factor) break;  // handled from the factor side
          if (C.kind == AccountKind::Government) h.transfer_from_government = v;
          else if (C.kind == AccountKind::RestOfWorld) h.transfer_from_row[partner_index(C)] = v;
          else unsupported(sam, r, c);
          break;
        }
        case AccountKind::Government:
          if (C.kind == AccountKind::TaxInstrument || C.kind == AccountKind::Household ||
              C.kind == AccountKind::Factor) {
            break;  // handled from the payer side
          }
          if (C.kind == AccountKind::RestOfWorld) p.row_to_government[partner_index(C)] = v;
          else unsupported(sam, r, c);
          break;
        case AccountKind::SavingsInvestment:
          if (C.kind == AccountKind::Household || C.kind == AccountKind::Government) break;
          if (C.kind == AccountKind::RestOfWorld) p.foreign_savings0 += v;
          else unsupported(sam, r, c);
          break;
        case AccountKind::RestOfWorld:
          if (C.kind == AccountKind::Commodity || C.kind == AccountKind::Factor ||
              C.kind == AccountKind::Household) {
            break;
          }
          if (C.kind == AccountKind::SavingsInvestment) p.foreign_savings0 -= v;
          else unsupported(sam, r, c);
          break;
      }
    }
  }

  // Commodities.
  double cpi_base = 0.0;
  for (std::size_t k = 0; k < com.size(); ++k) {
    auto& cp = p.commodities[k];
    const auto& id = sam.account(com[k]);
    cp.name = id.name;
    cp.compliance = id.compliance;
    cp.output0 = cp.activity ? make[*cp.activity] : 0.0;
    for (auto rw : rows) cp.imports0 += sam.flow(rw, com[k]);
    for (auto rw : rows) {
      cp.import_partner_share[partner_index(sam.account(rw))] =
          cp.imports0 > 0.0 ? sam.flow(rw, com[k]) / cp.imports0 : 0.0;
    }
    const double exports = cp.exports0[kEU] + cp.exports0[kRest];
    cp.domestic0 = cp.output0 - exports;
    if (cp.domestic0 < -1e-9 * std::max(1.0, cp.output0)) {
      throw Error(ErrorCode::UnsupportedStructure, "commodity '" + cp.name + "' exports more than it produces");
    }
    if (cp.domestic0 < 1e-12 * std::max(1.0, cp.output0)) cp.domestic0 = 0.0;
    if (cp.output0 == 0.0 && cp.imports0 == 0.0) {
      throw Error(ErrorCode::UnsupportedStructure, "commodity '" + cp.name + "' has no supply");
    }
    if (tariff[k] > 0.0 && cp.imports0 == 0.0) {
      throw Error(ErrorCode::UnsupportedStructure, "tariff on commodity '" + cp.name + "' without imports");
    }
    cp.tariff = cp.imports0 > 0.0 ? tariff[k] / cp.imports0 : 0.0;
    const double pm0 = 1.0 + cp.tariff;
    cp.composite0 = cp.domestic0 + pm0 * cp.imports0;
    cp.sales_tax = cp.composite0 > 0.0 ? sales_tax[k] / cp.composite0 : 0.0;
    const double pq0 = 1.0 + cp.sales_tax;
    cp.government0 /= pq0;
    cp.investment0 /= pq0;

    const double sa = lookup_elasticity(in.elasticities.armington, id, "Armington");
    cp.armington = CesNest::calibrate({1.0, pm0}, {cp.domestic0, cp.imports0}, sa, cp.composite0);
    if (cp.output0 > 0.0) {
      const double st = lookup_elasticity(in.elasticities.cet, id, "CET");
      cp.cet_top = CesNest::calibrate({1.0, 1.0}, {cp.domestic0, exports}, -st);
      cp.cet_destination = CesNest::calibrate({1.0, 1.0}, {cp.exports0[kEU], cp.exports0[kRest]},
                                              -st * in.elasticities.destination_multiplier);
    } else {
      cp.cet_top = CesNest::calibrate({1.0, 1.0}, {0.0, 0.0}, -1.0);
      cp.cet_destination = CesNest::calibrate({1.0, 1.0}, {0.0, 0.0}, -1.0);
    }
    for (std::size_t h = 0; h < hhs.size(); ++h) cp.cpi_weight += cons[k][h] / pq0;
    cpi_base += cp.cpi_weight * pq0;
  }
  if (!(cpi_base > 0.0)) throw Error(ErrorCode::UnsupportedStructure, "households consume nothing");
  for (auto& cp : p.commodities) cp.cpi_weight /= cpi_base;

  // Factors.
  std::map<std::string, double> land_payment_by_base;
  for (std::size_t k = 0; k < fac.size(); ++k) {
    double pay = 0.0;
    for (double v : factor_pay[k]) pay += v;
    land_payment_by_base[base_name(sam.account(fac[k]))] += pay;
  }
  for (std::size_t k = 0; k < fac.size(); ++k) {
    auto& fp = p.factors[k];
    const auto& id = sam.account(fac[k]);
    fp.name = id.name;
    fp.compliance = id.compliance;
    const auto* data = find_factor_data(in, id);
    if (!data) throw Error(ErrorCode::InconsistentFactorData, "no factor data for '" + id.name + "'");
    fp.type = data->type;
    fp.land_use = data->land_use;
    fp.wage_curve_elasticity = data->wage_curve_elasticity;
    fp.land_supply_elasticity = data->land_supply_elasticity;
    fp.unemployment0 = data->unemployment;
    if (!(fp.unemployment0 >= 0.0 && fp.unemployment0 < 1.0)) {
      throw Error(ErrorCode::InconsistentFactorData, "unemployment rate of '" + id.name + "' outside [0,1)");
    }
    if (fp.unemployment0 > 0.0 && !(fp.wage_curve_elasticity < 0.0)) {
      throw Error(ErrorCode::InconsistentFactorData, "wage curve of '" + id.name + "' needs a negative elasticity");
    }
    double pay = 0.0;
    for (double v : factor_pay[k]) pay += v;
    if (fp.type == FactorType::Land) {
      double hectares = data->hectares;
      if (in.factors.count(id.name) == 0 && id.compliance != Compliance::NotApplicable) {
        const double total = land_payment_by_base[base_name(id)];
        hectares *= total > 0.0 ? pay / total : 0.0;
      }
      if ((pay > 0.0) != (hectares > 0.0)) {
        throw Error(ErrorCode::InconsistentFactorData,
                    "land factor '" + id.name + "' payments and hectares disagree in sign");
      }
      fp.employed0 = hectares;
      fp.price0 = hectares > 0.0 ? pay / hectares : 1.0;
    } else {
      fp.employed0 = pay;
      fp.price0 = 1.0;
    }
    if (fp.type == FactorType::Capital) fp.unemployment0 = 0.0;
    fp.supply0 = fp.employed0 / (1.0 - fp.unemployment0);

    const double col = sam.col_sum(fac[k]);
    fp.to_household.assign(hhs.size(), 0.0);
    for (std::size_t r = 0; r < sam.size(); ++r) {
      const double v = sam.flow(r, fac[k]);
      if (v == 0.0) continue;
      const auto& R = sam.account(r);
      if (R.kind == AccountKind::Household) fp.to_household[pos[r]] = v / col;
      else if (R.kind == AccountKind::Government) fp.to_government = v / col;
      else if (R.kind == AccountKind::RestOfWorld) fp.to_row[partner_index(R)] = v / col;
      else unsupported(sam, r, fac[k]);
    }
  }
  std::size_t capital_count = 0;
  for (const auto& fp : p.factors) capital_count += fp.type == FactorType::Capital;
  if (capital_count > 1) throw Error(ErrorCode::UnsupportedStructure, "at most one capital factor is supported");

  // Activities.
  for (std::size_t k = 0; k < act.size(); ++k) {
    auto& ap = p.activities[k];
    const auto& id = sam.account(act[k]);
    ap.name = id.name;
    ap.compliance = id.compliance;
    if (ap.commodity == com.size()) {
      throw Error(ErrorCode::UnsupportedStructure, "activity '" + id.name + "' produces nothing");
    }
    ap.output0 = make[k];
    ap.output_tax = output_tax[k] / ap.output0;
    ap.ica.assign(com.size(), 0.0);
    for (std::size_t c = 0; c < com.size(); ++c) {
      ap.ica[c] = inter[c][k] / ((1.0 + p.commodities[c].sales_tax) * ap.output0);
    }
    std::vector<double> w0, x0;
    double va = 0.0;
    for (std::size_t f = 0; f < fac.size(); ++f) {
      const double v = factor_pay[f][k];
      if (v == 0.0) continue;
      ap.factors.push_back(f);
      w0.push_back(p.factors[f].price0);
      x0.push_back(v / p.factors[f].price0);
      va += v;
      if (p.factors[f].type == FactorType::Capital) ap.capital0 = v;
    }
    if (!(va > 0.0)) throw Error(ErrorCode::UnsupportedStructure, "activity '" + id.name + "' has no value added");
    ap.iva = va / ap.output0;
    const double sv = lookup_elasticity(in.elasticities.value_added, id, "value-added");
    ap.value_added = CesNest::calibrate(w0, x0, sv, va);
  }

  // Households.
  for (std::size_t k = 0; k < hhs.size(); ++k) {
    auto& hp = p.households[k];
    const auto h = hhs[k];
    hp.name = sam.account(h).name;
    hp.income0 = sam.row_sum(h);
    if (!(hp.income0 > 0.0)) throw Error(ErrorCode::UnsupportedStructure, "household '" + hp.name + "' has no income");
    double consumption = 0.0;
    for (std::size_t r = 0; r < sam.size(); ++r) {
      const double v = sam.flow(r, h);
      if (v == 0.0) continue;
      const auto& R = sam.account(r);
      switch (R.kind) {
        case AccountKind::Commodity: consumption += v; break;
        case AccountKind::TaxInstrument: break;
        case AccountKind::Government: hp.to_government_rate = v / hp.income0; break;
        case AccountKind::RestOfWorld: hp.to_row_rate[partner_index(R)] = v / hp.income0; break;
        case AccountKind::SavingsInvestment: hp.budget.savings_rate = v / hp.income0; break;
        default: unsupported(sam, r, h);
      }
    }
    hp.budget.direct_tax_rate = direct_tax[k] / hp.income0;
    hp.budget.transfer_out_rate = hp.to_government_rate + hp.to_row_rate[kEU] + hp.to_row_rate[kRest];
    hp.budget.budget_shares.assign(com.size(), 0.0);
    if (!(consumption > 0.0)) throw Error(ErrorCode::UnsupportedStructure, "household '" + hp.name + "' consumes nothing");
    for (std::size_t c = 0; c < com.size(); ++c) hp.budget.budget_shares[c] = cons[c][k] / consumption;
  }
  return p;
}

}  // namespace deforcge
