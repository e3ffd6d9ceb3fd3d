#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "deforcge/calibrate.hpp"
#include "deforcge/model.hpp"
#include "deforcge/sam.hpp"

namespace testing {

// Rebuilds every SAM cell from a model state, account by account, without
// going through the calibration code. Savings from abroad enter as a net
// figure because the SAM may record them on either side.
struct Replication {
  double max_relative_error = 0.0;
  std::string worst_cell;
  int cells = 0;
};

inline Replication replicate_sam(const deforcge::SocialAccountingMatrix& sam, const deforcge::ModelParameters& p,
                                 const deforcge::PeriodExogenous& exo, const deforcge::ModelState& s) {
  using namespace deforcge;
  const auto& x = s.x;
  const auto cap = p.capital_factor();
  auto act = [&](const std::string& n) { return *p.find_activity(n); };
  auto com = [&](const std::string& n) { return *p.find_commodity(n); };
  auto fac = [&](const std::string& n) { return *p.find_factor(n); };
  auto hh = [&](const std::string& n) {
    for (std::size_t h = 0; h < p.households.size(); ++h)
      if (p.households[h].name == n) return h;
    throw std::runtime_error("no household " + n);
  };
  auto part = [](const AccountId& id) { return *id.partner == Partner::EU ? kEU : kRest; };

  // Model-side value of the cell (row, col).
  auto model_cell = [&](std::size_t r, std::size_t c) -> double {
    const auto& R = sam.account(r);
    const auto& C = sam.account(c);
    switch (R.kind) {
      case AccountKind::Activity: {
        const auto a = act(R.name);
        return s.pa[a] * x.qa[a];
      }
      case AccountKind::Commodity: {
        const auto k = com(R.name);
        if (C.kind == AccountKind::Activity) return s.pq[k] * s.qint[k][act(C.name)];
        if (C.kind == AccountKind::Household) return s.pq[k] * s.qh[k][hh(C.name)];
        if (C.kind == AccountKind::Government) return s.pq[k] * s.qg[k];
        if (C.kind == AccountKind::SavingsInvestment) return s.pq[k] * s.qinv[k];
        if (C.kind == AccountKind::RestOfWorld) return part(C) == kEU ? s.pe_eu[k] * s.qe_eu[k] : s.pe_rest[k] * s.qe_rest[k];
        break;
      }
      case AccountKind::Factor: {
        const auto f = fac(R.name);
        const auto a = act(C.name);
        return ((cap && f == *cap) ? x.wk[a] : x.wf[f]) * s.qf[a][f];
      }
      case AccountKind::TaxInstrument: {
        switch (classify_tax(C, R)) {
          case TaxRole::OutputTax: {
            const auto a = act(C.name);
            return p.activities[a].output_tax * s.pa[a] * x.qa[a];
          }
          case TaxRole::SalesTax: {
            const auto k = com(C.name);
            return p.commodities[k].sales_tax * s.pq_pre[k] * s.qq[k];
          }
          case TaxRole::Tariff: {
            const auto k = com(C.name);
            return p.commodities[k].tariff * x.exr * exo.world_import_price[k] * s.qm[k];
          }
          case TaxRole::DirectTax: return s.hh_direct_tax[hh(C.name)];
        }
        break;
      }
      case AccountKind::Household: {
        const auto h = hh(R.name);
        if (C.kind == AccountKind::Factor) return p.factors[fac(C.name)].to_household[h] * s.factor_income[fac(C.name)];
        if (C.kind == AccountKind::Government) return s.cpi * p.households[h].transfer_from_government;
        if (C.kind == AccountKind::RestOfWorld) return x.exr * p.households[h].transfer_from_row[part(C)];
        break;
      }
      case AccountKind::Government: {
        if (C.kind == AccountKind::Household) return p.households[hh(C.name)].to_government_rate * s.yh[hh(C.name)];
        if (C.kind == AccountKind::Factor) return p.factors[fac(C.name)].to_government * s.factor_income[fac(C.name)];
        if (C.kind == AccountKind::RestOfWorld) return x.exr * p.row_to_government[part(C)];
        break;
      }
      case AccountKind::SavingsInvestment: {
        if (C.kind == AccountKind::Household) return s.hh_savings[hh(C.name)];
        if (C.kind == AccountKind::Government) return s.gov_savings;
        break;
      }
      case AccountKind::RestOfWorld: {
        const auto d = part(R);
        if (C.kind == AccountKind::Commodity) {
          const auto k = com(C.name);
          return x.exr * exo.world_import_price[k] * s.qm[k] * p.commodities[k].import_partner_share[d];
        }
        if (C.kind == AccountKind::Factor) return p.factors[fac(C.name)].to_row[d] * s.factor_income[fac(C.name)];
        if (C.kind == AccountKind::Household) return p.households[hh(C.name)].to_row_rate[d] * s.yh[hh(C.name)];
        break;
      }
    }
    throw std::runtime_error("cell " + R.name + "," + C.name + " has no model counterpart");
  };

  Replication out;
  auto record = [&](double model, double data, const std::string& label) {
    const double err = data != 0.0 ? std::abs(model - data) / std::abs(data) : std::abs(model);
    ++out.cells;
    if (err > out.max_relative_error) {
      out.max_relative_error = err;
      out.worst_cell = label;
    }
  };
  double net_foreign_sam = 0.0;
  for (std::size_t r = 0; r < sam.size(); ++r) {
    for (std::size_t c = 0; c < sam.size(); ++c) {
      const double v = sam.flow(r, c);
      if (v == 0.0) continue;
      const auto& R = sam.account(r);
      const auto& C = sam.account(c);
      if (R.kind == AccountKind::SavingsInvestment && C.kind == AccountKind::RestOfWorld) {
        net_foreign_sam += v;
        continue;
      }
      if (R.kind == AccountKind::RestOfWorld && C.kind == AccountKind::SavingsInvestment) {
        net_foreign_sam -= v;
        continue;
      }
      double model = 0.0;
      if (R.kind == AccountKind::Government && C.kind == AccountKind::TaxInstrument) {
        for (std::size_t j = 0; j < sam.size(); ++j)
          if (sam.flow(c, j) != 0.0) model += model_cell(c, j);
      } else {
        model = model_cell(r, c);
      }
      record(model, v, R.name + "," + C.name);
    }
  }
  record(x.exr * exo.foreign_savings, net_foreign_sam, "net foreign savings");
  return out;
}

}  // namespace testing
