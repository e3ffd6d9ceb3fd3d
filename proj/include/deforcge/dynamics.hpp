#pragma once

#include <string>
#include <vector>

#include "deforcge/model.hpp"

namespace deforcge {

struct DynamicsConfig {
  double forest_stock = 0.0;  // non-productive forest in the base year, ha
  double mobility = 0.25;     // land migration speed per year
  double depreciation = 0.05;
  double rental_rate = 0.10;  // capital services per unit of stock in the base year
};

// Land factors of the model, one entry per land factor, in model order.
struct LandAccount {
  std::vector<std::size_t> factors;
  std::vector<Compliance> compliance;
  std::vector<std::string> use;
  std::vector<double> qfs;     // supply this period
  std::vector<double> qfinit;  // supply before migration
  std::vector<double> qdefor;  // new deforestation (non-compliant only)
  std::vector<double> ur;
  std::vector<double> wfavg;
  std::vector<double> qfs00, wfavg00, mu;
  double cpi00 = 1.0;
  double forest = 0.0;
  double deforestation_total = 0.0;

  static LandAccount initial(const ModelParameters& params, double forest_stock);
  std::size_t size() const { return factors.size(); }
};

// Induced deforestation on the land supply curve, floored at zero:
// qfs00 * (((wfavg / cpi) / (wfavg00 / cpi00))^mu - 1).
double deforestation_supply(double qfs00, double wfavg, double cpi, double wfavg00, double cpi00, double mu);

// Deforestation for every land factor at the account's current rents.
std::vector<double> deforestation_supply(const LandAccount& land, double cpi);

// Next period's initial supplies and forest stock. Deforestation beyond the
// remaining forest is scaled down with a warning.
LandAccount advance_land(const LandAccount& land, std::vector<std::string>* warnings = nullptr);

// Reallocates hectares among uses of one compliance class. The flow from
// use i to use j is mobility * qfinit[i] * max(0, (r_j - r_i) / r_i), with
// outflows scaled down so no stock turns negative.
std::vector<double> migrate_land(const std::vector<double>& qfinit, const std::vector<double>& returns,
                                 double mobility);

// Applies migrate_land within each compliance class; returns are the rents
// relative to their base-year level.
void migrate_all(LandAccount& land, double mobility);

struct CapitalAccount {
  std::vector<double> stock;       // per activity, base-currency units
  std::vector<double> allocation;  // investment shares, sum to one
  double depreciation = 0.05;
  double rental_rate = 0.10;

  static CapitalAccount initial(const ModelParameters& params, const DynamicsConfig& config);
  // Capital services available to each activity.
  std::vector<double> services() const;
};

struct NextStocks {
  CapitalAccount capital;
  double labor_supply = 0.0;
};

NextStocks advance_capital_labor(const CapitalAccount& capital, double real_investment,
                                 double labor_supply, double population_growth);

// Investment at base-year purchaser prices.
double real_investment(const ModelParameters& params, const ModelState& state);

}  // namespace deforcge
