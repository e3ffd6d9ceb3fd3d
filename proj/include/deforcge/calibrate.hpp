#pragma once

#include <map>
#include <string>

#include "deforcge/model.hpp"
#include "deforcge/sam.hpp"

namespace deforcge {

// Behavioural elasticities keyed by unsplit account name ("c_crop" covers
// c_crop_c and c_crop_nc). A "*" entry is the fallback for its group.
struct ElasticitySet {
  std::map<std::string, double> armington;    // per commodity
  std::map<std::string, double> cet;          // top-level transformation, per commodity
  std::map<std::string, double> value_added;  // per activity
  double destination_multiplier = 2.0;        // sigma_D = multiplier * sigma_T
};

struct FactorData {
  FactorType type = FactorType::Labor;
  double hectares = 0.0;  // land in use in the base year
  double unemployment = 0.0;
  double wage_curve_elasticity = 0.0;
  double land_supply_elasticity = 0.0;
  std::string land_use;
};

struct CalibrationInputs {
  ElasticitySet elasticities;
  // Keyed by factor name or by unsplit name; land hectares given for an
  // unsplit name are apportioned across the twins by factor payments.
  std::map<std::string, FactorData> factors;
  double balance_tolerance = 1e-7;
};

ModelParameters calibrate(const SocialAccountingMatrix& sam, const CalibrationInputs& inputs);

// Looks up `name`, then its unsplit base, then "*"; throws MissingElasticity.
double lookup_elasticity(const std::map<std::string, double>& table, const AccountId& account,
                         std::string_view group);

// Kind of tax collected on a cell paid by `payer` into tax account `tax`.
enum class TaxRole { OutputTax, SalesTax, Tariff, DirectTax };
TaxRole classify_tax(const AccountId& payer, const AccountId& tax);

}  // namespace deforcge
