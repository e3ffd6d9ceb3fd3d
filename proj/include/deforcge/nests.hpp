#pragma once

#include <span>
#include <vector>

namespace deforcge {

// One CES/CET nest with a signed elasticity: sigma > 0 is substitution
// (CES), sigma < 0 is transformation (CET with elasticity -sigma).
// sigma == 1 is the Cobb-Douglas limit. Components with zero reference
// quantity are inactive and never receive demand.
//
// The nest keeps its calibration point (p0, x0, q0) so the elasticity can
// be changed later without moving the reference equilibrium.
class CesNest {
 public:
  CesNest() = default;

  // Reference prices and quantities; q0 defaults to sum(p0 * x0), which
  // makes the aggregate price equal to one at the reference point.
  static CesNest calibrate(std::vector<double> p0, std::vector<double> x0, double sigma,
                           double q0 = -1.0);

  CesNest with_sigma(double sigma) const;

  double sigma() const { return sigma_; }
  double shift() const { return shift_; }
  std::size_t size() const { return delta_.size(); }
  bool active(std::size_t i) const { return delta_[i] > 0.0; }
  bool empty() const;
  const std::vector<double>& shares() const { return delta_; }
  double reference_price(std::size_t i) const { return p0_[i]; }
  double reference_quantity(std::size_t i) const { return x0_[i]; }
  double reference_level() const { return q0_; }

  // Minimum cost (CES) or maximum revenue (CET) per unit of aggregate.
  // `efficiency` multiplies the shift parameter (TFP).
  double unit_value(std::span<const double> prices, double efficiency = 1.0) const;

  // Optimal component quantity for aggregate level q.
  double demand(std::size_t i, double q, std::span<const double> prices, double efficiency = 1.0) const;
  std::vector<double> demands(double q, std::span<const double> prices, double efficiency = 1.0) const;

  // Aggregate produced by (or required for) component quantities x.
  double aggregate(std::span<const double> x, double efficiency = 1.0) const;

 private:
  double sigma_ = 1.0;
  double shift_ = 1.0;
  std::vector<double> delta_;
  std::vector<double> p0_, x0_;
  double q0_ = 0.0;
};

struct ValueAddedResult {
  std::vector<double> demands;
  double unit_cost = 0.0;
};

ValueAddedResult ces_value_added(std::span<const double> factor_prices, const CesNest& nest,
                                 double level, double tfp = 1.0);

struct LeontiefResult {
  std::vector<double> intermediates;
  double value_added = 0.0;
};

LeontiefResult leontief_intermediates(double activity_level, std::span<const double> ica,
                                      double iva);

struct CetResult {
  double domestic = 0.0;
  double exports_eu = 0.0;
  double exports_rest = 0.0;
  double export_price = 0.0;  // unit revenue of the destination nest
  double output_price = 0.0;  // unit revenue of the top nest
};

// Top nest components: (domestic, exports); destination nest: (EU, Rest).
CetResult cet_two_level(double output, double domestic_price, double price_eu,
                        double price_rest, const CesNest& top, const CesNest& destination);

struct ArmingtonResult {
  double domestic = 0.0;
  double imports = 0.0;
  double composite_price = 0.0;
};

// Nest components: (domestic, imports).
ArmingtonResult armington_compose(double domestic_price, double import_price,
                                  const CesNest& nest, double demand);

// Real factor price on the curve: real0 * (ur / ur0)^elasticity.
double wage_curve(double unemployment, double real_wage0, double unemployment0, double elasticity);

struct HouseholdBudget {
  std::vector<double> budget_shares;  // Cobb-Douglas, sum to one
  double savings_rate = 0.0;
  double direct_tax_rate = 0.0;
  double transfer_out_rate = 0.0;  // to government and abroad combined
};

struct HouseholdResult {
  double income = 0.0;
  double direct_tax = 0.0;
  double savings = 0.0;
  double transfers_out = 0.0;
  double disposable = 0.0;
  std::vector<double> demand;
};

HouseholdResult household_block(double income, const HouseholdBudget& budget,
                                std::span<const double> prices);

}  // namespace deforcge
