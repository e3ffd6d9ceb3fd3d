#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "deforcge/nests.hpp"
#include "deforcge/sam.hpp"

namespace deforcge {

enum class FactorType { Labor, Capital, Land };

std::string_view to_string(FactorType type);
FactorType parse_factor_type(std::string_view text);

// Partner index used by every two-element destination array.
inline constexpr std::size_t kEU = 0;
inline constexpr std::size_t kRest = 1;

struct FactorParams {
  std::string name;
  FactorType type = FactorType::Labor;
  Compliance compliance = Compliance::NotApplicable;
  std::string land_use;  // crop | livestock | forestry (land only)
  double price0 = 1.0;   // per unit employed (per ha for land)
  double employed0 = 0.0;
  double unemployment0 = 0.0;
  double supply0 = 0.0;  // employed0 / (1 - unemployment0)
  double wage_curve_elasticity = 0.0;
  double land_supply_elasticity = 0.0;  // mu; used for non-compliant land only
  // Distribution of factor income.
  std::vector<double> to_household;
  double to_government = 0.0;
  std::array<double, 2> to_row{};
};

struct ActivityParams {
  std::string name;
  Compliance compliance = Compliance::NotApplicable;
  std::size_t commodity = 0;  // single output
  double output0 = 0.0;
  double output_tax = 0.0;
  std::vector<double> ica;  // per commodity, quantity per unit of activity
  double iva = 0.0;
  std::vector<std::size_t> factors;  // value-added components, in nest order
  CesNest value_added;
  double capital0 = 0.0;  // zero when the activity uses no capital
};

struct CommodityParams {
  std::string name;
  Compliance compliance = Compliance::NotApplicable;
  std::optional<std::size_t> activity;
  double sales_tax = 0.0;
  double tariff = 0.0;
  double output0 = 0.0;
  double domestic0 = 0.0;
  double imports0 = 0.0;
  std::array<double, 2> exports0{};
  double composite0 = 0.0;
  std::array<double, 2> import_partner_share{};  // reporting only
  CesNest armington;        // (domestic, imports)
  CesNest cet_top;          // (domestic, exports), signed sigma < 0
  CesNest cet_destination;  // (EU, Rest), signed sigma < 0
  double government0 = 0.0;
  double investment0 = 0.0;
  double cpi_weight = 0.0;

  double armington_elasticity() const { return armington.sigma(); }
  double cet_elasticity() const { return -cet_top.sigma(); }
  double destination_elasticity() const { return -cet_destination.sigma(); }
};

struct HouseholdParams {
  std::string name;
  HouseholdBudget budget;
  double to_government_rate = 0.0;
  std::array<double, 2> to_row_rate{};
  double transfer_from_government = 0.0;  // real, indexed to CPI
  std::array<double, 2> transfer_from_row{};  // foreign currency
  double income0 = 0.0;
};

struct ModelParameters {
  int base_year = 0;
  std::vector<ActivityParams> activities;
  std::vector<CommodityParams> commodities;
  std::vector<FactorParams> factors;
  std::vector<HouseholdParams> households;
  std::array<double, 2> row_to_government{};  // foreign currency
  double foreign_savings0 = 0.0;

  std::optional<std::size_t> find_activity(std::string_view name) const;
  std::optional<std::size_t> find_commodity(std::string_view name) const;
  std::optional<std::size_t> find_factor(std::string_view name) const;
  std::optional<std::size_t> capital_factor() const;
};

// Exogenous inputs of one period.
struct PeriodExogenous {
  std::vector<double> factor_supply;  // per factor (labor, land); capital unused
  std::vector<double> capital;        // per activity
  std::vector<double> tfp;            // per activity
  std::vector<std::array<double, 2>> world_export_price;
  std::vector<std::array<double, 2>> export_wedge;
  std::vector<double> world_import_price;
  double foreign_savings = 0.0;
  double cpi = 1.0;  // numeraire

  static PeriodExogenous base(const ModelParameters& params);
};

struct PeriodUnknowns {
  std::vector<double> pdd;  // per commodity
  std::vector<double> qa;   // per activity
  std::vector<double> wk;   // per activity capital rental
  std::vector<double> wf;   // per factor (capital entry unused)
  std::vector<double> ur;   // per factor
  double exr = 1.0;
  double iadj = 1.0;

  static PeriodUnknowns base(const ModelParameters& params);
};

// Maps the positive unknowns to a log-space vector and names the equations.
class UnknownLayout {
 public:
  explicit UnknownLayout(const ModelParameters& params);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& unknown_labels() const { return labels_; }
  const std::vector<std::string>& equation_labels() const { return equations_; }

  Eigen::VectorXd pack(const PeriodUnknowns& x) const;
  PeriodUnknowns unpack(const Eigen::VectorXd& v, PeriodUnknowns fill) const;

  int pdd(std::size_t c) const { return pdd_[c]; }
  int qa(std::size_t a) const { return qa_[a]; }
  int wk(std::size_t a) const { return wk_[a]; }
  int wf(std::size_t f) const { return wf_[f]; }
  int ur(std::size_t f) const { return ur_[f]; }
  int exr() const { return exr_; }
  int iadj() const { return iadj_; }

 private:
  std::vector<int> pdd_, qa_, wk_, wf_, ur_;
  int exr_ = -1, iadj_ = -1;
  std::vector<std::string> labels_;
  std::vector<std::string> equations_;
};

// Every price, quantity and income implied by a candidate point.
struct ModelState {
  PeriodUnknowns x;
  // commodities
  std::vector<double> pm, pe_eu, pe_rest, pe, px, pq_pre, pq;
  std::vector<double> qx, qd_supply, qe_eu, qe_rest, qq, qd_demand, qm;
  std::vector<double> qint_total, qh_total, qg, qinv;
  std::vector<std::vector<double>> qint;  // [commodity][activity]
  std::vector<std::vector<double>> qh;    // [commodity][household]
  // activities
  std::vector<double> pa, pva, qva;
  std::vector<std::vector<double>> qf;  // [activity][factor]
  // factors
  std::vector<double> factor_employed, factor_income, factor_price_avg;
  // institutions
  std::vector<double> yh, eh, hh_savings, hh_direct_tax;
  double gov_revenue = 0.0;
  double gov_spending = 0.0;
  double gov_savings = 0.0;
  double total_savings = 0.0;
  double investment_value = 0.0;
  double cpi = 1.0;
  // aggregates
  double gdp_nominal = 0.0;
  double gdp_real = 0.0;  // expenditure side at base-year prices
  double exports_fx = 0.0;
  double imports_fx = 0.0;
};

ModelState evaluate(const ModelParameters& params, const PeriodExogenous& exo, const PeriodUnknowns& x);

// Residuals of the square system in layout order; the savings-investment
// identity is left out and reported by walras_residual().
Eigen::VectorXd assemble_residuals(const ModelParameters& params, const PeriodExogenous& exo,
                                   const UnknownLayout& layout, const ModelState& state);
Eigen::VectorXd assemble_residuals(const ModelParameters& params, const PeriodExogenous& exo,
                                   const PeriodUnknowns& x);

// Savings minus investment relative to investment value.
double walras_residual(const ModelState& state);

// Closed-form Jacobian column (derivative of the residuals with respect to
// the log of unknown j) where one is available: unemployment rates and the
// investment scaling factor.
std::optional<Eigen::VectorXd> analytic_column(const ModelParameters& params,
                                               const PeriodExogenous& exo,
                                               const UnknownLayout& layout,
                                               const ModelState& state, std::size_t j);

// equation,residual CSV for debugging.
std::string residual_dump(const UnknownLayout& layout, const Eigen::VectorXd& residuals);

struct PeriodEquilibrium {
  PeriodUnknowns unknowns;
  ModelState state;
  double residual_norm = 0.0;
  double walras = 0.0;
  int iterations = 0;
};

}  // namespace deforcge
