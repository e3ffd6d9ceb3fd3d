#include "deforcge/nests.hpp"

#include <cmath>
#include <algorithm>
#include <numeric>
#include <string>

#include "deforcge/error.hpp"

namespace deforcge {

namespace {

bool is_cobb_douglas(double sigma) { return std::abs(sigma - 1.0) < 1e-12; }

void check_prices(const std::vector<double>& delta, std::span<const double> prices) {
  if (prices.size() != delta.size()) {
    throw Error(ErrorCode::DimensionMismatch, "nest has " + std::to_string(delta.size()) +
                                                  " components but " + std::to_string(prices.size()) +
                                                  " prices");
  }
  for (std::size_t i = 0; i < delta.size(); ++i) {
    if (delta[i] > 0.0 && !(prices[i] > 0.0)) {
      throw Error(ErrorCode::NonPositivePrice, "price of nest component " + std::to_string(i) +
                                                   " is not positive");
    }
  }
}

}  // namespace

CesNest CesNest::calibrate(std::vector<double> p0, std::vector<double> x0, double sigma, double q0) {
  if (p0.size() != x0.size()) throw Error(ErrorCode::DimensionMismatch, "nest price/quantity size");
  if (sigma == 0.0 || !std::isfinite(sigma)) {
    throw Error(ErrorCode::DomainError, "nest elasticity must be finite and nonzero");
  }
  CesNest n;
  n.sigma_ = sigma;
  n.p0_ = std::move(p0);
  n.x0_ = std::move(x0);
  n.delta_.assign(n.x0_.size(), 0.0);
  double value = 0.0;
  for (std::size_t i = 0; i < n.x0_.size(); ++i) {
    if (n.x0_[i] < 0.0) throw Error(ErrorCode::DomainError, "negative reference quantity in nest");
    if (n.x0_[i] > 0.0) {
      if (!(n.p0_[i] > 0.0)) throw Error(ErrorCode::NonPositivePrice, "reference price in nest");
      value += n.p0_[i] * n.x0_[i];
    }
  }
  n.q0_ = q0 > 0.0 ? q0 : value;
  if (value == 0.0) {
    n.shift_ = 1.0;
    return n;
  }
  if (is_cobb_douglas(sigma)) {
    double log_prod = 0.0;
    for (std::size_t i = 0; i < n.x0_.size(); ++i) {
      if (n.x0_[i] > 0.0) {
        n.delta_[i] = n.p0_[i] * n.x0_[i] / value;
        log_prod += n.delta_[i] * std::log(n.x0_[i]);
      }
    }
    n.shift_ = n.q0_ / std::exp(log_prod);
    return n;
  }
  const double rho = (sigma - 1.0) / sigma;
  double norm = 0.0;
  for (std::size_t i = 0; i < n.x0_.size(); ++i) {
    if (n.x0_[i] > 0.0) {
      n.delta_[i] = n.p0_[i] * std::pow(n.x0_[i], 1.0 / sigma);
      norm += n.delta_[i];
    }
  }
  double inner = 0.0;
  for (std::size_t i = 0; i < n.x0_.size(); ++i) {
    if (n.x0_[i] > 0.0) {
      n.delta_[i] /= norm;
      inner += n.delta_[i] * std::pow(n.x0_[i], rho);
    }
  }
  n.shift_ = n.q0_ / std::pow(inner, 1.0 / rho);
  return n;
}

CesNest CesNest::with_sigma(double sigma) const { return calibrate(p0_, x0_, sigma, q0_); }

bool CesNest::empty() const {
  return std::none_of(delta_.begin(), delta_.end(), [](double d) { return d > 0.0; });
}

double CesNest::unit_value(std::span<const double> prices, double efficiency) const {
  check_prices(delta_, prices);
  const double a = shift_ * efficiency;
  if (is_cobb_douglas(sigma_)) {
    double log_v = 0.0;
    for (std::size_t i = 0; i < delta_.size(); ++i) {
      if (delta_[i] > 0.0) log_v += delta_[i] * std::log(prices[i] / delta_[i]);
    }
    return std::exp(log_v) / a;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < delta_.size(); ++i) {
    if (delta_[i] > 0.0) sum += std::pow(delta_[i], sigma_) * std::pow(prices[i], 1.0 - sigma_);
  }
  return std::pow(sum, 1.0 / (1.0 - sigma_)) / a;
}

double CesNest::demand(std::size_t i, double q, std::span<const double> prices, double efficiency) const {
  if (!(delta_[i] > 0.0) || q == 0.0) return 0.0;
  const double v = unit_value(prices, efficiency);
  if (is_cobb_douglas(sigma_)) return delta_[i] * v * q / prices[i];
  const double a = shift_ * efficiency;
  return q * std::pow(a, sigma_ - 1.0) * std::pow(delta_[i], sigma_) * std::pow(v / prices[i], sigma_);
}

std::vector<double> CesNest::demands(double q, std::span<const double> prices, double efficiency) const {
  std::vector<double> out(delta_.size(), 0.0);
  if (q == 0.0) {
    check_prices(delta_, prices);
    return out;
  }
  const double v = unit_value(prices, efficiency);
  const double a = shift_ * efficiency;
  for (std::size_t i = 0; i < delta_.size(); ++i) {
    if (!(delta_[i] > 0.0)) continue;
    if (is_cobb_douglas(sigma_)) {
      out[i] = delta_[i] * v * q / prices[i];
    } else {
      out[i] = q * std::pow(a, sigma_ - 1.0) * std::pow(delta_[i], sigma_) *
               std::pow(v / prices[i], sigma_);
    }
  }
  return out;
}

double CesNest::aggregate(std::span<const double> x, double efficiency) const {
  if (x.size() != delta_.size()) throw Error(ErrorCode::DimensionMismatch, "nest quantity size");
  const double a = shift_ * efficiency;
  if (is_cobb_douglas(sigma_)) {
    double log_q = 0.0;
    for (std::size_t i = 0; i < delta_.size(); ++i) {
      if (delta_[i] > 0.0) {
        if (!(x[i] > 0.0)) return 0.0;
        log_q += delta_[i] * std::log(x[i]);
      }
    }
    return a * std::exp(log_q);
  }
  const double rho = (sigma_ - 1.0) / sigma_;
  double inner = 0.0;
  for (std::size_t i = 0; i < delta_.size(); ++i) {
    if (delta_[i] > 0.0) inner += delta_[i] * std::pow(x[i], rho);
  }
  if (inner <= 0.0) return 0.0;
  return a * std::pow(inner, 1.0 / rho);
}

ValueAddedResult ces_value_added(std::span<const double> factor_prices, const CesNest& nest,
                                 double level, double tfp) {
  for (std::size_t i = 0; i < factor_prices.size(); ++i) {
    if (!(factor_prices[i] > 0.0)) {
      throw Error(ErrorCode::NonPositivePrice, "factor price " + std::to_string(i) + " is not positive");
    }
  }
  return {nest.demands(level, factor_prices, tfp), nest.unit_value(factor_prices, tfp)};
}

LeontiefResult leontief_intermediates(double activity_level, std::span<const double> ica, double iva) {
  LeontiefResult r;
  r.intermediates.reserve(ica.size());
  for (double a : ica) r.intermediates.push_back(a * activity_level);
  r.value_added = iva * activity_level;
  return r;
}

CetResult cet_two_level(double output, double domestic_price, double price_eu, double price_rest,
                        const CesNest& top, const CesNest& destination) {
  CetResult r;
  const double pe[2] = {price_eu, price_rest};
  r.export_price = destination.empty() ? 1.0 : destination.unit_value(pe);
  const double pt[2] = {domestic_price, r.export_price};
  r.output_price = top.unit_value(pt);
  if (!(output > 0.0)) return r;
  r.domestic = top.demand(0, output, pt);
  const double exports = top.demand(1, output, pt);
  if (exports > 0.0) {
    r.exports_eu = destination.demand(0, exports, pe);
    r.exports_rest = destination.demand(1, exports, pe);
  }
  return r;
}

ArmingtonResult armington_compose(double domestic_price, double import_price, const CesNest& nest,
                                  double demand) {
  const double p[2] = {domestic_price, import_price};
  ArmingtonResult r;
  r.composite_price = nest.unit_value(p);
  r.domestic = nest.demand(0, demand, p);
  r.imports = nest.demand(1, demand, p);
  return r;
}

double wage_curve(double unemployment, double real_wage0, double unemployment0, double elasticity) {
  if (!(unemployment > 0.0 && unemployment < 1.0)) {
    throw Error(ErrorCode::DomainError, "unemployment rate must lie in (0,1)");
  }
  if (!(unemployment0 > 0.0 && unemployment0 < 1.0)) {
    throw Error(ErrorCode::DomainError, "reference unemployment rate must lie in (0,1)");
  }
  return real_wage0 * std::pow(unemployment / unemployment0, elasticity);
}

HouseholdResult household_block(double income, const HouseholdBudget& budget,
                                std::span<const double> prices) {
  if (prices.size() != budget.budget_shares.size()) {
    throw Error(ErrorCode::DimensionMismatch, "household budget shares vs prices");
  }
  HouseholdResult r;
  r.income = income;
  r.direct_tax = budget.direct_tax_rate * income;
  r.savings = budget.savings_rate * income;
  r.transfers_out = budget.transfer_out_rate * income;
  r.disposable = income - r.direct_tax - r.savings - r.transfers_out;
  if (r.disposable < 0.0) {
    throw Error(ErrorCode::NegativeDisposableIncome, "household disposable income is negative");
  }
  r.demand.assign(prices.size(), 0.0);
  for (std::size_t c = 0; c < prices.size(); ++c) {
    if (budget.budget_shares[c] == 0.0) continue;
    if (!(prices[c] > 0.0)) throw Error(ErrorCode::NonPositivePrice, "consumer price is not positive");
    r.demand[c] = budget.budget_shares[c] * r.disposable / prices[c];
  }
  return r;
}

}  // namespace deforcge
