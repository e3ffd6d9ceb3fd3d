#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deforcge/land_share.hpp"

namespace deforcge {

enum class AccountKind {
  Activity,
  Commodity,
  Factor,
  Household,
  Government,
  TaxInstrument,
  SavingsInvestment,
  RestOfWorld,
};

enum class Compliance { Compliant, NonCompliant, NotApplicable };
enum class Partner { EU, Rest };

std::string_view to_string(AccountKind kind);
std::string_view to_string(Compliance compliance);
std::string_view to_string(Partner partner);
AccountKind parse_account_kind(std::string_view text);
Compliance parse_compliance(std::string_view text);
std::optional<Partner> parse_partner(std::string_view text);

struct AccountId {
  AccountKind kind = AccountKind::Activity;
  std::string name;
  Compliance compliance = Compliance::NotApplicable;
  std::optional<Partner> partner;  // RestOfWorld accounts only

  bool operator==(const AccountId&) const = default;
};

// Suffixes appended to a split account's name.
inline constexpr std::string_view kCompliantSuffix = "_c";
inline constexpr std::string_view kNonCompliantSuffix = "_nc";

// Name of the account before compliance splitting ("a_crop_nc" -> "a_crop").
std::string base_name(const AccountId& account);

// Square flow ledger: flow(row, col) is income of `row` paid by `col`.
class SocialAccountingMatrix {
 public:
  SocialAccountingMatrix() = default;
  explicit SocialAccountingMatrix(std::vector<AccountId> accounts, int base_year = 0);

  std::size_t size() const { return accounts_.size(); }
  int base_year() const { return base_year_; }
  const std::vector<AccountId>& accounts() const { return accounts_; }
  const AccountId& account(std::size_t i) const { return accounts_.at(i); }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws MalformedRecord for an unknown name.
  std::size_t index(std::string_view name) const;
  std::vector<std::size_t> of_kind(AccountKind kind) const;

  double flow(std::size_t row, std::size_t col) const { return flows_[row * size() + col]; }
  double& flow(std::size_t row, std::size_t col) { return flows_[row * size() + col]; }
  double flow(std::string_view row, std::string_view col) const {
    return flow(index(row), index(col));
  }

  double row_sum(std::size_t i) const;
  double col_sum(std::size_t i) const;

 private:
  std::vector<AccountId> accounts_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> flows_;
  int base_year_ = 0;
};

struct BalanceReport {
  std::vector<double> imbalance;           // row_sum - col_sum
  std::vector<double> relative_imbalance;  // |imbalance| / max(1, row_sum)
  double max_relative_imbalance = 0.0;
  double tolerance = 0.0;
  bool balanced = true;
};

SocialAccountingMatrix read_sam(std::string_view text, std::string_view source = "<memory>");
SocialAccountingMatrix load_sam(const std::filesystem::path& path);
std::string write_sam(const SocialAccountingMatrix& sam);
void save_sam(const SocialAccountingMatrix& sam, const std::filesystem::path& path);

BalanceReport check_balance(const SocialAccountingMatrix& sam, double tol);

// Taxonomy lint: partner tags, land-factor compliance tags, name rules.
// Returns human-readable findings; empty when the SAM is clean.
std::vector<std::string> lint_taxonomy(const SocialAccountingMatrix& sam);

struct RasResult {
  SocialAccountingMatrix sam;
  int iterations = 0;
};

// Biproportional scaling toward targets equal to the average of each
// account's current row and column totals. Zero cells stay zero.
RasResult ras_balance(const SocialAccountingMatrix& sam, double tol, int max_iter);

// Generic RAS on a dense row-major n x m matrix with explicit targets.
struct RasMatrixResult {
  std::vector<double> values;
  int iterations = 0;
};
RasMatrixResult ras_scale(std::vector<double> values, std::size_t rows, std::size_t cols,
                          const std::vector<double>& row_targets,
                          const std::vector<double>& col_targets, double tol, int max_iter);

// Splits every account named in `shares` (directly or through `linkage`)
// into compliant and non-compliant twins.
SocialAccountingMatrix disaggregate_accounts(const SocialAccountingMatrix& sam,
                                             const NonCompliantShareTable& shares,
                                             const RawMaterialMap& linkage);

}  // namespace deforcge
