#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace deforcge {

// Share of production (or land) that is not compliant, keyed by account or
// product name. Values lie in [0, 1].
struct NonCompliantShareTable {
  std::map<std::string, double> share;

  bool contains(const std::string& key) const { return share.count(key) != 0; }
  double at(const std::string& key) const;
};

// derived product -> driving raw material
using RawMaterialMap = std::map<std::string, std::string>;

NonCompliantShareTable read_share_table(const std::filesystem::path& path);
void write_share_table(const NonCompliantShareTable& table, const std::filesystem::path& path);
RawMaterialMap read_linkage(const std::filesystem::path& path);

// Follows `name` through the linkage until it reaches a key that has no
// further mapping. Throws LinkageCycle if a chain revisits a node.
std::string resolve_root(const std::string& name, const RawMaterialMap& linkage);

struct TransitionEntry {
  std::string activity;  // crop | livestock | forestry
  std::string region;
  int year = 0;
  double hectares = 0.0;
};

struct TransitionTable {
  std::vector<TransitionEntry> entries;
};

struct LandUseEntry {
  std::string activity;
  std::string region;
  double hectares = 0.0;
};

struct LandUseTable {
  std::vector<LandUseEntry> entries;
};

struct CensusEntry {
  std::string crop;
  std::string region;
  double area = 0.0;
};

struct CensusAreaTable {
  std::vector<CensusEntry> entries;
};

using ActivityRegion = std::pair<std::string, std::string>;

struct ActivityShares {
  std::map<ActivityRegion, double> share;
  std::vector<std::string> warnings;  // one per clamped (activity, region)
};

inline const std::set<int> kDefaultCutoffYears{2021, 2022};

// Converted hectares over the cutoff years divided by land in use, per
// (activity, region). Shares above one are clamped with a warning.
ActivityShares activity_share(const TransitionTable& transitions, const LandUseTable& landuse,
                              const std::set<int>& cutoff_years = kDefaultCutoffYears);

// Area-weighted national share for each crop; a crop in region r inherits
// the regional share of the activity it maps to.
NonCompliantShareTable product_shares(const ActivityShares& shares, const CensusAreaTable& census,
                                      const std::map<std::string, std::string>& crop_to_activity);

// National share per activity, weighting regions by land in use. Used for
// activities whose products are not broken down by a census.
NonCompliantShareTable activity_national_shares(const ActivityShares& shares,
                                                const LandUseTable& landuse);

// Derived products take the share of their (transitively resolved) raw material.
NonCompliantShareTable propagate_indirect(const NonCompliantShareTable& shares,
                                          const RawMaterialMap& linkage);

TransitionTable read_transitions(const std::filesystem::path& path);
LandUseTable read_landuse(const std::filesystem::path& path);
CensusAreaTable read_census(const std::filesystem::path& path);
std::map<std::string, std::string> read_crop_map(const std::filesystem::path& path);

}  // namespace deforcge
