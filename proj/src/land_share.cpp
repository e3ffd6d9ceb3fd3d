#include "deforcge/land_share.hpp"

#include <spdlog/spdlog.h>

#include <sstream>
#include <tuple>

#include "deforcge/csv.hpp"
#include "deforcge/error.hpp"

namespace deforcge {

double NonCompliantShareTable::at(const std::string& key) const {
  auto it = share.find(key);
  if (it == share.end()) throw Error(ErrorCode::MissingLinkageTarget, "no share for '" + key + "'");
  return it->second;
}

NonCompliantShareTable read_share_table(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto src = path.string();
  const auto ca = csv::column(table, "account", src);
  const auto cs = csv::column(table, "share", src);
  NonCompliantShareTable out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto ctx = src + ":" + std::to_string(table.line_numbers[i]);
    const double s = csv::parse_double(row[cs], ctx);
    if (!(s >= 0.0 && s <= 1.0)) {
      throw Error(ErrorCode::ShareOutOfRange, ctx + ": share " + row[cs] + " outside [0,1]");
    }
    if (!out.share.emplace(row[ca], s).second) {
      throw Error(ErrorCode::MalformedRecord, ctx + ": duplicate account '" + row[ca] + "'");
    }
  }
  return out;
}

void write_share_table(const NonCompliantShareTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "account,share\n";
  for (const auto& [k, v] : table.share) out << k << ',' << csv::format_double(v) << '\n';
  csv::write_text_atomic(path, out.str());
}

RawMaterialMap read_linkage(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto src = path.string();
  const auto cd = csv::column(table, "derived_product", src);
  const auto cr = csv::column(table, "raw_material", src);
  RawMaterialMap out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (!out.emplace(row[cd], row[cr]).second) {
      throw Error(ErrorCode::MalformedRecord, src + ":" + std::to_string(table.line_numbers[i]) +
                                                  ": '" + row[cd] + "' mapped twice");
    }
  }
  return out;
}

std::string resolve_root(const std::string& name, const RawMaterialMap& linkage) {
  std::set<std::string> seen{name};
  std::string current = name;
  for (auto it = linkage.find(current); it != linkage.end(); it = linkage.find(current)) {
    current = it->second;
    if (!seen.insert(current).second) {
      throw Error(ErrorCode::LinkageCycle, "linkage cycle through '" + current + "'");
    }
  }
  return current;
}

ActivityShares activity_share(const TransitionTable& transitions, const LandUseTable& landuse,
                              const std::set<int>& cutoff_years) {
  std::map<ActivityRegion, double> used;
  for (const auto& e : landuse.entries) {
    if (e.hectares < 0.0) {
      throw Error(ErrorCode::NegativeHectares,
                  "land use " + e.activity + "/" + e.region + " is negative");
    }
    if (!used.emplace(ActivityRegion{e.activity, e.region}, e.hectares).second) {
      throw Error(ErrorCode::MalformedRecord, "duplicate land use " + e.activity + "/" + e.region);
    }
  }

  std::map<ActivityRegion, double> converted;
  std::set<std::tuple<std::string, std::string, int>> keys;
  for (const auto& e : transitions.entries) {
    if (e.hectares < 0.0) {
      throw Error(ErrorCode::NegativeHectares, "transition " + e.activity + "/" + e.region + "/" +
                                                   std::to_string(e.year) + " is negative");
    }
    if (!keys.emplace(e.activity, e.region, e.year).second) {
      throw Error(ErrorCode::MalformedRecord, "duplicate transition " + e.activity + "/" +
                                                  e.region + "/" + std::to_string(e.year));
    }
    const ActivityRegion key{e.activity, e.region};
    auto it = used.find(key);
    if (it == used.end() || it->second <= 0.0) {
      throw Error(ErrorCode::MissingLandUse, "no land in use for " + e.activity + "/" + e.region);
    }
    if (cutoff_years.count(e.year)) converted[key] += e.hectares;
  }

  ActivityShares out;
  for (const auto& [key, hectares] : used) {
    auto it = converted.find(key);
    const double d = it == converted.end() ? 0.0 : it->second;
    if (hectares <= 0.0) {
      if (d > 0.0) throw Error(ErrorCode::MissingLandUse, "zero land in use for " + key.first);
      out.share[key] = 0.0;
      continue;
    }
    double s = d / hectares;
    if (s > 1.0) {
      std::ostringstream msg;
      msg << key.first << "/" << key.second << ": converted " << d << " ha exceeds " << hectares
          << " ha in use; share clamped to 1";
      spdlog::warn("{}", msg.str());
      out.warnings.push_back(msg.str());
      s = 1.0;
    }
    out.share[key] = s;
  }
  return out;
}

NonCompliantShareTable product_shares(const ActivityShares& shares, const CensusAreaTable& census,
                                      const std::map<std::string, std::string>& crop_to_activity) {
  std::map<std::string, std::pair<double, double>> acc;  // crop -> (weighted, area)
  for (const auto& e : census.entries) {
    if (e.area < 0.0) throw Error(ErrorCode::NegativeHectares, "census area for " + e.crop);
    auto m = crop_to_activity.find(e.crop);
    if (m == crop_to_activity.end()) {
      throw Error(ErrorCode::UnmappedCrop, "crop '" + e.crop + "' has no activity");
    }
    auto& [weighted, area] = acc[e.crop];
    if (e.area == 0.0) continue;
    auto s = shares.share.find({m->second, e.region});
    if (s == shares.share.end()) {
      throw Error(ErrorCode::MissingLandUse,
                  "no share for " + m->second + " in region " + e.region);
    }
    weighted += e.area * s->second;
    area += e.area;
  }
  NonCompliantShareTable out;
  for (const auto& [crop, wa] : acc) {
    if (wa.second <= 0.0) throw Error(ErrorCode::ZeroTotalArea, "crop '" + crop + "' has no area");
    out.share[crop] = wa.first / wa.second;
  }
  return out;
}

NonCompliantShareTable activity_national_shares(const ActivityShares& shares,
                                                const LandUseTable& landuse) {
  std::map<std::string, std::pair<double, double>> acc;
  for (const auto& e : landuse.entries) {
    auto s = shares.share.find({e.activity, e.region});
    if (s == shares.share.end()) continue;
    acc[e.activity].first += e.hectares * s->second;
    acc[e.activity].second += e.hectares;
  }
  NonCompliantShareTable out;
  for (const auto& [activity, wa] : acc) {
    if (wa.second <= 0.0) {
      throw Error(ErrorCode::ZeroTotalArea, "activity '" + activity + "' has no land in use");
    }
    out.share[activity] = wa.first / wa.second;
  }
  return out;
}

NonCompliantShareTable propagate_indirect(const NonCompliantShareTable& shares,
                                          const RawMaterialMap& linkage) {
  NonCompliantShareTable out = shares;
  for (const auto& [derived, raw] : linkage) {
    const auto root = resolve_root(derived, linkage);
    auto it = shares.share.find(root);
    if (it == shares.share.end()) {
      throw Error(ErrorCode::MissingLinkageTarget,
                  "'" + derived + "' resolves to '" + root + "' which has no share");
    }
    out.share[derived] = it->second;
  }
  return out;
}

TransitionTable read_transitions(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto src = path.string();
  const auto ca = csv::column(t, "activity", src), cr = csv::column(t, "region", src),
             cy = csv::column(t, "year", src), ch = csv::column(t, "hectares", src);
  TransitionTable out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto ctx = src + ":" + std::to_string(t.line_numbers[i]);
    out.entries.push_back({t.rows[i][ca], t.rows[i][cr], csv::parse_int(t.rows[i][cy], ctx),
                           csv::parse_double(t.rows[i][ch], ctx)});
  }
  return out;
}

LandUseTable read_landuse(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto src = path.string();
  const auto ca = csv::column(t, "activity", src), cr = csv::column(t, "region", src),
             ch = csv::column(t, "hectares", src);
  LandUseTable out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto ctx = src + ":" + std::to_string(t.line_numbers[i]);
    out.entries.push_back({t.rows[i][ca], t.rows[i][cr], csv::parse_double(t.rows[i][ch], ctx)});
  }
  return out;
}

CensusAreaTable read_census(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto src = path.string();
  const auto cc = csv::column(t, "crop", src), cr = csv::column(t, "region", src),
             ca = csv::column(t, "area", src);
  CensusAreaTable out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto ctx = src + ":" + std::to_string(t.line_numbers[i]);
    out.entries.push_back({t.rows[i][cc], t.rows[i][cr], csv::parse_double(t.rows[i][ca], ctx)});
  }
  return out;
}

std::map<std::string, std::string> read_crop_map(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  const auto src = path.string();
  const auto cc = csv::column(t, "crop", src), ca = csv::column(t, "activity", src);
  std::map<std::string, std::string> out;
  for (const auto& row : t.rows) out[row[cc]] = row[ca];
  return out;
}

}  // namespace deforcge
