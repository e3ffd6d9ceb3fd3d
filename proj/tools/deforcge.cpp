#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "deforcge/csv.hpp"
#include "deforcge/error.hpp"
#include "deforcge/inputs.hpp"
#include "deforcge/land_share.hpp"
#include "deforcge/report.hpp"
#include "deforcge/sam.hpp"
#include "deforcge/scenario.hpp"

namespace fs = std::filesystem;
using namespace deforcge;
using nlohmann::ordered_json;

namespace {

struct Options {
  std::string sam, scenario, out, shares, linkage, input_dir, window;
  int jobs = 0;
  double tolerance = 0.0;
  bool no_timestamp = false;
};

struct Window {
  int first = 0, last = 0;
};

std::optional<Window> parse_window(const std::string& text) {
  if (text.empty()) return std::nullopt;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::UsageError, "--window expects START:END");
  try {
    return Window{std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw Error(ErrorCode::UsageError, "--window expects START:END, got '" + text + "'");
  }
}

std::string stamp(bool enabled) {
  if (!enabled) return {};
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "# generated %Y-%m-%dT%H:%M:%SZ\n", &tm);
  return buf;
}

void write_out(const fs::path& path, const std::string& body, const Options& opt) {
  csv::write_text_atomic(path, stamp(!opt.no_timestamp) + body);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

ScenarioFile load_scenario(const Options& opt) {
  if (opt.scenario.empty()) throw Error(ErrorCode::UsageError, "--scenario is required");
  auto s = read_scenario(opt.scenario);
  if (!opt.sam.empty()) s.sam = opt.sam;
  if (opt.tolerance > 0.0) {
    s.baseline.solver.tolerance = opt.tolerance;
    s.counterfactual.solver.tolerance = opt.tolerance;
  }
  if (const auto w = parse_window(opt.window)) {
    s.report_first = w->first;
    s.report_last = w->last;
  }
  return s;
}

// Context with the land supply elasticity either taken from the scenario or
// calibrated to the target deforestation rate.
ModelContext prepare_context(const ScenarioFile& s, ordered_json& manifest) {
  auto ctx = load_context(s);
  double mu = 0.0;
  if (s.land_supply_elasticity) {
    mu = *s.land_supply_elasticity;
    manifest["land_supply_elasticity"] = {{"value", mu}, {"source", "scenario"}};
  } else {
    const auto r = calibrate_land_elasticity(ctx, s.baseline, s.targets);
    mu = r.mu;
    manifest["land_supply_elasticity"] = {{"value", mu},
                                          {"source", "calibrated"},
                                          {"target_rate", s.targets.deforestation_rate},
                                          {"achieved_rate", r.achieved_rate}};
  }
  return with_land_supply_elasticity(std::move(ctx), mu);
}

std::optional<CoverageSummary> try_coverage(const fs::path& sam_path) {
  try {
    return coverage_summary(load_sam(sam_path));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotDisaggregated) throw;
    spdlog::warn("coverage table skipped: {}", e.what());
    return std::nullopt;
  }
}

void log_checks(const std::vector<Check>& checks) {
  for (const auto& c : checks) {
    if (c.pass) {
      spdlog::info("check {}: pass ({})", c.name, c.detail);
    } else if (c.diverges) {
      spdlog::warn("check {}: diverges ({})", c.name, c.detail);
    } else {
      spdlog::warn("check {}: FAIL ({})", c.name, c.detail);
    }
  }
}

// Everything `run` writes that depends only on trajectories and the SAM, so
// `report` can regenerate it byte for byte.
void write_pair_reports(const fs::path& out, const TrajectoryRecord& base, const TrajectoryRecord& scen,
                        int first, int last, const std::optional<CoverageSummary>& coverage, const Options& opt) {
  const auto rep = deviation_report(base, scen, first, last);
  write_out(out / "deviations_macro.csv", macro_csv(rep), opt);
  write_out(out / "deviations_commodity.csv", commodity_csv(rep), opt);
  write_out(out / "emissions_decomposition.csv", emissions_csv(emissions_deviation(base, scen, first, last)), opt);
  if (coverage) write_out(out / "coverage.csv", coverage_csv(*coverage), opt);
  const auto checks = sign_suite(rep);
  write_out(out / "checks.csv", checks_csv(checks), opt);
  log_checks(checks);
}

void write_sensitivity_reports(const fs::path& out, const SensitivityRecords& recs, int first, int last,
                               const Options& opt) {
  const auto s = sensitivity_reports(recs, first, last, SensitivityReference::CentralBaseline);
  const auto own = sensitivity_reports(recs, first, last, SensitivityReference::OwnBaseline);
  write_out(out / "deviations_sensitivity.csv", sensitivity_csv(s), opt);
  write_out(out / "deviations_sensitivity_own_baseline.csv", sensitivity_csv(own), opt);
  const auto checks = sensitivity_checks(s);
  write_out(out / "sensitivity_checks.csv", checks_csv(checks), opt);
  log_checks(checks);
}

ordered_json input_manifest(const ScenarioFile& s) {
  return {{"scenario", fs::absolute(s.source).lexically_normal().string()},
          {"sam", fs::absolute(s.sam).lexically_normal().string()},
          {"model", fs::absolute(s.model).lexically_normal().string()},
          {"coefficients", fs::absolute(s.coefficients).lexically_normal().string()},
          {"projections", fs::absolute(s.projections).lexically_normal().string()}};
}

void log_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) spdlog::warn("{}", w);
}

int cmd_shares(const Options& opt) {
  const fs::path dir = opt.input_dir;
  const auto transitions = read_transitions(dir / "transitions.csv");
  const auto landuse = read_landuse(dir / "landuse.csv");
  const auto census = read_census(dir / "census.csv");
  const auto crop_map = read_crop_map(dir / "crop_map.csv");
  const auto act = activity_share(transitions, landuse);
  log_warnings(act.warnings);
  auto table = product_shares(act, census, crop_map);
  for (const auto& [k, v] : activity_national_shares(act, landuse).share) table.share[k] = v;
  // Optional renaming of source keys to SAM account names.
  if (fs::exists(dir / "accounts.csv")) {
    const auto t = csv::read(dir / "accounts.csv");
    const auto src = (dir / "accounts.csv").string();
    const auto ca = csv::column(t, "account", src), cs = csv::column(t, "source", src);
    NonCompliantShareTable named;
    for (const auto& row : t.rows) {
      if (!table.contains(row[cs])) {
        throw Error(ErrorCode::MissingLinkage, src + ": no share computed for source '" + row[cs] + "'");
      }
      named.share[row[ca]] = table.at(row[cs]);
    }
    table = named;
  }
  if (opt.out.empty()) {
    for (const auto& [k, v] : table.share) std::cout << k << ',' << csv::format_double(v) << '\n';
  } else {
    write_share_table(table, opt.out);
  }
  return 0;
}

int cmd_sam_split(const Options& opt) {
  if (opt.sam.empty() || opt.shares.empty() || opt.out.empty()) {
    throw Error(ErrorCode::UsageError, "sam split needs --sam, --shares and --out");
  }
  const auto sam = load_sam(opt.sam);
  const auto shares = read_share_table(opt.shares);
  const RawMaterialMap linkage = opt.linkage.empty() ? RawMaterialMap{} : read_linkage(opt.linkage);
  const auto split = disaggregate_accounts(sam, shares, linkage);
  save_sam(split, opt.out);
  spdlog::info("split SAM has {} accounts", split.size());
  return 0;
}

int cmd_validate(const Options& opt) {
  if (opt.sam.empty()) throw Error(ErrorCode::UsageError, "validate needs --sam");
  const auto sam = load_sam(opt.sam);
  const double tol = opt.tolerance > 0.0 ? opt.tolerance : 1e-7;
  const auto rep = check_balance(sam, tol);
  const auto lint = lint_taxonomy(sam);
  for (const auto& l : lint) std::cout << "lint: " << l << '\n';
  if (!rep.balanced) {
    for (std::size_t i = 0; i < sam.size(); ++i) {
      if (rep.relative_imbalance[i] > tol) {
        std::cout << "unbalanced: " << sam.account(i).name << " row-col " << csv::format_double(rep.imbalance[i])
                  << '\n';
      }
    }
    throw Error(ErrorCode::UnbalancedSAM, "max relative imbalance " + csv::format_double(rep.max_relative_imbalance) +
                                              " exceeds " + csv::format_double(tol));
  }
  std::cout << "balanced: " << sam.size() << " accounts, max relative imbalance "
            << csv::format_double(rep.max_relative_imbalance) << '\n';
  return lint.empty() ? 0 : 1;
}

int cmd_calibrate(const Options& opt) {
  const auto s = load_scenario(opt);
  ordered_json bundle;
  bundle["inputs"] = input_manifest(s);
  const auto ctx = prepare_context(s, bundle);
  const auto tfp = calibrate_tfp_path(ctx, s.baseline);
  bundle["tfp_path"] = tfp;
  const auto& p = ctx.params;
  bundle["base_year"] = p.base_year;
  bundle["foreign_savings"] = p.foreign_savings0;
  for (const auto& f : p.factors) {
    bundle["factors"][f.name] = {{"type", std::string(to_string(f.type))},
                                 {"price", f.price0},
                                 {"employed", f.employed0},
                                 {"supply", f.supply0},
                                 {"unemployment", f.unemployment0},
                                 {"wage_curve_elasticity", f.wage_curve_elasticity},
                                 {"land_supply_elasticity", f.land_supply_elasticity}};
  }
  for (const auto& a : p.activities) {
    bundle["activities"][a.name] = {{"output", a.output0},
                                    {"output_tax", a.output_tax},
                                    {"value_added_share", a.iva},
                                    {"value_added_sigma", a.value_added.sigma()}};
  }
  for (const auto& c : p.commodities) {
    bundle["commodities"][c.name] = {{"sales_tax", c.sales_tax},
                                     {"tariff", c.tariff},
                                     {"armington_sigma", c.armington.sigma()},
                                     {"cet_sigma", -c.cet_top.sigma()},
                                     {"destination_sigma", -c.cet_destination.sigma()}};
  }
  const auto text = bundle.dump(2) + "\n";
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    ensure_dir(opt.out);
    csv::write_text_atomic(fs::path(opt.out) / "parameters.json", text);
  }
  return 0;
}

EudrSettings eudr_settings(const ScenarioFile& s) { return s.eudr ? *s.eudr : EudrSettings{}; }

int cmd_run(const Options& opt) {
  if (opt.out.empty()) throw Error(ErrorCode::UsageError, "run needs --out");
  const auto s = load_scenario(opt);
  const fs::path out = opt.out;
  ensure_dir(out);
  ordered_json manifest;
  manifest["kind"] = "run";
  manifest["inputs"] = input_manifest(s);
  const auto ctx = prepare_context(s, manifest);

  const auto pair = run_pair(ctx, s.baseline, s.counterfactual, eudr_settings(s), nullptr);
  log_warnings(pair.baseline.warnings);
  log_warnings(pair.scenario.warnings);
  save_trajectory(pair.baseline.record, out / "trajectories" / "baseline");
  save_trajectory(pair.scenario.record, out / "trajectories" / "scenario");
  manifest["window"] = {s.report_first, s.report_last};
  manifest["trajectories"] = {{"baseline", "trajectories/baseline"}, {"scenario", "trajectories/scenario"}};
  manifest["tfp_path"] = pair.baseline.tfp;
  csv::write_text_atomic(out / "run.json", manifest.dump(2) + "\n");
  write_pair_reports(out, pair.baseline.record, pair.scenario.record, s.report_first, s.report_last,
                     try_coverage(s.sam), opt);
  spdlog::info("run '{}' written to {}", s.counterfactual.name, out.string());
  return 0;
}

int cmd_sensitivity(const Options& opt) {
  if (opt.out.empty()) throw Error(ErrorCode::UsageError, "sensitivity needs --out");
  const auto s = load_scenario(opt);
  const fs::path out = opt.out;
  ensure_dir(out);
  ordered_json manifest;
  manifest["kind"] = "sensitivity";
  manifest["inputs"] = input_manifest(s);
  const auto ctx = prepare_context(s, manifest);
  const auto t0 = std::chrono::steady_clock::now();
  const auto result =
      sensitivity_suite(ctx, s.baseline, s.counterfactual, eudr_settings(s), sensitivity_cases(), opt.jobs);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  spdlog::info("sensitivity suite finished in {:.1f} s", secs);

  save_trajectory(result.central.baseline.record, out / "trajectories" / "central" / "baseline");
  save_trajectory(result.central.scenario.record, out / "trajectories" / "central" / "scenario");
  manifest["window"] = {s.report_first, s.report_last};
  ordered_json cases = ordered_json::array();
  for (const auto& c : result.cases) {
    ordered_json entry = {{"name", c.name}, {"group", c.group}, {"factor", c.factor}, {"ok", c.ok}};
    if (c.ok) {
      save_trajectory(c.baseline.record, out / "trajectories" / c.name / "baseline");
      save_trajectory(c.scenario.record, out / "trajectories" / c.name / "scenario");
    } else {
      entry["error"] = c.error;
    }
    cases.push_back(entry);
  }
  manifest["cases"] = cases;
  csv::write_text_atomic(out / "run.json", manifest.dump(2) + "\n");
  const auto recs = sensitivity_records(result);
  write_pair_reports(out, recs.central_baseline, recs.central_scenario, s.report_first, s.report_last,
                     try_coverage(s.sam), opt);
  write_sensitivity_reports(out, recs, s.report_first, s.report_last, opt);
  return 0;
}

int cmd_report(const Options& opt) {
  if (opt.out.empty()) throw Error(ErrorCode::UsageError, "report needs --out (a run directory)");
  const fs::path out = opt.out;
  ordered_json manifest;
  try {
    manifest = ordered_json::parse(csv::read_text(out / "run.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, (out / "run.json").string() + ": " + e.what());
  }
  int first = manifest.at("window")[0].get<int>();
  int last = manifest.at("window")[1].get<int>();
  if (const auto w = parse_window(opt.window)) {
    first = w->first;
    last = w->last;
  }
  const fs::path sam = opt.sam.empty() ? fs::path(manifest.at("inputs").at("sam").get<std::string>()) : fs::path(opt.sam);
  const auto coverage = try_coverage(sam);
  const auto kind = manifest.at("kind").get<std::string>();
  if (kind == "run") {
    write_pair_reports(out, load_trajectory(out / "trajectories" / "baseline"),
                       load_trajectory(out / "trajectories" / "scenario"), first, last, coverage, opt);
    return 0;
  }
  SensitivityRecords recs;
  recs.central_baseline = load_trajectory(out / "trajectories" / "central" / "baseline");
  recs.central_scenario = load_trajectory(out / "trajectories" / "central" / "scenario");
  for (const auto& c : manifest.at("cases")) {
    const auto name = c.at("name").get<std::string>();
    recs.names.push_back(name);
    if (c.at("ok").get<bool>()) {
      recs.cases.emplace_back(std::make_pair(load_trajectory(out / "trajectories" / name / "baseline"),
                                             load_trajectory(out / "trajectories" / name / "scenario")));
    } else {
      recs.cases.emplace_back(std::nullopt);
    }
  }
  write_pair_reports(out, recs.central_baseline, recs.central_scenario, first, last, coverage, opt);
  write_sensitivity_reports(out, recs, first, last, opt);
  return 0;
}

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("deforcge");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("DEFORCGE_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

void error_record(const std::string& command, const std::string& code, const std::string& message) {
  ordered_json rec = {{"error", code}, {"command", command}, {"message", message}};
  std::cerr << rec.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Recursive-dynamic CGE model of deforestation-free trade rules"};
  app.require_subcommand(1);
  Options opt;

  auto* shares = app.add_subcommand("shares", "Compute non-compliant shares from land-use data");
  shares->add_option("--input-dir", opt.input_dir, "Directory with transitions/landuse/census/crop_map CSVs")
      ->required();
  shares->add_option("--out", opt.out, "Output share table (stdout when omitted)");

  auto* sam = app.add_subcommand("sam", "SAM utilities");
  sam->require_subcommand(1);
  auto* split = sam->add_subcommand("split", "Split accounts into compliant and non-compliant twins");
  split->add_option("--sam", opt.sam, "Aggregate SAM")->required();
  split->add_option("--shares", opt.shares, "Non-compliant share table")->required();
  split->add_option("--linkage", opt.linkage, "Derived product to raw material map");
  split->add_option("--out", opt.out, "Output SAM")->required();

  auto* validate = app.add_subcommand("validate", "Check SAM balance and account taxonomy");
  validate->add_option("--sam", opt.sam, "SAM to check")->required();
  validate->add_option("--tolerance", opt.tolerance, "Relative balance tolerance");

  auto* calibrate = app.add_subcommand("calibrate", "Calibrate and write a parameter bundle");
  auto* run = app.add_subcommand("run", "Run baseline and scenario trajectories");
  auto* sens = app.add_subcommand("sensitivity", "Run the elasticity sensitivity suite");
  for (auto* sub : {calibrate, run, sens}) {
    sub->add_option("--scenario", opt.scenario, "Scenario file")->required();
    sub->add_option("--sam", opt.sam, "Override the scenario's SAM");
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--tolerance", opt.tolerance, "Solver tolerance");
    sub->add_option("--window", opt.window, "Reporting window START:END");
    sub->add_flag("--no-timestamp", opt.no_timestamp, "Omit the timestamp header in CSV outputs");
  }
  sens->add_option("--jobs", opt.jobs, "Scenarios run in parallel (0: all cores)");

  auto* report = app.add_subcommand("report", "Re-render reports from stored trajectories");
  report->add_option("--out", opt.out, "Run directory")->required();
  report->add_option("--sam", opt.sam, "SAM for the coverage table");
  report->add_option("--window", opt.window, "Reporting window START:END");
  report->add_flag("--no-timestamp", opt.no_timestamp, "Omit the timestamp header in CSV outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    error_record("", "UsageError", e.what());
    return 2;
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    if (shares->parsed()) return cmd_shares(opt);
    if (split->parsed()) {
      command = "sam split";
      return cmd_sam_split(opt);
    }
    if (validate->parsed()) return cmd_validate(opt);
    if (calibrate->parsed()) return cmd_calibrate(opt);
    if (run->parsed()) return cmd_run(opt);
    if (sens->parsed()) return cmd_sensitivity(opt);
    if (report->parsed()) return cmd_report(opt);
  } catch (const Error& e) {
    error_record(command, std::string(to_string(e.code())), e.what());
    return e.code() == ErrorCode::UsageError ? 2 : 1;
  } catch (const std::exception& e) {
    error_record(command, "InternalError", e.what());
    return 1;
  }
  return 2;
}
