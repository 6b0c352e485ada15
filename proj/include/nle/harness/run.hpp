#pragma once

// run_experiment: dispatch the configured suites, write report.csv,
// mean_oscillation.csv (when run) and summary.json.
// Exit codes: 0 all gates hold, 1 a gate failed, 2 config error, 3 module error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "config.hpp"
#include "suites.hpp"

namespace nle {

enum ExitCode { kExitPass = 0, kExitGateFail = 1, kExitParseError = 2, kExitModuleError = 3 };

struct RunOutcome {
  int exit_code = kExitPass;
  EstimateReport report;
  std::vector<MeanOscRow> mean_osc;
  json summary;
};

inline RunOutcome run_suites(const ExperimentConfig& c) {
  RunOutcome out;
  json per_suite = json::object();
  std::vector<MeanOscRow>& mo_rows = out.mean_osc;
  std::optional<KernelSpec> spec;
  std::optional<SymbolTable> table;
  std::optional<TorusGrid> grid;

  auto need_table = [&]() -> const SymbolTable& {
    if (!spec) spec = build_kernel(c);
    if (!grid) grid = TorusGrid(c.d, c.grid.n, c.grid.R);
    if (!table) table = symbol_table(*spec, *grid);
    return *table;
  };
  auto rhs = [&](const std::string& fam, std::size_t k) {
    return NamedField{fam, make_rhs(*grid, fam, c.rhs, c.seed + k)};
  };
  auto all_rhs = [&]() {
    std::vector<NamedField> fs;
    for (std::size_t k = 0; k < c.rhs.families.size(); ++k) fs.push_back(rhs(c.rhs.families[k], k));
    return fs;
  };

  for (const auto& name : c.suites) {
    EstimateReport r;
    try {
      if (name == "estimate") {
        const SymbolTable& t = need_table();
        EstimateSuiteOptions o;
        o.lambdas = c.lambdas;
        o.ps = c.ps;
        r = estimate_suite(*spec, t, all_rhs(), o);
      } else if (name == "holder") {
        const SymbolTable& t = need_table();
        r = holder_suite(*spec, t, c.holder_lambdas, rhs(c.rhs.holder_family, 0));
      } else if (name == "local") {
        const SymbolTable& t = need_table();
        LocalOptions o;
        o.eps = c.local_eps;
        for (double p : c.ps) {
          o.p = p;
          r.append(local_estimate_check(*spec, t, all_rhs(), o));
        }
      } else if (name == "mean_oscillation") {
        const SymbolTable& t = need_table();
        MeanOscOptions o;
        o.lambdas = c.lambdas;
        o.kappas = c.kappas;
        r = mean_oscillation_suite(*spec, t, rhs(c.rhs.mean_osc_family, 0), o, &mo_rows);
      } else if (name == "identity") {
        if (!spec) spec = build_kernel(c);
        TorusGrid ig(c.d, c.identity_n, c.identity_R);
        auto u = ScalarField::from_function(ig, [](const Vec& x) { return std::exp(-dot(x, x)); }, Extension::Periodic);
        r = identity_suite(*spec, u);
      } else if (name == "generator") {
        if (!spec) spec = build_kernel(c);
        GeneratorOptions o;
        o.eps = c.process.eps;
        o.t = c.process.t;
        o.n_paths = c.process.n_paths;
        o.seed = c.seed;
        o.x0 = Vec{c.process.x0, 0.0, 0.0};
        o.xi = Vec{c.process.xi, 0.0, 0.0};
        r = generator_suite(*spec, o);
      } else if (name == "maximal") {
        r = maximal_suite(c.ps, c.maximal_trials, c.seed);
      }
    } catch (const std::exception& e) {
      r.partial = true;
      r.errors.push_back(name + ": " + e.what());
    }
    int failed = 0;
    for (const auto& row : r.rows) failed += row.pass ? 0 : 1;
    per_suite[name] = {{"rows", r.rows.size()}, {"failed", failed}, {"errors", r.errors}};
    out.report.append(r);
  }

  int fails = 0;
  for (const auto& row : out.report.rows) fails += row.pass ? 0 : 1;
  if (out.report.partial)
    out.exit_code = kExitModuleError;
  else if (fails > 0)
    out.exit_code = kExitGateFail;
  out.summary = {{"schema", kConfigSchema}, {"suites", per_suite},  {"rows", out.report.rows.size()},
                 {"failed", fails},        {"pass", out.exit_code == kExitPass}, {"exit_code", out.exit_code},
                 {"config", config_to_json(c)}};
  if (!mo_rows.empty()) out.summary["mean_oscillation_rows"] = mo_rows.size();
  return out;
}

inline int run_experiment(const std::string& config_path, const std::string& out_dir_override = "",
                          std::optional<std::uint64_t> seed = std::nullopt, std::ostream& log = std::cerr) {
  ExperimentConfig c;
  try {
    c = read_config(config_path);
  } catch (const ParseError& e) {
    log << "error: " << e.what() << '\n';
    return kExitParseError;
  }
  if (seed) c.seed = *seed;
  if (!out_dir_override.empty()) c.out_dir = out_dir_override;

  RunOutcome r = run_suites(c);
  std::filesystem::create_directories(c.out_dir);
  std::filesystem::path dir(c.out_dir);
  {
    std::ofstream os(dir / "report.csv");
    write_csv(os, r.report);
  }
  if (!r.mean_osc.empty()) {
    std::ofstream os(dir / "mean_oscillation.csv");
    write_mean_osc_csv(os, r.mean_osc);
  }
  {
    std::ofstream os(dir / "summary.json");
    os << r.summary.dump(2) << '\n';
  }
  for (const auto& e : r.report.errors) log << "error: " << e << '\n';
  int fails = r.summary["failed"].get<int>();
  log << r.report.rows.size() << " rows, " << fails << " failed, exit " << r.exit_code << '\n';
  return r.exit_code;
}

}  // namespace nle
