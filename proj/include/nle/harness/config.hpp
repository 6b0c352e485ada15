#pragma once

// Experiment configuration, JSON schema 1.

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "../io.hpp"

namespace nle {

inline constexpr int kConfigSchema = 1;

struct KernelSource {
  std::string source = "fractional";  // fractional | uniform | random | file
  std::string path;
  double nu = 0.5;
  double lambda = 2.0;
  double value = 1.0;  // uniform density
  std::uint64_t seed = 1;
  int n_r = 16;
  int n_theta = 0;  // 0: default for d
  bool operator==(const KernelSource&) const = default;
};

struct GridParams {
  int n = 512;
  double R = 16.0;
  bool operator==(const GridParams&) const = default;
};

struct RhsParams {
  std::vector<std::string> families{"gaussian", "dipole"};  // gaussian | dipole | bandlimited | mode
  double width = 0.5;
  double xi = 1.0;
  int modes = 12;
  std::string holder_family = "dipole";
  std::string mean_osc_family = "gaussian";
  bool operator==(const RhsParams&) const = default;
};

struct ProcessParams {
  double eps = 1e-2;
  double t = 0.05;
  std::uint64_t n_paths = 100000;
  double x0 = 0.3;  // first coordinate of the start point
  double xi = 1.0;  // test-function frequency along the first axis
  bool operator==(const ProcessParams&) const = default;
};

struct ExperimentConfig {
  int schema = kConfigSchema;
  int d = 1;
  double sigma = 0.5;
  KernelSource kernel;
  GridParams grid;
  std::vector<double> lambdas{1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<double> holder_lambdas{1e-3, 1e-2, 1e-1, 1.0, 10.0};
  std::vector<double> ps{1.5, 2.0, 3.0, 4.0};
  std::vector<double> kappas{2.0, 4.0, 8.0};
  std::vector<double> local_eps{0.5, 0.1, 0.02};
  RhsParams rhs;
  ProcessParams process;
  int identity_n = 48;
  double identity_R = 6.0;
  int maximal_trials = 20;
  std::uint64_t seed = 7;
  std::vector<std::string> suites;
  std::string out_dir = "results";
  bool operator==(const ExperimentConfig&) const = default;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(KernelSource, source, path, nu, lambda, value, seed, n_r, n_theta)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GridParams, n, R)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RhsParams, families, width, xi, modes, holder_family, mean_osc_family)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ProcessParams, eps, t, n_paths, x0, xi)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ExperimentConfig, schema, d, sigma, kernel, grid, lambdas, holder_lambdas, ps,
                                                kappas, local_eps, rhs, process, identity_n, identity_R, maximal_trials,
                                                seed, suites, out_dir)

inline const std::set<std::string>& known_suites() {
  static const std::set<std::string> s{"estimate", "identity", "holder", "local", "mean_oscillation", "generator", "maximal"};
  return s;
}

inline void validate(const ExperimentConfig& c) {
  auto bad = [](const std::string& m) { throw ParseError("config: " + m); };
  if (c.schema != kConfigSchema) bad("unsupported schema " + std::to_string(c.schema));
  if (c.d < 1 || c.d > 3) bad("d must be 1, 2 or 3");
  if (!(c.sigma > 0 && c.sigma < 2)) bad("sigma must lie in (0,2)");
  if (c.grid.n < 2 || c.grid.n % 2 || !(c.grid.R > 0)) bad("grid needs even n >= 2 and R > 0");
  for (double l : c.lambdas)
    if (!(l > 0)) bad("lambdas must be positive");
  for (double l : c.holder_lambdas)
    if (!(l > 0)) bad("holder_lambdas must be positive");
  for (double p : c.ps)
    if (!(p > 1) || std::isinf(p)) bad("ps must lie in (1, inf)");
  for (double k : c.kappas)
    if (!(k >= 2)) bad("kappas must be >= 2");
  for (double e : c.local_eps)
    if (!(e > 0 && e < 1)) bad("local_eps must lie in (0,1)");
  static const std::set<std::string> fam{"gaussian", "dipole", "bandlimited", "mode"};
  for (const auto& f : c.rhs.families)
    if (!fam.count(f)) bad("unknown rhs family " + f);
  if (!fam.count(c.rhs.holder_family) || !fam.count(c.rhs.mean_osc_family)) bad("unknown rhs family");
  if (!(c.rhs.width > 0)) bad("rhs width must be positive");
  static const std::set<std::string> src{"fractional", "uniform", "random", "file"};
  if (!src.count(c.kernel.source)) bad("unknown kernel source " + c.kernel.source);
  if (c.kernel.source == "file" && c.kernel.path.empty()) bad("kernel source 'file' needs a path");
  for (const auto& s : c.suites)
    if (!known_suites().count(s)) bad("unknown suite " + s);
  if (!(c.process.eps > 0 && c.process.t > 0 && c.process.n_paths > 0)) bad("process eps, t, n_paths must be positive");
}

inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("config: top level must be an object");
  if (!j.contains("schema")) throw ParseError("config: missing \"schema\"");
  ExperimentConfig c;
  try {
    c = j.get<ExperimentConfig>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

inline json config_to_json(const ExperimentConfig& c) { return json(c); }

inline ExperimentConfig read_config(const std::string& path) { return config_from_json(read_json_file(path)); }

inline KernelSpec build_kernel(const ExperimentConfig& c) {
  const auto& k = c.kernel;
  if (k.source == "file") {
    KernelSpec s = read_kernel(k.path);
    if (s.d() != c.d || s.sigma() != c.sigma) throw SizeMismatch("kernel file d/sigma differ from the config");
    return s;
  }
  if (k.source == "fractional") return fractional_kernel(c.d, c.sigma, k.n_theta);
  if (k.source == "uniform") return uniform_kernel(c.d, c.sigma, k.nu, k.lambda, k.value, k.n_theta);
  return make_random_kernel(c.d, c.sigma, k.nu, k.lambda, k.seed, k.n_r, k.n_theta);
}

inline ScalarField make_rhs(const TorusGrid& g, const std::string& family, const RhsParams& p, std::uint64_t seed) {
  const double w2 = p.width * p.width;
  if (family == "gaussian")
    return ScalarField::from_function(g, [&](const Vec& x) { return std::exp(-dot(x, x) / (2 * w2)); });
  if (family == "dipole")
    return ScalarField::from_function(g, [&](const Vec& x) { return -x[0] / w2 * std::exp(-dot(x, x) / (2 * w2)); });
  if (family == "mode") {
    double k = std::round(p.xi * g.R() / std::numbers::pi) * std::numbers::pi / g.R();
    return ScalarField::from_function(g, [&](const Vec& x) { return std::cos(k * x[0]); }, Extension::Periodic);
  }
  std::mt19937_64 rng(seed);
  return random_bandlimited_field(g, rng, p.modes);
}

}  // namespace nle
