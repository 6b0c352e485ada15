#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <regex>

#include "nle/nle.hpp"

using namespace nle;

namespace {

// "n=256,R=16"
TorusGrid parse_grid(const std::string& s, int d) {
  static const std::regex re(R"(\s*n\s*=\s*(\d+)\s*,\s*R\s*=\s*([0-9.eE+-]+)\s*)");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ParseError("--grid expects n=<int>,R=<float>");
  return TorusGrid(d, std::stoi(m[1]), std::stod(m[2]));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  return os;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nle: non-local elliptic operators, solver and estimate harness"};
  app.require_subcommand(1);

  auto* kcmd = app.add_subcommand("kernel", "write a kernel JSON");
  std::string ktype = "fractional", kout = "kernel.json";
  int kd = 1, knr = 16, knt = 0;
  double ksigma = 0.5, knu = 0.5, klam = 2.0, kvalue = 1.0;
  std::uint64_t kseed = 1;
  kcmd->add_option("--type", ktype, "fractional | uniform | random")->check(CLI::IsMember({"fractional", "uniform", "random"}));
  kcmd->add_option("--d", kd)->check(CLI::Range(1, 3));
  kcmd->add_option("--sigma", ksigma);
  kcmd->add_option("--nu", knu);
  kcmd->add_option("--lambda", klam);
  kcmd->add_option("--value", kvalue, "density for --type uniform");
  kcmd->add_option("--seed", kseed);
  kcmd->add_option("--n-r", knr);
  kcmd->add_option("--n-theta", knt);
  kcmd->add_option("--out", kout);

  auto* scmd = app.add_subcommand("symbol", "tabulate m(xi) on a grid");
  std::string skernel, sgrid = "n=256,R=16", sout = "symbol.csv";
  double stol = 1e-8;
  scmd->add_option("--kernel", skernel)->required();
  scmd->add_option("--grid", sgrid);
  scmd->add_option("--tol", stol);
  scmd->add_option("--out", sout);

  auto* vcmd = app.add_subcommand("solve", "solve (L - lambda) u = f");
  std::string vkernel, vrhs, vout = "u.csv";
  double vlam = 1.0, vtol = 1e-8;
  vcmd->add_option("--kernel", vkernel)->required();
  vcmd->add_option("--rhs", vrhs)->required();
  vcmd->add_option("--lambda", vlam);
  vcmd->add_option("--tol", vtol, "symbol tolerance");
  vcmd->add_option("--out", vout);

  auto* pcmd = app.add_subcommand("simulate", "compound Poisson paths");
  std::string pkernel, pout = "paths.csv";
  double peps = 1e-2, pt = 0.05;
  std::size_t npaths = 100000;
  std::uint64_t pseed = 7;
  std::vector<double> px0;
  pcmd->add_option("--kernel", pkernel)->required();
  pcmd->add_option("--eps", peps);
  pcmd->add_option("--t", pt);
  pcmd->add_option("--paths", npaths);
  pcmd->add_option("--seed", pseed);
  pcmd->add_option("--x0", px0, "start point (defaults to 0)");
  pcmd->add_option("--out", pout);

  auto* rcmd = app.add_subcommand("run", "run an experiment config");
  std::string rconfig, rdir;
  std::uint64_t rseed = 0;
  rcmd->add_option("--config", rconfig)->required();
  rcmd->add_option("--out-dir", rdir);
  auto* rseed_opt = rcmd->add_option("--seed", rseed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitParseError;
  }

  try {
    if (*kcmd) {
      KernelSpec k = ktype == "fractional" ? fractional_kernel(kd, ksigma, knt)
                     : ktype == "uniform"  ? uniform_kernel(kd, ksigma, knu, klam, kvalue, knt)
                                           : make_random_kernel(kd, ksigma, knu, klam, kseed, knr, knt);
      write_kernel(kout, k);
      return 0;
    }
    if (*scmd) {
      KernelSpec k = read_kernel(skernel);
      SymbolTable t = symbol_table(k, parse_grid(sgrid, k.d()), stol);
      auto os = open_out(sout);
      write_symbol_csv(os, t);
      return 0;
    }
    if (*vcmd) {
      KernelSpec k = read_kernel(vkernel);
      ScalarField f = read_field_csv(vrhs);
      SolveResult r = solve(symbol_table(k, f.grid(), vtol), vlam, f);
      write_field_csv(vout, r.u);
      std::cerr << "residual " << r.residual_l2 << '\n';
      return r.residual_l2 < kResidualGate ? 0 : kExitGateFail;
    }
    if (*pcmd) {
      KernelSpec k = read_kernel(pkernel);
      Vec x0{};
      if (px0.size() > static_cast<std::size_t>(k.d())) throw ParseError("--x0 has more than d components");
      for (std::size_t a = 0; a < px0.size(); ++a) x0[a] = px0[a];
      PathEnsemble e = simulate_paths(k, peps, pt, x0, npaths, pseed);
      auto os = open_out(pout);
      os.precision(15);
      os << "path";
      for (int a = 0; a < k.d(); ++a) os << ",x" << a + 1;
      os << ",jumps,first_jump_radius\n";
      for (std::size_t i = 0; i < e.n_paths; ++i) {
        os << i;
        for (int a = 0; a < k.d(); ++a) os << ',' << e.terminal[i][a];
        os << ',' << e.jump_count[i] << ',' << e.first_jump_radius[i] << '\n';
      }
      std::cerr << "jump rate " << e.jump_rate << '\n';
      return 0;
    }
    if (*rcmd) {
      std::optional<std::uint64_t> seed;
      if (rseed_opt->count()) seed = rseed;
      return run_experiment(rconfig, rdir, seed);
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitParseError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModuleError;
  }
  return 0;
}
