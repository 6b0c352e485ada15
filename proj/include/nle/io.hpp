#pragma once

// Kernel JSON, field CSV / binary, and the report CSV writers.
//   kernel: {d, sigma, nu, lambda, r_grid, theta_cells, values:[[shell row]], chi_radius}
//   field:  first line "# {grid json}", then one row per node: x..., value

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "harness/report.hpp"
#include "norms.hpp"
#include "operator.hpp"

namespace nle {

using json = nlohmann::json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline json kernel_to_json(const KernelSpec& k) {
  const PolarMesh& m = k.a().mesh();
  json rows = json::array();
  for (int i = 0; i < m.n_shells(); ++i) {
    json row = json::array();
    for (int c = 0; c < m.n_cells(); ++c) row.push_back(k.a().at(i, c));
    rows.push_back(row);
  }
  return {{"d", k.d()},         {"sigma", k.sigma()},          {"nu", k.nu()},  {"lambda", k.lambda_up()},
          {"r_grid", m.edges()}, {"theta_cells", m.n_theta()}, {"values", rows}, {"chi_radius", k.chi_radius()}};
}

inline KernelSpec kernel_from_json(const json& j) {
  try {
    int d = j.at("d").get<int>();
    auto edges = j.at("r_grid").get<std::vector<double>>();
    int nt = j.at("theta_cells").get<int>();
    auto mesh = std::make_shared<PolarMesh>(d, edges, nt);
    std::vector<double> v;
    const json& rows = j.at("values");
    if (!rows.is_array() || static_cast<int>(rows.size()) != mesh->n_shells())
      throw SizeMismatch("kernel json: values needs one row per shell");
    for (const auto& row : rows) {
      auto r = row.get<std::vector<double>>();
      if (static_cast<int>(r.size()) != mesh->n_cells()) throw SizeMismatch("kernel json: row length != cell count");
      v.insert(v.end(), r.begin(), r.end());
    }
    return KernelSpec(d, j.at("sigma").get<double>(), j.at("nu").get<double>(), j.at("lambda").get<double>(),
                      Density(mesh, std::move(v)), j.value("chi_radius", 1.0));
  } catch (const json::exception& e) {
    throw ParseError(std::string("kernel json: ") + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline KernelSpec read_kernel(const std::string& path) { return kernel_from_json(read_json_file(path)); }

inline void write_kernel(const std::string& path, const KernelSpec& k) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kernel_to_json(k).dump(1) << '\n';
}

inline json grid_header(const TorusGrid& g, Extension e) {
  return {{"d", g.d()}, {"n", g.n()}, {"R", g.R()}, {"extension", e == Extension::Periodic ? "periodic" : "zero_outside"}};
}

inline std::pair<TorusGrid, Extension> parse_grid_header(const std::string& line) {
  std::size_t at = line.find('{');
  if (line.empty() || line[0] != '#' || at == std::string::npos) throw ParseError("field file: missing '# {grid}' header");
  try {
    json h = json::parse(line.substr(at));
    std::string ext = h.value("extension", "zero_outside");
    if (ext != "periodic" && ext != "zero_outside") throw ParseError("field file: unknown extension " + ext);
    return {TorusGrid(h.at("d").get<int>(), h.at("n").get<int>(), h.at("R").get<double>()),
            ext == "periodic" ? Extension::Periodic : Extension::ZeroOutside};
  } catch (const json::exception& e) {
    throw ParseError(std::string("field header: ") + e.what());
  }
}

inline void write_field_csv(std::ostream& os, const ScalarField& u) {
  const TorusGrid& g = u.grid();
  os << "# " << grid_header(g, u.extension()).dump() << '\n';
  os.precision(17);
  for (std::size_t i = 0; i < u.size(); ++i) {
    Vec x = g.node(i);
    for (int a = 0; a < g.d(); ++a) os << x[a] << ',';
    os << u[i] << '\n';
  }
}

inline void write_field_csv(const std::string& path, const ScalarField& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_field_csv(out, u);
}

// Rows must come in node order; coordinates are checked against the grid.
inline ScalarField read_field_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  auto [g, ext] = parse_grid_header(line);
  std::vector<double> v;
  v.reserve(g.size());
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(ss, cell, ',')) {
      try {
        cols.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError("field csv: bad number '" + cell + "'");
      }
    }
    if (static_cast<int>(cols.size()) != g.d() + 1) throw ParseError("field csv: expected d+1 columns");
    if (v.size() >= g.size()) throw SizeMismatch("field csv: too many rows");
    Vec x = g.node(v.size());
    for (int a = 0; a < g.d(); ++a)
      if (std::abs(cols[a] - x[a]) > 1e-9 * (1 + g.R())) throw ParseError("field csv: rows out of node order");
    v.push_back(cols.back());
  }
  if (v.size() != g.size()) throw SizeMismatch("field csv: expected n^d rows");
  return ScalarField(g, std::move(v), ext);
}

inline ScalarField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_field_csv(in);
}

// Header line as in the CSV form, then n^d little-endian doubles.
inline void write_field_binary(const std::string& path, const ScalarField& u) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# " << grid_header(u.grid(), u.extension()).dump() << '\n';
  out.write(reinterpret_cast<const char*>(u.values().data()), static_cast<std::streamsize>(u.size() * sizeof(double)));
}

inline ScalarField read_field_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  std::getline(in, line);
  auto [g, ext] = parse_grid_header(line);
  std::vector<double> v(g.size());
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double))) throw SizeMismatch("field binary: short read");
  return ScalarField(g, std::move(v), ext);
}

inline void write_symbol_csv(std::ostream& os, const SymbolTable& t) {
  const TorusGrid& g = t.grid;
  static const char* names[3] = {"xi1", "xi2", "xi3"};
  for (int a = 0; a < g.d(); ++a) os << names[a] << ',';
  os << "re_m,im_m,tail_bound\n";
  os.precision(15);
  for (std::size_t i = 0; i < g.size(); ++i) {
    Vec xi = g.frequency(i);
    for (int a = 0; a < g.d(); ++a) os << xi[a] << ',';
    os << t.values[i].real() << ',' << t.values[i].imag() << ',' << t.tail_bound[i] << '\n';
  }
}

struct NormRow {
  std::string norm_name;
  std::string params;
  double value;
  double tail_bound;
};

inline void write_norm_csv(std::ostream& os, const std::vector<NormRow>& rows) {
  os.precision(12);
  os << "norm_name,params,value,tail_bound\n";
  for (const auto& r : rows) os << csv_quote(r.norm_name) << ',' << csv_quote(r.params) << ',' << r.value << ',' << r.tail_bound << '\n';
}

inline void write_mean_osc_csv(std::ostream& os, const std::vector<MeanOscRow>& rows) {
  os.precision(12);
  os << "r,kappa,lambda,lhs,rhs_osc_term,rhs_f_term,ratio\n";
  for (const auto& r : rows)
    os << r.r << ',' << r.kappa << ',' << r.lambda << ',' << r.lhs << ',' << r.rhs_osc_term << ',' << r.rhs_f_term << ','
       << r.ratio << '\n';
}

}  // namespace nle
