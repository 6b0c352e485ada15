#pragma once

#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace nle {

struct EstimateRow {
  std::string estimate_id;
  std::string params;
  double lhs = 0;
  double rhs = 0;
  double n_obs = 0;  // lhs / rhs, or the gate statistic for gate rows
  bool pass = true;
};

struct EstimateReport {
  std::vector<EstimateRow> rows;
  bool partial = false;  // some cases raised module errors
  std::vector<std::string> errors;

  bool all_pass() const {
    if (partial) return false;
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
  void append(const EstimateReport& o) {
    rows.insert(rows.end(), o.rows.begin(), o.rows.end());
    partial = partial || o.partial;
    errors.insert(errors.end(), o.errors.begin(), o.errors.end());
  }
};

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string o = "\"";
  for (char c : s) {
    if (c == '"') o += '"';
    o += c;
  }
  return o + "\"";
}

inline void write_csv(std::ostream& os, const EstimateReport& r) {
  os.precision(12);
  os << "estimate_id,params,lhs,rhs,N_obs,pass\n";
  for (const auto& row : r.rows)
    os << csv_quote(row.estimate_id) << ',' << csv_quote(row.params) << ',' << row.lhs << ',' << row.rhs << ','
       << row.n_obs << ',' << (row.pass ? 1 : 0) << '\n';
}

}  // namespace nle
