#pragma once

#include <Eigen/Core>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "portvar/common.hpp"

namespace portvar {

/// One asset's return history: relative (per-period) returns, no gaps.
struct ReturnSeries {
  std::string asset_id;
  std::vector<double> samples;
};

/// The fixed data matrix K = (k_ij): per-asset cumulants, one row per asset,
/// one column per cumulant order 1..d.
class CumulantMatrix {
 public:
  CumulantMatrix(int n_assets, int max_order)
      : n_(n_assets), d_(max_order), entries_(Eigen::MatrixXd::Zero(n_assets, max_order)) {
    if (n_ < 1) throw std::invalid_argument("CumulantMatrix: need at least one asset");
    if (d_ < 2) throw std::invalid_argument("CumulantMatrix: order must be at least 2");
  }

  static CumulantMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw std::invalid_argument("CumulantMatrix: no rows");
    CumulantMatrix k(int(rows.size()), int(rows.front().size()));
    for (int i = 0; i < k.n_; ++i) {
      if (int(rows[i].size()) != k.d_)
        throw std::invalid_argument("CumulantMatrix: ragged rows");
      for (int j = 1; j <= k.d_; ++j) k.entry(i, j) = rows[i][j - 1];
    }
    k.check_finite();
    return k;
  }

  int n() const { return n_; }
  int d() const { return d_; }

  /// k_ij with 0-based asset index and 1-based cumulant order.
  double entry(int asset, int order) const { return entries_(asset, order - 1); }
  double& entry(int asset, int order) { return entries_(asset, order - 1); }

  const Eigen::MatrixXd& data() const { return entries_; }

  /// Solver-facing validity: every entry nonzero (hypothesis of the count theorem).
  bool all_nonzero() const {
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < d_; ++j)
        if (entries_(i, j) == 0.0) return false;
    return true;
  }

  /// Exactly-zero entries as (asset index, order) pairs. Reported, never perturbed.
  std::vector<std::pair<int, int>> zero_entries() const {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < n_; ++i)
      for (int j = 1; j <= d_; ++j)
        if (entry(i, j) == 0.0) out.emplace_back(i, j);
    return out;
  }

  /// Restriction to cumulant orders 1..new_d (used by the strata solver).
  CumulantMatrix truncated(int new_d) const {
    if (new_d < 2 || new_d > d_) throw std::invalid_argument("truncated: bad order");
    CumulantMatrix out(n_, new_d);
    out.entries_ = entries_.leftCols(new_d);
    return out;
  }

  void check_finite() const {
    if (!entries_.allFinite())
      throw std::invalid_argument("CumulantMatrix: non-finite entry");
  }

 private:
  int n_, d_;
  Eigen::MatrixXd entries_;
};

/// Raw sample moments m'_j = (1/N) sum_t s_t^j for j = 1..order.
inline std::vector<double> raw_moments(const ReturnSeries& series, int order) {
  if (series.samples.empty())
    throw std::invalid_argument("raw_moments: empty series '" + series.asset_id + "'");
  if (order < 1) throw std::invalid_argument("raw_moments: order must be positive");
  std::vector<double> m(order, 0.0);
  for (double s : series.samples) {
    if (!std::isfinite(s))
      throw std::invalid_argument("raw_moments: non-finite sample in '" + series.asset_id + "'");
    double p = 1.0;
    for (int j = 0; j < order; ++j) {
      p *= s;
      m[j] += p;
    }
  }
  const double inv_n = 1.0 / double(series.samples.size());
  for (double& v : m) v *= inv_n;
  return m;
}

/// Moments-to-cumulants recursion:
///   kappa_m = m'_m - sum_{j=1}^{m-1} C(m-1, j-1) kappa_j m'_{m-j}.
inline std::vector<double> moments_to_cumulants(const std::vector<double>& moments) {
  for (double v : moments)
    if (!std::isfinite(v)) throw std::invalid_argument("moments_to_cumulants: non-finite moment");
  const int d = int(moments.size());
  std::vector<double> kappa(d, 0.0);
  for (int m = 1; m <= d; ++m) {
    double acc = moments[m - 1];
    for (int j = 1; j <= m - 1; ++j)
      acc -= binomial(m - 1, j - 1) * kappa[j - 1] * moments[m - j - 1];
    kappa[m - 1] = acc;
  }
  return kappa;
}

/// Inverse recursion (m'_0 = 1): m'_m = sum_{j=1}^{m} C(m-1, j-1) kappa_j m'_{m-j}.
inline std::vector<double> cumulants_to_moments(const std::vector<double>& kappa) {
  const int d = int(kappa.size());
  std::vector<double> m(d, 0.0);
  auto moment = [&](int idx) { return idx == 0 ? 1.0 : m[idx - 1]; };
  for (int mm = 1; mm <= d; ++mm) {
    double acc = 0.0;
    for (int j = 1; j <= mm; ++j) acc += binomial(mm - 1, j - 1) * kappa[j - 1] * moment(mm - j);
    m[mm - 1] = acc;
  }
  return m;
}

/// Estimate the n x d cumulant matrix from return series. Zero entries are
/// left in place; callers must consult zero_entries()/all_nonzero() before
/// handing the matrix to the solver.
inline CumulantMatrix estimate_matrix(const std::vector<ReturnSeries>& series_list, int order) {
  if (series_list.empty()) throw std::invalid_argument("estimate_matrix: no series");
  if (order < 2) throw std::invalid_argument("estimate_matrix: order must be at least 2");
  CumulantMatrix k(int(series_list.size()), order);
  for (std::size_t i = 0; i < series_list.size(); ++i) {
    const auto& s = series_list[i];
    if (int(s.samples.size()) < order)
      throw std::invalid_argument("estimate_matrix: series '" + s.asset_id + "' has " +
                                  std::to_string(s.samples.size()) + " samples, need at least " +
                                  std::to_string(order));
    const std::vector<double> kappa = moments_to_cumulants(raw_moments(s, order));
    for (int j = 1; j <= order; ++j) k.entry(int(i), j) = kappa[j - 1];
  }
  k.check_finite();
  return k;
}

namespace detail {
inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}
}  // namespace detail

/// Read a returns CSV: header row of asset labels, one column per asset,
/// one row per period. Missing or non-numeric fields are errors.
inline std::vector<ReturnSeries> read_returns_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open returns CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty returns CSV: " + path);
  const std::vector<std::string> labels = detail::split_csv_line(line);
  if (labels.empty()) throw std::runtime_error("returns CSV has no columns: " + path);

  std::vector<ReturnSeries> series(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) series[i].asset_id = labels[i];

  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> fields = detail::split_csv_line(line);
    if (fields.size() != labels.size())
      throw std::runtime_error("returns CSV row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(labels.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].empty())
        throw std::runtime_error("returns CSV row " + std::to_string(row) + ": missing value");
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(fields[i], &used);
      } catch (const std::exception&) {
        throw std::runtime_error("returns CSV row " + std::to_string(row) + ": bad number '" +
                                 fields[i] + "'");
      }
      if (used != fields[i].size())
        throw std::runtime_error("returns CSV row " + std::to_string(row) + ": bad number '" +
                                 fields[i] + "'");
      series[i].samples.push_back(v);
    }
  }
  if (series.front().samples.empty())
    throw std::runtime_error("returns CSV has no data rows: " + path);
  return series;
}

}  // namespace portvar
