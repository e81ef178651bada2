#pragma once

#include "fiberlab/rigidity_analysis.hpp"

#include <string>
#include <vector>

namespace fiberlab {

/// One measured value in an eps sweep.
struct RateRow {
  double eps = 0.0;
  std::string metric;
  double value = 0.0;
};

/// Log-log least-squares fit of value against eps.
struct RateFit {
  std::string metric;
  double slope = 0.0;
  double intercept = 0.0;  // fit of log(value) = slope * log(eps) + intercept
  double r2 = 0.0;
};

struct Verdict {
  std::string id;
  bool pass = false;
  std::string detail;
};

/// Sweep report: rows (descending eps within each metric), per-metric fits,
/// and criterion verdicts.
struct ConvergenceReport {
  std::vector<RateRow> rows;
  std::vector<RateFit> fits;
  std::vector<Verdict> verdicts;

  void add(double eps, const std::string& metric, double value);
  /// Sorts the metric's rows by descending eps, fits, appends, and returns
  /// the fit.  Requires >= 3 rows with positive values.
  const RateFit& fit(const std::string& metric);
  bool all_pass() const;

  /// CSV with header "eps,metric,value"; fit rows are appended with the eps
  /// column set to "fit" and the metric suffixed ":slope" / ":r2".
  std::string to_csv() const;
  std::string to_json() const;
};

/// Least-squares slope of log(value) vs log(eps).  Requires >= 3 pairs and
/// positive eps and values; signals otherwise.
RateFit fit_rate(const std::string& metric, std::vector<std::pair<double, double>> pairs);

/// Shortest decimal digits that round-trip a double (printf %.17g trimmed),
/// used for every numeric field so reports are byte-stable.
std::string format_double(double v);

/// Parses "1/16" (exact rational) or a plain decimal; must be positive.
double parse_epsilon(const std::string& text);
std::vector<double> parse_epsilon_list(const std::string& text);

/// CSV for a translation-modulus table: "eps,xi,value,fitted_C,slack", one
/// row per offset, xi encoded as "x;y" to keep the column count fixed.
std::string fk_to_csv(const std::vector<FkReport>& reports);

/// CSV for connector-bound runs: "case,lhs,rhs,ratio".
struct Lemma31Case {
  std::string id;
  Lemma31Report report;
};
std::string lemma31_to_csv(const std::vector<Lemma31Case>& cases);

}  // namespace fiberlab
