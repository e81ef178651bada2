#include "fiberlab/reports.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace fiberlab {

std::string format_double(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ConvergenceReport::add(double eps, const std::string& metric, double value) {
  rows.push_back(RateRow{eps, metric, value});
}

const RateFit& ConvergenceReport::fit(const std::string& metric) {
  std::vector<std::pair<double, double>> pairs;
  for (const RateRow& r : rows) {
    if (r.metric == metric) pairs.emplace_back(r.eps, r.value);
  }
  std::stable_sort(rows.begin(), rows.end(), [&metric](const RateRow& a, const RateRow& b) {
    return a.metric == metric && b.metric == metric && a.eps > b.eps;
  });
  fits.push_back(fit_rate(metric, std::move(pairs)));
  return fits.back();
}

bool ConvergenceReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

namespace {

/// Rows grouped by metric (first-appearance order), descending eps inside.
std::vector<const RateRow*> ordered_rows(const std::vector<RateRow>& rows) {
  std::vector<std::string> metric_order;
  for (const RateRow& r : rows) {
    if (std::find(metric_order.begin(), metric_order.end(), r.metric) == metric_order.end())
      metric_order.push_back(r.metric);
  }
  std::vector<const RateRow*> out;
  out.reserve(rows.size());
  for (const std::string& m : metric_order) {
    std::vector<const RateRow*> group;
    for (const RateRow& r : rows) {
      if (r.metric == m) group.push_back(&r);
    }
    std::stable_sort(group.begin(), group.end(),
                     [](const RateRow* a, const RateRow* b) { return a->eps > b->eps; });
    out.insert(out.end(), group.begin(), group.end());
  }
  return out;
}

}  // namespace

std::string ConvergenceReport::to_csv() const {
  std::ostringstream out;
  out << "eps,metric,value\n";
  for (const RateRow* r : ordered_rows(rows)) {
    out << format_double(r->eps) << ',' << r->metric << ',' << format_double(r->value) << '\n';
  }
  for (const RateFit& f : fits) {
    out << "fit," << f.metric << ":slope," << format_double(f.slope) << '\n';
    out << "fit," << f.metric << ":r2," << format_double(f.r2) << '\n';
  }
  return out.str();
}

std::string ConvergenceReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  j["rows"] = nlohmann::ordered_json::array();
  for (const RateRow* r : ordered_rows(rows)) {
    j["rows"].push_back({{"eps", r->eps}, {"metric", r->metric}, {"value", r->value}});
  }
  j["fits"] = nlohmann::ordered_json::array();
  for (const RateFit& f : fits) {
    j["fits"].push_back({{"metric", f.metric},
                         {"slope", f.slope},
                         {"intercept", f.intercept},
                         {"r2", f.r2}});
  }
  j["verdicts"] = nlohmann::ordered_json::array();
  for (const Verdict& v : verdicts) {
    j["verdicts"].push_back({{"id", v.id}, {"pass", v.pass}, {"detail", v.detail}});
  }
  return j.dump(2);
}

RateFit fit_rate(const std::string& metric, std::vector<std::pair<double, double>> pairs) {
  if (pairs.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 (eps, value) pairs for " + metric);
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& [eps, value] : pairs) {
    if (!(eps > 0.0) || !(value > 0.0))
      throw std::invalid_argument("fit_rate: eps and values must be positive for " + metric);
    const double x = std::log(eps);
    const double y = std::log(value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double n = static_cast<double>(pairs.size());
  const double den = n * sxx - sx * sx;
  if (den <= 0.0) throw std::invalid_argument("fit_rate: eps values must be distinct");
  RateFit fit;
  fit.metric = metric;
  fit.slope = (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  double ss_res = 0.0;
  for (const auto& [eps, value] : pairs) {
    const double r = std::log(value) - (fit.slope * std::log(eps) + fit.intercept);
    ss_res += r * r;
  }
  fit.r2 = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double parse_epsilon(const std::string& text) {
  const auto bad = [&text]() {
    return std::invalid_argument("invalid eps value '" + text + "' (want e.g. 1/16 or 0.0625)");
  };
  if (text.empty()) throw bad();
  const auto slash = text.find('/');
  double value = 0.0;
  try {
    if (slash != std::string::npos) {
      std::size_t used_n = 0, used_d = 0;
      const std::string num = text.substr(0, slash);
      const std::string den = text.substr(slash + 1);
      const long n = std::stol(num, &used_n);
      const long d = std::stol(den, &used_d);
      if (used_n != num.size() || used_d != den.size() || d == 0) throw bad();
      value = static_cast<double>(n) / static_cast<double>(d);
    } else {
      std::size_t used = 0;
      value = std::stod(text, &used);
      if (used != text.size()) throw bad();
    }
  } catch (const std::invalid_argument&) {
    throw bad();
  } catch (const std::out_of_range&) {
    throw bad();
  }
  if (!(value > 0.0)) throw bad();
  return value;
}

std::vector<double> parse_epsilon_list(const std::string& text) {
  std::vector<double> out;
  std::string::size_type start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string piece =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    out.push_back(parse_epsilon(piece));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty eps list");
  return out;
}

std::string fk_to_csv(const std::vector<FkReport>& reports) {
  std::ostringstream out;
  out << "eps,xi,value,fitted_C,slack\n";
  for (const FkReport& rep : reports) {
    for (const FkRow& row : rep.rows) {
      out << format_double(rep.eps) << ',' << format_double(row.xi.x()) << ';'
          << format_double(row.xi.y()) << ',' << format_double(row.value) << ','
          << format_double(rep.fitted_C) << ',' << format_double(row.slack) << '\n';
    }
  }
  return out.str();
}

std::string lemma31_to_csv(const std::vector<Lemma31Case>& cases) {
  std::ostringstream out;
  out << "case,lhs,rhs,ratio\n";
  for (const Lemma31Case& c : cases) {
    out << c.id << ',' << format_double(c.report.lhs) << ',' << format_double(c.report.rhs) << ','
        << format_double(c.report.ratio) << '\n';
  }
  return out.str();
}

}  // namespace fiberlab
