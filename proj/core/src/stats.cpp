#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "synthrel/aggregation.hpp"
#include "synthrel/error.hpp"
#include "synthrel/fidelity.hpp"

namespace synthrel {

std::string_view to_string(Granularity g) noexcept {
  switch (g) {
    case Granularity::SingleColumn: return "single-column";
    case Granularity::SingleTable: return "single-table";
    case Granularity::MultiTable: return "multi-table";
  }
  return "unknown";
}

std::string_view to_string(Goal g) noexcept { return g == Goal::Minimize ? "minimize" : "maximize"; }

MetricResult MetricResult::with_p_value(std::string metric, Granularity g, double value, double p_value, double alpha) {
  MetricResult r;
  r.metric = std::move(metric);
  r.granularity = g;
  r.value = value;
  r.p_value = p_value;
  r.alpha = alpha;
  r.separable = p_value < alpha;
  return r;
}

MetricResult MetricResult::with_ci(std::string metric, Granularity g, double value, Interval ci, double alpha) {
  MetricResult r;
  r.metric = std::move(metric);
  r.granularity = g;
  r.value = value;
  r.ci = ci;
  r.alpha = alpha;
  r.separable = !ci.contains(value);
  return r;
}

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  if (lambda < 1.18) {
    // Dual theta-series of the CDF; converges fast where the alternating
    // series below does not.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double x = -pi2 / (8.0 * lambda * lambda);
    double sum = 0.0;
    for (int j = 1; j <= 30; ++j) {
      const double k = 2.0 * j - 1.0;
      const double term = std::exp(k * k * x);
      sum += term;
      if (term < 1e-300) break;
    }
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * sum;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j <= 30; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += (j % 2 == 1 ? term : -term);
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("KS test needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());

  // Evaluate both ECDFs just after every distinct value.
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    double v;
    if (j >= y.size() || (i < x.size() && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double en = n * m / (n + m);
  return {d, kolmogorov_survival(d * std::sqrt(en))};
}

double chi2_upper_tail(double statistic, double df) {
  if (df <= 0.0) throw InvalidArgument("chi-square needs positive degrees of freedom");
  if (!(statistic > 0.0)) return 1.0;
  return boost::math::gamma_q(df / 2.0, statistic / 2.0);
}

TestResult chi2_two_sample(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("chi-square test needs two non-empty samples");
  std::map<std::string_view, std::pair<double, double>> counts;
  for (const auto& v : a) counts[v].first += 1.0;
  for (const auto& v : b) counts[v].second += 1.0;
  if (counts.size() < 2) throw InvalidArgument("chi-square test needs at least two categories (df would be 0)");

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double total = na + nb;
  double stat = 0.0;
  for (const auto& [cat, c] : counts) {
    const double col = c.first + c.second;
    const double ea = na * col / total;
    const double eb = nb * col / total;
    stat += (c.first - ea) * (c.first - ea) / ea + (c.second - eb) * (c.second - eb) / eb;
  }
  return {stat, chi2_upper_tail(stat, static_cast<double>(counts.size() - 1))};
}

MetricResult cardinality_shape_similarity(const Database& real, const Database& syn, const Relationship& relationship,
                                          double alpha) {
  auto real_counts = child_row_counts(real, relationship);
  auto syn_counts = child_row_counts(syn, relationship);
  auto test = ks_two_sample(real_counts, syn_counts);
  auto r = MetricResult::with_p_value("cardinality_shape_similarity", Granularity::MultiTable, test.statistic,
                                      test.p_value, alpha);
  r.table = relationship.parent;
  r.details["child"] = relationship.child;
  r.details["foreign_key"] = relationship.fk_column;
  r.details["statistic"] = "ks";
  return r;
}

}  // namespace synthrel
