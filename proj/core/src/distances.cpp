#include <algorithm>
#include <cmath>
#include <map>

#include "synthrel/error.hpp"
#include "synthrel/fidelity.hpp"

namespace synthrel {

std::string_view to_string(DistanceKind kind) noexcept {
  switch (kind) {
    case DistanceKind::TotalVariation: return "total_variation";
    case DistanceKind::Hellinger: return "hellinger";
    case DistanceKind::JensenShannon: return "jensen_shannon";
  }
  return "unknown";
}

double categorical_distance(DistanceKind kind, std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("distance needs two non-empty samples");
  std::map<std::string_view, std::pair<double, double>> freq;
  for (const auto& v : a) freq[v].first += 1.0;
  for (const auto& v : b) freq[v].second += 1.0;
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());

  double acc = 0.0;
  for (const auto& [cat, c] : freq) {
    const double p = c.first / na;
    const double q = c.second / nb;
    switch (kind) {
      case DistanceKind::TotalVariation: acc += std::abs(p - q); break;
      case DistanceKind::Hellinger: {
        const double d = std::sqrt(p) - std::sqrt(q);
        acc += d * d;
        break;
      }
      case DistanceKind::JensenShannon: {
        const double mid = 0.5 * (p + q);
        if (p > 0.0) acc += 0.5 * p * std::log2(p / mid);
        if (q > 0.0) acc += 0.5 * q * std::log2(q / mid);
        break;
      }
    }
  }
  switch (kind) {
    case DistanceKind::TotalVariation: return std::clamp(0.5 * acc, 0.0, 1.0);
    case DistanceKind::Hellinger: return std::clamp(std::sqrt(acc / 2.0), 0.0, 1.0);
    case DistanceKind::JensenShannon: return std::clamp(std::sqrt(std::max(acc, 0.0)), 0.0, 1.0);
  }
  return 0.0;
}

std::pair<std::vector<std::string>, std::vector<std::string>> comparable_labels(const Column& a, const Column& b,
                                                                                 int bins) {
  if (a.type() != b.type()) throw InvalidArgument("columns have different sem_types");
  if (a.type() == SemType::Id) throw InvalidArgument("id columns have no distribution to compare");
  if (!is_continuous(a.type())) return {a.category_labels(), b.category_labels()};
  if (bins < 1) throw InvalidArgument("bin count must be positive");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const Column* c : {&a, &b})
    for (std::size_t i = 0; i < c->size(); ++i)
      if (!c->is_null(i)) {
        lo = std::min(lo, c->number(i));
        hi = std::max(hi, c->number(i));
      }
  auto label = [&](const Column& c) {
    std::vector<std::string> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (c.is_null(i)) {
        out[i] = std::string(kMissingCategory);
        continue;
      }
      int bin = 0;
      if (hi > lo) {
        bin = static_cast<int>(std::floor((c.number(i) - lo) / (hi - lo) * bins));
        bin = std::clamp(bin, 0, bins - 1);
      }
      out[i] = std::to_string(bin);
    }
    return out;
  };
  return {label(a), label(b)};
}

double column_distance(DistanceKind kind, const Column& a, const Column& b, int bins) {
  auto [la, lb] = comparable_labels(a, b, bins);
  return categorical_distance(kind, la, lb);
}

double wasserstein1(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("Wasserstein distance needs two non-empty samples");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  std::vector<double> all;
  all.reserve(x.size() + y.size());
  std::merge(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(all));

  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < all.size(); ++k) {
    while (i < x.size() && x[i] <= all[k]) ++i;
    while (j < y.size() && y[j] <= all[k]) ++j;
    const double width = all[k + 1] - all[k];
    if (width > 0.0) total += std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m) * width;
  }
  return total;
}

double mmd(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.rows == 0 || b.rows == 0) throw InvalidArgument("MMD needs two non-empty samples");
  if (a.cols() != b.cols()) throw InvalidArgument("MMD inputs have different feature counts");
  const std::size_t na = a.rows;
  const std::size_t n = na + b.rows;
  const std::size_t p = a.cols();
  auto point = [&](std::size_t i) { return i < na ? a.row(i) : b.row(i - na); };

  std::vector<double> sq(n * (n - 1) / 2);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto xi = point(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      auto xj = point(j);
      double d = 0.0;
      for (std::size_t c = 0; c < p; ++c) d += (xi[c] - xj[c]) * (xi[c] - xj[c]);
      sq[k++] = d;
    }
  }
  if (sq.empty()) return 0.0;

  std::vector<double> dist(sq.size());
  std::transform(sq.begin(), sq.end(), dist.begin(), [](double v) { return std::sqrt(v); });
  double bandwidth = percentile(dist, 0.5);
  if (!(bandwidth > 0.0)) {
    // More than half the pairs coincide: fall back to the mean of the
    // non-zero distances, or report 0 when every point is identical.
    double sum = 0.0;
    std::size_t cnt = 0;
    for (double d : dist)
      if (d > 0.0) {
        sum += d;
        ++cnt;
      }
    if (cnt == 0) return 0.0;
    bandwidth = sum / static_cast<double>(cnt);
  }
  const double gamma = 1.0 / (2.0 * bandwidth * bandwidth);

  double kaa = static_cast<double>(na);  // diagonal terms, k(x, x) = 1
  double kbb = static_cast<double>(b.rows);
  double kab = 0.0;
  k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::exp(-gamma * sq[k++]);
      if (i < na && j < na) {
        kaa += 2.0 * v;
      } else if (i >= na && j >= na) {
        kbb += 2.0 * v;
      } else {
        kab += v;
      }
    }
  }
  const double ma = static_cast<double>(na);
  const double mb = static_cast<double>(b.rows);
  const double mmd2 = kaa / (ma * ma) + kbb / (mb * mb) - 2.0 * kab / (ma * mb);
  return std::sqrt(std::max(mmd2, 0.0));
}

double mmd(const Table& a, const Table& b) {
  if (a.row_count() == 0 || b.row_count() == 0) throw InvalidArgument("MMD needs two non-empty tables");
  const Table* both[] = {&a, &b};
  auto pre = Preprocessor::fit(both);
  return mmd(pre.transform(a), pre.transform(b));
}

namespace {

struct CorrelationMatrix {
  std::vector<double> values;
  std::vector<bool> degenerate;
};

CorrelationMatrix pearson_matrix(const Table& t, const std::vector<std::string>& columns) {
  const std::size_t k = columns.size();
  CorrelationMatrix out{std::vector<double>(k * k, 0.0), std::vector<bool>(k, false)};
  std::vector<const Column*> cols;
  for (const auto& c : columns) cols.push_back(&t.column(c));

  for (std::size_t i = 0; i < k; ++i) {
    // Whole-column variance decides degeneracy.
    auto v = cols[i]->non_null_numbers();
    bool constant = v.size() < 2 || std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    out.degenerate[i] = constant;
    out.values[i * k + i] = 1.0;
  }
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      double r = 0.0;
      if (!out.degenerate[i] && !out.degenerate[j]) {
        double sx = 0, sy = 0, n = 0;
        for (std::size_t row = 0; row < t.row_count(); ++row) {
          if (cols[i]->is_null(row) || cols[j]->is_null(row)) continue;
          sx += cols[i]->number(row);
          sy += cols[j]->number(row);
          n += 1;
        }
        if (n >= 2) {
          const double mx = sx / n;
          const double my = sy / n;
          double cxy = 0, cxx = 0, cyy = 0;
          for (std::size_t row = 0; row < t.row_count(); ++row) {
            if (cols[i]->is_null(row) || cols[j]->is_null(row)) continue;
            const double dx = cols[i]->number(row) - mx;
            const double dy = cols[j]->number(row) - my;
            cxy += dx * dy;
            cxx += dx * dx;
            cyy += dy * dy;
          }
          if (cxx > 0 && cyy > 0) r = std::clamp(cxy / std::sqrt(cxx * cyy), -1.0, 1.0);
        }
      }
      out.values[i * k + j] = out.values[j * k + i] = r;
    }
  }
  return out;
}

}  // namespace

PcdResult pcd(const Table& a, const Table& b) {
  PcdResult res;
  for (const auto& c : feature_columns(a.meta())) {
    const auto* ca = a.meta().find_column(c);
    const auto* cb = b.meta().find_column(c);
    if (cb && is_continuous(ca->sem_type) && ca->sem_type == cb->sem_type) res.columns.push_back(c);
  }
  if (res.columns.size() < 2) throw InvalidArgument("PCD needs at least two shared numeric columns");
  auto ma = pearson_matrix(a, res.columns);
  auto mb = pearson_matrix(b, res.columns);
  double ss = 0.0;
  for (std::size_t i = 0; i < ma.values.size(); ++i) ss += (ma.values[i] - mb.values[i]) * (ma.values[i] - mb.values[i]);
  res.value = std::sqrt(ss);
  for (std::size_t i = 0; i < res.columns.size(); ++i)
    if (ma.degenerate[i] || mb.degenerate[i]) res.degenerate_columns.push_back(res.columns[i]);
  return res;
}

}  // namespace synthrel
