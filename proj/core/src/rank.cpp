#include <algorithm>
#include <cmath>
#include <numeric>

#include "synthrel/error.hpp"
#include "synthrel/utility.hpp"

namespace synthrel {

std::string_view to_string(RankKind kind) noexcept {
  switch (kind) {
    case RankKind::Spearman: return "spearman";
    case RankKind::Kendall: return "kendall";
    case RankKind::WeightedKendall: return "weighted_kendall";
  }
  return "unknown";
}

RankKind parse_rank_kind(std::string_view text) {
  for (auto k : {RankKind::Spearman, RankKind::Kendall, RankKind::WeightedKendall})
    if (to_string(k) == text) return k;
  throw InvalidArgument("unknown rank correlation '" + std::string(text) + "'");
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

namespace {

int sign(double v) { return (v > 0.0) - (v < 0.0); }

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

}  // namespace

std::optional<double> rank_correlation(RankKind kind, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("rank correlation inputs differ in length");
  if (a.size() < 2) throw InvalidArgument("rank correlation needs at least 2 values");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (constant(a) || constant(b)) return std::nullopt;
  const std::size_t n = a.size();

  switch (kind) {
    case RankKind::Spearman: {
      auto ra = average_ranks(a);
      auto rb = average_ranks(b);
      return pearson(ra, rb);
    }
    case RankKind::Kendall: {
      double concordant = 0, discordant = 0, ties_a = 0, ties_b = 0, pairs = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const int s = sign(a[i] - a[j]) * sign(b[i] - b[j]);
          pairs += 1;
          if (a[i] == a[j]) ties_a += 1;
          if (b[i] == b[j]) ties_b += 1;
          if (s > 0) concordant += 1;
          if (s < 0) discordant += 1;
        }
      return std::clamp((concordant - discordant) / std::sqrt((pairs - ties_a) * (pairs - ties_b)), -1.0, 1.0);
    }
    case RankKind::WeightedKendall: {
      // Zero-based descending rank in a, ties averaged.
      auto asc = average_ranks(a);
      std::vector<double> r(n);
      for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<double>(n) - asc[i];
      double num = 0.0;
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double w = 1.0 / (1.0 + r[i]) + 1.0 / (1.0 + r[j]);
          num += w * sign(a[i] - a[j]) * sign(b[i] - b[j]);
          total += w;
        }
      return std::clamp(num / total, -1.0, 1.0);
    }
  }
  return std::nullopt;
}

}  // namespace synthrel
