#include "synthrel/detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "synthrel/aggregation.hpp"
#include "synthrel/error.hpp"
#include "synthrel/features.hpp"
#include "synthrel/random.hpp"

namespace synthrel {

std::string_view to_string(CopyingFlag flag) noexcept {
  return flag == CopyingFlag::SuspectedCopying ? "suspected_copying" : "none";
}

namespace {

double log_sum_exp(std::span<const double> terms) {
  if (terms.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - top);
  return top + std::log(sum);
}

}  // namespace

BinomialTail binomial_tails(std::size_t successes, std::size_t trials, double p0) {
  if (trials == 0) throw InvalidArgument("binomial test needs at least one trial");
  if (successes > trials) throw InvalidArgument("more successes than trials");
  if (!(p0 >= 0.5 && p0 < 1.0)) throw InvalidArgument("baseline p0 must lie in [0.5, 1)");

  const double n = static_cast<double>(trials);
  const double lp = std::log(p0);
  const double lq = std::log1p(-p0);
  std::vector<double> log_pmf(trials + 1);
  for (std::size_t k = 0; k <= trials; ++k) {
    const double kk = static_cast<double>(k);
    log_pmf[k] = std::lgamma(n + 1) - std::lgamma(kk + 1) - std::lgamma(n - kk + 1) + kk * lp + (n - kk) * lq;
  }
  std::span<const double> all(log_pmf);
  BinomialTail t;
  t.upper = std::min(1.0, std::exp(log_sum_exp(all.subspan(successes))));
  t.lower = std::min(1.0, std::exp(log_sum_exp(all.first(successes + 1))));
  return t;
}

BinomialTail binomial_detection_test(std::span<const std::uint8_t> losses, double p0) {
  if (losses.empty()) throw InvalidArgument("binomial test needs at least one loss");
  const auto wrong = static_cast<std::size_t>(std::count_if(losses.begin(), losses.end(), [](auto l) { return l != 0; }));
  return binomial_tails(losses.size() - wrong, losses.size(), p0);
}

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("score and label counts differ");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  double rank_sum = 0.0;
  double pos = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (labels[order[t]] == 1.0) {
        rank_sum += avg_rank;
        pos += 1.0;
      }
    i = j;
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) return 0.5;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

namespace {

std::vector<std::size_t> subsample(std::size_t n, std::size_t keep, std::uint64_t seed) {
  auto perm = Rng(seed).permutation(n);
  perm.resize(keep);
  std::sort(perm.begin(), perm.end());
  return perm;
}

}  // namespace

DetectionResult detect_tables(const Table& real_in, const Table& syn_in, std::span<const Provenance> provenance,
                              const LearnerSpec& learner, const DetectionOptions& options) {
  if (learner.task != TaskKind::Classification) throw InvalidArgument("detection needs a classification learner");
  if (options.folds < 2) throw InvalidArgument("detection needs at least 2 folds");
  if (real_in.row_count() == 0 || syn_in.row_count() == 0)
    throw InvalidArgument("detection needs rows on both sides (real " + std::to_string(real_in.row_count()) +
                          ", synthetic " + std::to_string(syn_in.row_count()) + ")");

  DetectionResult res;
  res.table = real_in.name();
  res.learner = learner;

  // Key columns never reach the learner; provenance follows the kept columns.
  auto columns = feature_columns(real_in.meta());
  if (columns.empty()) throw InvalidArgument("no feature columns to detect on in table '" + real_in.name() + "'");
  std::vector<Provenance> kept_provenance;
  if (!provenance.empty()) {
    if (provenance.size() != real_in.meta().columns.size())
      throw InvalidArgument("provenance does not align with table columns");
    for (const auto& c : columns) kept_provenance.push_back(provenance[*real_in.meta().column_index(c)]);
  }
  for (const auto& c : columns)
    if (!syn_in.has_column(c)) throw InvalidArgument("synthetic table lacks column '" + c + "'");
  Table real = real_in.select(columns);
  Table syn = syn_in.select(columns);

  const std::size_t total = real.row_count() + syn.row_count();
  if (options.row_cap > 0 && total > options.row_cap) {
    const double share = static_cast<double>(options.row_cap) / static_cast<double>(total);
    auto keep = [&](std::size_t n) {
      return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(share * static_cast<double>(n))));
    };
    real = real.take(subsample(real.row_count(), keep(real.row_count()), derive_seed(options.seed, 0x5eed0001)));
    syn = syn.take(subsample(syn.row_count(), keep(syn.row_count()), derive_seed(options.seed, 0x5eed0002)));
    res.rows_capped = true;
    res.warnings.push_back("rows subsampled from " + std::to_string(total) + " to " +
                           std::to_string(real.row_count() + syn.row_count()));
  }
  res.n_real = real.row_count();
  res.n_syn = syn.row_count();

  auto data = preprocess(real, syn, kept_provenance);
  for (const auto& c : data.capped_columns)
    res.warnings.push_back("column '" + c + "' has more categories than the encoding cap");

  const std::size_t smallest = std::min(res.n_real, res.n_syn);
  res.folds = options.folds;
  if (smallest < static_cast<std::size_t>(options.folds)) {
    if (smallest < 2) throw InvalidArgument("detection needs at least 2 rows per side");
    res.folds = static_cast<int>(smallest);
    res.warnings.push_back("fold count reduced from " + std::to_string(options.folds) + " to " +
                           std::to_string(res.folds));
  }

  auto cv = cross_validate(learner, data.X, data.y, res.folds, options.seed);
  res.losses = std::move(cv.losses);
  const auto wrong = static_cast<double>(std::count(res.losses.begin(), res.losses.end(), std::uint8_t{1}));
  res.accuracy = 1.0 - wrong / static_cast<double>(res.losses.size());
  res.p0 = static_cast<double>(std::max(res.n_real, res.n_syn)) / static_cast<double>(res.n_real + res.n_syn);
  auto tails = binomial_detection_test(res.losses, res.p0);
  res.p_value = tails.upper;
  res.p_value_lower = tails.lower;
  res.auc = auc(cv.probabilities, data.y);
  res.legacy_ld_score = 2.0 * std::max(res.auc, 0.5) - 1.0;
  res.copying_flag = data_copying_diagnostic(res, options.alpha);

  if (options.importances) {
    auto model = fit(learner, data.X, data.y);
    if (model->raw_importances()) res.importances = feature_importance(*model);
  }
  return res;
}

DetectionResult discriminative_detection(const Database& real, const Database& syn, std::string_view table,
                                         std::span<const std::string> columns, const LearnerSpec& learner,
                                         const DetectionOptions& options) {
  if (!real.has_table(table) || !syn.has_table(table))
    throw InvalidArgument("table '" + std::string(table) + "' is missing from one of the databases");
  const Table& rt = real.table(table);
  const Table& st = syn.table(table);
  DetectionResult res;
  if (columns.empty()) {
    res = detect_tables(rt, st, {}, learner, options);
  } else {
    for (const auto& c : columns) {
      if (!rt.has_column(c) || !st.has_column(c))
        throw InvalidArgument("column '" + c + "' is not shared by both tables");
      if (rt.meta().is_key_column(c)) throw InvalidArgument("column '" + c + "' is a key column");
    }
    res = detect_tables(rt.select(columns), st.select(columns), {}, learner, options);
  }
  res.method = learner.kind == LearnerKind::Logistic ? "ld" : "dd";
  res.table = std::string(table);
  return res;
}

DetectionResult discriminative_detection_with_aggregation(const Database& real, const Database& syn,
                                                          std::string_view table, const LearnerSpec& learner,
                                                          const DetectionOptions& options) {
  if (real.schema().children_of(table).empty())
    throw InvalidArgument("table '" + std::string(table) + "' has no child tables to aggregate");
  auto ra = relational_aggregation(real, table);
  auto sa = relational_aggregation(syn, table);
  auto res = detect_tables(ra.table, sa.table, ra.provenance, learner, options);
  res.method = "dda";
  res.table = std::string(table);
  return res;
}

DetectionResult logistic_detection(const Database& real, const Database& syn, std::string_view table,
                                   std::span<const std::string> columns, const DetectionOptions& options) {
  auto res = discriminative_detection(real, syn, table, columns, LearnerSpec::logistic_default(), options);
  res.method = "ld";
  return res;
}

DetectionResult parent_child_detection(const Database& real, const Database& syn, const Relationship& relationship,
                                       const LearnerSpec& learner, const DetectionOptions& options) {
  auto rt = denormalize(real, relationship.parent, relationship.child);
  auto st = denormalize(syn, relationship.parent, relationship.child);
  auto res = detect_tables(rt, st, {}, learner, options);
  res.method = "pc";
  res.table = rt.name();
  res.caveat = std::string(kParentChildCaveat);
  return res;
}

CopyingFlag data_copying_diagnostic(const DetectionResult& result, double alpha) {
  return result.p_value_lower < alpha ? CopyingFlag::SuspectedCopying : CopyingFlag::None;
}

}  // namespace synthrel
