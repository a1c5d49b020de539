#include "synthrel/utility.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "synthrel/aggregation.hpp"
#include "synthrel/error.hpp"
#include "synthrel/random.hpp"

namespace synthrel {

UtilityTask UtilityTask::from_json(const nlohmann::json& j) {
  UtilityTask t;
  t.table = j.at("table").get<std::string>();
  t.target = j.at("target").get<std::string>();
  t.name = j.value("name", t.table + "." + t.target);
  t.kind = parse_task_kind(j.at("task").get<std::string>());
  t.positive_class = j.value("positive_class", std::string());
  t.test_fraction = j.value("test_fraction", 0.25);
  t.split_seed = j.value("split_seed", std::uint64_t{0});
  if (!(t.test_fraction > 0.0 && t.test_fraction < 1.0))
    throw InvalidArgument("utility task test_fraction must lie in (0, 1)");
  return t;
}

nlohmann::ordered_json UtilityTask::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["table"] = table;
  j["target"] = target;
  j["task"] = std::string(to_string(kind));
  if (!positive_class.empty()) j["positive_class"] = positive_class;
  j["test_fraction"] = test_fraction;
  j["split_seed"] = split_seed;
  return j;
}

namespace {

std::vector<std::optional<double>> target_values(const Column& col, const UtilityTask& task) {
  std::vector<std::optional<double>> y(col.size());
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col.is_null(i)) continue;
    if (task.kind == TaskKind::Regression) {
      if (col.holds_text()) throw InvalidArgument("regression target '" + task.target + "' is not numeric");
      y[i] = col.number(i);
    } else if (col.type() == SemType::Categorical) {
      if (task.positive_class.empty())
        throw InvalidArgument("categorical target '" + task.target + "' needs a positive_class");
      y[i] = col.text(i) == task.positive_class ? 1.0 : 0.0;
    } else {
      const double v = col.number(i);
      if (v != 0.0 && v != 1.0)
        throw InvalidArgument("classification target '" + task.target + "' has values other than 0 and 1");
      y[i] = v;
    }
  }
  return y;
}

}  // namespace

SupervisedTable assemble_table(const Database& db, const UtilityTask& task) {
  if (!db.has_table(task.table)) throw InvalidArgument("unknown utility table '" + task.table + "'");
  const auto& base = db.table(task.table);
  if (!base.has_column(task.target))
    throw InvalidArgument("table '" + task.table + "' has no target column '" + task.target + "'");
  if (base.meta().is_key_column(task.target)) throw InvalidArgument("target column '" + task.target + "' is a key");

  auto agg = relational_aggregation(db, task.table);
  TableMeta meta = agg.table.meta();
  std::vector<Column> columns(agg.table.columns().begin(), agg.table.columns().end());
  std::vector<Provenance> provenance = agg.provenance;

  // Parent attributes through each foreign key.
  std::map<std::string, int> per_parent;
  for (const auto& fk : base.meta().foreign_keys) ++per_parent[fk.parent_table];
  for (const auto& fk : base.meta().foreign_keys) {
    const auto& parent = db.table(fk.parent_table);
    auto owner = resolve_keys(base.column(fk.column), parent.column(parent.meta().primary_key));
    const std::string prefix =
        per_parent[fk.parent_table] > 1 ? fk.parent_table + "[" + fk.column + "]" : fk.parent_table;
    for (const auto& c : feature_columns(parent.meta())) {
      const auto& pc = parent.column(c);
      std::vector<std::size_t> rows;
      std::vector<std::uint8_t> found(owner.size(), 0);
      for (std::size_t i = 0; i < owner.size(); ++i) {
        rows.push_back(owner[i].value_or(0));
        found[i] = owner[i].has_value();
      }
      Column joined;
      if (parent.row_count() == 0) {
        joined = pc.holds_text() ? Column::text(pc.type(), std::vector<std::optional<std::string>>(owner.size()))
                                 : Column::numeric(pc.type(), std::vector<std::optional<double>>(owner.size()));
      } else {
        joined = pc.take(rows);
        std::vector<std::uint8_t> valid(joined.valid().begin(), joined.valid().end());
        for (std::size_t i = 0; i < valid.size(); ++i) valid[i] = valid[i] && found[i];
        joined = joined.holds_text()
                     ? Column::text(pc.type(), std::vector<std::string>(joined.texts().begin(), joined.texts().end()),
                                    valid)
                     : Column::numeric(pc.type(),
                                       std::vector<double>(joined.numbers().begin(), joined.numbers().end()), valid);
      }
      auto name = prefix + "__" + c;
      if (meta.column_index(name)) throw InvalidArgument("joined column name collision: '" + name + "'");
      meta.columns.push_back({name, pc.type(), parent.meta().find_column(c)->datetime_format});
      columns.push_back(std::move(joined));
      provenance.push_back(Provenance::Aggregate);
    }
  }
  Table full(meta, std::move(columns));

  auto y = target_values(full.column(task.target), task);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i]) keep.push_back(i);
  if (keep.empty()) throw InvalidArgument("target column '" + task.target + "' has no non-null values");

  std::vector<std::string> names;
  std::vector<Provenance> kept_provenance;
  for (const auto& c : feature_columns(full.meta()))
    if (c != task.target) {
      names.push_back(c);
      kept_provenance.push_back(provenance[*full.meta().column_index(c)]);
    }
  if (names.empty()) throw InvalidArgument("utility task '" + task.name + "' has no feature columns");

  SupervisedTable out;
  out.features = full.take(keep).select(names);
  out.provenance = std::move(kept_provenance);
  for (auto i : keep) out.y.push_back(*y[i]);
  return out;
}

SupervisedData assemble_supervised(const Database& db, const UtilityTask& task) {
  auto t = assemble_table(db, task);
  auto pre = Preprocessor::fit(t.features, t.provenance);
  return {pre.transform(t.features), std::move(t.y)};
}

DatabaseSplit split_database(const Database& db, const UtilityTask& task) {
  if (!db.has_table(task.table)) throw InvalidArgument("unknown utility table '" + task.table + "'");
  const auto& schema = db.schema();
  const auto& target = db.table(task.table);
  const std::size_t n = target.row_count();
  if (n < 2) throw InvalidArgument("utility split needs at least 2 rows");
  auto n_test = static_cast<std::size_t>(std::llround(task.test_fraction * static_cast<double>(n)));
  n_test = std::clamp<std::size_t>(n_test, 1, n - 1);

  auto perm = Rng(derive_seed(task.split_seed, 0x7e57)).permutation(n);
  std::vector<std::uint8_t> in_test(n, 0);
  for (std::size_t i = 0; i < n_test; ++i) in_test[perm[i]] = 1;

  // side[t][row]: 0 train, 1 test, for the target table and its descendants.
  std::map<std::string, std::vector<std::uint8_t>> side;
  side[task.table] = in_test;
  for (const auto& name : schema.topological_order()) {
    if (side.count(name)) continue;
    const auto& t = db.table(name);
    std::vector<std::uint8_t> s(t.row_count(), 0);
    bool filtered = false;
    for (const auto& fk : t.meta().foreign_keys) {
      auto it = side.find(fk.parent_table);
      if (it == side.end()) continue;
      filtered = true;
      const auto& parent = db.table(fk.parent_table);
      auto owner = resolve_keys(t.column(fk.column), parent.column(parent.meta().primary_key));
      for (std::size_t i = 0; i < owner.size(); ++i)
        if (owner[i] && it->second[*owner[i]]) s[i] = 1;
    }
    if (filtered) side[name] = std::move(s);
  }

  std::vector<Table> train_tables;
  std::vector<Table> test_tables;
  for (const auto& t : db.tables()) {
    auto it = side.find(t.name());
    if (it == side.end()) {
      train_tables.push_back(t);
      test_tables.push_back(t);
      continue;
    }
    std::vector<std::size_t> tr;
    std::vector<std::size_t> te;
    for (std::size_t i = 0; i < it->second.size(); ++i) (it->second[i] ? te : tr).push_back(i);
    train_tables.push_back(t.take(tr));
    test_tables.push_back(t.take(te));
  }
  return {Database(schema, std::move(train_tables)), Database(schema, std::move(test_tables))};
}

std::vector<LearnerSpec> default_learner_panel(TaskKind kind, std::uint64_t seed) {
  std::vector<LearnerSpec> panel;
  for (auto k : {LearnerKind::Linear, LearnerKind::Tree, LearnerKind::Gbt, LearnerKind::Knn}) {
    panel.push_back(LearnerSpec::of(k, kind));
    panel.back().seed = seed;
  }
  if (kind == TaskKind::Classification) {
    panel.push_back(LearnerSpec::logistic_default());
    panel.back().seed = seed;
  }
  return panel;
}

namespace {

double score(TaskKind kind, std::span<const double> pred, std::span<const double> y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (kind == TaskKind::Classification) {
      acc += ((pred[i] > 0.5 ? 1.0 : 0.0) == y[i]) ? 1.0 : 0.0;
    } else {
      acc += (pred[i] - y[i]) * (pred[i] - y[i]);
    }
  }
  acc /= static_cast<double>(y.size());
  return kind == TaskKind::Classification ? acc : std::sqrt(acc);
}

RankCorrelations correlations(std::span<const double> a, std::span<const double> b) {
  RankCorrelations r;
  if (a.size() < 2) return r;
  r.spearman = rank_correlation(RankKind::Spearman, a, b);
  r.kendall = rank_correlation(RankKind::Kendall, a, b);
  r.weighted_kendall = rank_correlation(RankKind::WeightedKendall, a, b);
  return r;
}

}  // namespace

UtilityResult tstr(const Database& real_train, const Database& real_test, const Database& syn, const UtilityTask& task,
                   std::span<const LearnerSpec> learners) {
  auto rt = assemble_table(real_train, task);
  auto te = assemble_table(real_test, task);
  auto st = assemble_table(syn, task);

  const Table* both[] = {&rt.features, &st.features};
  auto pre = Preprocessor::fit(both, rt.provenance);
  const auto Xr = pre.transform(rt.features);
  const auto Xs = pre.transform(st.features);
  const auto Xt = pre.transform(te.features);

  UtilityResult res;
  res.task = task.name;
  res.kind = task.kind;
  res.score_name = task.kind == TaskKind::Classification ? "accuracy" : "rmse";

  {
    double guess = 0.0;
    const double mean = std::accumulate(rt.y.begin(), rt.y.end(), 0.0) / static_cast<double>(rt.y.size());
    guess = task.kind == TaskKind::Classification ? (mean >= 0.5 ? 1.0 : 0.0) : mean;
    std::vector<double> pred(te.y.size(), guess);
    res.naive_baseline = score(task.kind, pred, te.y);
  }

  std::vector<double> real_goodness;
  std::vector<double> syn_goodness;
  std::optional<std::vector<double>> real_importance;
  std::optional<std::vector<double>> syn_importance;

  for (const auto& base : learners) {
    LearnerSpec spec = base;
    spec.task = task.kind;
    LearnerScore s;
    s.learner = spec.name();
    try {
      auto mr = fit(spec, Xr, rt.y);
      s.real_trained = score(task.kind, mr->predict(Xt), te.y);
      auto ms = fit(spec, Xs, st.y);
      s.syn_trained = score(task.kind, ms->predict(Xt), te.y);
      if (spec.kind == LearnerKind::Gbt && !real_importance) {
        real_importance = mr->raw_importances();
        syn_importance = ms->raw_importances();
      }
      const double sign = task.kind == TaskKind::Classification ? 1.0 : -1.0;
      real_goodness.push_back(sign * *s.real_trained);
      syn_goodness.push_back(sign * *s.syn_trained);
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    res.scores.push_back(std::move(s));
  }

  res.model_rank = correlations(real_goodness, syn_goodness);
  if (real_importance && syn_importance) {
    res.feature_rank = correlations(*real_importance, *syn_importance);
  } else {
    res.notes.push_back("no gbt importances; feature-rank correlations undefined");
  }
  res.notes.push_back("learner panel excludes svm, naive bayes and mlp");
  return res;
}

}  // namespace synthrel
