#include "synthrel/benchmark.hpp"

#include <algorithm>
#include <fstream>

#include "synthrel/error.hpp"
#include "synthrel/io.hpp"
#include "synthrel/random.hpp"

#ifndef SYNTHREL_VERSION
#define SYNTHREL_VERSION "0.0.0"
#endif

namespace synthrel {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Suite suite) noexcept {
  switch (suite) {
    case Suite::SingleColumn: return "single-column";
    case Suite::SingleTable: return "single-table";
    case Suite::MultiTable: return "multi-table";
    case Suite::Utility: return "utility";
  }
  return "unknown";
}

std::set<Suite> parse_suites(const std::vector<std::string>& names) {
  const Suite all[] = {Suite::SingleColumn, Suite::SingleTable, Suite::MultiTable, Suite::Utility};
  std::set<Suite> out;
  for (const auto& n : names) {
    if (n == "all") {
      out.insert(std::begin(all), std::end(all));
      continue;
    }
    bool found = false;
    for (auto s : all)
      if (to_string(s) == n) {
        out.insert(s);
        found = true;
      }
    if (!found) throw InvalidArgument("unknown suite '" + n + "'");
  }
  if (out.empty()) throw InvalidArgument("no suites selected");
  return out;
}

void BenchmarkOptions::check() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0, 1)");
  if (folds < 2) throw InvalidArgument("folds must be at least 2");
  if (bootstrap_replications < 100) throw InvalidArgument("bootstrap needs at least 100 replications");
  if (mmd_max_rows < 2) throw InvalidArgument("mmd_max_rows must be at least 2");
  if (workers < 1) throw InvalidArgument("workers must be at least 1");
  if (detectors.empty()) throw InvalidArgument("at least one detector is required");
  for (auto d : detectors)
    if (d != LearnerKind::Logistic && d != LearnerKind::Gbt)
      throw InvalidArgument("detectors must be logistic or gbt");
}

ojson BenchmarkOptions::to_json() const {
  ojson j;
  j["suites"] = ojson::array();
  for (auto s : suites) j["suites"].push_back(std::string(to_string(s)));
  j["alpha"] = alpha;
  j["seed"] = seed;
  j["row_cap"] = row_cap;
  j["folds"] = folds;
  j["bootstrap_replications"] = bootstrap_replications;
  j["mmd_max_rows"] = mmd_max_rows;
  j["include_legacy_pc"] = include_legacy_pc;
  j["detectors"] = ojson::array();
  for (auto d : detectors) j["detectors"].push_back(std::string(to_string(d)));
  return j;
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

BenchmarkConfig BenchmarkConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  BenchmarkConfig c;
  auto& o = c.options;
  // Options may sit at the top level or under "options".
  const auto& oj = j.contains("options") ? j["options"] : j;
  if (oj.contains("suites")) {
    if (oj["suites"].is_string()) {
      o.suites = parse_suites({oj["suites"].get<std::string>()});
    } else {
      o.suites = parse_suites(oj["suites"].get<std::vector<std::string>>());
    }
  }
  o.alpha = oj.value("alpha", o.alpha);
  o.seed = oj.value("seed", o.seed);
  o.row_cap = oj.value("row_cap", o.row_cap);
  o.folds = oj.value("folds", o.folds);
  o.bootstrap_replications = oj.value("bootstrap_replications", o.bootstrap_replications);
  o.mmd_max_rows = oj.value("mmd_max_rows", o.mmd_max_rows);
  o.include_legacy_pc = oj.value("include_legacy_pc", o.include_legacy_pc);
  o.workers = oj.value("workers", o.workers);
  if (oj.contains("detectors")) {
    o.detectors.clear();
    for (const auto& d : oj["detectors"]) o.detectors.push_back(parse_learner_kind(d.get<std::string>()));
  }
  o.check();

  for (const auto& d : j.at("datasets")) {
    DatasetEntry e;
    e.name = d.at("name").get<std::string>();
    e.metadata = resolve(base_dir, d.at("metadata").get<std::string>());
    e.data = resolve(base_dir, d.at("data").get<std::string>());
    for (const auto& m : d.at("methods")) {
      MethodEntry me;
      me.name = m.at("name").get<std::string>();
      for (const auto& r : m.at("replications")) me.replications.push_back(resolve(base_dir, r.get<std::string>()));
      if (me.replications.empty())
        throw InvalidArgument("method '" + me.name + "' of dataset '" + e.name + "' has no replications");
      e.methods.push_back(std::move(me));
    }
    if (d.contains("utility_tasks"))
      for (const auto& t : d["utility_tasks"]) e.utility_tasks.push_back(UtilityTask::from_json(t));
    c.datasets.push_back(std::move(e));
  }
  return c;
}

BenchmarkConfig BenchmarkConfig::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("invalid config '" + path.string() + "': " + e.what());
  }
  return from_json(j, path.parent_path());
}

namespace {

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ojson interval_json(const Interval& ci) { return ojson::array({ci.low, ci.high}); }

ojson learner_json(const LearnerSpec& s) { return s.to_json(); }

LearnerSpec detector_spec(LearnerKind kind) {
  return kind == LearnerKind::Logistic ? LearnerSpec::logistic_default() : LearnerSpec::gbt_default();
}

// Bootstrap null intervals depend only on the real data, so they are shared
// across methods and replications.
using CiCache = std::map<std::string, Interval>;

struct Cell {
  const Database& real;
  const Database& syn;
  const std::string& dataset;
  const std::string& method;
  int replication;
  const BenchmarkOptions& options;
  CiCache& cache;
  std::vector<ResultRow> rows;

  ResultRow row(const std::string& metric, Granularity g, const std::string& table,
                const std::optional<std::string>& column) const {
    ResultRow r;
    r["dataset"] = dataset;
    r["method"] = method;
    r["replication"] = replication;
    r["metric"] = metric;
    r["granularity"] = std::string(to_string(g));
    ojson target;
    target["table"] = table;
    target["column"] = column ? ojson(*column) : ojson(nullptr);
    r["target"] = std::move(target);
    return r;
  }

  std::uint64_t seed_for(std::string_view purpose, const std::string& metric, const std::string& table,
                         const std::optional<std::string>& column) const {
    std::string key(purpose);
    key += '|' + dataset + '|' + metric + '|' + table + '|' + column.value_or("");
    return derive_seed(options.seed, stable_hash(key));
  }

  template <class F>
  void attempt(const std::string& metric, Granularity g, const std::string& table,
               const std::optional<std::string>& column, F&& compute) {
    ResultRow r = row(metric, g, table, column);
    try {
      compute(r);
    } catch (const std::exception& e) {
      r["skipped"] = e.what();
    }
    rows.push_back(std::move(r));
  }

  void put_metric(ResultRow& r, const MetricResult& m) const {
    r["value"] = m.value;
    if (m.p_value) r["p_value"] = *m.p_value;
    if (m.ci) r["ci"] = interval_json(*m.ci);
    r["separable"] = m.separable;
    r["alpha"] = m.alpha;
    if (!m.details.empty()) r["details"] = m.details;
  }

  void put_detection(ResultRow& r, const DetectionResult& d) const {
    r["value"] = d.accuracy;
    r["p_value"] = d.p_value;
    r["separable"] = d.separable(options.alpha);
    r["alpha"] = options.alpha;
    ojson det;
    det["p0"] = d.p0;
    det["p_value_lower"] = d.p_value_lower;
    det["auc"] = d.auc;
    det["legacy_ld_score"] = d.legacy_ld_score;
    det["copying_flag"] = std::string(to_string(d.copying_flag));
    det["folds"] = d.folds;
    det["n_real"] = d.n_real;
    det["n_synthetic"] = d.n_syn;
    det["rows_capped"] = d.rows_capped;
    det["learner"] = learner_json(d.learner);
    if (d.importances) {
      ojson imp = ojson::array();
      std::size_t shown = 0;
      for (const auto& w : *d.importances) {
        if (shown++ == 20) break;
        imp.push_back({{"feature", w.feature}, {"weight", w.weight}, {"provenance", std::string(to_string(w.provenance))}});
      }
      det["importances"] = std::move(imp);
    }
    if (d.caveat) det["caveat"] = *d.caveat;
    if (!d.warnings.empty()) det["warnings"] = d.warnings;
    r["details"] = std::move(det);
  }

  DetectionOptions detection_options(const std::string& metric, const std::string& table,
                                     const std::optional<std::string>& column, bool importances) const {
    DetectionOptions o;
    o.folds = options.folds;
    o.seed = seed_for("detect", metric, table, column);
    o.importances = importances;
    o.row_cap = options.row_cap;
    o.alpha = options.alpha;
    return o;
  }

  void bootstrap_metric(ResultRow& r, const std::string& metric, Granularity g, const Table& real_part,
                        const std::optional<std::string>& column, double observed, const TableMetric& fn,
                        Interval support) {
    const std::string key = metric + '|' + real_part.name() + '|' + column.value_or("");
    BootstrapSpec spec;
    spec.replications = options.bootstrap_replications;
    spec.alpha = options.alpha;
    spec.seed = seed_for("bootstrap", metric, real_part.name(), column);
    spec.support = support;
    spec.workers = options.workers;
    MetricResult m;
    if (auto it = cache.find(key); it != cache.end()) {
      m = MetricResult::with_ci(metric, g, observed, it->second, options.alpha);
      m.details["replications"] = spec.replications;
      m.details["goal"] = "minimize";
      m.details["seed"] = spec.seed;
    } else {
      m = bootstrap_separability(fn, real_part, observed, spec, metric, g);
      cache.emplace(key, *m.ci);
    }
    put_metric(r, m);
  }

  void single_column() {
    for (const auto& meta : real.schema().tables) {
      const auto& rt = real.table(meta.name);
      const auto& st = syn.table(meta.name);
      for (const auto& col : feature_columns(meta)) {
        const auto type = meta.find_column(col)->sem_type;
        const std::optional<std::string> column = col;
        const std::vector<std::string> one{col};
        const Table rcol = rt.select(one);
        const Table scol = st.select(one);

        if (is_continuous(type)) {
          attempt("ks", Granularity::SingleColumn, meta.name, column, [&](ResultRow& r) {
            auto a = rcol.column(0).non_null_numbers();
            auto b = scol.column(0).non_null_numbers();
            auto t = ks_two_sample(a, b);
            auto m = MetricResult::with_p_value("ks", Granularity::SingleColumn, t.statistic, t.p_value, options.alpha);
            if (std::min(a.size(), b.size()) < 25) m.details["note"] = "asymptotic p-value with fewer than 25 values";
            put_metric(r, m);
          });
          attempt("wasserstein", Granularity::SingleColumn, meta.name, column, [&](ResultRow& r) {
            auto fn = [](const Table& a, const Table& b) {
              return wasserstein1(a.column(0).non_null_numbers(), b.column(0).non_null_numbers());
            };
            bootstrap_metric(r, "wasserstein", Granularity::SingleColumn, rcol, column, fn(rcol, scol), fn,
                             {0.0, std::numeric_limits<double>::infinity()});
          });
        } else {
          attempt("chi2", Granularity::SingleColumn, meta.name, column, [&](ResultRow& r) {
            auto t = chi2_two_sample(rcol.column(0).category_labels(), scol.column(0).category_labels());
            put_metric(r, MetricResult::with_p_value("chi2", Granularity::SingleColumn, t.statistic, t.p_value,
                                                     options.alpha));
          });
        }
        for (auto kind : {DistanceKind::TotalVariation, DistanceKind::Hellinger, DistanceKind::JensenShannon}) {
          const std::string name(to_string(kind));
          attempt(name, Granularity::SingleColumn, meta.name, column, [&](ResultRow& r) {
            auto fn = [kind](const Table& a, const Table& b) { return column_distance(kind, a.column(0), b.column(0)); };
            bootstrap_metric(r, name, Granularity::SingleColumn, rcol, column, fn(rcol, scol), fn, {0.0, 1.0});
          });
        }
        for (auto d : options.detectors) {
          const std::string name = "dd_" + std::string(to_string(d));
          attempt(name, Granularity::SingleColumn, meta.name, column, [&](ResultRow& r) {
            auto res = discriminative_detection(real, syn, meta.name, one, detector_spec(d),
                                                detection_options(name, meta.name, column, false));
            put_detection(r, res);
          });
        }
      }
    }
  }

  void single_table() {
    for (const auto& meta : real.schema().tables) {
      const auto& rt = real.table(meta.name);
      const auto& st = syn.table(meta.name);
      const auto cols = feature_columns(meta);
      if (cols.empty()) continue;
      const Table rf = rt.select(cols);
      const Table sf = st.select(cols);

      attempt("mmd", Granularity::SingleTable, meta.name, std::nullopt, [&](ResultRow& r) {
        auto cap = [&](const Table& t, std::uint64_t stream) {
          if (t.row_count() <= options.mmd_max_rows) return t;
          auto perm = Rng(derive_seed(options.seed, stream)).permutation(t.row_count());
          perm.resize(options.mmd_max_rows);
          std::sort(perm.begin(), perm.end());
          return t.take(perm);
        };
        const Table ra = cap(rf, stable_hash("mmd-real|" + dataset + '|' + meta.name));
        const Table sa = cap(sf, stable_hash("mmd-syn|" + dataset + '|' + meta.name));
        auto fn = [](const Table& a, const Table& b) { return mmd(a, b); };
        bootstrap_metric(r, "mmd", Granularity::SingleTable, ra, std::nullopt, mmd(ra, sa), fn,
                         {0.0, std::numeric_limits<double>::infinity()});
        if (ra.row_count() < rf.row_count() || sa.row_count() < sf.row_count())
          r["details"]["subsampled_to"] = options.mmd_max_rows;
        r["details"]["kernel"] = "rbf, median-heuristic bandwidth";
      });

      std::size_t numeric = 0;
      for (const auto& c : cols) numeric += is_continuous(meta.find_column(c)->sem_type);
      if (numeric >= 2) {
        attempt("pcd", Granularity::SingleTable, meta.name, std::nullopt, [&](ResultRow& r) {
          auto observed = pcd(rf, sf);
          auto fn = [](const Table& a, const Table& b) { return pcd(a, b).value; };
          bootstrap_metric(r, "pcd", Granularity::SingleTable, rf, std::nullopt, observed.value, fn,
                           {0.0, std::numeric_limits<double>::infinity()});
          if (!observed.degenerate_columns.empty()) r["details"]["degenerate_columns"] = observed.degenerate_columns;
        });
      }

      for (auto d : options.detectors) {
        const std::string name = "dd_" + std::string(to_string(d));
        attempt(name, Granularity::SingleTable, meta.name, std::nullopt, [&](ResultRow& r) {
          auto res = discriminative_detection(real, syn, meta.name, {}, detector_spec(d),
                                              detection_options(name, meta.name, std::nullopt, true));
          put_detection(r, res);
        });
      }
    }
  }

  void multi_table() {
    const auto& schema = real.schema();
    for (const auto& rel : schema.relationships()) {
      const std::optional<std::string> link = rel.child + "." + rel.fk_column;
      attempt("cardinality_shape_similarity", Granularity::MultiTable, rel.parent, link, [&](ResultRow& r) {
        put_metric(r, cardinality_shape_similarity(real, syn, rel, options.alpha));
      });
    }
    for (const auto& meta : schema.tables) {
      if (schema.children_of(meta.name).empty()) continue;
      for (auto d : options.detectors) {
        const std::string name = "dda_" + std::string(to_string(d));
        attempt(name, Granularity::MultiTable, meta.name, std::nullopt, [&](ResultRow& r) {
          auto res = discriminative_detection_with_aggregation(
              real, syn, meta.name, detector_spec(d), detection_options(name, meta.name, std::nullopt, true));
          put_detection(r, res);
        });
      }
    }
    if (!options.include_legacy_pc) return;
    for (const auto& rel : schema.relationships()) {
      const std::optional<std::string> link = rel.child + "." + rel.fk_column;
      for (auto d : options.detectors) {
        const std::string name = "pc_" + std::string(to_string(d));
        attempt(name, Granularity::MultiTable, rel.parent, link, [&](ResultRow& r) {
          auto res = parent_child_detection(real, syn, rel, detector_spec(d),
                                            detection_options(name, rel.parent, link, true));
          put_detection(r, res);
        });
      }
    }
  }

  void utility(std::span<const UtilityTask> tasks) {
    for (const auto& task : tasks) {
      ResultRow r = row("utility", Granularity::MultiTable, task.table, task.target);
      r["granularity"] = "utility";
      try {
        auto split = split_database(real, task);
        auto panel = default_learner_panel(task.kind);
        auto u = tstr(split.train, split.test, syn, task, panel);
        ojson det;
        det["task"] = task.to_json();
        det["score"] = u.score_name;
        det["naive_baseline"] = u.naive_baseline;
        ojson scores = ojson::array();
        for (const auto& s : u.scores) {
          ojson e;
          e["learner"] = s.learner;
          e["real_trained"] = s.real_trained ? ojson(*s.real_trained) : ojson(nullptr);
          e["synthetic_trained"] = s.syn_trained ? ojson(*s.syn_trained) : ojson(nullptr);
          if (s.error) e["error"] = *s.error;
          scores.push_back(std::move(e));
        }
        det["scores"] = std::move(scores);
        auto corr = [](const RankCorrelations& c) {
          auto v = [](const std::optional<double>& x) { return x ? ojson(*x) : ojson("undefined"); };
          return ojson{{"spearman", v(c.spearman)}, {"kendall", v(c.kendall)}, {"weighted_kendall", v(c.weighted_kendall)}};
        };
        det["model_rank"] = corr(u.model_rank);
        det["feature_rank"] = corr(u.feature_rank);
        det["notes"] = u.notes;
        r["details"] = std::move(det);
      } catch (const std::exception& e) {
        r["skipped"] = e.what();
      }
      rows.push_back(std::move(r));
    }
  }
};

std::vector<ResultRow> evaluate_cell(const Database& real, const Database& syn, const std::string& dataset,
                                     const std::string& method, int replication, const BenchmarkOptions& options,
                                     std::span<const UtilityTask> tasks, CiCache& cache) {
  if (!(real.schema() == syn.schema())) throw InvalidArgument("real and synthetic databases have different schemas");
  Cell cell{real, syn, dataset, method, replication, options, cache, {}};
  if (options.suites.count(Suite::SingleColumn)) cell.single_column();
  if (options.suites.count(Suite::SingleTable)) cell.single_table();
  if (options.suites.count(Suite::MultiTable)) cell.multi_table();
  if (options.suites.count(Suite::Utility)) cell.utility(tasks);
  return std::move(cell.rows);
}

ResultRow skip_row(const std::string& dataset, const std::string& method, int replication, const std::string& why) {
  ResultRow r;
  r["dataset"] = dataset;
  r["method"] = method;
  r["replication"] = replication;
  r["metric"] = "*";
  r["skipped"] = why;
  return r;
}

std::string describe(const ValidationReport& v) {
  std::string s = std::to_string(v.violations.size()) + " referential-integrity violation(s)";
  if (!v.violations.empty()) s += ", first: " + v.violations.front().message;
  return s;
}

void finish_environment(Report& report) {
  ojson caps = ojson::array();
  for (const auto& r : report.results) {
    if (!r.contains("details") || !r["details"].is_object()) continue;
    const auto& d = r["details"];
    std::string where = r["dataset"].get<std::string>() + "/" + r["method"].get<std::string>() + "/" +
                        std::to_string(r["replication"].get<int>()) + "/" + r["metric"].get<std::string>() + "/" +
                        r["target"]["table"].get<std::string>();
    if (d.value("rows_capped", false)) caps.push_back("detection row cap: " + where);
    if (d.contains("subsampled_to")) caps.push_back("mmd row cap: " + where);
  }
  report.environment["caps_triggered"] = std::move(caps);
}

}  // namespace

std::vector<ResultRow> evaluate_pair(const Database& real, const Database& syn, const std::string& dataset,
                                     const std::string& method, int replication, const BenchmarkOptions& options,
                                     std::span<const UtilityTask> tasks) {
  options.check();
  CiCache cache;
  return evaluate_cell(real, syn, dataset, method, replication, options, tasks, cache);
}

ojson environment_block(const BenchmarkOptions& options) {
  ojson env;
  env["tool"] = "synthrel";
  env["tool_version"] = SYNTHREL_VERSION;
  env["options"] = options.to_json();
  ojson learners;
  learners["logistic"] = LearnerSpec::logistic_default().to_json();
  learners["gbt"] = LearnerSpec::gbt_default().to_json();
  env["detectors"] = std::move(learners);
  env["utility_panel"] = {"linear", "tree", "gbt", "knn", "logistic (classification)"};
  env["ks_p_value"] = "asymptotic Kolmogorov distribution";
  env["chi2_p_value"] = "regularized upper incomplete gamma";
  env["mmd"] = {{"kernel", "rbf"}, {"bandwidth", "median pairwise distance of the pooled sample"},
                {"estimator", "biased V-statistic"}};
  env["distance_bins"] = 50;
  env["bootstrap"] = "two independent resamples of the real table per replicate, percentile interval";
  return env;
}

Report run_benchmark(const Database& real, const std::map<std::string, std::vector<Database>>& synthetic,
                     const std::string& dataset, const BenchmarkOptions& options, std::span<const UtilityTask> tasks) {
  options.check();
  Report report;
  report.environment = environment_block(options);
  CiCache cache;
  for (const auto& [method, reps] : synthetic) {
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const int replication = static_cast<int>(i) + 1;
      auto v = validate(reps[i]);
      if (!v.ok()) {
        report.results.push_back(skip_row(dataset, method, replication, describe(v)));
        continue;
      }
      try {
        auto rows = evaluate_cell(real, reps[i], dataset, method, replication, options, tasks, cache);
        for (auto& r : rows) report.results.push_back(std::move(r));
      } catch (const std::exception& e) {
        report.results.push_back(skip_row(dataset, method, replication, e.what()));
      }
    }
  }
  finish_environment(report);
  return report;
}

Report run_benchmark(const BenchmarkConfig& config) {
  const auto& options = config.options;
  options.check();
  Report report;
  report.environment = environment_block(options);
  ojson datasets = ojson::array();

  for (const auto& d : config.datasets) {
    datasets.push_back(d.name);
    CiCache cache;
    std::optional<Database> real;
    std::string real_failure;
    try {
      real = load_database(d.metadata, d.data);
      auto v = validate(*real);
      if (!v.ok()) {
        real_failure = "real data: " + describe(v);
        real.reset();
      }
    } catch (const std::exception& e) {
      real_failure = std::string("real data: ") + e.what();
    }

    for (const auto& m : d.methods) {
      for (std::size_t i = 0; i < m.replications.size(); ++i) {
        const int replication = static_cast<int>(i) + 1;
        if (!real) {
          report.results.push_back(skip_row(d.name, m.name, replication, real_failure));
          continue;
        }
        try {
          auto syn = load_database(real->schema(), m.replications[i]);
          auto v = validate(syn);
          if (!v.ok()) {
            report.results.push_back(skip_row(d.name, m.name, replication, "synthetic data: " + describe(v)));
            continue;
          }
          auto rows = evaluate_cell(*real, syn, d.name, m.name, replication, options, d.utility_tasks, cache);
          for (auto& r : rows) report.results.push_back(std::move(r));
        } catch (const std::exception& e) {
          report.results.push_back(skip_row(d.name, m.name, replication, e.what()));
        }
      }
    }
  }
  report.environment["datasets"] = std::move(datasets);
  finish_environment(report);
  return report;
}

}  // namespace synthrel
