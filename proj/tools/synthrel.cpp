#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "synthrel/benchmark.hpp"
#include "synthrel/error.hpp"
#include "synthrel/io.hpp"

namespace fs = std::filesystem;
using namespace synthrel;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInvalid = 2;
constexpr int kRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int run_validate(const fs::path& metadata, const fs::path& dir) {
  auto db = load_database(metadata, dir);
  auto report = validate(db);
  for (const auto& t : db.tables()) std::cout << t.name() << ": " << t.row_count() << " rows\n";
  if (report.ok()) {
    std::cout << "ok\n";
    return kOk;
  }
  for (const auto& v : report.violations)
    std::cout << to_string(v.kind) << " " << v.table << "." << v.column << " row " << v.row << ": " << v.message
              << "\n";
  std::cout << report.violations.size() << " violation(s)\n";
  return kInvalid;
}

struct EvaluateArgs {
  std::string config;
  std::string real;
  std::vector<std::string> synthetic;
  std::vector<std::string> methods;
  std::string dataset = "dataset";
  int replications = 1;
  std::vector<std::string> suites{"all"};
  std::vector<std::string> tasks;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  bool legacy_pc = false;
  int bootstrap = 1000;
  std::size_t mmd_max_rows = 500;
  int folds = 10;
  unsigned workers = 1;
  std::string out;
};

BenchmarkConfig config_from_args(const EvaluateArgs& a) {
  BenchmarkConfig c;
  auto& o = c.options;
  o.suites = parse_suites(a.suites);
  o.alpha = a.alpha;
  o.seed = a.seed;
  o.include_legacy_pc = a.legacy_pc;
  o.bootstrap_replications = a.bootstrap;
  o.mmd_max_rows = a.mmd_max_rows;
  o.folds = a.folds;
  o.workers = a.workers;
  o.check();

  const auto comma = a.real.find(',');
  if (comma == std::string::npos) throw UsageError("--real expects <metadata>,<data-dir>");
  DatasetEntry d;
  d.name = a.dataset;
  d.metadata = a.real.substr(0, comma);
  d.data = a.real.substr(comma + 1);
  if (a.synthetic.empty()) throw UsageError("--synthetic is required without --config");
  if (!a.methods.empty() && a.methods.size() != a.synthetic.size())
    throw UsageError("--method must be given once per --synthetic");
  if (a.replications < 1) throw UsageError("--replications must be at least 1");
  for (std::size_t i = 0; i < a.synthetic.size(); ++i) {
    MethodEntry m;
    fs::path root(a.synthetic[i]);
    m.name = a.methods.empty() ? root.lexically_normal().filename().string() : a.methods[i];
    if (m.name.empty()) m.name = root.lexically_normal().parent_path().filename().string();
    // Several replications live in numbered subdirectories 1..N.
    if (a.replications == 1) {
      m.replications.push_back(root);
    } else {
      for (int r = 1; r <= a.replications; ++r) m.replications.push_back(root / std::to_string(r));
    }
    d.methods.push_back(std::move(m));
  }
  for (const auto& t : a.tasks) {
    std::ifstream in(t);
    if (!in) throw LoadError("cannot open utility task '" + t + "'");
    nlohmann::json j;
    in >> j;
    if (j.is_array()) {
      for (const auto& e : j) d.utility_tasks.push_back(UtilityTask::from_json(e));
    } else {
      d.utility_tasks.push_back(UtilityTask::from_json(j));
    }
  }
  c.datasets.push_back(std::move(d));
  return c;
}

int run_evaluate(const EvaluateArgs& a) {
  if (a.out.empty()) throw UsageError("--out is required");
  BenchmarkConfig config = a.config.empty() ? config_from_args(a) : BenchmarkConfig::read(a.config);

  // A broken real database is a validation failure of the whole run.
  for (const auto& d : config.datasets) {
    auto real = load_database(d.metadata, d.data);
    auto v = validate(real);
    if (!v.ok()) {
      std::cerr << "real data of '" << d.name << "' has " << v.violations.size()
                << " referential-integrity violation(s); first: " << v.violations.front().message << "\n";
      return kInvalid;
    }
  }

  auto report = run_benchmark(config);
  report.write(a.out);
  std::size_t skipped = 0;
  for (const auto& r : report.results) skipped += r.contains("skipped");
  std::cerr << report.results.size() << " result rows (" << skipped << " skipped) written to " << a.out << "\n";
  return kOk;
}

int run_summarize(const fs::path& report_path, const std::string& plots) {
  auto summary = render_summary(Report::read(report_path));
  std::cout << summary.text;
  if (!plots.empty()) {
    fs::create_directories(plots);
    for (const auto& [name, contents] : summary.plot_files) {
      std::ofstream out(fs::path(plots) / name, std::ios::binary);
      out << contents;
      if (!out) throw Error("cannot write plot file '" + name + "'");
    }
  }
  return kOk;
}

int run_compare(const fs::path& a, const fs::path& b) {
  auto cmp = compare_reports(Report::read(a), Report::read(b));
  std::cout << cmp.text;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fidelity and utility benchmarks for synthetic relational data"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SYNTHREL_VERSION);

  std::string metadata, data_dir;
  auto* validate_cmd = app.add_subcommand("validate", "Load a database and check referential integrity");
  validate_cmd->add_option("metadata", metadata, "Metadata JSON")->required();
  validate_cmd->add_option("dir", data_dir, "Directory with one CSV per table")->required();

  EvaluateArgs ev;
  auto* eval_cmd = app.add_subcommand("evaluate", "Run metric suites and write a JSON report");
  eval_cmd->add_option("--config", ev.config, "Benchmark configuration JSON (replaces --real/--synthetic)");
  eval_cmd->add_option("--real", ev.real, "<metadata>,<data-dir> of the real database");
  eval_cmd->add_option("--synthetic", ev.synthetic, "Synthetic data directory (repeatable)");
  eval_cmd->add_option("--method", ev.methods, "Method name per --synthetic (default: directory name)");
  eval_cmd->add_option("--dataset", ev.dataset, "Dataset name in the report");
  eval_cmd->add_option("--replications", ev.replications, "Replications in subdirectories 1..N");
  eval_cmd->add_option("--suite", ev.suites, "single-column|single-table|multi-table|utility|all");
  eval_cmd->add_option("--task", ev.tasks, "Utility task JSON file (repeatable)");
  eval_cmd->add_option("--alpha", ev.alpha, "Significance level");
  eval_cmd->add_option("--seed", ev.seed, "Root seed");
  eval_cmd->add_flag("--include-legacy-pc", ev.legacy_pc, "Add legacy parent-child detection");
  eval_cmd->add_option("--bootstrap", ev.bootstrap, "Bootstrap replications");
  eval_cmd->add_option("--mmd-max-rows", ev.mmd_max_rows, "Row cap per side for MMD");
  eval_cmd->add_option("--folds", ev.folds, "Cross-validation folds for detection");
  eval_cmd->add_option("--workers", ev.workers, "Bootstrap worker threads");
  eval_cmd->add_option("--out", ev.out, "Report path")->required();

  std::string report_path, plots;
  auto* sum_cmd = app.add_subcommand("summarize", "Print failure-count tables of a report");
  sum_cmd->add_option("report", report_path, "Report JSON")->required();
  sum_cmd->add_option("--plots", plots, "Directory for plot data files");

  std::string left, right;
  auto* cmp_cmd = app.add_subcommand("compare", "Compare failure counts of two reports");
  cmp_cmd->add_option("a", left, "First report")->required();
  cmp_cmd->add_option("b", right, "Second report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*validate_cmd) return run_validate(metadata, data_dir);
    if (*eval_cmd) return run_evaluate(ev);
    if (*sum_cmd) return run_summarize(report_path, plots);
    if (*cmp_cmd) return run_compare(left, right);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const LoadError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
