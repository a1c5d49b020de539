#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <tuple>

#include "synthrel/benchmark.hpp"
#include "synthrel/error.hpp"
#include "synthrel/random.hpp"

namespace synthrel {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

ojson Report::to_json() const {
  ojson j;
  j["version"] = version;
  j["environment"] = environment;
  j["results"] = ojson::array();
  for (const auto& r : results) j["results"].push_back(r);
  return j;
}

std::string Report::dump() const { return to_json().dump(2) + "\n"; }

Report Report::from_json(const nlohmann::ordered_json& j) {
  Report r;
  if (!j.is_object() || !j.contains("version") || !j.contains("results"))
    throw LoadError("not a report document: expected \"version\" and \"results\"");
  r.version = j["version"].get<std::string>();
  r.environment = j.contains("environment") ? j["environment"] : ojson::object();
  for (const auto& row : j["results"]) r.results.push_back(row);
  return r;
}

Report Report::read(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open report '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  ojson j;
  try {
    j = ojson::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("invalid report '" + path.string() + "': " + e.what());
  }
  try {
    return from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("invalid report '" + path.string() + "': " + e.what());
  }
}

void Report::write(const fs::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write report '" + path.string() + "'");
  out << dump();
  if (!out) throw Error("failed writing report '" + path.string() + "'");
}

// ---------------------------------------------------------------------------

namespace {

bool counted(const ResultRow& r) {
  const auto metric = r.value("metric", std::string());
  if (metric == "*" || metric == "utility") return false;
  return r.contains("separable") || r.contains("skipped");
}

}  // namespace

std::vector<FailureCount> failure_counts(const Report& report) {
  std::vector<FailureCount> out;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  for (const auto& r : report.results) {
    if (!counted(r)) continue;
    auto key = std::make_tuple(r["dataset"].get<std::string>(), r["method"].get<std::string>(),
                               r["metric"].get<std::string>());
    auto [it, fresh] = index.emplace(key, out.size());
    if (fresh) out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), {}});
    auto& fc = out[it->second];
    const int rep = r["replication"].get<int>();
    if (rep < 1) continue;
    if (fc.per_replication.size() < static_cast<std::size_t>(rep)) fc.per_replication.resize(rep, {0, 0});
    auto& cell = fc.per_replication[rep - 1];
    cell.second += 1;
    if (r.value("separable", false)) cell.first += 1;
  }
  return out;
}

namespace {

std::optional<double> pearson(std::span<const std::pair<double, double>> pairs, std::span<const std::size_t> idx) {
  const double n = static_cast<double>(idx.size());
  double mx = 0, my = 0;
  for (auto i : idx) {
    mx += pairs[i].first;
    my += pairs[i].second;
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (auto i : idx) {
    const double dx = pairs[i].first - mx;
    const double dy = pairs[i].second - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

CorrelationEstimate fidelity_utility_correlation(std::span<const std::pair<double, double>> pairs, int replications,
                                                 std::uint64_t seed, double alpha) {
  if (pairs.size() < 3) throw InvalidArgument("fidelity-utility correlation needs at least 3 pairs");
  if (replications < 1) throw InvalidArgument("replications must be positive");
  std::vector<std::size_t> all(pairs.size());
  std::iota(all.begin(), all.end(), 0);
  CorrelationEstimate est;
  est.rho = pearson(pairs, all);
  if (!est.rho) return est;

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(replications));
  for (int r = 0; r < replications; ++r) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    auto idx = rng.resample_indices(pairs.size());
    if (auto v = pearson(pairs, idx)) values.push_back(*v);
  }
  if (!values.empty()) est.ci = Interval{percentile(values, alpha / 2.0), percentile(values, 1.0 - alpha / 2.0)};
  return est;
}

// ---------------------------------------------------------------------------

namespace {

std::string format_number(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc() ? std::string(buf, end) : "NA";
}

std::string format_counts(const FailureCount& fc) {
  std::string s;
  int total = 0;
  for (std::size_t i = 0; i < fc.per_replication.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(fc.per_replication[i].first);
    total = std::max(total, fc.per_replication[i].second);
  }
  return s + " (" + std::to_string(total) + ")";
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (width.size() <= c) width.resize(c + 1, 0);
      width[c] = std::max(width[c], r[c].size());
    }
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string line;
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      if (c) line += "  ";
      line += rows[i][c];
      if (c + 1 < rows[i].size()) line.append(width[c] - rows[i][c].size(), ' ');
    }
    out += line + "\n";
    if (i == 0) {
      std::string rule;
      for (std::size_t c = 0; c < width.size(); ++c) {
        if (c) rule += "  ";
        rule.append(width[c], '-');
      }
      out += rule + "\n";
    }
  }
  return out;
}

std::string file_safe(std::string s) {
  for (auto& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
  return s;
}

template <class T>
void add_unique(std::vector<T>& v, const T& x) {
  if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

Summary render_summary(const Report& report) {
  Summary out;
  auto counts = failure_counts(report);

  std::vector<std::string> datasets;
  for (const auto& fc : counts) add_unique(datasets, fc.dataset);
  for (const auto& d : datasets) {
    std::vector<std::string> methods;
    std::vector<std::string> metrics;
    for (const auto& fc : counts)
      if (fc.dataset == d) {
        add_unique(methods, fc.method);
        add_unique(metrics, fc.metric);
      }
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"metric"});
    for (const auto& m : methods) rows[0].push_back(m);
    for (const auto& metric : metrics) {
      std::vector<std::string> row{metric};
      for (const auto& m : methods) {
        auto it = std::find_if(counts.begin(), counts.end(), [&](const FailureCount& fc) {
          return fc.dataset == d && fc.method == m && fc.metric == metric;
        });
        row.push_back(it == counts.end() ? "-" : format_counts(*it));
      }
      rows.push_back(std::move(row));
    }
    if (!out.text.empty()) out.text += "\n";
    out.text += "dataset: " + d + "\n" + render_table(rows);
  }

  for (const auto& r : report.results) {
    if (!r.contains("value") || !r["value"].is_number()) continue;
    const auto name = file_safe(r["dataset"].get<std::string>() + "__" + r["metric"].get<std::string>()) + ".tsv";
    auto& file = out.plot_files[name];
    if (file.empty()) file = "method\treplication\ttable\tcolumn\tvalue\tci_low\tci_high\n";
    const auto& target = r["target"];
    file += r["method"].get<std::string>() + "\t" + std::to_string(r["replication"].get<int>()) + "\t" +
            target["table"].get<std::string>() + "\t" +
            (target["column"].is_string() ? target["column"].get<std::string>() : std::string("NA")) + "\t" +
            format_number(r["value"].get<double>()) + "\t";
    if (r.contains("ci")) {
      file += format_number(r["ci"][0].get<double>()) + "\t" + format_number(r["ci"][1].get<double>());
    } else {
      file += "NA\tNA";
    }
    file += "\n";
  }
  return out;
}

Comparison compare_reports(const Report& a, const Report& b) {
  auto ca = failure_counts(a);
  auto cb = failure_counts(b);
  Comparison out;
  auto find = [](const std::vector<FailureCount>& v, const FailureCount& key) -> const FailureCount* {
    for (const auto& fc : v)
      if (fc.dataset == key.dataset && fc.method == key.method && fc.metric == key.metric) return &fc;
    return nullptr;
  };
  auto line = [&](const FailureCount& key, const FailureCount* x, const FailureCount* y) {
    const std::string left = x ? format_counts(*x) : "absent";
    const std::string right = y ? format_counts(*y) : "absent";
    if (x && y && x->per_replication == y->per_replication) return;
    out.identical = false;
    out.text += key.dataset + " / " + key.method + " / " + key.metric + ": " + left + " -> " + right + "\n";
  };
  for (const auto& fc : ca) line(fc, &fc, find(cb, fc));
  for (const auto& fc : cb)
    if (!find(ca, fc)) line(fc, nullptr, &fc);
  if (out.identical) out.text = "no differences in failure counts\n";
  return out;
}

}  // namespace synthrel
