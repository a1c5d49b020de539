#include "synthrel/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "synthrel/error.hpp"

namespace synthrel {

std::optional<std::size_t> FeatureMatrix::feature_index(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  return std::nullopt;
}

FeatureMatrix FeatureMatrix::take_rows(std::span<const std::size_t> idx) const {
  FeatureMatrix out;
  out.rows = idx.size();
  out.names = names;
  out.provenance = provenance;
  out.values.reserve(idx.size() * cols());
  for (auto r : idx) {
    auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
  }
  return out;
}

FeatureMatrix FeatureMatrix::vstack(const FeatureMatrix& other) const {
  if (other.names != names) throw InvalidArgument("cannot stack feature matrices with different features");
  FeatureMatrix out = *this;
  out.rows += other.rows;
  out.values.insert(out.values.end(), other.values.begin(), other.values.end());
  return out;
}

FeatureMatrix FeatureMatrix::from_rows(std::vector<std::string> names, const std::vector<std::vector<double>>& rows) {
  FeatureMatrix out;
  out.names = std::move(names);
  out.provenance.assign(out.names.size(), Provenance::Original);
  out.rows = rows.size();
  for (const auto& r : rows) {
    if (r.size() != out.names.size()) throw InvalidArgument("row width does not match feature names");
    out.values.insert(out.values.end(), r.begin(), r.end());
  }
  return out;
}

std::vector<std::string> feature_columns(const TableMeta& meta) {
  std::vector<std::string> out;
  for (const auto& c : meta.columns)
    if (!meta.is_key_column(c.name)) out.push_back(c.name);
  return out;
}

Preprocessor Preprocessor::fit(const Table& table, std::span<const Provenance> provenance,
                               const EncodingOptions& options) {
  const Table* tables[] = {&table};
  return fit(tables, provenance, options);
}

Preprocessor Preprocessor::fit(std::span<const Table* const> tables, std::span<const Provenance> provenance,
                               const EncodingOptions& options) {
  if (tables.empty()) throw InvalidArgument("preprocessor needs at least one table");
  const auto& meta = tables.front()->meta();
  if (!provenance.empty() && provenance.size() != meta.columns.size())
    throw InvalidArgument("provenance does not align with table columns");

  Preprocessor pre;
  for (std::size_t j = 0; j < meta.columns.size(); ++j) {
    const auto& cm = meta.columns[j];
    if (meta.is_key_column(cm.name)) continue;
    Encoding enc;
    enc.column = cm.name;
    enc.type = cm.sem_type;
    enc.provenance = provenance.empty() ? Provenance::Original : provenance[j];

    std::size_t nulls = 0;
    if (cm.sem_type == SemType::Categorical) {
      std::map<std::string, std::size_t> freq;
      for (const auto* t : tables) {
        const auto& col = t->column(cm.name);
        for (std::size_t r = 0; r < col.size(); ++r) {
          if (col.is_null(r)) {
            ++nulls;
          } else {
            ++freq[col.text(r)];
          }
        }
      }
      std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
      std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
      if (ranked.size() > options.max_categories) {
        enc.pool_other = true;
        ranked.resize(options.max_categories);
      }
      for (auto& [label, count] : ranked) enc.categories.push_back(label);
    } else {
      double sum = 0.0;
      std::size_t k = 0;
      for (const auto* t : tables) {
        const auto& col = t->column(cm.name);
        for (std::size_t r = 0; r < col.size(); ++r) {
          if (col.is_null(r)) {
            ++nulls;
          } else {
            sum += col.number(r);
            ++k;
          }
        }
      }
      enc.mean = k > 0 ? sum / static_cast<double>(k) : 0.0;
      double ss = 0.0;
      for (const auto* t : tables) {
        const auto& col = t->column(cm.name);
        for (std::size_t r = 0; r < col.size(); ++r)
          if (!col.is_null(r)) ss += (col.number(r) - enc.mean) * (col.number(r) - enc.mean);
      }
      enc.sd = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1)) : 0.0;
      if (enc.sd < options.sd_floor) enc.sd = 0.0;
    }
    enc.missing_indicator = nulls > 0;
    pre.encodings_.push_back(std::move(enc));
  }
  return pre;
}

std::vector<std::string> Preprocessor::feature_names() const {
  std::vector<std::string> names;
  for (const auto& e : encodings_) {
    if (e.type == SemType::Categorical) {
      for (const auto& c : e.categories) names.push_back(e.column + "=" + c);
      if (e.pool_other) names.push_back(e.column + "=" + std::string(kOtherCategory));
    } else {
      names.push_back(e.column);
    }
    if (e.missing_indicator) names.push_back(e.column + "=" + std::string(kMissingCategory));
  }
  return names;
}

std::vector<std::string> Preprocessor::capped_columns() const {
  std::vector<std::string> out;
  for (const auto& e : encodings_)
    if (e.pool_other) out.push_back(e.column);
  return out;
}

FeatureMatrix Preprocessor::transform(const Table& table) const {
  FeatureMatrix X;
  X.names = feature_names();
  X.rows = table.row_count();
  X.values.assign(X.rows * X.names.size(), 0.0);
  for (const auto& e : encodings_) {
    std::size_t width = e.type == SemType::Categorical ? e.categories.size() + (e.pool_other ? 1 : 0) : 1;
    width += e.missing_indicator ? 1 : 0;
    for (std::size_t w = 0; w < width; ++w) X.provenance.push_back(e.provenance);
  }

  std::size_t offset = 0;
  for (const auto& e : encodings_) {
    if (!table.has_column(e.column))
      throw InvalidArgument("table '" + table.name() + "' lacks feature column '" + e.column + "'");
    const auto& col = table.column(e.column);
    if (col.type() != e.type)
      throw InvalidArgument("column '" + e.column + "' has a different sem_type than the fitted encoding");

    if (e.type == SemType::Categorical) {
      const std::size_t k = e.categories.size();
      for (std::size_t r = 0; r < X.rows; ++r) {
        if (col.is_null(r)) {
          if (e.missing_indicator) X.at(r, offset + k + (e.pool_other ? 1 : 0)) = 1.0;
          continue;
        }
        auto it = std::find(e.categories.begin(), e.categories.end(), col.text(r));
        if (it != e.categories.end()) {
          X.at(r, offset + static_cast<std::size_t>(it - e.categories.begin())) = 1.0;
        } else if (e.pool_other) {
          X.at(r, offset + k) = 1.0;
        }
        // Categories unseen at fit time and not pooled encode as all zeros.
      }
      offset += k + (e.pool_other ? 1 : 0);
    } else {
      const bool standardize = e.type != SemType::Boolean;
      const bool degenerate = e.sd == 0.0;
      for (std::size_t r = 0; r < X.rows; ++r) {
        double v = col.is_null(r) ? e.mean : col.number(r);
        if (standardize) v = degenerate ? 0.0 : (v - e.mean) / e.sd;
        X.at(r, offset) = v;
        if (e.missing_indicator && col.is_null(r)) X.at(r, offset + 1) = 1.0;
      }
      offset += 1;
    }
    if (e.missing_indicator) offset += 1;
  }
  return X;
}

LabeledData preprocess(const Table& real, const Table& syn, std::span<const Provenance> provenance,
                       const EncodingOptions& options) {
  if (real.row_count() == 0 || syn.row_count() == 0)
    throw InvalidArgument("preprocess needs rows on both sides (real " + std::to_string(real.row_count()) +
                          ", synthetic " + std::to_string(syn.row_count()) + ")");
  auto real_cols = feature_columns(real.meta());
  auto syn_cols = feature_columns(syn.meta());
  if (real_cols != syn_cols) throw InvalidArgument("real and synthetic tables have different column sets");
  for (const auto& c : real_cols)
    if (real.meta().find_column(c)->sem_type != syn.meta().find_column(c)->sem_type)
      throw InvalidArgument("column '" + c + "' has different sem_types in real and synthetic data");

  const Table* both[] = {&real, &syn};
  auto pre = Preprocessor::fit(both, provenance, options);
  LabeledData out;
  out.X = pre.transform(real).vstack(pre.transform(syn));
  out.y.assign(real.row_count(), 1.0);
  out.y.resize(real.row_count() + syn.row_count(), 0.0);
  out.capped_columns = pre.capped_columns();
  return out;
}

}  // namespace synthrel
