#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "synthrel/aggregation.hpp"
#include "synthrel/relational.hpp"

namespace synthrel {

/// Dense row-major design matrix with named, provenance-tagged features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::vector<std::string> names;
  std::vector<Provenance> provenance;
  std::vector<double> values;

  std::size_t cols() const noexcept { return names.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols(), cols()}; }
  std::optional<std::size_t> feature_index(std::string_view name) const;

  FeatureMatrix take_rows(std::span<const std::size_t> rows) const;
  /// Rows of `other` appended below; feature names must match.
  FeatureMatrix vstack(const FeatureMatrix& other) const;

  /// Convenience for tests and small fixtures; all provenance Original.
  static FeatureMatrix from_rows(std::vector<std::string> names, const std::vector<std::vector<double>>& rows);
};

struct EncodingOptions {
  std::size_t max_categories = 20;  // most frequent kept, rest pooled into "⟂other"
  double sd_floor = 1e-12;          // below this a column standardizes to zero
};

/// Label-blind feature encoder. Encodings are learned from the union of the
/// tables passed to fit() and can then be applied to any table with the same
/// non-key columns.
///
///  - categorical: one indicator per kept category, plus "⟂other" when pooled
///  - boolean: 0/1
///  - numerical, datetime: standardized with the pooled mean and sd
///  - any column with nulls in the fitted data: mean-imputed plus a
///    "<col>=⟂missing" indicator
class Preprocessor {
 public:
  static Preprocessor fit(std::span<const Table* const> tables, std::span<const Provenance> provenance = {},
                          const EncodingOptions& options = {});
  static Preprocessor fit(const Table& table, std::span<const Provenance> provenance = {},
                          const EncodingOptions& options = {});

  FeatureMatrix transform(const Table& table) const;

  std::vector<std::string> feature_names() const;
  /// Source columns whose category count exceeded the cap.
  std::vector<std::string> capped_columns() const;

 private:
  struct Encoding {
    std::string column;
    SemType type = SemType::Numerical;
    Provenance provenance = Provenance::Original;
    double mean = 0.0;
    double sd = 1.0;
    std::vector<std::string> categories;
    bool pool_other = false;
    bool missing_indicator = false;
  };
  std::vector<Encoding> encodings_;
};

/// Non-key columns of a table, in order. These are the columns fed to learners.
std::vector<std::string> feature_columns(const TableMeta& meta);

struct LabeledData {
  FeatureMatrix X;
  std::vector<double> y;
  std::vector<std::string> capped_columns;
};

/// Stacks real rows above synthetic rows with labels 1 (real) and 0 (synthetic),
/// encoding both with one Preprocessor fitted on their union.
/// Throws InvalidArgument on column mismatch or an empty side.
LabeledData preprocess(const Table& real, const Table& syn, std::span<const Provenance> provenance = {},
                       const EncodingOptions& options = {});

}  // namespace synthrel
