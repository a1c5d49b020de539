#pragma once

#include <string_view>
#include <vector>

#include "synthrel/relational.hpp"

namespace synthrel {

/// Whether a feature column comes from the table itself or from child tables.
enum class Provenance { Original, Aggregate };

std::string_view to_string(Provenance p) noexcept;

/// Aggregates appended per child relationship. All of them keep one output
/// row per target row.
struct AggregationSpec {
  bool counts = true;                  // "<child>__count"
  bool numeric_means = true;           // "<child>__<col>__mean" (numerical, datetime)
  bool categorical_nunique = true;     // "<child>__<col>__nunique" (categorical, boolean)
  bool grandchild_count_means = true;  // "<child>__<grandchild>__count_mean"
};

struct AggregatedTable {
  Table table;
  std::vector<Provenance> provenance;  // aligned with table columns
};

/// Number of child rows per parent row (0 for childless parents).
std::vector<double> child_row_counts(const Database& db, const Relationship& relationship);

/// Column-name prefix for a relationship: the child name, or "<child>[<fk>]"
/// when the child has more than one foreign key to the same parent.
std::string relationship_prefix(const Schema& schema, const Relationship& relationship);

/// Target table with count, mean, distinct-count and grandchild count-mean
/// aggregates of every child appended in schema declaration order.
///
/// Empty groups give count 0, mean null and nunique 0. Null child values are
/// skipped by means and distinct counts.
AggregatedTable relational_aggregation(const Database& db, std::string_view target,
                                       const AggregationSpec& spec = {});

}  // namespace synthrel
