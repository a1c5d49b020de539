#pragma once

#include <cstdint>
#include <string>

#include "synthrel/relational.hpp"

namespace synthrel::fixtures {

struct Halves {
  Table first;
  Table second;
};

/// Random disjoint halves; the first gets the extra row when n is odd.
/// Rows keep their original relative order. Throws below 4 rows.
Halves split_half(const Table& table, std::uint64_t seed);

/// Every non-key column permuted independently; key columns stay in place.
Table shuffle_columns(const Table& table, std::uint64_t seed);

/// ceil(fraction * n) rows of `real_half` copied verbatim plus the remainder
/// drawn without replacement from `perfect_half` (with replacement if it runs
/// short), in shuffled order. n is the size of `real_half`.
Table copy_fraction(const Table& real_half, const Table& perfect_half, double fraction, std::uint64_t seed);

/// Baseline generator: each column resampled independently, child counts per
/// parent drawn from the empirical count distribution, fresh keys.
Database marginal_sampler(const Database& db, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Generated datasets

/// Table "data": id, a correlated numerical pair, a categorical and a boolean
/// column that depend on them, and a datetime column.
Table mixed_table(std::size_t rows, std::uint64_t seed);

/// Table "data" with numerical x1..x3 at the given pairwise correlation.
Table gaussian_table(std::size_t rows, double rho, std::uint64_t seed);

/// Table "data" with numerical x1..x3: with probability `diagonal` all three
/// equal one U(0,1) draw, otherwise three independent U(0,1) draws. Pairwise
/// correlation equals `diagonal`.
Table diagonal_mixture_table(std::size_t rows, double diagonal, std::uint64_t seed);

/// Two tables "parent" (id, x) and "child" (id, parent_id, v): x ~ N(0, 1),
/// one child when x < 0 and five otherwise, v = x + N(0, 0.5^2).
Database parent_child_database(std::size_t parents, std::uint64_t seed);

/// Child values permuted across all child rows. Per-table marginals and child
/// counts are untouched; the parent-child correlation is destroyed.
Database break_parent_child_link(const Database& db, std::uint64_t seed);

/// Two tables "store" (id, size, region, revenue) and "sale" (id, store_id,
/// amount, promo). revenue is the regression target and depends on size,
/// region and the store's sales.
Database store_sales_database(std::size_t stores, std::uint64_t seed);

}  // namespace synthrel::fixtures
