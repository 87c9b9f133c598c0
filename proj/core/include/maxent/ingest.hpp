/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <maxent/matrix.hpp>
#include <maxent/model.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace maxent {

/// One attribute of the schema config file. Missing numeric bounds and missing
/// categorical domains are inferred from the data at load time.
struct AttributeConfig {
    std::string name;
    AttributeKind kind = AttributeKind::categorical;
    std::optional<double> min;
    std::optional<double> max;
    std::uint32_t buckets = 0;
    std::optional<std::vector<std::string>> domain;
    std::optional<std::string> overflow_label;
    std::uint32_t top_k = 0;
};

struct SchemaConfig {
    std::vector<AttributeConfig> attributes;
};

SchemaConfig parse_schema_config(const std::string& json_text);
SchemaConfig load_schema_config(const std::filesystem::path& path);
std::string schema_config_to_json(const SchemaConfig& config);

/// Schema for a config that needs no inference; throws ConfigError otherwise.
Schema resolve_schema(const SchemaConfig& config);
/// Config that reproduces `schema` exactly (explicit bounds and domains).
SchemaConfig schema_to_config(const Schema& schema);

struct IngestReport {
    std::size_t rows_read = 0;
    std::size_t dropped = 0;
    std::size_t clamped = 0;
};

struct LoadResult {
    Dataset dataset;
    IngestReport report;
};

/// Comma-separated, header row first, RFC-4180 quoting. Rows with missing or
/// unparseable cells are dropped and counted.
LoadResult load_csv(const std::filesystem::path& path, const SchemaConfig& config);
LoadResult read_csv(std::istream& in, const SchemaConfig& config);

/// One point statistic per (attribute, value) with its exact count.
StatisticSet compute_1d_statistics(const Dataset& ds);

/// Pairwise value-frequency matrix with a row and a column permutation.
class ContingencyMatrix {
public:
    ContingencyMatrix(AttrId first, AttrId second, CountMatrix counts);

    AttrId first() const noexcept { return first_; }
    AttrId second() const noexcept { return second_; }
    std::size_t rows() const noexcept { return counts_.rows(); }
    std::size_t cols() const noexcept { return counts_.cols(); }

    /// Count at permuted position (x, y).
    double operator()(std::size_t x, std::size_t y) const { return counts_(row_perm_[x], col_perm_[y]); }
    double total() const noexcept { return counts_.total(); }

    /// Counts indexed by original value indices.
    const CountMatrix& original() const noexcept { return counts_; }
    /// Counts in the current permuted order.
    CountMatrix view() const { return counts_.permuted(row_perm_, col_perm_); }

    /// permutation[position] = original value index.
    const std::vector<std::size_t>& row_permutation() const noexcept { return row_perm_; }
    const std::vector<std::size_t>& col_permutation() const noexcept { return col_perm_; }
    void set_permutations(std::vector<std::size_t> row_perm, std::vector<std::size_t> col_perm);

private:
    AttrId first_;
    AttrId second_;
    CountMatrix counts_;
    std::vector<std::size_t> row_perm_;
    std::vector<std::size_t> col_perm_;
};

ContingencyMatrix contingency_matrix(const Dataset& ds, AttrId first, AttrId second);

/// Pearson chi-squared statistic; cells with zero expectation contribute 0, n = 0 gives 0.
double chi_squared(const CountMatrix& m);
inline double chi_squared(const ContingencyMatrix& m) { return chi_squared(m.original()); }

/// Audit dump of every statistic (attributes, clause labels, target) as JSON text.
std::string statistics_dump_json(const StatisticSet& stats, const Schema& schema);

}  // namespace maxent
