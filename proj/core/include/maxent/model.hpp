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

#include <maxent/value_set.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace maxent {

using AttrId = std::uint32_t;
using ValueIndex = std::uint32_t;
using StatId = std::uint32_t;

inline constexpr StatId kNoStat = std::numeric_limits<StatId>::max();

/// Raw value cannot be mapped into an attribute's domain.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed schema, selection or solver configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reference to an unknown attribute, or two schemas that do not line up.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The model cannot be evaluated or fitted (P = 0, or a statistic no tuple can carry).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AttributeKind { categorical, numeric };

/// How raw values are mapped onto bucket indices.
///
/// Numeric attributes use `bucket_count` equi-width buckets over [min, max]; values outside
/// are clamped into the edge buckets. Categorical attributes map labels through the domain
/// list, optionally sending unknown labels to `overflow_label`. `top_k` (categorical only)
/// is honoured at ingestion time when the domain is inferred from data.
struct BucketizerSpec {
    double min = 0.0;
    double max = 0.0;
    std::uint32_t bucket_count = 0;
    std::optional<std::string> overflow_label;
    std::uint32_t top_k = 0;
};

struct BucketResult {
    ValueIndex index = 0;
    bool clamped = false;
};

class AttributeMeta {
public:
    static AttributeMeta numeric(std::string name, double min, double max, std::uint32_t bucket_count);
    /// `overflow_label`, when given, is appended to `labels` if not already present.
    static AttributeMeta categorical(std::string name, std::vector<std::string> labels,
                                     std::optional<std::string> overflow_label = std::nullopt);

    const std::string& name() const noexcept { return name_; }
    AttributeKind kind() const noexcept { return kind_; }
    const BucketizerSpec& bucketizer() const noexcept { return spec_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(ValueIndex v) const { return labels_.at(v); }
    std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(labels_.size()); }

    std::optional<ValueIndex> index_of(std::string_view label) const;
    std::optional<ValueIndex> overflow_index() const;

    BucketResult bucketize(double raw) const;
    /// Numeric kinds parse `raw` as a number; categorical kinds look the label up.
    BucketResult bucketize(std::string_view raw) const;

private:
    AttributeMeta() = default;
    void index_labels();

    std::string name_;
    AttributeKind kind_ = AttributeKind::categorical;
    BucketizerSpec spec_;
    std::vector<std::string> labels_;
    std::unordered_map<std::string, ValueIndex> label_index_;
};

class Schema {
public:
    Schema() = default;
    explicit Schema(std::vector<AttributeMeta> attributes);

    std::size_t size() const noexcept { return attributes_.size(); }
    const AttributeMeta& operator[](AttrId i) const { return attributes_.at(i); }
    const std::vector<AttributeMeta>& attributes() const noexcept { return attributes_; }

    std::optional<AttrId> find(std::string_view name) const;
    AttrId index_of(std::string_view name) const;

    /// Number of possible tuples, saturating at the max of uint64.
    std::uint64_t tuple_space() const noexcept;

private:
    std::vector<AttributeMeta> attributes_;
};

/// Single-attribute condition. Ranges are inclusive on both ends.
class Clause {
public:
    enum class Kind { any, point, range, set };

    static Clause any() { return Clause{}; }
    static Clause point(ValueIndex v);
    static Clause range(ValueIndex lo, ValueIndex hi);
    static Clause set(std::vector<ValueIndex> values);
    /// Canonical clause for a value set: point, range when contiguous, set otherwise.
    static Clause from_values(const ValueSet& values);

    Kind kind() const noexcept { return kind_; }
    bool is_any() const noexcept { return kind_ == Kind::any; }
    ValueIndex lo() const noexcept { return lo_; }
    ValueIndex hi() const noexcept { return hi_; }
    const std::vector<ValueIndex>& values() const noexcept { return values_; }

    bool accepts(ValueIndex v) const noexcept;
    ValueSet to_value_set(std::uint32_t domain_size) const;
    /// Indices must be inside [0, domain_size).
    bool fits(std::uint32_t domain_size) const noexcept;

    friend bool operator==(const Clause&, const Clause&) = default;

private:
    Kind kind_ = Kind::any;
    ValueIndex lo_ = 0;
    ValueIndex hi_ = 0;
    std::vector<ValueIndex> values_;
};

/// True iff every index accepted by `stat` over [0, domain_size) is accepted by `query`.
bool clause_implies(const Clause& stat, const Clause& query, std::uint32_t domain_size);

/// Conjunction of one clause per attribute.
class Predicate {
public:
    Predicate() = default;
    explicit Predicate(std::size_t arity) : clauses_(arity) {}

    static Predicate all(std::size_t arity) { return Predicate(arity); }

    std::size_t arity() const noexcept { return clauses_.size(); }
    const Clause& clause(AttrId i) const { return clauses_.at(i); }
    const std::vector<Clause>& clauses() const noexcept { return clauses_; }
    Predicate& set(AttrId i, Clause c) {
        clauses_.at(i) = std::move(c);
        return *this;
    }

    /// Attributes with a non-`any` clause, ascending.
    std::vector<AttrId> constrained() const;

    bool matches(std::span<const ValueIndex> tuple) const;

    friend bool operator==(const Predicate&, const Predicate&) = default;

private:
    std::vector<Clause> clauses_;
};

bool predicate_matches(const Predicate& pred, std::span<const ValueIndex> tuple);

struct Statistic {
    StatId id = 0;
    Predicate predicate;
    double target = 0.0;
    /// Constrained attributes, ascending. One entry for 1D statistics.
    std::vector<AttrId> attributes;

    bool is_one_d() const noexcept { return attributes.size() == 1; }
};

/// Multi-dimensional statistics sharing one attribute set. Members are pairwise disjoint.
struct StatisticGroup {
    std::vector<AttrId> attributes;
    std::vector<StatId> members;
};

/// The statistic set: one 1D statistic per (attribute, value) plus grouped multi-D rectangles.
class StatisticSet {
public:
    StatisticSet() = default;
    explicit StatisticSet(const Schema& schema);

    /// Registers A_attr = value with target s. Replaces nothing; duplicates are a validation error.
    StatId add_one_d(AttrId attr, ValueIndex value, double target);
    /// Registers a multi-dimensional statistic; its group is keyed by the constrained attributes.
    StatId add_multi(Predicate predicate, double target);

    std::size_t size() const noexcept { return stats_.size(); }
    std::size_t arity() const noexcept { return one_d_.size(); }
    const Statistic& operator[](StatId id) const { return stats_.at(id); }
    const std::vector<Statistic>& all() const noexcept { return stats_; }

    /// 1D statistic id per value of `attr`; kNoStat where missing.
    const std::vector<StatId>& one_d(AttrId attr) const { return one_d_.at(attr); }
    StatId one_d_stat(AttrId attr, ValueIndex v) const { return one_d_.at(attr).at(v); }
    const std::vector<StatisticGroup>& groups() const noexcept { return groups_; }
    const std::vector<std::uint32_t>& domain_sizes() const noexcept { return domain_sizes_; }

    /// B_a and (max) B_s.
    std::size_t pair_count() const noexcept { return groups_.size(); }
    std::size_t max_group_size() const noexcept;

    void set_target(StatId id, double s) { stats_.at(id).target = s; }
    std::vector<double> targets() const;

    /// Ids of every statistic whose predicate the tuple satisfies.
    std::vector<StatId> matching(std::span<const ValueIndex> tuple) const;

    /// 1D statistics attribute-major, then multi-D statistics in group order.
    std::vector<StatId> sweep_order() const;

    /// Per-attribute value set of a statistic's clause (full set for unconstrained attributes).
    ValueSet value_set(StatId id, AttrId attr) const;

private:
    std::vector<std::uint32_t> domain_sizes_;
    std::vector<Statistic> stats_;
    std::vector<std::vector<StatId>> one_d_;
    std::vector<StatisticGroup> groups_;
};

struct Violation {
    enum class Kind {
        incomplete_one_d,
        duplicate_one_d,
        target_out_of_range,
        marginal_mismatch,
        overlapping_multi,
        malformed,
    };
    Kind kind;
    std::string message;
};

/// Reports structural and target problems; never throws for a bad set.
std::vector<Violation> validate_statistic_set(const StatisticSet& stats, const Schema& schema, double n);

/// Tuples stored column-wise as bucket indices.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(Schema schema);

    const Schema& schema() const noexcept { return schema_; }
    std::size_t size() const noexcept { return rows_; }
    std::size_t arity() const noexcept { return columns_.size(); }

    void append(std::span<const ValueIndex> row);
    /// Removes one occurrence of `row`; false if absent.
    bool remove_one(std::span<const ValueIndex> row);

    ValueIndex at(std::size_t row, AttrId attr) const { return columns_[attr][row]; }
    std::span<const ValueIndex> column(AttrId attr) const { return columns_.at(attr); }
    std::vector<ValueIndex> row(std::size_t r) const;

private:
    Schema schema_;
    std::vector<std::vector<ValueIndex>> columns_;
    std::size_t rows_ = 0;
};

}  // namespace maxent
