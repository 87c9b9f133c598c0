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

#include <maxent/model.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace maxent {

namespace {

std::string format_edge(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

AttributeMeta AttributeMeta::numeric(std::string name, double min, double max, std::uint32_t bucket_count) {
    if (bucket_count == 0) throw ConfigError("attribute '" + name + "': bucket_count must be positive");
    if (!(max > min) && bucket_count > 1)
        throw ConfigError("attribute '" + name + "': numeric range must satisfy min < max");
    AttributeMeta meta;
    meta.name_ = std::move(name);
    meta.kind_ = AttributeKind::numeric;
    meta.spec_.min = min;
    meta.spec_.max = max;
    meta.spec_.bucket_count = bucket_count;
    const double width = (max - min) / bucket_count;
    meta.labels_.reserve(bucket_count);
    for (std::uint32_t b = 0; b < bucket_count; ++b) {
        const double lo = min + width * b;
        const double hi = b + 1 == bucket_count ? max : min + width * (b + 1);
        meta.labels_.push_back("[" + format_edge(lo) + "," + format_edge(hi) + (b + 1 == bucket_count ? "]" : ")"));
    }
    meta.index_labels();
    return meta;
}

AttributeMeta AttributeMeta::categorical(std::string name, std::vector<std::string> labels,
                                         std::optional<std::string> overflow_label) {
    AttributeMeta meta;
    meta.name_ = std::move(name);
    meta.kind_ = AttributeKind::categorical;
    meta.labels_ = std::move(labels);
    if (overflow_label && std::find(meta.labels_.begin(), meta.labels_.end(), *overflow_label) == meta.labels_.end())
        meta.labels_.push_back(*overflow_label);
    meta.spec_.overflow_label = std::move(overflow_label);
    if (meta.labels_.empty()) throw ConfigError("attribute '" + meta.name_ + "': empty domain");
    meta.index_labels();
    return meta;
}

void AttributeMeta::index_labels() {
    label_index_.clear();
    for (ValueIndex i = 0; i < labels_.size(); ++i) {
        if (!label_index_.emplace(labels_[i], i).second)
            throw ConfigError("attribute '" + name_ + "': duplicate domain label '" + labels_[i] + "'");
    }
}

std::optional<ValueIndex> AttributeMeta::index_of(std::string_view label) const {
    auto it = label_index_.find(std::string(label));
    if (it == label_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<ValueIndex> AttributeMeta::overflow_index() const {
    if (!spec_.overflow_label) return std::nullopt;
    return index_of(*spec_.overflow_label);
}

BucketResult AttributeMeta::bucketize(double raw) const {
    if (kind_ != AttributeKind::numeric) return bucketize(format_edge(raw));
    if (std::isnan(raw)) throw DomainError("attribute '" + name_ + "': NaN value");
    const auto count = spec_.bucket_count;
    if (raw < spec_.min) return {0, true};
    if (raw > spec_.max) return {count - 1, true};
    if (count == 1) return {0, false};
    const double pos = (raw - spec_.min) / (spec_.max - spec_.min) * count;
    auto idx = static_cast<std::int64_t>(std::floor(pos));
    idx = std::clamp<std::int64_t>(idx, 0, count - 1);
    return {static_cast<ValueIndex>(idx), false};
}

BucketResult AttributeMeta::bucketize(std::string_view raw) const {
    raw = trim(raw);
    if (kind_ == AttributeKind::numeric) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
        if (ec != std::errc{} || ptr != raw.data() + raw.size() || raw.empty())
            throw DomainError("attribute '" + name_ + "': not a number: '" + std::string(raw) + "'");
        return bucketize(v);
    }
    if (auto idx = index_of(raw)) return {*idx, false};
    if (auto overflow = overflow_index()) return {*overflow, false};
    throw DomainError("attribute '" + name_ + "': unknown label '" + std::string(raw) + "'");
}

Schema::Schema(std::vector<AttributeMeta> attributes) : attributes_(std::move(attributes)) {
    for (std::size_t i = 0; i < attributes_.size(); ++i)
        for (std::size_t j = i + 1; j < attributes_.size(); ++j)
            if (attributes_[i].name() == attributes_[j].name())
                throw ConfigError("duplicate attribute name '" + attributes_[i].name() + "'");
}

std::optional<AttrId> Schema::find(std::string_view name) const {
    for (AttrId i = 0; i < attributes_.size(); ++i)
        if (attributes_[i].name() == name) return i;
    return std::nullopt;
}

AttrId Schema::index_of(std::string_view name) const {
    if (auto i = find(name)) return *i;
    throw SchemaError("unknown attribute '" + std::string(name) + "'");
}

std::uint64_t Schema::tuple_space() const noexcept {
    std::uint64_t d = 1;
    for (const auto& a : attributes_) {
        if (a.size() != 0 && d > std::numeric_limits<std::uint64_t>::max() / a.size())
            return std::numeric_limits<std::uint64_t>::max();
        d *= a.size();
    }
    return d;
}

Clause Clause::point(ValueIndex v) {
    Clause c;
    c.kind_ = Kind::point;
    c.lo_ = c.hi_ = v;
    return c;
}

Clause Clause::range(ValueIndex lo, ValueIndex hi) {
    if (lo > hi) throw DomainError("range clause requires lo <= hi");
    if (lo == hi) return point(lo);
    Clause c;
    c.kind_ = Kind::range;
    c.lo_ = lo;
    c.hi_ = hi;
    return c;
}

Clause Clause::set(std::vector<ValueIndex> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.empty()) throw DomainError("index-set clause must not be empty");
    Clause c;
    c.kind_ = Kind::set;
    c.lo_ = values.front();
    c.hi_ = values.back();
    c.values_ = std::move(values);
    return c;
}

Clause Clause::from_values(const ValueSet& values) {
    auto members = values.members();
    if (members.empty()) throw DomainError("cannot build a clause from an empty value set");
    if (members.back() - members.front() + 1 == members.size()) return range(members.front(), members.back());
    return set(std::move(members));
}

bool Clause::accepts(ValueIndex v) const noexcept {
    switch (kind_) {
        case Kind::any: return true;
        case Kind::point: return v == lo_;
        case Kind::range: return v >= lo_ && v <= hi_;
        case Kind::set: return std::binary_search(values_.begin(), values_.end(), v);
    }
    return false;
}

ValueSet Clause::to_value_set(std::uint32_t domain_size) const {
    switch (kind_) {
        case Kind::any: return ValueSet(domain_size, true);
        case Kind::point:
        case Kind::range: return ValueSet::range(domain_size, lo_, hi_);
        case Kind::set: {
            ValueSet s(domain_size);
            for (auto v : values_)
                if (v < domain_size) s.insert(v);
            return s;
        }
    }
    return ValueSet(domain_size);
}

bool Clause::fits(std::uint32_t domain_size) const noexcept { return kind_ == Kind::any || hi_ < domain_size; }

bool clause_implies(const Clause& stat, const Clause& query, std::uint32_t domain_size) {
    if (query.is_any()) return true;
    switch (stat.kind()) {
        case Clause::Kind::point: return query.accepts(stat.lo());
        case Clause::Kind::range:
            if (query.kind() == Clause::Kind::range || query.kind() == Clause::Kind::point)
                return stat.lo() >= query.lo() && stat.hi() <= query.hi();
            break;
        default: break;
    }
    return stat.to_value_set(domain_size).subset_of(query.to_value_set(domain_size));
}

std::vector<AttrId> Predicate::constrained() const {
    std::vector<AttrId> out;
    for (AttrId i = 0; i < clauses_.size(); ++i)
        if (!clauses_[i].is_any()) out.push_back(i);
    return out;
}

bool Predicate::matches(std::span<const ValueIndex> tuple) const {
    for (std::size_t i = 0; i < clauses_.size(); ++i)
        if (!clauses_[i].accepts(tuple[i])) return false;
    return true;
}

bool predicate_matches(const Predicate& pred, std::span<const ValueIndex> tuple) { return pred.matches(tuple); }

StatisticSet::StatisticSet(const Schema& schema) : one_d_(schema.size()) {
    domain_sizes_.reserve(schema.size());
    for (AttrId i = 0; i < schema.size(); ++i) {
        domain_sizes_.push_back(schema[i].size());
        one_d_[i].assign(schema[i].size(), kNoStat);
    }
}

StatId StatisticSet::add_one_d(AttrId attr, ValueIndex value, double target) {
    if (attr >= one_d_.size() || value >= domain_sizes_[attr])
        throw DomainError("1D statistic outside the schema domain");
    Statistic s;
    s.id = static_cast<StatId>(stats_.size());
    s.predicate = Predicate(one_d_.size());
    s.predicate.set(attr, Clause::point(value));
    s.target = target;
    s.attributes = {attr};
    if (one_d_[attr][value] == kNoStat) one_d_[attr][value] = s.id;
    stats_.push_back(std::move(s));
    return stats_.back().id;
}

StatId StatisticSet::add_multi(Predicate predicate, double target) {
    if (predicate.arity() != one_d_.size()) throw DomainError("multi-dimensional statistic has wrong arity");
    auto attrs = predicate.constrained();
    if (attrs.size() < 2) throw DomainError("multi-dimensional statistic must constrain at least two attributes");
    for (auto a : attrs)
        if (!predicate.clause(a).fits(domain_sizes_[a])) throw DomainError("statistic clause outside the domain");
    Statistic s;
    s.id = static_cast<StatId>(stats_.size());
    s.predicate = std::move(predicate);
    s.target = target;
    s.attributes = attrs;
    auto it = std::find_if(groups_.begin(), groups_.end(), [&](const StatisticGroup& g) { return g.attributes == attrs; });
    if (it == groups_.end()) {
        groups_.push_back(StatisticGroup{attrs, {}});
        it = std::prev(groups_.end());
    }
    it->members.push_back(s.id);
    stats_.push_back(std::move(s));
    return stats_.back().id;
}

std::size_t StatisticSet::max_group_size() const noexcept {
    std::size_t m = 0;
    for (const auto& g : groups_) m = std::max(m, g.members.size());
    return m;
}

std::vector<double> StatisticSet::targets() const {
    std::vector<double> t;
    t.reserve(stats_.size());
    for (const auto& s : stats_) t.push_back(s.target);
    return t;
}

std::vector<StatId> StatisticSet::matching(std::span<const ValueIndex> tuple) const {
    std::vector<StatId> out;
    for (const auto& s : stats_)
        if (s.predicate.matches(tuple)) out.push_back(s.id);
    return out;
}

std::vector<StatId> StatisticSet::sweep_order() const {
    std::vector<StatId> order;
    order.reserve(stats_.size());
    for (const auto& column : one_d_)
        for (auto id : column)
            if (id != kNoStat) order.push_back(id);
    for (const auto& g : groups_) order.insert(order.end(), g.members.begin(), g.members.end());
    return order;
}

ValueSet StatisticSet::value_set(StatId id, AttrId attr) const {
    return stats_.at(id).predicate.clause(attr).to_value_set(domain_sizes_.at(attr));
}

std::vector<Violation> validate_statistic_set(const StatisticSet& stats, const Schema& schema, double n) {
    std::vector<Violation> out;
    auto report = [&](Violation::Kind k, std::string msg) { out.push_back(Violation{k, std::move(msg)}); };

    if (stats.arity() != schema.size()) {
        report(Violation::Kind::malformed, "statistic set arity does not match the schema");
        return out;
    }
    const double tol = 1e-9 * std::max(1.0, n);

    std::vector<std::vector<int>> seen(schema.size());
    for (AttrId i = 0; i < schema.size(); ++i) seen[i].assign(schema[i].size(), 0);

    for (const auto& s : stats.all()) {
        if (!(s.target >= -tol && s.target <= n + tol))
            report(Violation::Kind::target_out_of_range,
                   "statistic " + std::to_string(s.id) + " has target " + std::to_string(s.target) + " outside [0, n]");
        if (s.is_one_d()) {
            const auto a = s.attributes.front();
            const auto& c = s.predicate.clause(a);
            if (c.kind() != Clause::Kind::point) {
                report(Violation::Kind::malformed, "1D statistic " + std::to_string(s.id) + " is not a point clause");
                continue;
            }
            if (++seen[a][c.lo()] == 2)
                report(Violation::Kind::duplicate_one_d, "attribute '" + schema[a].name() + "' value '" +
                                                             schema[a].label(c.lo()) + "' has several 1D statistics");
        }
    }

    for (AttrId i = 0; i < schema.size(); ++i) {
        double total = 0.0;
        bool complete = true;
        for (ValueIndex v = 0; v < schema[i].size(); ++v) {
            if (seen[i][v] == 0) {
                complete = false;
                report(Violation::Kind::incomplete_one_d,
                       "attribute '" + schema[i].name() + "' value '" + schema[i].label(v) + "' has no 1D statistic");
            } else {
                total += stats[stats.one_d_stat(i, v)].target;
            }
        }
        if (complete && std::abs(total - n) > tol)
            report(Violation::Kind::marginal_mismatch, "attribute '" + schema[i].name() + "' 1D targets sum to " +
                                                           std::to_string(total) + ", expected " + std::to_string(n));
    }

    for (const auto& g : stats.groups()) {
        for (std::size_t x = 0; x < g.members.size(); ++x) {
            for (std::size_t y = x + 1; y < g.members.size(); ++y) {
                bool overlap = true;
                for (auto a : g.attributes) {
                    if (!stats.value_set(g.members[x], a).intersects(stats.value_set(g.members[y], a))) {
                        overlap = false;
                        break;
                    }
                }
                if (overlap)
                    report(Violation::Kind::overlapping_multi, "statistics " + std::to_string(g.members[x]) + " and " +
                                                                   std::to_string(g.members[y]) + " overlap");
            }
        }
    }
    return out;
}

Dataset::Dataset(Schema schema) : schema_(std::move(schema)), columns_(schema_.size()) {}

void Dataset::append(std::span<const ValueIndex> row) {
    if (row.size() != columns_.size()) throw DomainError("row arity does not match the schema");
    for (AttrId i = 0; i < row.size(); ++i)
        if (row[i] >= schema_[i].size())
            throw DomainError("value index out of range for attribute '" + schema_[i].name() + "'");
    for (AttrId i = 0; i < row.size(); ++i) columns_[i].push_back(row[i]);
    ++rows_;
}

bool Dataset::remove_one(std::span<const ValueIndex> row) {
    if (row.size() != columns_.size()) return false;
    for (std::size_t r = rows_; r-- > 0;) {
        bool same = true;
        for (AttrId i = 0; i < row.size() && same; ++i) same = columns_[i][r] == row[i];
        if (!same) continue;
        for (auto& col : columns_) {
            col[r] = col.back();
            col.pop_back();
        }
        --rows_;
        return true;
    }
    return false;
}

std::vector<ValueIndex> Dataset::row(std::size_t r) const {
    std::vector<ValueIndex> out(columns_.size());
    for (AttrId i = 0; i < columns_.size(); ++i) out[i] = columns_[i][r];
    return out;
}

}  // namespace maxent
