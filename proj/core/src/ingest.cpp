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

#include <maxent/ingest.hpp>

#include "json_codec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace maxent {

namespace detail {

ValueIndex resolve_value(const AttributeMeta& meta, const json& value) {
    if (value.is_string()) {
        const auto& s = value.get_ref<const std::string&>();
        if (auto idx = meta.index_of(s)) return *idx;
        if (meta.kind() == AttributeKind::numeric) return meta.bucketize(std::string_view(s)).index;
        if (auto overflow = meta.overflow_index()) return *overflow;
        throw DomainError("attribute '" + meta.name() + "': unknown label '" + s + "'");
    }
    if (value.is_number()) {
        // Labels that spell the number win over numeric bucketization.
        const std::string text = value.is_number_integer() ? std::to_string(value.get<long long>()) : value.dump();
        if (auto idx = meta.index_of(text)) return *idx;
        if (meta.kind() == AttributeKind::numeric) return meta.bucketize(value.get<double>()).index;
        throw DomainError("attribute '" + meta.name() + "': unknown label '" + text + "'");
    }
    throw DomainError("attribute '" + meta.name() + "': clause value must be a string or number");
}

json clause_to_json(const Schema& schema, AttrId attr, const Clause& clause) {
    const auto& meta = schema[attr];
    json j;
    j["attr"] = meta.name();
    switch (clause.kind()) {
        case Clause::Kind::any: j["op"] = "any"; break;
        case Clause::Kind::point:
            j["op"] = "eq";
            j["value"] = meta.label(clause.lo());
            break;
        case Clause::Kind::range:
            j["op"] = "range";
            j["value"] = json::array({meta.label(clause.lo()), meta.label(clause.hi())});
            break;
        case Clause::Kind::set: {
            j["op"] = "in";
            json values = json::array();
            for (auto v : clause.values()) values.push_back(meta.label(v));
            j["value"] = std::move(values);
            break;
        }
    }
    return j;
}

Clause clause_from_json(const Schema& schema, const json& j, AttrId& attr) {
    if (!j.is_object() || !j.contains("attr") || !j.contains("op"))
        throw ConfigError("clause must be an object with 'attr' and 'op'");
    attr = schema.index_of(j.at("attr").get<std::string>());
    const auto& meta = schema[attr];
    const auto op = j.at("op").get<std::string>();
    if (op == "any") return Clause::any();
    const json& value = j.contains("value") ? j.at("value") : j.at("values");
    if (op == "eq") return Clause::point(resolve_value(meta, value));
    if (op == "range") {
        if (!value.is_array() || value.size() != 2) throw ConfigError("range clause needs [lo, hi]");
        const auto lo = resolve_value(meta, value[0]);
        const auto hi = resolve_value(meta, value[1]);
        if (lo > hi) throw ConfigError("range clause on '" + meta.name() + "' is empty");
        return Clause::range(lo, hi);
    }
    if (op == "in") {
        if (!value.is_array() || value.empty()) throw ConfigError("'in' clause needs a nonempty value list");
        std::vector<ValueIndex> values;
        for (const auto& v : value) values.push_back(resolve_value(meta, v));
        auto c = Clause::set(std::move(values));
        return c.values().size() == 1 ? Clause::point(c.lo()) : c;
    }
    throw ConfigError("unknown clause op '" + op + "'");
}

json predicate_to_json(const Schema& schema, const Predicate& pred) {
    json out = json::array();
    for (auto a : pred.constrained()) out.push_back(clause_to_json(schema, a, pred.clause(a)));
    return out;
}

Predicate predicate_from_json(const Schema& schema, const json& clauses) {
    Predicate pred(schema.size());
    if (clauses.is_null()) return pred;
    if (!clauses.is_array()) throw ConfigError("'clauses' must be an array");
    std::vector<bool> seen(schema.size(), false);
    for (const auto& cj : clauses) {
        AttrId attr = 0;
        auto c = clause_from_json(schema, cj, attr);
        if (seen[attr]) throw ConfigError("attribute '" + schema[attr].name() + "' appears in several clauses");
        seen[attr] = true;
        pred.set(attr, std::move(c));
    }
    return pred;
}

json schema_config_to_json_value(const SchemaConfig& config) {
    json attrs = json::array();
    for (const auto& a : config.attributes) {
        json j;
        j["name"] = a.name;
        j["kind"] = a.kind == AttributeKind::numeric ? "numeric" : "categorical";
        if (a.min) j["min"] = *a.min;
        if (a.max) j["max"] = *a.max;
        if (a.kind == AttributeKind::numeric) j["buckets"] = a.buckets;
        if (a.domain) j["domain"] = *a.domain;
        if (a.overflow_label) j["overflow"] = *a.overflow_label;
        if (a.top_k) j["top_k"] = a.top_k;
        attrs.push_back(std::move(j));
    }
    return json{{"attributes", std::move(attrs)}};
}

SchemaConfig schema_config_from_json_value(const json& j) {
    SchemaConfig config;
    if (!j.is_object() || !j.contains("attributes") || !j.at("attributes").is_array())
        throw ConfigError("schema config must contain an 'attributes' array");
    for (const auto& aj : j.at("attributes")) {
        AttributeConfig a;
        a.name = aj.at("name").get<std::string>();
        const auto kind = aj.value("kind", std::string("categorical"));
        if (kind == "numeric")
            a.kind = AttributeKind::numeric;
        else if (kind == "categorical")
            a.kind = AttributeKind::categorical;
        else
            throw ConfigError("attribute '" + a.name + "': unknown kind '" + kind + "'");
        if (aj.contains("min")) a.min = aj.at("min").get<double>();
        if (aj.contains("max")) a.max = aj.at("max").get<double>();
        a.buckets = aj.value("buckets", 0U);
        if (aj.contains("domain")) a.domain = aj.at("domain").get<std::vector<std::string>>();
        if (aj.contains("overflow")) a.overflow_label = aj.at("overflow").get<std::string>();
        a.top_k = aj.value("top_k", 0U);
        if (a.kind == AttributeKind::numeric && a.buckets == 0)
            throw ConfigError("numeric attribute '" + a.name + "' needs a positive 'buckets'");
        config.attributes.push_back(std::move(a));
    }
    return config;
}

}  // namespace detail

SchemaConfig parse_schema_config(const std::string& json_text) {
    try {
        return detail::schema_config_from_json_value(detail::json::parse(json_text));
    } catch (const detail::json::exception& e) {
        throw ConfigError(std::string("schema config: ") + e.what());
    }
}

SchemaConfig load_schema_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_schema_config(buf.str());
}

std::string schema_config_to_json(const SchemaConfig& config) {
    return detail::schema_config_to_json_value(config).dump(2);
}

namespace {

bool needs_inference(const AttributeConfig& a) {
    if (a.kind == AttributeKind::numeric) return !a.min || !a.max;
    return !a.domain;
}

AttributeMeta make_meta(const AttributeConfig& a) {
    if (a.kind == AttributeKind::numeric) return AttributeMeta::numeric(a.name, *a.min, *a.max, a.buckets);
    return AttributeMeta::categorical(a.name, *a.domain, a.overflow_label);
}

}  // namespace

Schema resolve_schema(const SchemaConfig& config) {
    std::vector<AttributeMeta> attrs;
    for (const auto& a : config.attributes) {
        if (needs_inference(a)) throw ConfigError("attribute '" + a.name + "' needs data to infer its domain");
        attrs.push_back(make_meta(a));
    }
    return Schema(std::move(attrs));
}

SchemaConfig schema_to_config(const Schema& schema) {
    SchemaConfig config;
    for (const auto& meta : schema.attributes()) {
        AttributeConfig a;
        a.name = meta.name();
        a.kind = meta.kind();
        if (meta.kind() == AttributeKind::numeric) {
            a.min = meta.bucketizer().min;
            a.max = meta.bucketizer().max;
            a.buckets = meta.bucketizer().bucket_count;
        } else {
            a.domain = meta.labels();
            a.overflow_label = meta.bucketizer().overflow_label;
        }
        config.attributes.push_back(std::move(a));
    }
    return config;
}

namespace {

/// Splits one CSV record; handles quoted fields spanning commas and doubled quotes.
/// Multi-line quoted fields are joined by the caller.
bool split_record(const std::string& line, std::vector<std::string>& fields) {
    fields.clear();
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(std::move(cur));
    return !quoted;
}

bool read_record(std::istream& in, std::string& line, std::vector<std::string>& fields) {
    if (!std::getline(in, line)) return false;
    while (!split_record(line, fields)) {
        std::string more;
        if (!std::getline(in, more)) break;
        line += '\n';
        line += more;
    }
    return true;
}

std::optional<double> parse_number(std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || std::isnan(v)) return std::nullopt;
    return v;
}

}  // namespace

LoadResult read_csv(std::istream& in, const SchemaConfig& config) {
    std::string line;
    std::vector<std::string> fields;
    std::vector<std::size_t> column_of(config.attributes.size());

    if (!read_record(in, line, fields)) {
        // Empty file: nothing to infer from, so every attribute must be fully specified.
        return LoadResult{Dataset(resolve_schema(config)), {}};
    }
    for (std::size_t a = 0; a < config.attributes.size(); ++a) {
        auto it = std::find(fields.begin(), fields.end(), config.attributes[a].name);
        if (it == fields.end()) throw ConfigError("CSV header has no column '" + config.attributes[a].name + "'");
        column_of[a] = static_cast<std::size_t>(it - fields.begin());
    }

    IngestReport report;
    std::vector<std::vector<std::string>> raw;  // rows that have every needed cell
    while (read_record(in, line, fields)) {
        if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
        ++report.rows_read;
        std::vector<std::string> row;
        row.reserve(column_of.size());
        bool ok = true;
        for (auto col : column_of) {
            if (col >= fields.size() || fields[col].empty()) {
                ok = false;
                break;
            }
            row.push_back(fields[col]);
        }
        if (!ok) {
            ++report.dropped;
            continue;
        }
        raw.push_back(std::move(row));
    }

    // Resolve any attribute whose domain has to be inferred.
    std::vector<AttributeMeta> metas;
    for (std::size_t a = 0; a < config.attributes.size(); ++a) {
        AttributeConfig ac = config.attributes[a];
        if (ac.kind == AttributeKind::numeric && needs_inference(ac)) {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& r : raw)
                if (auto v = parse_number(r[a])) {
                    lo = std::min(lo, *v);
                    hi = std::max(hi, *v);
                }
            if (!ac.min) ac.min = std::isfinite(lo) ? lo : 0.0;
            if (!ac.max) ac.max = std::isfinite(hi) ? hi : 1.0;
            if (!(*ac.max > *ac.min)) ac.max = *ac.min + 1.0;
        } else if (ac.kind == AttributeKind::categorical && needs_inference(ac)) {
            std::map<std::string, std::size_t> freq;
            for (const auto& r : raw) ++freq[r[a]];
            std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(), freq.end());
            if (ac.top_k > 0 && entries.size() > ac.top_k) {
                std::stable_sort(entries.begin(), entries.end(),
                                 [](const auto& x, const auto& y) { return x.second > y.second; });
                entries.resize(ac.top_k);
                std::sort(entries.begin(), entries.end());
                if (!ac.overflow_label) ac.overflow_label = "Other";
            }
            std::vector<std::string> domain;
            for (auto& e : entries) domain.push_back(e.first);
            if (domain.empty() && !ac.overflow_label) ac.overflow_label = "Other";
            ac.domain = std::move(domain);
        }
        metas.push_back(make_meta(ac));
    }

    Dataset ds{Schema(std::move(metas))};
    const auto& schema = ds.schema();
    std::vector<ValueIndex> tuple(schema.size());
    for (const auto& r : raw) {
        bool ok = true;
        std::size_t clamped = 0;
        for (AttrId a = 0; a < schema.size() && ok; ++a) {
            try {
                const auto res = schema[a].bucketize(std::string_view(r[a]));
                tuple[a] = res.index;
                clamped += res.clamped ? 1 : 0;
            } catch (const DomainError&) {
                ok = false;
            }
        }
        if (!ok) {
            ++report.dropped;
            continue;
        }
        report.clamped += clamped;
        ds.append(tuple);
    }
    return LoadResult{std::move(ds), report};
}

LoadResult load_csv(const std::filesystem::path& path, const SchemaConfig& config) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open CSV file " + path.string());
    return read_csv(in, config);
}

StatisticSet compute_1d_statistics(const Dataset& ds) {
    const auto& schema = ds.schema();
    StatisticSet stats(schema);
    for (AttrId a = 0; a < schema.size(); ++a) {
        std::vector<double> counts(schema[a].size(), 0.0);
        for (auto v : ds.column(a)) counts[v] += 1.0;
        for (ValueIndex v = 0; v < counts.size(); ++v) stats.add_one_d(a, v, counts[v]);
    }
    return stats;
}

ContingencyMatrix::ContingencyMatrix(AttrId first, AttrId second, CountMatrix counts)
    : first_(first), second_(second), counts_(std::move(counts)) {
    row_perm_.resize(counts_.rows());
    col_perm_.resize(counts_.cols());
    for (std::size_t i = 0; i < row_perm_.size(); ++i) row_perm_[i] = i;
    for (std::size_t i = 0; i < col_perm_.size(); ++i) col_perm_[i] = i;
}

void ContingencyMatrix::set_permutations(std::vector<std::size_t> row_perm, std::vector<std::size_t> col_perm) {
    auto is_perm = [](std::vector<std::size_t> p, std::size_t n) {
        if (p.size() != n) return false;
        std::sort(p.begin(), p.end());
        for (std::size_t i = 0; i < n; ++i)
            if (p[i] != i) return false;
        return true;
    };
    if (!is_perm(row_perm, rows()) || !is_perm(col_perm, cols()))
        throw std::invalid_argument("ContingencyMatrix: permutation is not a bijection");
    row_perm_ = std::move(row_perm);
    col_perm_ = std::move(col_perm);
}

ContingencyMatrix contingency_matrix(const Dataset& ds, AttrId first, AttrId second) {
    if (first == second) throw std::invalid_argument("contingency_matrix needs two distinct attributes");
    const auto& schema = ds.schema();
    CountMatrix m(schema[first].size(), schema[second].size());
    auto c1 = ds.column(first);
    auto c2 = ds.column(second);
    for (std::size_t r = 0; r < ds.size(); ++r) m(c1[r], c2[r]) += 1.0;
    return ContingencyMatrix(first, second, std::move(m));
}

double chi_squared(const CountMatrix& m) {
    const double n = m.total();
    if (n <= 0.0) return 0.0;
    std::vector<double> rs(m.rows(), 0.0), cs(m.cols(), 0.0);
    for (std::size_t x = 0; x < m.rows(); ++x)
        for (std::size_t y = 0; y < m.cols(); ++y) {
            rs[x] += m(x, y);
            cs[y] += m(x, y);
        }
    double chi = 0.0;
    for (std::size_t x = 0; x < m.rows(); ++x)
        for (std::size_t y = 0; y < m.cols(); ++y) {
            const double e = rs[x] * cs[y] / n;
            if (e <= 0.0) continue;
            const double d = m(x, y) - e;
            chi += d * d / e;
        }
    return chi;
}

std::string statistics_dump_json(const StatisticSet& stats, const Schema& schema) {
    using detail::json;
    json list = json::array();
    for (const auto& s : stats.all()) {
        json j;
        j["id"] = s.id;
        j["kind"] = s.is_one_d() ? "1d" : "multi";
        json attrs = json::array();
        for (auto a : s.attributes) attrs.push_back(schema[a].name());
        j["attributes"] = std::move(attrs);
        j["clauses"] = detail::predicate_to_json(schema, s.predicate);
        j["target"] = s.target;
        list.push_back(std::move(j));
    }
    json groups = json::array();
    for (const auto& g : stats.groups()) {
        json attrs = json::array();
        for (auto a : g.attributes) attrs.push_back(schema[a].name());
        groups.push_back(json{{"attributes", attrs}, {"statistics", g.members}});
    }
    return json{{"statistics", std::move(list)}, {"groups", std::move(groups)}}.dump(2);
}

}  // namespace maxent
